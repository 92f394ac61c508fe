#include <doctest.h>

#include <algorithm>

#include <cmath>
#include <random>

#include "kto/lti.hpp"
#include "test_support.hpp"

using namespace kto;
using lti::Complex;
using lti::Matrix;
using lti::Vector;
using test::multiset_distance;

namespace {

// Ascending real coefficients of Π(s − root); roots must be closed under conjugation.
std::vector<double> poly_from_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> c{1.0};
    for (const auto& z : roots) {
        std::vector<Complex> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= z * c[i];
        }
        c = next;
    }
    std::vector<double> out;
    for (const auto& v : c) out.push_back(v.real());
    return out;  // ascending, monic last
}

// Random conjugate-closed root set of size `count`, real parts at least `gap` from the axis
// and roots at least 0.2 apart (clustered roots are ill-conditioned for any polynomial solver).
std::vector<Complex> random_roots(std::mt19937_64& rng, int count, double gap, bool stable_only) {
    std::uniform_real_distribution<double> mag(gap, 2.5);
    std::uniform_real_distribution<double> imag(0.2, 2.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<Complex> roots;
    auto clear = [&](Complex z) {
        return std::all_of(roots.begin(), roots.end(), [&](Complex w) { return std::abs(z - w) >= 0.2; });
    };
    while (static_cast<int>(roots.size()) < count) {
        const double re = (stable_only || coin(rng)) ? -mag(rng) : mag(rng);
        if (count - static_cast<int>(roots.size()) >= 2 && coin(rng)) {
            const double im = imag(rng);
            if (!clear({re, im})) continue;
            roots.emplace_back(re, im);
            roots.emplace_back(re, -im);
        } else {
            if (!clear({re, 0.0})) continue;
            roots.emplace_back(re, 0.0);
        }
    }
    return roots;
}

struct Canonical {
    lti::StateSpace ss;
    std::vector<Complex> zeros;
    std::vector<Complex> poles;
    double k;
};

// Controllable canonical realisation k·num(s)/den(s), then a random similarity.
Canonical random_system(std::mt19937_64& rng, int n, int r, bool transform) {
    Canonical out;
    out.zeros = random_roots(rng, n - r, 0.3, false);
    out.poles = random_roots(rng, n, 0.3, true);
    std::uniform_real_distribution<double> gain(0.5, 2.0);
    out.k = gain(rng) * (std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0);
    const auto num = poly_from_roots(out.zeros);
    const auto den = poly_from_roots(out.poles);

    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) A(n - 1, j) = -den[static_cast<std::size_t>(j)];
    Matrix B = Matrix::Zero(n, 1);
    B(n - 1, 0) = 1.0;
    Matrix C = Matrix::Zero(1, n);
    for (std::size_t j = 0; j < num.size(); ++j) C(0, static_cast<Eigen::Index>(j)) = out.k * num[j];
    Matrix G = test::random_matrix(rng, n, 1);

    if (transform) {
        // orthogonal times a mild diagonal: cond(S) ≤ 4, so the trace recursion
        // behind the poles is not fed an artificially ill-scaled matrix
        const Eigen::HouseholderQR<Matrix> qr(test::random_matrix(rng, n, n));
        const Matrix Q = qr.householderQ();
        std::uniform_real_distribution<double> stretch(0.5, 2.0);
        Vector d(n);
        for (int i = 0; i < n; ++i) d(i) = stretch(rng);
        const Matrix S = Q * d.asDiagonal();
        const Matrix Si = S.inverse();
        A = S * A * Si;
        B = S * B;
        C = C * Si;
        G = S * G;
    }
    out.ss = lti::StateSpace::make(A, B, C, G);
    return out;
}

}  // namespace

TEST_CASE("relative degree examples") {
    CHECK(lti::relative_degree(test::paper_plant()) == 2);
    CHECK(lti::relative_degree(test::first_order()) == 1);

    Matrix A = Matrix::Zero(4, 4);
    for (int i = 0; i < 3; ++i) A(i, i + 1) = 1.0;
    Matrix B = Matrix::Zero(4, 1);
    B(3, 0) = 1.0;
    Matrix C = Matrix::Zero(1, 4);
    C(0, 0) = 1.0;
    CHECK(lti::relative_degree(lti::StateSpace::make(A, B, C)) == 4);

    // C ⟂ every A^i B: no finite relative degree
    const auto degenerate = lti::StateSpace::make(A, B, Matrix::Zero(1, 4));
    CHECK_THROWS_AS(lti::relative_degree(degenerate), Error);
}

TEST_CASE("state space validation") {
    CHECK_THROWS_AS(lti::StateSpace::make(Matrix::Zero(2, 3), Matrix::Zero(2, 1), Matrix::Zero(1, 2)), Error);
    CHECK_THROWS_AS(lti::StateSpace::make(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2)), Error);
    Matrix bad = Matrix::Zero(1, 1);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(lti::StateSpace::make(bad, Matrix::Ones(1, 1), Matrix::Ones(1, 1)), Error);
}

TEST_CASE("transfer function of the four-state plant") {
    const auto tf = lti::to_transfer(test::paper_plant());
    CHECK(tf.k == doctest::Approx(1.0).epsilon(1e-12));
    const auto num = tf.numerator_descending();
    REQUIRE(num.size() == 3);
    CHECK(num[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(num[2] == doctest::Approx(-2.0).epsilon(1e-12));
    const auto den = tf.denominator_descending();
    const std::vector<double> expected{1, 3.5, 5.5, 4, 1};
    REQUIRE(den.size() == expected.size());
    for (std::size_t i = 0; i < den.size(); ++i) CHECK(den[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("transfer function small cases") {
    const auto tf = lti::to_transfer(test::first_order());
    CHECK(tf.k == doctest::Approx(1.0));
    CHECK(tf.b.empty());
    REQUIRE(tf.a.size() == 1);
    CHECK(tf.a[0] == doctest::Approx(1.0));

    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    Matrix B(2, 1);
    B << 0, 1;
    Matrix C(1, 2);
    C << 1, 0;
    const auto dbl = lti::to_transfer(lti::StateSpace::make(A, B, C));
    CHECK(dbl.k == doctest::Approx(1.0));
    CHECK(dbl.b.empty());
    CHECK(std::abs(dbl.a[0]) < 1e-15);
    CHECK(std::abs(dbl.a[1]) < 1e-15);
}

TEST_CASE("canonical form numerator equals C") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 5;
        const int r = 1 + trial % (n - 1);
        const auto sys = random_system(rng, n, r, false);
        const auto tf = lti::to_transfer(sys.ss);
        CHECK(tf.k == doctest::Approx(sys.k).epsilon(1e-10));
        for (int j = 0; j < n - r; ++j) {
            CHECK(std::abs(tf.k * tf.b[static_cast<std::size_t>(j)] - sys.ss.C(0, j)) <= 1e-10);
        }
    }
}

TEST_CASE("zeros and poles of the four-state plant") {
    const auto plant = test::paper_plant();
    CHECK(multiset_distance(lti::zeros(plant), {1.0, -2.0}) < 1e-6);
    CHECK(multiset_distance(lti::poles(plant), {-1.0, -0.5, Complex(-1, 1), Complex(-1, -1)}) < 1e-6);
    CHECK(lti::classify_phase(plant) == lti::Phase::NonMinimumPhase);

    CHECK(lti::zeros(test::first_order()).empty());
    CHECK(multiset_distance(lti::poles(test::first_order()), {-1.0}) < 1e-14);
    CHECK(lti::classify_phase(test::first_order()) == lti::Phase::MinimumPhase);
}

TEST_CASE("classify_phase assumption violations") {
    // (s)/(s+1)(s+2): zero at the origin
    Matrix A(2, 2);
    A << 0, 1, -2, -3;
    Matrix B(2, 1);
    B << 0, 1;
    Matrix C(1, 2);
    C << 0, 1;
    try {
        lti::classify_phase(lti::StateSpace::make(A, B, C));
        FAIL("expected a boundary-zero error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BoundaryZero);
        CHECK(e.is_assumption_violation());
    }

    Matrix U = Matrix::Constant(1, 1, 0.5);
    try {
        lti::classify_phase(lti::StateSpace::make(U, Matrix::Ones(1, 1), Matrix::Ones(1, 1)));
        FAIL("expected an unstable-plant error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnstablePlant);
    }
}

TEST_CASE("normal form of the four-state plant") {
    const auto plant = test::paper_plant();
    const auto nf = lti::normal_form(plant);
    CHECK(nf.r == 2);
    CHECK(nf.eta_dim() == 2);
    CHECK(nf.k == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(multiset_distance(numkit::eigenvalues(nf.A4), {1.0, -2.0}) < 1e-8);
    CHECK((nf.T * nf.T_inv - Matrix::Identity(4, 4)).norm() < 1e-10);
    CHECK((nf.T * plant.A * nf.T_inv - nf.assembled_A()).norm() < 1e-9);
    CHECK((nf.T * plant.B - nf.assembled_B()).norm() < 1e-10);
    CHECK((nf.T * plant.G - nf.assembled_G()).norm() < 1e-10);
    // ξ₁ is the output
    CHECK((nf.T.row(0) - plant.C).norm() < 1e-12);
}

TEST_CASE("normal form of systems without internal dynamics") {
    const auto nf1 = lti::normal_form(test::first_order());
    CHECK(nf1.r == 1);
    CHECK(nf1.eta_dim() == 0);
    CHECK(nf1.k == doctest::Approx(1.0));

    Matrix A = Matrix::Zero(3, 3);
    A << 0, 1, 0, 0, 0, 1, -1, -3, -3;
    Matrix B = Matrix::Zero(3, 1);
    B(2, 0) = 1.0;
    Matrix C = Matrix::Zero(1, 3);
    C(0, 0) = 1.0;
    const auto nf3 = lti::normal_form(lti::StateSpace::make(A, B, C));
    CHECK(nf3.r == 3);
    CHECK(nf3.eta_dim() == 0);
    CHECK(nf3.A4.size() == 0);
    CHECK(lti::hyperbolic_split(nf3.A4).dim() == 0);
}

TEST_CASE("normal form invariants on random systems") {
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 5;          // 2..6
        const int r = 1 + (trial / 5) % (n - 1);  // 1..n−1
        const auto sys = random_system(rng, n, r, true);
        const auto nf = lti::normal_form(sys.ss);
        const int m = n - r;
        REQUIRE(nf.r == r);
        REQUIRE(nf.eta_dim() == m);

        // zeros = internal-dynamics eigenvalues = the constructed numerator roots
        CHECK(multiset_distance(lti::zeros(sys.ss), sys.zeros) < 1e-6);
        CHECK(multiset_distance(numkit::eigenvalues(nf.A4), sys.zeros) < 1e-6);
        CHECK(multiset_distance(lti::poles(sys.ss), sys.poles) < 1e-6);

        const double scale = std::max(1.0, sys.ss.A.norm());
        CHECK((nf.T * sys.ss.A * nf.T_inv - nf.assembled_A()).norm() <= 1e-8 * scale * nf.T.norm() * nf.T_inv.norm());
        CHECK((nf.T * sys.ss.B - nf.assembled_B()).norm() <= 1e-9 * nf.T.norm());

        // ξ chain: shift rows, rᵀ/sᵀ in the last row, input enters only the last row with gain k
        for (int i = 0; i + 1 < r; ++i) {
            for (int j = 0; j < r; ++j) CHECK(std::abs(nf.A1(i, j) - (j == i + 1 ? 1.0 : 0.0)) < 1e-8);
            if (m > 0) CHECK(nf.A2.row(i).norm() < 1e-8);
        }
        CHECK((nf.A1.row(r - 1).transpose() - nf.r_vec).norm() < 1e-12);
        CHECK(nf.k == doctest::Approx(sys.k).epsilon(1e-8));
        // η driven by y alone through A3 = e_m
        if (m > 0) {
            lti::Vector em = lti::Vector::Zero(m);
            em(m - 1) = 1.0;
            CHECK((nf.A3.col(0) - em).norm() < 1e-8);
        }

        const auto split = lti::hyperbolic_split(nf.A4);
        Matrix block = Matrix::Zero(m, m);
        block.topLeftCorner(split.stable_dim, split.stable_dim) = split.A4_minus;
        block.bottomRightCorner(split.unstable_dim, split.unstable_dim) = split.A4_plus;
        CHECK((split.basis_inv * nf.A4 * split.basis - block).norm() <= 1e-8 * std::max(1.0, nf.A4.norm()));
        int stable = 0;
        for (const auto& z : sys.zeros) stable += z.real() < 0.0;
        CHECK(split.stable_dim == stable);
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("classify_phase is invariant under similarity") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 5;
        const int r = 1 + trial % (n - 1);
        auto sys = random_system(rng, n, r, false);
        const auto before = lti::classify_phase(sys.ss);
        // orthogonal times a mild diagonal: cond(S) ≤ 4, so the trace recursion
        // behind the poles is not fed an artificially ill-scaled matrix
        const Eigen::HouseholderQR<Matrix> qr(test::random_matrix(rng, n, n));
        const Matrix Q = qr.householderQ();
        std::uniform_real_distribution<double> stretch(0.5, 2.0);
        Vector d(n);
        for (int i = 0; i < n; ++i) d(i) = stretch(rng);
        const Matrix S = Q * d.asDiagonal();
        const Matrix Si = S.inverse();
        const auto moved = lti::StateSpace::make(S * sys.ss.A * Si, S * sys.ss.B, sys.ss.C * Si, S * sys.ss.G);
        CHECK(lti::classify_phase(moved) == before);
        bool any_unstable = false;
        for (const auto& z : sys.zeros) any_unstable = any_unstable || z.real() > 0.0;
        CHECK((before == lti::Phase::NonMinimumPhase) == any_unstable);
    }
}

TEST_CASE("hyperbolic split examples") {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = -2;
    D(1, 1) = 1;
    const auto split = lti::hyperbolic_split(D);
    CHECK(split.stable_dim == 1);
    CHECK(split.unstable_dim == 1);
    CHECK(split.A4_minus(0, 0) == doctest::Approx(-2.0));
    CHECK(split.A4_plus(0, 0) == doctest::Approx(1.0));
    CHECK((split.basis.cwiseAbs() - Matrix::Identity(2, 2)).norm() < 1e-12);

    const auto nf = lti::normal_form(test::paper_plant());
    const auto ps = lti::hyperbolic_split(nf.A4);
    CHECK(ps.stable_dim == 1);
    CHECK(ps.unstable_dim == 1);
    CHECK(ps.A4_minus(0, 0) == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(ps.A4_plus(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

    Matrix S(2, 2);
    S << -1, 3, 0, -2;
    const auto all_stable = lti::hyperbolic_split(S);
    CHECK(all_stable.unstable_dim == 0);
    CHECK(all_stable.A4_plus.size() == 0);

    Matrix axis(2, 2);
    axis << 0, 1, -1, 0;
    try {
        lti::hyperbolic_split(axis);
        FAIL("expected a hyperbolicity violation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::HyperbolicityViolation);
    }
}

TEST_CASE("hyperbolic split of a defective block") {
    Matrix J(3, 3);
    J << -1, 5, 0, 0, -1, 0, 0, 0, 2;
    const auto split = lti::hyperbolic_split(J);
    CHECK(split.stable_dim == 2);
    CHECK(split.unstable_dim == 1);
    Matrix block = Matrix::Zero(3, 3);
    block.topLeftCorner(2, 2) = split.A4_minus;
    block(2, 2) = split.A4_plus(0, 0);
    CHECK((split.basis_inv * J * split.basis - block).norm() <= 1e-8 * J.norm());
}
