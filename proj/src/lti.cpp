#include "kto/lti.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kto::lti {

namespace {

double vec_norm(const Matrix& M) { return M.norm(); }

// Smallest/largest singular value ratio; 0 for singular input.
double inverse_condition(const Matrix& M) {
    if (M.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    return s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
}

// Column j of the result spans the same line as column j of U, flipped so that
// its largest-magnitude entry is positive.
void canonical_signs(Matrix& U) {
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
        Eigen::Index idx = 0;
        U.col(j).cwiseAbs().maxCoeff(&idx);
        if (U(idx, j) < 0.0) U.col(j) *= -1.0;
    }
}

Matrix matrix_sign(const Matrix& A) {
    const auto m = A.rows();
    Matrix S = A;
    const Matrix I = Matrix::Identity(m, m);
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::PartialPivLU<Matrix> lu(S);
        const double det = std::abs(lu.determinant());
        // determinant scaling accelerates the early Newton steps
        double mu = 1.0;
        if (iter < 10 && det > 0.0 && std::isfinite(det)) mu = std::pow(det, -1.0 / static_cast<double>(m));
        const Matrix next = 0.5 * (mu * S + lu.inverse() / mu);
        const double change = (next - S).norm();
        S = next;
        if (!S.allFinite()) break;
        if (change <= 1e-14 * S.norm()) return S;
    }
    if (!S.allFinite() || ((S * S) - I).norm() > 1e-8 * static_cast<double>(m)) {
        throw Error(ErrorKind::NumericalFailure, "hyperbolic_split: matrix sign iteration did not converge");
    }
    return S;
}

// First `rank` left singular vectors of P.
Matrix range_basis(const Matrix& P, Eigen::Index rank) {
    Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeFullU);
    Matrix U = svd.matrixU().leftCols(rank);
    canonical_signs(U);
    return U;
}

}  // namespace

const char* to_string(Phase phase) {
    return phase == Phase::MinimumPhase ? "minimum-phase" : "non-minimum-phase";
}

void StateSpace::validate() const {
    const auto n = A.rows();
    if (n == 0) throw Error(ErrorKind::Dimension, "state space: empty A");
    if (A.cols() != n) throw Error(ErrorKind::Dimension, "state space: A must be square");
    if (B.rows() != n || B.cols() != 1) throw Error(ErrorKind::Dimension, "state space: B must be n×1");
    if (C.rows() != 1 || C.cols() != n) throw Error(ErrorKind::Dimension, "state space: C must be 1×n");
    if (G.rows() != n || G.cols() != 1) throw Error(ErrorKind::Dimension, "state space: G must be n×1");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !G.allFinite()) {
        throw Error(ErrorKind::Validation, "state space: non-finite entries");
    }
}

StateSpace StateSpace::make(Matrix A, Matrix B, Matrix C, Matrix G) {
    StateSpace ss{std::move(A), std::move(B), std::move(C), std::move(G)};
    ss.validate();
    return ss;
}

StateSpace StateSpace::make(Matrix A, Matrix B, Matrix C) {
    const auto n = A.rows();
    return make(std::move(A), std::move(B), std::move(C), Matrix::Zero(n, 1));
}

std::vector<double> TransferFunction::numerator_descending() const {
    std::vector<double> out{1.0};
    out.insert(out.end(), b.rbegin(), b.rend());
    return out;
}

std::vector<double> TransferFunction::denominator_descending() const {
    std::vector<double> out{1.0};
    out.insert(out.end(), a.rbegin(), a.rend());
    return out;
}

int relative_degree(const StateSpace& ss, double tol) {
    ss.validate();
    const auto n = ss.order();
    // each Markov parameter is judged against the size of its own factors
    const double b_norm = vec_norm(ss.B);
    Matrix CA = ss.C;
    for (int r = 1; r <= n; ++r) {
        const double markov = (CA * ss.B)(0, 0);
        if (std::abs(markov) > tol * vec_norm(CA) * b_norm) return r;
        CA = CA * ss.A;
    }
    throw Error(ErrorKind::DegenerateSystem, "relative degree: C A^{i} B vanishes for every i < n");
}

TransferFunction to_transfer(const StateSpace& ss, double tol) {
    const int r = relative_degree(ss, tol);
    const auto n = ss.order();

    // Leverrier–Faddeev: (sI − A)^{-1} = Σ_k s^{n−1−k} N_k / det(sI − A)
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> markov(static_cast<std::size_t>(n), 0.0);  // C N_k B
    c[0] = 1.0;
    Matrix N = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        markov[static_cast<std::size_t>(k)] = (ss.C * N * ss.B)(0, 0);
        const Matrix AN = ss.A * N;
        const double ck = -AN.trace() / static_cast<double>(k + 1);
        c[static_cast<std::size_t>(k) + 1] = ck;
        N = AN + ck * Matrix::Identity(n, n);
    }

    TransferFunction tf;
    tf.k = markov[static_cast<std::size_t>(r - 1)];
    tf.b.resize(static_cast<std::size_t>(n - r));
    for (Eigen::Index j = 0; j < n - r; ++j) {
        tf.b[static_cast<std::size_t>(j)] = markov[static_cast<std::size_t>(n - 1 - j)] / tf.k;
    }
    tf.a.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) tf.a[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(n - j)];
    return tf;
}

std::vector<Complex> zeros(const StateSpace& ss) {
    const auto num = to_transfer(ss).numerator_descending();
    return numkit::poly_roots(num);
}

std::vector<Complex> poles(const StateSpace& ss) {
    ss.validate();
    const auto den = numkit::characteristic_polynomial(ss.A);
    return numkit::poly_roots(den);
}

Phase classify_phase(const StateSpace& ss, double margin) {
    bool unstable_zero = false;
    for (const auto& z : zeros(ss)) {
        if (std::abs(z.real()) <= margin) {
            throw Error(ErrorKind::BoundaryZero, "zero at " + std::to_string(z.real()) + "+" +
                                                     std::to_string(z.imag()) + "i lies on the imaginary axis");
        }
        unstable_zero = unstable_zero || z.real() > margin;
    }
    for (const auto& p : poles(ss)) {
        if (p.real() >= -margin) {
            throw Error(ErrorKind::UnstablePlant, "pole at " + std::to_string(p.real()) + "+" +
                                                      std::to_string(p.imag()) + "i is not strictly stable");
        }
    }
    return unstable_zero ? Phase::NonMinimumPhase : Phase::MinimumPhase;
}

Matrix NormalForm::assembled_A() const {
    const int m = eta_dim();
    const int n = r + m;
    Matrix Abar = Matrix::Zero(n, n);
    Abar.topLeftCorner(r, r) = A1;
    Abar.topRightCorner(r, m) = A2;
    if (m > 0) {
        Abar.block(r, 0, m, 1) = A3;
        Abar.bottomRightCorner(m, m) = A4;
    }
    return Abar;
}

Matrix NormalForm::assembled_B() const {
    Matrix Bbar = Matrix::Zero(r + eta_dim(), 1);
    Bbar(r - 1, 0) = k;
    return Bbar;
}

Matrix NormalForm::assembled_G() const {
    Matrix Gbar = Matrix::Zero(r + eta_dim(), 1);
    Gbar.topRows(r) = G1;
    if (eta_dim() > 0) Gbar.bottomRows(eta_dim()) = G2;
    return Gbar;
}

NormalForm normal_form(const StateSpace& ss, double tol) {
    const int r = relative_degree(ss, tol);
    const auto n = static_cast<int>(ss.order());
    const int m = n - r;

    // output chain rows C A^i
    Matrix R(r, n);
    Matrix CA = ss.C;
    for (int i = 0; i < r; ++i) {
        R.row(i) = CA;
        CA = CA * ss.A;
    }

    Matrix T(n, n);
    T.topRows(r) = R;
    if (m > 0) {
        // W: orthonormal rows with W·B = 0 and W ⟂ {C A^i, i < r−1}
        const Matrix null_bt = numkit::null_space(ss.B.transpose());  // n×(n−1)
        Matrix W;
        if (r > 1) {
            const Matrix proj = R.topRows(r - 1) * null_bt;
            Eigen::JacobiSVD<Matrix> svd(proj, Eigen::ComputeFullV);
            W = (null_bt * svd.matrixV().rightCols(m)).transpose();
        } else {
            W = null_bt.leftCols(m).transpose();
        }
        if (inverse_condition((Matrix(n, n) << R, W).finished()) < 1e-12) {
            throw Error(ErrorKind::TransformationFailure, "normal form: output chain rows and complement are dependent");
        }
        Matrix T0(n, n);
        T0 << R, W;
        const Matrix A0 = T0 * ss.A * T0.inverse();
        const Matrix P = A0.block(r, 0, m, r);
        const Matrix A4_0 = A0.bottomRightCorner(m, m);

        // η' = η − L ξ removes the dependence of η̇ on ξ_2 … ξ_r
        Matrix L = Matrix::Zero(m, r);
        for (int j = r - 1; j >= 1; --j) L.col(j - 1) = P.col(j) + A4_0 * L.col(j);
        const Matrix A3_0 = P.col(0) + A4_0 * L.col(0);
        const Matrix W1 = W - L * R;

        // controllable-canonical coordinates of (A4, A3): A4 companion, A3 = e_m
        Matrix ctrb(m, m);
        Matrix v = A3_0;
        for (int i = 0; i < m; ++i) {
            ctrb.col(i) = v;
            v = A4_0 * v;
        }
        if (inverse_condition(ctrb) < 1e-13) {
            throw Error(ErrorKind::TransformationFailure,
                        "normal form: internal dynamics are not excited by the output (pole-zero cancellation)");
        }
        const Matrix q = ctrb.inverse().bottomRows(1);
        Matrix Tc(m, m);
        Matrix qa = q;
        for (int i = 0; i < m; ++i) {
            Tc.row(i) = qa;
            qa = qa * A4_0;
        }
        T.bottomRows(m) = Tc * W1;
    }

    if (inverse_condition(T) < 1e-13) {
        throw Error(ErrorKind::TransformationFailure, "normal form: change of basis is singular");
    }

    NormalForm nf;
    nf.r = r;
    nf.T = T;
    nf.T_inv = T.inverse();
    const Matrix Abar = T * ss.A * nf.T_inv;
    const Matrix Bbar = T * ss.B;
    const Matrix Gbar = T * ss.G;

    nf.A1 = Matrix::Zero(r, r);
    for (int i = 0; i + 1 < r; ++i) nf.A1(i, i + 1) = 1.0;
    nf.A1.row(r - 1) = Abar.block(r - 1, 0, 1, r);
    nf.A2 = Matrix::Zero(r, m);
    if (m > 0) nf.A2.row(r - 1) = Abar.block(r - 1, r, 1, m);
    nf.r_vec = nf.A1.row(r - 1).transpose();
    nf.s_vec = m > 0 ? Vector(nf.A2.row(r - 1).transpose()) : Vector(0);
    nf.k = Bbar(r - 1, 0);
    nf.G1 = Gbar.topRows(r);
    nf.g = nf.G1(r - 1);
    nf.G2 = Gbar.bottomRows(m);

    nf.A3 = Matrix::Zero(m, 1);
    nf.A4 = Matrix::Zero(m, m);
    if (m > 0) {
        nf.A3(m - 1, 0) = 1.0;
        for (int i = 0; i + 1 < m; ++i) nf.A4(i, i + 1) = 1.0;
        nf.A4.row(m - 1) = Abar.block(n - 1, r, 1, m);
    }

    // the snapped structure must agree with the computed transform
    const double scale = std::max(1.0, Abar.norm());
    if ((nf.assembled_A() - Abar).norm() > 1e-6 * scale ||
        (nf.assembled_B() - Bbar).norm() > 1e-6 * std::max(1.0, Bbar.norm())) {
        throw Error(ErrorKind::TransformationFailure, "normal form: transformed dynamics lost the chain structure");
    }
    return nf;
}

HyperbolicSplit hyperbolic_split(const Matrix& A4, double margin) {
    if (A4.rows() != A4.cols()) throw Error(ErrorKind::Dimension, "hyperbolic_split: A4 must be square");
    HyperbolicSplit split;
    const auto m = A4.rows();
    if (m == 0) {
        split.basis = split.basis_inv = split.A4_minus = split.A4_plus = Matrix(0, 0);
        return split;
    }

    int stable = 0;
    for (const auto& lambda : numkit::eigenvalues(A4)) {
        if (std::abs(lambda.real()) <= margin) {
            throw Error(ErrorKind::HyperbolicityViolation,
                        "eigenvalue " + std::to_string(lambda.real()) + "+" + std::to_string(lambda.imag()) +
                            "i lies within the margin of the imaginary axis");
        }
        if (lambda.real() < 0.0) ++stable;
    }
    const int unstable = static_cast<int>(m) - stable;

    const Matrix S = matrix_sign(A4);
    const Matrix I = Matrix::Identity(m, m);
    Matrix basis(m, m);
    if (stable > 0) basis.leftCols(stable) = range_basis(0.5 * (I - S), stable);
    if (unstable > 0) basis.rightCols(unstable) = range_basis(0.5 * (I + S), unstable);

    split.basis = basis;
    split.basis_inv = basis.inverse();
    const Matrix D = split.basis_inv * A4 * basis;
    split.A4_minus = D.topLeftCorner(stable, stable);
    split.A4_plus = D.bottomRightCorner(unstable, unstable);
    split.stable_dim = stable;
    split.unstable_dim = unstable;
    return split;
}

}  // namespace kto::lti
