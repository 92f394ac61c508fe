#include <doctest.h>

#include <cmath>

#include "kto/error.hpp"
#include "kto/sim.hpp"
#include "test_support.hpp"

using namespace kto;
using lti::Matrix;
using lti::Vector;

namespace {

const sim::InputFn kOne = [](double) { return 1.0; };
const sim::InputFn kZero = [](double) { return 0.0; };

}  // namespace

TEST_CASE("first-order step response matches 1 - 1/e") {
    const auto traj = sim::simulate(test::first_order(), kOne, signals::DisturbancePair::none(), {0.01, 1.0},
                                    Vector::Zero(1));
    CHECK(traj.size() == 101);
    CHECK(traj.times.back() == doctest::Approx(1.0));
    CHECK(std::abs(traj.y.back() - (1.0 - std::exp(-1.0))) <= 1e-4);
    // exact discretization: a constant input is reproduced to rounding
    CHECK(std::abs(traj.y.back() - (1.0 - std::exp(-1.0))) <= 1e-12);
}

TEST_CASE("zero input, zero state stays at zero") {
    const auto traj = sim::simulate(test::paper_plant(), kZero, signals::DisturbancePair::multiplicative(0.2),
                                    {0.01, 5.0}, Vector::Zero(4), 3);
    for (double y : traj.y) CHECK(y == 0.0);
}

TEST_CASE("superposition") {
    const auto plant = test::paper_plant();
    const sim::InputFn u1 = [](double t) { return std::sin(0.3 * t); };
    const sim::InputFn u2 = [](double t) { return 0.5 * t - std::cos(2.0 * t); };
    const sim::InputFn u12 = [&](double t) { return u1(t) + u2(t); };
    const sim::SimGrid grid{0.01, 20.0};
    const auto none = signals::DisturbancePair::none();
    const auto y1 = sim::simulate(plant, u1, none, grid, Vector::Zero(4)).y;
    const auto y2 = sim::simulate(plant, u2, none, grid, Vector::Zero(4)).y;
    const auto y12 = sim::simulate(plant, u12, none, grid, Vector::Zero(4)).y;
    double worst = 0.0;
    for (std::size_t k = 0; k < y12.size(); ++k) worst = std::max(worst, std::abs(y12[k] - y1[k] - y2[k]));
    CHECK(worst <= 1e-9);
}

TEST_CASE("initial-state response matches the matrix exponential") {
    const auto plant = test::paper_plant();
    Vector x0(4);
    x0 << 1, -1, 0.5, 2;
    const auto traj = sim::simulate(plant, kZero, signals::DisturbancePair::none(), {0.01, 3.0}, x0);
    const Vector expected = numkit::mat_exp(plant.A, 3.0) * x0;
    CHECK((traj.states.col(static_cast<Eigen::Index>(traj.size() - 1)) - expected).norm() < 1e-10);
}

TEST_CASE("step-size convergence is first order") {
    const auto plant = test::first_order();
    const sim::InputFn u = [](double t) { return std::sin(3.0 * t) + t; };
    const auto none = signals::DisturbancePair::none();
    const double reference = sim::simulate(plant, u, none, {1e-4, 2.0}, Vector::Zero(1)).y.back();
    std::vector<double> errors;
    for (double h : {0.04, 0.02, 0.01}) {
        errors.push_back(std::abs(sim::simulate(plant, u, none, {h, 2.0}, Vector::Zero(1)).y.back() - reference));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double ratio = errors[i] / errors[i + 1];
        CHECK(ratio >= 1.5);
        CHECK(ratio <= 3.0);
    }
}

TEST_CASE("undisturbed runs do not depend on the seed") {
    const sim::InputFn u = [](double t) { return std::sin(t); };
    const auto a = sim::simulate(test::paper_plant(), u, signals::DisturbancePair::none(), {0.01, 10.0},
                                 Vector::Zero(4), 1);
    const auto b = sim::simulate(test::paper_plant(), u, signals::DisturbancePair::none(), {0.01, 10.0},
                                 Vector::Zero(4), 999);
    CHECK(a.y == b.y);
}

TEST_CASE("disturbed runs are reproducible per seed and bounded") {
    const sim::InputFn u = [](double t) { return std::sin(t); };
    const auto dist = signals::DisturbancePair::multiplicative(0.05);
    const auto a = sim::simulate(test::paper_plant(), u, dist, {0.01, 10.0}, Vector::Zero(4), 5);
    const auto b = sim::simulate(test::paper_plant(), u, dist, {0.01, 10.0}, Vector::Zero(4), 5);
    const auto c = sim::simulate(test::paper_plant(), u, dist, {0.01, 10.0}, Vector::Zero(4), 6);
    CHECK(a.y == b.y);
    CHECK(a.y != c.y);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a.y[k] - a.y_e[k]) <= 0.05 * std::abs(a.y_e[k]));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(sim::SimGrid({0.0, 1.0}).validate(), Error);
    CHECK_THROWS_AS(sim::SimGrid({0.01, -1.0}).validate(), Error);
    CHECK_THROWS_AS(sim::SimGrid({0.3, 1.0}).validate(), Error);
    CHECK(sim::SimGrid({0.01, 150.0}).steps() == 15000);
}

TEST_CASE("divergence is reported with the time it happened") {
    const auto blowup = lti::StateSpace::make(Matrix::Constant(1, 1, 800.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    try {
        (void)sim::simulate(blowup, kOne, signals::DisturbancePair::none(), {0.01, 5.0}, Vector::Zero(1));
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Divergence);
        CHECK(std::string(e.what()).find("t =") != std::string::npos);
    }
}

TEST_CASE("sampling outputs") {
    const sim::InputFn u = [](double t) { return std::cos(t); };
    const auto traj = sim::simulate(test::paper_plant(), u, signals::DisturbancePair::none(), {0.01, 100.0},
                                    Vector::Zero(4));
    std::vector<double> aligned;
    for (int j = 1; j <= 100; ++j) aligned.push_back(50.0 + 0.5 * j);
    const auto row = sim::sample_outputs(traj, aligned);
    REQUIRE(row.size() == 100);
    for (int j = 1; j <= 100; ++j) {
        const auto k = static_cast<std::size_t>(5000 + 50 * j);
        CHECK(row[static_cast<std::size_t>(j - 1)] == traj.y[k]);
    }

    const std::vector<double> mid{10.005};
    const auto m = sim::sample_outputs(traj, mid);
    CHECK(m[0] == doctest::Approx(0.5 * (traj.y[1000] + traj.y[1001])).epsilon(1e-14));

    const std::vector<double> outside{100.5};
    CHECK_THROWS_AS(sim::sample_outputs(traj, outside), Error);
    const std::vector<double> unordered{2.0, 1.0};
    CHECK_THROWS_AS(sim::sample_outputs(traj, unordered), Error);
}
