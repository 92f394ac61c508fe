#include <doctest.h>

#include <cmath>
#include <vector>

#include "kto/error.hpp"
#include "kto/signals.hpp"

using namespace kto;
using signals::Signal;

namespace {

std::vector<Signal> family() {
    return {
        Signal::sinusoid(1.0, 0.1),
        Signal::sinusoid(0.7, 2.3, 0.4),
        Signal::polynomial({1.0, -2.0, 0.5, 0.25}),
        Signal::sum({Signal::sinusoid(1.0, 0.3), Signal::polynomial({0.5, 0.1})}),
        Signal::shifted(Signal::sinusoid(1.0, 0.5), 1.25),
        Signal::zero(),
    };
}

}  // namespace

TEST_CASE("sinusoid evaluation") {
    const auto y = Signal::sinusoid(1.0, 0.1);
    CHECK(y.eval(0.0, 1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(y.eval(0.0) == 0.0);
    const auto shifted = Signal::shifted(y, 10.0 - 0.5 * 3);
    CHECK(shifted.eval(0.0) == doctest::Approx(std::sin(0.85)).epsilon(1e-15));

    const auto z = Signal::sinusoid(2.0, 3.0, 0.5);
    for (double t : {-1.0, 0.0, 0.3, 7.0}) {
        CHECK(z.eval(t, 0) == doctest::Approx(2.0 * std::sin(3.0 * t + 0.5)).epsilon(1e-14));
        CHECK(z.eval(t, 1) == doctest::Approx(6.0 * std::cos(3.0 * t + 0.5)).epsilon(1e-14));
        CHECK(z.eval(t, 2) == doctest::Approx(-18.0 * std::sin(3.0 * t + 0.5)).epsilon(1e-14));
    }
}

TEST_CASE("polynomial derivatives") {
    const auto p = Signal::polynomial({1.0, 2.0, 3.0});  // 1 + 2t + 3t²
    CHECK(p.eval(2.0) == doctest::Approx(17.0));
    CHECK(p.eval(2.0, 1) == doctest::Approx(14.0));
    CHECK(p.eval(2.0, 2) == doctest::Approx(6.0));
    CHECK(p.eval(2.0, 3) == 0.0);
    CHECK(Signal::zero().eval(5.0, 4) == 0.0);
}

TEST_CASE("derivative order outside the supported range") {
    const auto y = Signal::sinusoid(1.0, 0.1);
    try {
        (void)y.eval(0.0, signals::kMaxDerivativeOrder + 1);
        FAIL("expected a capability error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Capability);
    }
    CHECK_THROWS_AS((void)y.eval(0.0, -1), Error);
    CHECK_NOTHROW((void)y.eval(0.0, signals::kMaxDerivativeOrder));
}

TEST_CASE("shift consistency") {
    for (const auto& s : family()) {
        for (double delta : {-3.5, 0.0, 0.5, 9.5}) {
            const auto shifted = Signal::shifted(s, delta);
            for (double t : {-2.0, 0.0, 1.7, 50.5}) {
                for (int k = 0; k <= 2; ++k) CHECK(shifted.eval(t, k) == s.eval(t + delta, k));
            }
        }
    }
}

TEST_CASE("derivative consistency by central differences") {
    const double step = 1e-4;
    for (double omega : {0.1, 0.5, 1.0, 2.0}) {
        const auto s = Signal::sinusoid(1.3, omega, 0.2);
        for (double t : {0.0, 1.0, 13.7, 60.0}) {
            for (int k = 0; k <= 3; ++k) {
                const double fd = (s.eval(t + step, k) - s.eval(t - step, k)) / (2 * step);
                CHECK(std::abs(fd - s.eval(t, k + 1)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("signal bounds") {
    CHECK(Signal::sinusoid(2.0, 1.0).bound().value() == doctest::Approx(2.0));
    CHECK(Signal::sum({Signal::sinusoid(1.0, 1.0), Signal::sinusoid(0.5, 2.0)}).bound().value() ==
          doctest::Approx(1.5));
    CHECK(Signal::polynomial({3.0}).bound().value() == doctest::Approx(3.0));
    CHECK_FALSE(Signal::polynomial({0.0, 1.0}).bound().has_value());
}

TEST_CASE("disturbance sampling bounds") {
    auto rng = signals::make_rng(1);
    CHECK(signals::sample_disturbance(signals::DisturbanceSpec::none(), rng, 5.0) == 0.0);

    const auto mult = signals::DisturbanceSpec::multiplicative(0.05, signals::DisturbanceTarget::Input);
    const auto absolute = signals::DisturbanceSpec::absolute(0.3, signals::DisturbanceTarget::Output);
    for (int i = 0; i < 100000; ++i) {
        const double env = (i % 7) - 3.0;
        const double a = signals::sample_disturbance(mult, rng, env);
        CHECK_LE(std::abs(a), 0.05 * std::abs(env));
        CHECK_LE(std::abs(signals::sample_disturbance(absolute, rng, env)), 0.3);
    }
    CHECK(std::abs(signals::sample_disturbance(mult, rng, 2.0)) <= 0.1);
    CHECK(signals::sample_disturbance(mult, rng, 0.0) == 0.0);
}

TEST_CASE("uniform draws lie in [-1, 1)") {
    auto rng = signals::make_rng(42, 3);
    double lo = 1.0, hi = -1.0;
    for (int i = 0; i < 200000; ++i) {
        const double u = signals::uniform_symmetric(rng);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        REQUIRE(u >= -1.0);
        REQUIRE(u < 1.0);
    }
    CHECK(lo < -0.999);
    CHECK(hi > 0.999);
}

TEST_CASE("empirical mean within the CLT band") {
    auto rng = signals::make_rng(2024);
    const auto spec = signals::DisturbanceSpec::multiplicative(0.2, signals::DisturbanceTarget::Input);
    const int draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = signals::sample_disturbance(spec, rng, 1.0);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / draws;
    const double sigma = 0.2 / std::sqrt(3.0);
    CHECK(std::abs(mean) <= 3.0 * sigma / std::sqrt(static_cast<double>(draws)));
    CHECK(sum_sq / draws == doctest::Approx(sigma * sigma).epsilon(0.02));
}

TEST_CASE("reproducible and independent streams") {
    auto a = signals::make_rng(9, 4);
    auto b = signals::make_rng(9, 4);
    auto c = signals::make_rng(9, 5);
    auto d = signals::make_rng(10, 4);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        CHECK(x == b());
        same_c += x == c();
        same_d += x == d();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
}

TEST_CASE("disturbance spec validation") {
    CHECK_THROWS_AS(signals::DisturbanceSpec::multiplicative(-0.1, signals::DisturbanceTarget::Input).validate(),
                    Error);
    CHECK_THROWS_AS(signals::DisturbanceSpec::absolute(std::nan(""), signals::DisturbanceTarget::Output).validate(),
                    Error);
    CHECK_FALSE(signals::DisturbanceSpec::multiplicative(0.0, signals::DisturbanceTarget::Input).active());
    CHECK(signals::DisturbancePair::multiplicative(0.05).active());
    CHECK_FALSE(signals::DisturbancePair::none().active());
}
