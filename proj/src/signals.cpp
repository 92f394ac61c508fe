#include "kto/signals.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kto/error.hpp"

namespace kto::signals {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double eval_node(const Signal::Node& node, double t, int k) {
    return std::visit(
        overloaded{
            [&](const Sinusoid& s) {
                // d^k sin(ωt + φ) = ω^k sin(ωt + φ + kπ/2)
                const double shift = static_cast<double>(k % 4) * std::numbers::pi / 2.0;
                return s.amplitude * std::pow(s.omega, k) * std::sin(s.omega * t + s.phase + shift);
            },
            [&](const Polynomial& p) {
                double acc = 0.0;
                for (std::size_t i = p.coeffs.size(); i-- > static_cast<std::size_t>(k);) {
                    double falling = 1.0;
                    for (int j = 0; j < k; ++j) falling *= static_cast<double>(i - static_cast<std::size_t>(j));
                    acc = acc * t + falling * p.coeffs[i];
                }
                return acc;
            },
            [&](const Sum& s) {
                double acc = 0.0;
                for (const auto& term : s.terms) acc += term.eval(t, k);
                return acc;
            },
            [&](const Shifted& s) { return s.base->eval(t + s.offset, k); },
        },
        node);
}

}  // namespace

Signal::Signal() : node_(std::make_shared<const Node>(Polynomial{})) {}

Signal::Signal(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

Signal Signal::sinusoid(double amplitude, double omega, double phase) {
    return Signal(Sinusoid{amplitude, omega, phase});
}

Signal Signal::polynomial(std::vector<double> coeffs_ascending) {
    return Signal(Polynomial{std::move(coeffs_ascending)});
}

Signal Signal::sum(std::vector<Signal> terms) { return Signal(Sum{std::move(terms)}); }

Signal Signal::shifted(Signal base, double offset) {
    return Signal(Shifted{std::make_shared<const Signal>(std::move(base)), offset});
}

double Signal::eval(double t, int deriv_order) const {
    if (deriv_order < 0 || deriv_order > kMaxDerivativeOrder) {
        throw Error(ErrorKind::Capability, "signal derivative order " + std::to_string(deriv_order) +
                                               " outside [0, " + std::to_string(kMaxDerivativeOrder) + "]");
    }
    return eval_node(*node_, t, deriv_order);
}

std::optional<double> Signal::bound() const {
    return std::visit(
        overloaded{
            [](const Sinusoid& s) -> std::optional<double> { return std::abs(s.amplitude); },
            [](const Polynomial& p) -> std::optional<double> {
                for (std::size_t i = 1; i < p.coeffs.size(); ++i) {
                    if (p.coeffs[i] != 0.0) return std::nullopt;
                }
                return p.coeffs.empty() ? 0.0 : std::abs(p.coeffs[0]);
            },
            [](const Sum& s) -> std::optional<double> {
                double total = 0.0;
                for (const auto& term : s.terms) {
                    auto b = term.bound();
                    if (!b) return std::nullopt;
                    total += *b;
                }
                return total;
            },
            [](const Shifted& s) -> std::optional<double> { return s.base->bound(); },
        },
        *node_);
}

double eval(const Signal& sig, double t, int deriv_order) { return sig.eval(t, deriv_order); }

DisturbanceSpec DisturbanceSpec::multiplicative(double fraction, DisturbanceTarget target) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::UniformMultiplicative;
    s.fraction = fraction;
    s.target = target;
    s.validate();
    return s;
}

DisturbanceSpec DisturbanceSpec::absolute(double bound, DisturbanceTarget target) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::UniformAbsolute;
    s.bound = bound;
    s.target = target;
    s.validate();
    return s;
}

bool DisturbanceSpec::active() const {
    switch (kind) {
        case DisturbanceKind::None: return false;
        case DisturbanceKind::UniformMultiplicative: return fraction > 0.0;
        case DisturbanceKind::UniformAbsolute: return bound > 0.0;
    }
    return false;
}

void DisturbanceSpec::validate() const {
    if (!(fraction >= 0.0) || !std::isfinite(fraction)) {
        throw Error(ErrorKind::Validation, "disturbance fraction must be finite and non-negative");
    }
    if (!(bound >= 0.0) || !std::isfinite(bound)) {
        throw Error(ErrorKind::Validation, "disturbance bound must be finite and non-negative");
    }
}

DisturbancePair DisturbancePair::multiplicative(double fraction) {
    return {DisturbanceSpec::multiplicative(fraction, DisturbanceTarget::Input),
            DisturbanceSpec::multiplicative(fraction, DisturbanceTarget::Output)};
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

double uniform_symmetric(Rng& rng) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * unit - 1.0;
}

double sample_disturbance(const DisturbanceSpec& spec, Rng& rng, double envelope) {
    switch (spec.kind) {
        case DisturbanceKind::None: return 0.0;
        case DisturbanceKind::UniformMultiplicative: return spec.fraction * std::abs(envelope) * uniform_symmetric(rng);
        case DisturbanceKind::UniformAbsolute: return spec.bound * uniform_symmetric(rng);
    }
    return 0.0;
}

}  // namespace kto::signals
