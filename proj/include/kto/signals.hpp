#pragma once

// Desired-output signals with exact analytic derivatives, and bounded
// uniform disturbance processes.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

namespace kto::signals {

inline constexpr int kMaxDerivativeOrder = 16;

class Signal;

struct Sinusoid {
    double amplitude = 1.0;
    double omega = 1.0;  // rad/s
    double phase = 0.0;
};

struct Polynomial {
    std::vector<double> coeffs;  // ascending powers of t
};

struct Sum {
    std::vector<Signal> terms;
};

struct Shifted {
    std::shared_ptr<const Signal> base;
    double offset = 0.0;  // evaluates base(t + offset)
};

// Immutable, cheap to copy.
class Signal {
public:
    using Node = std::variant<Sinusoid, Polynomial, Sum, Shifted>;

    Signal();  // identically zero
    explicit Signal(Node node);

    static Signal sinusoid(double amplitude, double omega, double phase = 0.0);
    static Signal polynomial(std::vector<double> coeffs_ascending);
    static Signal sum(std::vector<Signal> terms);
    static Signal shifted(Signal base, double offset);
    static Signal zero() { return Signal(); }

    // d^k/dt^k of the signal at t. Throws ErrorKind::Capability for orders
    // outside [0, kMaxDerivativeOrder].
    [[nodiscard]] double eval(double t, int deriv_order = 0) const;

    // sup_t |y(t)| when finite (sinusoids, sums of sinusoids, constants).
    [[nodiscard]] std::optional<double> bound() const;

    [[nodiscard]] const Node& node() const { return *node_; }

private:
    std::shared_ptr<const Node> node_;
};

double eval(const Signal& sig, double t, int deriv_order = 0);

enum class DisturbanceKind { None, UniformMultiplicative, UniformAbsolute };
enum class DisturbanceTarget { Input, Output };

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::None;
    double fraction = 0.0;  // ρ for the multiplicative kind
    double bound = 0.0;     // half-width for the absolute kind
    DisturbanceTarget target = DisturbanceTarget::Input;
    std::uint64_t seed = 0;

    static DisturbanceSpec none() { return {}; }
    static DisturbanceSpec multiplicative(double fraction, DisturbanceTarget target);
    static DisturbanceSpec absolute(double bound, DisturbanceTarget target);

    [[nodiscard]] bool active() const;
    void validate() const;
};

// Input-side (w) and output-side (h) processes.
struct DisturbancePair {
    DisturbanceSpec input;
    DisturbanceSpec output;

    static DisturbancePair none() { return {}; }
    static DisturbancePair multiplicative(double fraction);
    [[nodiscard]] bool active() const { return input.active() || output.active(); }
};

using Rng = std::mt19937_64;

// Engine for an independent stream identified by (seed, stream).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Uniform draw on [−1, 1) built directly from the engine's 64-bit output so the
// sequence is identical across standard library implementations.
double uniform_symmetric(Rng& rng);

// One draw of U[ρ·|envelope|] (multiplicative) or U[bound] (absolute); 0 for None.
double sample_disturbance(const DisturbanceSpec& spec, Rng& rng, double envelope);

}  // namespace kto::signals
