#pragma once

// Fixed-step simulation of ẋ = Ax + Bu + Gw, y = Cx + h with exact
// zero-order-hold discretization; u and w are frozen over each step.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kto/lti.hpp"
#include "kto/signals.hpp"

namespace kto::sim {

using lti::Matrix;
using lti::Vector;

using InputFn = std::function<double(double)>;

struct SimGrid {
    double h = 0.01;
    double t_end = 1.0;

    void validate() const;
    [[nodiscard]] std::size_t steps() const;
    [[nodiscard]] double time(std::size_t k) const { return static_cast<double>(k) * h; }
};

struct Trajectory {
    std::vector<double> times;
    Matrix states;  // n × (steps + 1), column k at times[k]
    std::vector<double> u;
    std::vector<double> y_e;  // disturbance-free output C x
    std::vector<double> y;    // y_e + h
    double h = 0.0;

    [[nodiscard]] std::size_t size() const { return times.size(); }
};

using OutputRow = std::vector<double>;

// e^{Ah} and (∫₀ʰ e^{Aτ}dτ)·[B G] from one exponential of an augmented block matrix.
struct Discretization {
    Matrix Ad;
    Vector gamma_B;
    Vector gamma_G;

    static Discretization zero_order_hold(const lti::StateSpace& ss, double h);
};

class Simulator {
public:
    Simulator(lti::StateSpace ss, SimGrid grid);

    [[nodiscard]] Trajectory run(const InputFn& input, const signals::DisturbancePair& dist, const Vector& x0,
                                 signals::Rng& rng) const;

    // Measured output y only, at grid indices; avoids storing the state history.
    [[nodiscard]] std::vector<double> run_output(const InputFn& input, const signals::DisturbancePair& dist,
                                                 const Vector& x0, signals::Rng& rng) const;

    [[nodiscard]] const SimGrid& grid() const { return grid_; }
    [[nodiscard]] const lti::StateSpace& plant() const { return ss_; }

private:
    template <class Sink>
    void step_all(const InputFn& input, const signals::DisturbancePair& dist, const Vector& x0, signals::Rng& rng,
                  Sink&& sink) const;

    lti::StateSpace ss_;
    SimGrid grid_;
    Discretization zoh_;
};

// Convenience wrapper: fresh simulator and an rng stream derived from `seed`.
Trajectory simulate(const lti::StateSpace& ss, const InputFn& input, const signals::DisturbancePair& dist,
                    const SimGrid& grid, const Vector& x0, std::uint64_t seed = 0);

// Values of y at strictly increasing times, linearly interpolated between grid points.
OutputRow sample_outputs(const Trajectory& traj, std::span<const double> times);
OutputRow sample_series(std::span<const double> series, double h, std::span<const double> times);

}  // namespace kto::sim
