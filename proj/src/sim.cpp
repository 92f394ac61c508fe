#include "kto/sim.hpp"

#include <cmath>
#include <string>

#include "kto/error.hpp"

namespace kto::sim {

void SimGrid::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::Validation, "sim grid: step must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorKind::Validation, "sim grid: t_end must be positive");
    const double ratio = t_end / h;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
        throw Error(ErrorKind::Validation, "sim grid: t_end must be a multiple of the step");
    }
}

std::size_t SimGrid::steps() const { return static_cast<std::size_t>(std::llround(t_end / h)); }

Discretization Discretization::zero_order_hold(const lti::StateSpace& ss, double h) {
    const auto n = ss.order();
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = ss.A;
    aug.topRightCorner(n, n) = Matrix::Identity(n, n);
    const Matrix E = numkit::mat_exp(aug, h);
    Discretization d;
    d.Ad = E.topLeftCorner(n, n);
    const Matrix gamma = E.topRightCorner(n, n);
    d.gamma_B = gamma * ss.B;
    d.gamma_G = gamma * ss.G;
    return d;
}

Simulator::Simulator(lti::StateSpace ss, SimGrid grid) : ss_(std::move(ss)), grid_(grid) {
    ss_.validate();
    grid_.validate();
    zoh_ = Discretization::zero_order_hold(ss_, grid_.h);
}

template <class Sink>
void Simulator::step_all(const InputFn& input, const signals::DisturbancePair& dist, const Vector& x0,
                         signals::Rng& rng, Sink&& sink) const {
    const auto n = ss_.order();
    if (x0.size() != n) throw Error(ErrorKind::Dimension, "simulate: initial state has wrong dimension");
    const std::size_t steps = grid_.steps();
    const Vector c = ss_.C.row(0).transpose();
    Vector x = x0;
    Vector next(n);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = grid_.time(k);
        if (!x.allFinite()) {
            throw Error(ErrorKind::Divergence, "simulate: non-finite state first seen at t = " + std::to_string(t));
        }
        const double u = input(t);
        const double w = dist.input.active() ? signals::sample_disturbance(dist.input, rng, u) : 0.0;
        const double y_e = c.dot(x);
        const double h = dist.output.active() ? signals::sample_disturbance(dist.output, rng, y_e) : 0.0;
        sink(k, t, x, u, y_e, y_e + h);
        if (k == steps) break;
        next.noalias() = zoh_.Ad * x;
        next += zoh_.gamma_B * u;
        if (w != 0.0) next += zoh_.gamma_G * w;
        x.swap(next);
    }
}

Trajectory Simulator::run(const InputFn& input, const signals::DisturbancePair& dist, const Vector& x0,
                          signals::Rng& rng) const {
    const std::size_t len = grid_.steps() + 1;
    Trajectory traj;
    traj.h = grid_.h;
    traj.times.resize(len);
    traj.states.resize(ss_.order(), static_cast<Eigen::Index>(len));
    traj.u.resize(len);
    traj.y_e.resize(len);
    traj.y.resize(len);
    step_all(input, dist, x0, rng, [&](std::size_t k, double t, const Vector& x, double u, double y_e, double y) {
        traj.times[k] = t;
        traj.states.col(static_cast<Eigen::Index>(k)) = x;
        traj.u[k] = u;
        traj.y_e[k] = y_e;
        traj.y[k] = y;
    });
    return traj;
}

std::vector<double> Simulator::run_output(const InputFn& input, const signals::DisturbancePair& dist,
                                          const Vector& x0, signals::Rng& rng) const {
    std::vector<double> y(grid_.steps() + 1);
    step_all(input, dist, x0, rng,
             [&](std::size_t k, double, const Vector&, double, double, double yk) { y[k] = yk; });
    return y;
}

Trajectory simulate(const lti::StateSpace& ss, const InputFn& input, const signals::DisturbancePair& dist,
                    const SimGrid& grid, const Vector& x0, std::uint64_t seed) {
    Simulator sim(ss, grid);
    auto rng = signals::make_rng(seed);
    return sim.run(input, dist, x0, rng);
}

OutputRow sample_series(std::span<const double> series, double h, std::span<const double> times) {
    if (series.empty()) throw Error(ErrorKind::Range, "sample_outputs: empty series");
    const double t_end = h * static_cast<double>(series.size() - 1);
    OutputRow row;
    row.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (i > 0 && !(t > times[i - 1])) {
            throw Error(ErrorKind::Validation, "sample_outputs: sample times must be strictly increasing");
        }
        const double slack = 1e-9 * h;
        if (t < -slack || t > t_end + slack) {
            throw Error(ErrorKind::Range, "sample_outputs: time " + std::to_string(t) + " outside [0, " +
                                              std::to_string(t_end) + "]");
        }
        const double pos = t / h;
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) <= 1e-9) {
            row.push_back(series[static_cast<std::size_t>(nearest)]);
            continue;
        }
        const auto i0 = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(i0);
        row.push_back((1.0 - frac) * series[i0] + frac * series[i0 + 1]);
    }
    return row;
}

OutputRow sample_outputs(const Trajectory& traj, std::span<const double> times) {
    return sample_series(traj.y, traj.h, times);
}

}  // namespace kto::sim
