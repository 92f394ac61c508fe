#pragma once

// Model-based stable inversion: the bilateral kernel φ, windowed internal
// state reconstruction, the feedforward law and the decay constants behind
// the window-truncation bound.

#include <functional>
#include <vector>

#include "kto/lti.hpp"
#include "kto/signals.hpp"

namespace kto::inversion {

using lti::HyperbolicSplit;
using lti::Matrix;
using lti::NormalForm;
using lti::Vector;

struct DecayEstimates {
    double alpha = 0.0;  // min(alpha_stable, alpha_unstable)
    double kappa = 1.0;  // sup over the sample grid of ‖φ(t)‖·e^{α|t|}
    double alpha_stable = 0.0;
    double kappa_stable = 0.0;
    double alpha_unstable = 0.0;
    double kappa_unstable = 0.0;
};

struct ErrorBoundReport {
    double window_term = 0.0;  // β·e^{−α N Δt}, bounds ‖η − η_N‖
    // window_term carried to the output: ‖C‖‖B‖(κ₃/α₃)(‖s‖/|k|)·window_term
    double output_window_term = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;  // (κ₃/α₃)(‖s‖γ + |g|)
    double alpha = 0.0;
    double alpha_plant = 0.0;
    double kappa_plant = 0.0;
};

// Kernel in split coordinates: blockdiag(e^{A₋t}, 0) for t ≥ 0 and
// blockdiag(0, −e^{A₊t}) for t < 0.
Matrix phi_kernel(const HyperbolicSplit& split, double t);

// Grid used to fit κ: t ∈ [−horizon, horizon] with spacing `step`.
DecayEstimates decay_constants(const HyperbolicSplit& split, double horizon = 20.0, double step = 0.01);

// (α, κ) with ‖e^{At}‖ ≤ κ e^{−αt} on t ∈ [0, horizon] for a Hurwitz A.
std::pair<double, double> exponential_decay(const Matrix& A, double horizon = 20.0, double step = 0.01);

// Reconstruction of the windowed bilateral solution
//   η_N(t) = ∫_{t−NΔt}^{t+NΔt} φ(t−τ) A3 y_d(τ) dτ
// from the samples y_d(t + kΔt), k = −N … N. The kernel is integrated exactly
// against the piecewise-linear interpolant of the samples; weights are
// precomputed once per (N, Δt).
class InternalStateReconstructor {
public:
    InternalStateReconstructor(const NormalForm& nf, const HyperbolicSplit& split, int N, double dt);

    [[nodiscard]] Vector operator()(const signals::Signal& y_d, double t) const;

    [[nodiscard]] int window() const { return N_; }
    [[nodiscard]] double dt() const { return dt_; }

private:
    int N_;
    double dt_;
    Matrix basis_;
    // column k multiplies y_d(t − kΔt) (stable side) or y_d(t + kΔt) (unstable side)
    Matrix stable_taps_;
    Matrix unstable_taps_;
};

Vector eta_hat(const NormalForm& nf, const HyperbolicSplit& split, const signals::Signal& y_d, int N, double dt,
               double t);

using EtaFn = std::function<Vector(double)>;

// û(t) = (y_d^{(r)} − rᵀξ_d − sᵀη)/k
double feedforward_input(const NormalForm& nf, const signals::Signal& y_d, const EtaFn& eta, double t);

// ξ_d(t) = (y_d, ẏ_d, …, y_d^{(r−1)})(t)
Vector xi_desired(const NormalForm& nf, const signals::Signal& y_d, double t);

// x(0) = T⁻¹ (ξ_d(t0), η(t0))
Vector matched_initial_state(const NormalForm& nf, const signals::Signal& y_d, const EtaFn& eta, double t0 = 0.0);

ErrorBoundReport error_bound(const NormalForm& nf, const HyperbolicSplit& split, double y_d_bound, int N, double dt);

}  // namespace kto::inversion
