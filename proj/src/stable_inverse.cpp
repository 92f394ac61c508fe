#include "kto/stable_inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kto/error.hpp"

namespace kto::inversion {

namespace {

constexpr double kSingularGainTol = 1e-12;

double max_real_part(const Matrix& M) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& lambda : numkit::eigenvalues(M)) m = std::max(m, lambda.real());
    return m;
}

// sup over t ∈ [0, horizon] of ‖e^{M t}‖ e^{rate·t}
double transient_peak(const Matrix& M, double rate, double horizon, double step) {
    const auto count = static_cast<long>(std::llround(horizon / step));
    double peak = 0.0;
    for (long i = 0; i <= count; ++i) {
        const double t = static_cast<double>(i) * step;
        peak = std::max(peak, numkit::norm2(numkit::mat_exp(M, t)) * std::exp(rate * t));
    }
    return peak;
}

// Largest rate α ≤ −max Re λ(M) for which ‖e^{Mt}‖e^{αt} stops growing within the
// horizon. Defective eigenvalues on the abscissa make the envelope grow like a
// polynomial, so the rate is backed off until the tail no longer rises.
double envelope_rate(const Matrix& M, double horizon) {
    double rate = -max_real_part(M);
    auto profile = [&](double t) { return numkit::norm2(numkit::mat_exp(M, t)) * std::exp(rate * t); };
    // a profile settling onto a constant has shrinking increments, polynomial growth does not
    auto growing = [&] {
        const double g1 = profile(0.25 * horizon), g2 = profile(0.5 * horizon), g3 = profile(horizon);
        return g3 > g2 * (1.0 + 1e-6) && g3 - g2 > 0.5 * (g2 - g1);
    };
    for (int i = 0; i < 60 && growing(); ++i) rate *= 0.9;
    return rate;
}

// Column k holds the weight of the sample at σ = kΔt in
//   ∫₀^{NΔt} e^{Mσ} a y(σ) dσ
// when y is replaced by its piecewise-linear interpolant on the Δt grid and the
// kernel is integrated exactly. With Φ₁ = ∫₀^Δt e^{Ms}ds and Φ₂ = ∫₀^Δt e^{Ms}(Δt−s)ds
// (both read off one augmented exponential) the per-interval weights are
// W₀ = Φ₂/Δt for the left sample and W₁ = Φ₁ − Φ₂/Δt for the right sample.
Matrix product_taps(const Matrix& M, const Matrix& a, int N, double dt) {
    const auto m = M.rows();
    Matrix aug = Matrix::Zero(3 * m, 3 * m);
    aug.topLeftCorner(m, m) = M;
    aug.block(0, m, m, m).setIdentity();
    aug.block(m, 2 * m, m, m).setIdentity();
    const Matrix E = numkit::mat_exp(aug, dt);
    const Matrix step = E.topLeftCorner(m, m);
    const Matrix phi1 = E.block(0, m, m, m);
    const Matrix phi2 = E.block(0, 2 * m, m, m);
    const Matrix left = (phi2 / dt) * a;
    const Matrix right = (phi1 - phi2 / dt) * a;

    Matrix taps = Matrix::Zero(m, N + 1);
    Matrix decay = Matrix::Identity(m, m);  // e^{M kΔt}
    for (int k = 0; k < N; ++k) {
        taps.col(k) += decay * left;
        taps.col(k + 1) += decay * right;
        decay = decay * step;
    }
    return taps;
}

}  // namespace

Matrix phi_kernel(const HyperbolicSplit& split, double t) {
    const int p = split.stable_dim;
    const int q = split.unstable_dim;
    Matrix phi = Matrix::Zero(p + q, p + q);
    if (t > 0.0) {
        if (p > 0) phi.topLeftCorner(p, p) = numkit::mat_exp(split.A4_minus, t);
    } else if (t < 0.0) {
        if (q > 0) phi.bottomRightCorner(q, q) = -numkit::mat_exp(split.A4_plus, t);
    } else if (p > 0) {
        phi.topLeftCorner(p, p).setIdentity();
    }
    return phi;
}

DecayEstimates decay_constants(const HyperbolicSplit& split, double horizon, double step) {
    DecayEstimates est;
    const double inf = std::numeric_limits<double>::infinity();
    est.alpha_stable = inf;
    est.alpha_unstable = inf;
    if (split.stable_dim > 0) {
        est.alpha_stable = envelope_rate(split.A4_minus, horizon);
        est.kappa_stable = transient_peak(split.A4_minus, est.alpha_stable, horizon, step);
    }
    if (split.unstable_dim > 0) {
        const Matrix reversed = -split.A4_plus;
        est.alpha_unstable = envelope_rate(reversed, horizon);
        est.kappa_unstable = transient_peak(reversed, est.alpha_unstable, horizon, step);
    }
    est.alpha = std::min(est.alpha_stable, est.alpha_unstable);
    if (split.dim() == 0) {
        est.kappa = 1.0;
        return est;
    }

    const auto count = static_cast<long>(std::llround(horizon / step));
    double kappa = 0.0;
    for (long i = -count; i <= count; ++i) {
        const double t = static_cast<double>(i) * step;
        kappa = std::max(kappa, numkit::norm2(phi_kernel(split, t)) * std::exp(est.alpha * std::abs(t)));
    }
    // one-sided limit φ(0⁻) = blockdiag(0, −I)
    if (split.unstable_dim > 0) kappa = std::max(kappa, 1.0);
    est.kappa = kappa;
    return est;
}

std::pair<double, double> exponential_decay(const Matrix& A, double horizon, double step) {
    if (!(max_real_part(A) < 0.0)) throw Error(ErrorKind::UnstablePlant, "exponential_decay: matrix is not Hurwitz");
    const double alpha = envelope_rate(A, horizon);
    return {alpha, transient_peak(A, alpha, horizon, step)};
}

InternalStateReconstructor::InternalStateReconstructor(const NormalForm& nf, const HyperbolicSplit& split, int N,
                                                       double dt)
    : N_(N), dt_(dt), basis_(split.basis) {
    if (N < 1) throw Error(ErrorKind::Validation, "eta_hat: window half-width N must be >= 1");
    if (!(dt > 0.0)) throw Error(ErrorKind::Validation, "eta_hat: dt must be positive");
    if (split.dim() != nf.eta_dim()) throw Error(ErrorKind::Dimension, "eta_hat: split does not match normal form");

    const int p = split.stable_dim;
    const int q = split.unstable_dim;
    stable_taps_ = Matrix::Zero(p, N + 1);
    unstable_taps_ = Matrix::Zero(q, N + 1);
    if (split.dim() == 0) return;

    const Matrix a3 = split.basis_inv * nf.A3;
    if (p > 0) stable_taps_ = product_taps(split.A4_minus, a3.topRows(p), N, dt);
    if (q > 0) unstable_taps_ = product_taps(-split.A4_plus, a3.bottomRows(q), N, dt);
}

Vector InternalStateReconstructor::operator()(const signals::Signal& y_d, double t) const {
    const auto p = stable_taps_.rows();
    const auto q = unstable_taps_.rows();
    Vector split_state = Vector::Zero(p + q);
    if (p + q == 0) return split_state;
    for (int k = 0; k <= N_; ++k) {
        const double sigma = static_cast<double>(k) * dt_;
        if (p > 0) split_state.head(p) += stable_taps_.col(k) * y_d.eval(t - sigma);
        if (q > 0) split_state.tail(q) -= unstable_taps_.col(k) * y_d.eval(t + sigma);
    }
    return basis_ * split_state;
}

Vector eta_hat(const NormalForm& nf, const HyperbolicSplit& split, const signals::Signal& y_d, int N, double dt,
               double t) {
    return InternalStateReconstructor(nf, split, N, dt)(y_d, t);
}

Vector xi_desired(const NormalForm& nf, const signals::Signal& y_d, double t) {
    Vector xi(nf.r);
    for (int i = 0; i < nf.r; ++i) xi(i) = y_d.eval(t, i);
    return xi;
}

double feedforward_input(const NormalForm& nf, const signals::Signal& y_d, const EtaFn& eta, double t) {
    if (std::abs(nf.k) < kSingularGainTol) throw Error(ErrorKind::SingularGain, "feedforward: input gain k is ~0");
    double value = y_d.eval(t, nf.r) - nf.r_vec.dot(xi_desired(nf, y_d, t));
    if (nf.eta_dim() > 0) value -= nf.s_vec.dot(eta(t));
    return value / nf.k;
}

Vector matched_initial_state(const NormalForm& nf, const signals::Signal& y_d, const EtaFn& eta, double t0) {
    Vector z(nf.r + nf.eta_dim());
    z.head(nf.r) = xi_desired(nf, y_d, t0);
    if (nf.eta_dim() > 0) z.tail(nf.eta_dim()) = eta(t0);
    return nf.T_inv * z;
}

ErrorBoundReport error_bound(const NormalForm& nf, const HyperbolicSplit& split, double y_d_bound, int N, double dt) {
    const DecayEstimates decay = decay_constants(split);
    const int p = split.stable_dim;
    const int q = split.unstable_dim;

    ErrorBoundReport report;
    report.alpha = decay.alpha;
    if (split.dim() > 0) {
        const Matrix a3 = split.basis_inv * nf.A3;
        const Matrix g2 = split.basis_inv * nf.G2;
        const double basis_norm = numkit::norm2(split.basis);
        const double side_stable = p > 0 ? decay.kappa_stable / decay.alpha_stable : 0.0;
        const double side_unstable = q > 0 ? decay.kappa_unstable / decay.alpha_unstable : 0.0;
        report.beta = 2.0 * y_d_bound * a3.norm() * std::max(side_stable, side_unstable) * basis_norm;
        report.gamma = g2.norm() * (side_stable + side_unstable) * basis_norm;
        report.window_term = report.beta * std::exp(-decay.alpha * static_cast<double>(N) * dt);
    }

    const Matrix A = nf.T_inv * nf.assembled_A() * nf.T;
    const auto [alpha3, kappa3] = exponential_decay(A);
    report.alpha_plant = alpha3;
    report.kappa_plant = kappa3;
    const double s_norm = nf.eta_dim() > 0 ? nf.s_vec.norm() : 0.0;
    report.delta = (kappa3 / alpha3) * (s_norm * report.gamma + std::abs(nf.g));
    if (std::abs(nf.k) >= kSingularGainTol) {
        // first row of T is C; T⁻¹B̄ recovers B
        const double c_norm = nf.T.row(0).norm();
        const double b_norm = (nf.T_inv * nf.assembled_B()).norm();
        report.output_window_term = c_norm * b_norm * (kappa3 / alpha3) *
                                    (s_norm / std::abs(nf.k)) * report.window_term;
    }
    return report;
}

}  // namespace kto::inversion
