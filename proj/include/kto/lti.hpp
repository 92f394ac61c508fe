#pragma once

// SISO continuous-time plants: structure analysis, normal form and the
// stable/antistable split of the internal dynamics.

#include <complex>
#include <vector>

#include "kto/numkit.hpp"

namespace kto::lti {

using numkit::Complex;
using numkit::Matrix;
using numkit::Vector;

inline constexpr double kDefaultRelativeDegreeTol = 1e-9;
inline constexpr double kDefaultHyperbolicMargin = 1e-6;

// ẋ = A x + B u + G w,  y = C x + h
struct StateSpace {
    Matrix A;  // n×n
    Matrix B;  // n×1
    Matrix C;  // 1×n
    Matrix G;  // n×1

    // Throws ErrorKind::Dimension / Validation on inconsistent or non-finite data.
    static StateSpace make(Matrix A, Matrix B, Matrix C, Matrix G);
    static StateSpace make(Matrix A, Matrix B, Matrix C);  // G = 0

    [[nodiscard]] Eigen::Index order() const { return A.rows(); }
    void validate() const;
};

// k · (s^{n−r} + b_{n−r−1}s^{n−r−1} + … + b_0) / (s^n + a_{n−1}s^{n−1} + … + a_0)
struct TransferFunction {
    double k = 0.0;
    std::vector<double> b;  // b_0 … b_{n−r−1} (ascending, monic term implied)
    std::vector<double> a;  // a_0 … a_{n−1} (ascending, monic term implied)

    [[nodiscard]] std::vector<double> numerator_descending() const;
    [[nodiscard]] std::vector<double> denominator_descending() const;
};

enum class Phase { MinimumPhase, NonMinimumPhase };

const char* to_string(Phase phase);

// Byrnes–Isidori coordinates z = T x, z = (ξ, η) with ξ = (y, ẏ, …, y^{(r−1)}):
//   ξ̇ = A1 ξ + A2 η + B1 u + G1 w     (A1 shift chain, last rows rᵀ / sᵀ, B1 = k·e_r)
//   η̇ = A3 y + A4 η + G2 w
// A4 is the companion matrix of the numerator polynomial and A3 = e_{n−r}.
struct NormalForm {
    int r = 0;
    Matrix A1, A2, A3, A4;
    Vector r_vec;  // last row of A1
    Vector s_vec;  // last row of A2
    double k = 0.0;
    double g = 0.0;  // last entry of G1
    Vector G1;       // C A^i G, i = 0..r−1
    Matrix G2;       // (n−r)×1
    Matrix T;        // n×n, z = T x
    Matrix T_inv;

    [[nodiscard]] int xi_dim() const { return r; }
    [[nodiscard]] int eta_dim() const { return static_cast<int>(A4.rows()); }
    // Full transformed dynamics matrix T A T⁻¹ reassembled from the blocks.
    [[nodiscard]] Matrix assembled_A() const;
    [[nodiscard]] Matrix assembled_B() const;
    [[nodiscard]] Matrix assembled_G() const;
};

struct HyperbolicSplit {
    Matrix basis;  // basis⁻¹ · A4 · basis = blockdiag(A4_minus, A4_plus)
    Matrix basis_inv;
    Matrix A4_minus;
    Matrix A4_plus;
    int stable_dim = 0;
    int unstable_dim = 0;

    [[nodiscard]] int dim() const { return stable_dim + unstable_dim; }
};

int relative_degree(const StateSpace& ss, double tol = kDefaultRelativeDegreeTol);

TransferFunction to_transfer(const StateSpace& ss, double tol = kDefaultRelativeDegreeTol);

std::vector<Complex> zeros(const StateSpace& ss);
std::vector<Complex> poles(const StateSpace& ss);

// Checks Assumption-3 style conditions: no zero within `margin` of the
// imaginary axis and every pole strictly left of −margin.
Phase classify_phase(const StateSpace& ss, double margin = kDefaultHyperbolicMargin);

NormalForm normal_form(const StateSpace& ss, double tol = kDefaultRelativeDegreeTol);

HyperbolicSplit hyperbolic_split(const Matrix& A4, double margin = kDefaultHyperbolicMargin);

}  // namespace kto::lti
