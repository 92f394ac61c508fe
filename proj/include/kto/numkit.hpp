#pragma once

// Dense real-matrix kernel: matrix exponential, pseudoinverse, eigenvalues and
// polynomial roots. Everything here is a pure function of its arguments.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kto/error.hpp"

namespace kto::numkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

enum class SpectrumForm { Diagonalizable, RealSchur };

struct Spectrum {
    std::vector<Complex> eigenvalues;
    // Real eigenvector basis (real and imaginary parts of each conjugate pair)
    // when diagonalizable, otherwise the orthogonal real Schur factor.
    Matrix basis;
    SpectrumForm form = SpectrumForm::Diagonalizable;
};

// e^{M t}. Padé scaling-and-squaring.
Matrix mat_exp(const Matrix& M, double t);

// Moore–Penrose pseudoinverse via SVD. Singular values at or below `cutoff`
// are treated as zero; the default cutoff is max(rows, cols)·eps·σ_max.
Matrix pinv(const Matrix& M, std::optional<double> cutoff = std::nullopt);

std::vector<Complex> eigenvalues(const Matrix& M);
Spectrum spectrum(const Matrix& M);

// Roots of Σ coeffs[i]·s^{deg−i} (descending powers) from companion-matrix eigenvalues.
std::vector<Complex> poly_roots(std::span<const double> coeffs_descending);

// Monic characteristic polynomial det(sI − M) by the Leverrier–Faddeev trace
// recursion, descending powers (leading 1).
std::vector<double> characteristic_polynomial(const Matrix& M);

// Horner evaluation of a real polynomial (descending powers) at a complex point.
Complex poly_eval(std::span<const double> coeffs_descending, Complex s);

// Columns form an orthonormal basis of the null space of M.
Matrix null_space(const Matrix& M, std::optional<double> tol = std::nullopt);

// Spectral (operator 2-) norm.
double norm2(const Matrix& M);

// Orders eigenvalues by (real, imag) and snaps conjugate pairs to exact mirrors.
void pair_conjugates(std::vector<Complex>& values, double tol = 1e-8);

bool all_finite(const Matrix& M);

}  // namespace kto::numkit
