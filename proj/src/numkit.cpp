#include "kto/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace kto::numkit {

namespace {

void require_square(const Matrix& M, const char* what) {
    if (M.rows() != M.cols()) {
        throw Error(ErrorKind::Dimension, std::string(what) + " requires a square matrix, got " +
                                              std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    }
}

}  // namespace

bool all_finite(const Matrix& M) { return M.allFinite(); }

Matrix mat_exp(const Matrix& M, double t) {
    require_square(M, "mat_exp");
    if (M.size() == 0) return Matrix(0, 0);
    Matrix scaled = M * t;
    return scaled.exp();
}

double norm2(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

Matrix pinv(const Matrix& M, std::optional<double> cutoff) {
    const auto rows = M.rows();
    const auto cols = M.cols();
    if (M.size() == 0) return Matrix::Zero(cols, rows);

    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double tau = cutoff.value_or(static_cast<double>(std::max(rows, cols)) *
                                       std::numeric_limits<double>::epsilon() * sigma_max);

    Vector inv = Vector::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > tau) inv(i) = 1.0 / sigma(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

void pair_conjugates(std::vector<Complex>& values, double tol) {
    double scale = 1.0;
    for (const auto& v : values) scale = std::max(scale, std::abs(v));
    const double eps = tol * scale;

    std::vector<bool> done(values.size(), false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (done[i]) continue;
        if (std::abs(values[i].imag()) <= eps) {
            values[i] = {values[i].real(), 0.0};
            done[i] = true;
            continue;
        }
        // nearest conjugate partner among the remaining values
        std::size_t best = values.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            if (done[j]) continue;
            const double d = std::abs(values[j] - std::conj(values[i]));
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best == values.size()) {
            done[i] = true;
            continue;
        }
        const double re = 0.5 * (values[i].real() + values[best].real());
        const double im = 0.5 * (std::abs(values[i].imag()) + std::abs(values[best].imag()));
        values[i] = {re, im};
        values[best] = {re, -im};
        done[i] = done[best] = true;
    }
    std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

std::vector<Complex> eigenvalues(const Matrix& M) {
    require_square(M, "eigenvalues");
    if (M.size() == 0) return {};
    if (!M.allFinite()) throw Error(ErrorKind::NumericalFailure, "eigenvalues: non-finite matrix entries");

    Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalFailure,
                    "eigenvalues: Hessenberg QR iteration did not converge (order " + std::to_string(M.rows()) +
                        ", ||M||_F = " + std::to_string(M.norm()) + ")");
    }
    std::vector<Complex> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
    pair_conjugates(out);
    return out;
}

Spectrum spectrum(const Matrix& M) {
    require_square(M, "spectrum");
    Spectrum s;
    s.eigenvalues = eigenvalues(M);
    const auto n = M.rows();
    if (n == 0) return s;

    Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/true);
    if (solver.info() == Eigen::Success) {
        const Eigen::MatrixXcd V = solver.eigenvectors();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
        const auto& sv = svd.singularValues();
        const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
        if (cond < 1e8) {
            Matrix basis(n, n);
            const auto& lambda = solver.eigenvalues();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (lambda(j).imag() > 0.0 && j + 1 < n) {
                    basis.col(j) = V.col(j).real();
                    basis.col(j + 1) = V.col(j).imag();
                    ++j;
                } else {
                    basis.col(j) = V.col(j).real();
                }
            }
            s.basis = basis;
            s.form = SpectrumForm::Diagonalizable;
            return s;
        }
    }
    Eigen::RealSchur<Matrix> schur(M);
    s.basis = schur.matrixU();
    s.form = SpectrumForm::RealSchur;
    return s;
}

std::vector<Complex> poly_roots(std::span<const double> coeffs) {
    if (coeffs.empty()) throw Error(ErrorKind::InvalidPolynomial, "poly_roots: empty coefficient list");
    if (std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; })) {
        throw Error(ErrorKind::InvalidPolynomial, "poly_roots: all coefficients are zero");
    }
    if (coeffs.front() == 0.0) {
        throw Error(ErrorKind::InvalidPolynomial, "poly_roots: leading coefficient is zero");
    }
    const auto degree = static_cast<Eigen::Index>(coeffs.size()) - 1;
    if (degree == 0) return {};

    // companion matrix, last row carries −a_i/a_n
    Matrix companion = Matrix::Zero(degree, degree);
    for (Eigen::Index i = 0; i + 1 < degree; ++i) companion(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < degree; ++j) {
        companion(degree - 1, j) = -coeffs[static_cast<std::size_t>(degree - j)] / coeffs.front();
    }
    return eigenvalues(companion);
}

std::vector<double> characteristic_polynomial(const Matrix& M) {
    require_square(M, "characteristic_polynomial");
    const auto n = M.rows();
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[0] = 1.0;
    Matrix N = Matrix::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const Matrix AN = M * N;
        const double ck = -AN.trace() / static_cast<double>(k);
        c[static_cast<std::size_t>(k)] = ck;
        N = AN + ck * Matrix::Identity(n, n);
    }
    return c;
}

Complex poly_eval(std::span<const double> coeffs, Complex s) {
    Complex acc{0.0, 0.0};
    for (double c : coeffs) acc = acc * s + c;
    return acc;
}

Matrix null_space(const Matrix& M, std::optional<double> tol) {
    const auto cols = M.cols();
    if (M.rows() == 0) return Matrix::Identity(cols, cols);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const Vector& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double tau = tol.value_or(static_cast<double>(std::max(M.rows(), cols)) *
                                    std::numeric_limits<double>::epsilon() * sigma_max);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > tau) ++rank;
    }
    return svd.matrixV().rightCols(cols - rank);
}

}  // namespace kto::numkit
