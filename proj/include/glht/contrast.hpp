#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include "glht/error.hpp"

namespace glht {

enum class ExponentMode {
    /// G = (G~ D G~^T)^{1/2} G~ (default).
    PaperLiteral,
    /// G = (G~ D G~^T)^{-1/2} G~, invariant under G~ -> P G~.
    InverseRoot,
};

struct ContrastInput {
    Eigen::MatrixXd g_tilde;  // q x K
    ExponentMode exponent_mode = ExponentMode::PaperLiteral;
};

struct Contrast {
    Eigen::MatrixXd g;        // transformed q x K
    Eigen::MatrixXd d;        // K x K, d(a, b) = g_a^T g_b
    Eigen::VectorXd scaling;  // diagonal of D, n / n_a
    std::vector<long> n_sizes;
    long n_total = 0;
    ExponentMode exponent_mode = ExponentMode::PaperLiteral;

    Eigen::Index groups() const { return d.rows(); }
};

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// Returns eigenvalues (unsorted) and eigenvectors as columns. Sweeps stop
/// once the off-diagonal Frobenius norm drops below 1e-14 ||m||_F.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>,
          Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
jacobi_eigen(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::Identity(n, n);
    const Scalar norm = a.norm();
    const Scalar tol = Scalar(1e-14) * norm;
    for (int sweep = 0; sweep < 100; ++sweep) {
        Scalar off(0);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= tol) break;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == Scalar(0)) continue;
                Eigen::JacobiRotation<Scalar> rot;
                rot.makeJacobi(a, p, q);
                a.applyOnTheLeft(p, q, rot.adjoint());
                a.applyOnTheRight(p, q, rot);
                v.applyOnTheRight(p, q, rot);
            }
        }
    }
    return {a.diagonal(), v};
}

/// m^{exponent} for symmetric PSD m and exponent in {+1/2, -1/2}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sym_matrix_power(
    const Eigen::MatrixBase<Derived>& m, double exponent) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorKind::InvalidDimension, "matrix power needs a non-empty square matrix");
    }
    if (exponent != 0.5 && exponent != -0.5) {
        throw Error(ErrorKind::InvalidInput, "matrix power supports exponents +1/2 and -1/2 only");
    }
    const Scalar norm = m.norm();
    if ((m - m.transpose()).norm() > Scalar(1e-10) * norm) {
        throw Error(ErrorKind::InvalidInput, "matrix is not symmetric");
    }
    const Matrix sym = (m + m.transpose()) / Scalar(2);
    auto [lambda, vecs] = jacobi_eigen(sym);
    if (lambda.minCoeff() < Scalar(-1e-12) * norm) {
        throw Error(ErrorKind::InvalidInput, "matrix is not positive semidefinite");
    }
    const Scalar lmax = lambda.maxCoeff();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> powered(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const Scalar l = lambda(i);
        if (l <= Scalar(1e-12) * lmax) {
            if (exponent < 0) {
                throw Error(ErrorKind::RankDeficiency, "matrix is singular, inverse root undefined");
            }
            powered(i) = Scalar(0);
        } else {
            powered(i) = std::pow(l, Scalar(exponent));
        }
    }
    return vecs * powered.asDiagonal() * vecs.transpose();
}

/// Transformed contrast for the given group sizes; every n_a must be >= 4.
Contrast build_contrast(const ContrastInput& input, std::span<const long> n_sizes);

/// (I_{K-1}, -1_{K-1}): equality of all K means.
Eigen::MatrixXd manova_contrast(Eigen::Index groups);

/// Single row e_first - e_second (zero-based indices).
Eigen::MatrixXd pairwise_contrast(Eigen::Index groups, Eigen::Index first, Eigen::Index second);

}  // namespace glht
