#pragma once

#include <variant>

#include <Eigen/Dense>

namespace glht {

/// Structured covariance Sigma = Gamma Gamma^T with a square factor.
///
/// ScaledIdentity: Sigma = c I, Gamma = sqrt(c) I.
/// ScaledAR:       Sigma = c (rho^|i-j|), Gamma = sqrt(c) L with L the
///                 closed-form Cholesky factor of the AR(1) correlation:
///                 L(i,0) = rho^i, L(i,j) = sqrt(1-rho^2) rho^(i-j) for 1 <= j <= i.
/// Neither factor is stored; applying it costs O(p).
struct CovarianceModel {
    enum class Kind { ScaledIdentity, ScaledAR };

    Kind kind = Kind::ScaledIdentity;
    double scale = 1.0;
    double rho = 0.0;

    static CovarianceModel identity(double c) { return {Kind::ScaledIdentity, c, 0.0}; }
    static CovarianceModel ar(double rho, double c) { return {Kind::ScaledAR, c, rho}; }

    /// Gamma z.
    Eigen::VectorXd apply_factor(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    /// Gamma^T v.
    Eigen::VectorXd apply_factor_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const;
    /// Dense Gamma, for verification at small p.
    Eigen::MatrixXd factor_dense(Eigen::Index p) const;
    /// Dense Sigma from the closed form (not from the factor).
    Eigen::MatrixXd dense(Eigen::Index p) const;
};

/// A true covariance: structured model or explicit dense matrix.
using CovarianceRep = std::variant<CovarianceModel, Eigen::MatrixXd>;

}  // namespace glht
