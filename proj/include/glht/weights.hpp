#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "glht/error.hpp"

namespace glht {

/// Weight matrix W = diag(beta_sq) + a a^T of the product weight density.
///
/// `a` holds the per-coordinate means of the weight density and `beta_sq`
/// its variances. W itself is never formed; every consumer goes through the
/// diagonal-plus-rank-one decomposition below.
template <typename Scalar>
struct WeightSpec {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector a;
    Vector beta_sq;

    WeightSpec() = default;
    WeightSpec(Vector a_, Vector beta_sq_) : a(std::move(a_)), beta_sq(std::move(beta_sq_)) {
        if (a.size() < 1 || a.size() != beta_sq.size()) {
            throw Error(ErrorKind::InvalidDimension,
                        "weight vectors must share a positive length (got " +
                            std::to_string(a.size()) + " and " + std::to_string(beta_sq.size()) + ")");
        }
        if (!(beta_sq.array() > Scalar(0)).all()) {
            throw Error(ErrorKind::InvalidInput, "weight variances must be strictly positive");
        }
        if (!a.allFinite() || !beta_sq.allFinite()) {
            throw Error(ErrorKind::InvalidInput, "weight parameters must be finite");
        }
    }

    Eigen::Index dim() const { return a.size(); }
};

using WeightSpecd = WeightSpec<double>;

/// Default tuning: a_i = 2 p^{-3/8} and
/// beta_i = sqrt(2) (p + i) / p, stored squared.
template <typename Scalar = double>
WeightSpec<Scalar> default_weights(Eigen::Index p) {
    if (p < 1) {
        throw Error(ErrorKind::InvalidDimension, "weight dimension must be at least 1");
    }
    using Vector = typename WeightSpec<Scalar>::Vector;
    const Scalar ps = static_cast<Scalar>(p);
    Vector a = Vector::Constant(p, Scalar(2) * std::pow(ps, Scalar(-0.375)));
    Vector beta_sq(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Scalar r = (ps + static_cast<Scalar>(i + 1)) / ps;
        beta_sq(i) = Scalar(2) * r * r;
    }
    return WeightSpec<Scalar>(std::move(a), std::move(beta_sq));
}

namespace detail {

template <typename Scalar>
void check_dim(Eigen::Index got, const WeightSpec<Scalar>& w, const char* what) {
    if (got != w.dim()) {
        throw Error(ErrorKind::InvalidDimension, std::string(what) + " has length " +
                                                     std::to_string(got) + ", weights have dimension " +
                                                     std::to_string(w.dim()));
    }
}

}  // namespace detail

/// x^T W y in O(p).
template <typename DerivedX, typename DerivedY, typename Scalar>
Scalar w_quadratic(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
                   const WeightSpec<Scalar>& w) {
    detail::check_dim(x.size(), w, "x");
    detail::check_dim(y.size(), w, "y");
    Scalar diag(0), ax(0), ay(0);
    for (Eigen::Index i = 0; i < w.dim(); ++i) {
        diag += w.beta_sq(i) * (x(i) * y(i));
        ax += w.a(i) * x(i);
        ay += w.a(i) * y(i);
    }
    return diag + ax * ay;
}

/// x^T W x; bit-identical to w_quadratic(x, x, w).
template <typename Derived, typename Scalar>
Scalar w_quadratic_self(const Eigen::MatrixBase<Derived>& x, const WeightSpec<Scalar>& w) {
    detail::check_dim(x.size(), w, "x");
    Scalar diag(0), ax(0);
    for (Eigen::Index i = 0; i < w.dim(); ++i) {
        diag += w.beta_sq(i) * (x(i) * x(i));
        ax += w.a(i) * x(i);
    }
    return diag + ax * ax;
}

/// Row-pair Gram matrix: G(i, j) = X.row(i) W Y.row(j)^T.
///
/// Costs O(rows(X) rows(Y) p); this is the kernel behind every trace
/// functional of the statistic.
template <typename DerivedX, typename DerivedY, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w_gram(const Eigen::MatrixBase<DerivedX>& x,
                                                             const Eigen::MatrixBase<DerivedY>& y,
                                                             const WeightSpec<Scalar>& w) {
    detail::check_dim(x.cols(), w, "x rows");
    detail::check_dim(y.cols(), w, "y rows");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g = (x * w.beta_sq.asDiagonal()) * y.transpose();
    const typename WeightSpec<Scalar>::Vector xa = x * w.a;
    const typename WeightSpec<Scalar>::Vector ya = y * w.a;
    g.noalias() += xa * ya.transpose();
    return g;
}

}  // namespace glht
