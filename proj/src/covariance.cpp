#include "glht/covariance.hpp"

#include <cmath>

namespace glht {

Eigen::VectorXd CovarianceModel::apply_factor(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    const double root_c = std::sqrt(scale);
    if (kind == Kind::ScaledIdentity) return root_c * z;
    const double s = std::sqrt(1.0 - rho * rho);
    Eigen::VectorXd x(z.size());
    if (z.size() == 0) return x;
    x(0) = z(0);
    for (Eigen::Index i = 1; i < z.size(); ++i) x(i) = rho * x(i - 1) + s * z(i);
    return root_c * x;
}

Eigen::VectorXd CovarianceModel::apply_factor_transpose(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    const double root_c = std::sqrt(scale);
    if (kind == Kind::ScaledIdentity) return root_c * v;
    const double s = std::sqrt(1.0 - rho * rho);
    const Eigen::Index p = v.size();
    Eigen::VectorXd h(p);
    if (p == 0) return h;
    h(p - 1) = v(p - 1);
    for (Eigen::Index j = p - 2; j >= 0; --j) h(j) = v(j) + rho * h(j + 1);
    for (Eigen::Index j = 1; j < p; ++j) h(j) *= s;
    return root_c * h;
}

Eigen::MatrixXd CovarianceModel::factor_dense(Eigen::Index p) const {
    const double root_c = std::sqrt(scale);
    if (kind == Kind::ScaledIdentity) return root_c * Eigen::MatrixXd::Identity(p, p);
    const double s = std::sqrt(1.0 - rho * rho);
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        l(i, 0) = std::pow(rho, double(i));
        for (Eigen::Index j = 1; j <= i; ++j) l(i, j) = s * std::pow(rho, double(i - j));
    }
    return root_c * l;
}

Eigen::MatrixXd CovarianceModel::dense(Eigen::Index p) const {
    if (kind == Kind::ScaledIdentity) return scale * Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd s(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) s(i, j) = scale * std::pow(rho, double(std::abs(i - j)));
    return s;
}

}  // namespace glht
