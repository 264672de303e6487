#include "glht/statistic.hpp"

namespace glht {

namespace {

double trace_w(const WeightSpecd& w) { return w.beta_sq.sum() + w.a.squaredNorm(); }

// tr(W^2) = sum beta^4 + 2 sum beta^2 a^2 + (sum a^2)^2
double trace_w_squared(const WeightSpecd& w) {
    const double aa = w.a.squaredNorm();
    return w.beta_sq.squaredNorm() + 2.0 * w.beta_sq.dot(w.a.cwiseAbs2()) + aa * aa;
}

const CovarianceModel* as_identity(const CovarianceRep& s) {
    const auto* m = std::get_if<CovarianceModel>(&s);
    return m && m->kind == CovarianceModel::Kind::ScaledIdentity ? m : nullptr;
}

Eigen::MatrixXd dense_of(const CovarianceRep& s, Eigen::Index p) {
    if (const auto* m = std::get_if<CovarianceModel>(&s)) return m->dense(p);
    const auto& d = std::get<Eigen::MatrixXd>(s);
    if (d.rows() != p || d.cols() != p) {
        throw Error(ErrorKind::InvalidInput, "dense covariance is " + std::to_string(d.rows()) + "x" +
                                                 std::to_string(d.cols()) + ", expected " + std::to_string(p) +
                                                 "x" + std::to_string(p));
    }
    return d;
}

// W Sigma without forming W: diag(beta^2) Sigma + a (a^T Sigma).
Eigen::MatrixXd w_times(const Eigen::MatrixXd& sigma, const WeightSpecd& w) {
    Eigen::MatrixXd out = w.beta_sq.asDiagonal() * sigma;
    out.noalias() += w.a * (w.a.transpose() * sigma);
    return out;
}

// tr(X Y) = sum_ij X_ij Y_ji
double trace_product(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.cwiseProduct(y.transpose()).sum();
}

Eigen::VectorXd apply_w(const Eigen::VectorXd& v, const WeightSpecd& w) {
    return w.beta_sq.cwiseProduct(v) + w.a * w.a.dot(v);
}

// v^T Sigma v
double sigma_quadratic(const CovarianceRep& s, const Eigen::VectorXd& v) {
    if (const auto* m = std::get_if<CovarianceModel>(&s)) return m->apply_factor_transpose(v).squaredNorm();
    const Eigen::MatrixXd d = dense_of(s, v.size());
    return v.dot(d * v);
}

}  // namespace

double power_prediction(double signal, double sigma0, double level) {
    if (!(sigma0 > 0.0)) throw Error(ErrorKind::InvalidInput, "null standard deviation must be positive");
    return normal_sf(normal_upper_quantile(level) - signal / sigma0);
}

double trace_w_sigma_exact(const CovarianceRep& sigma, const WeightSpecd& w) {
    if (const auto* m = as_identity(sigma)) return m->scale * trace_w(w);
    return w_times(dense_of(sigma, w.dim()), w).trace();
}

double trace_w_sigma_sq_exact(const CovarianceRep& sigma, const WeightSpecd& w) {
    if (const auto* m = as_identity(sigma)) return m->scale * m->scale * trace_w_squared(w);
    const Eigen::MatrixXd ws = w_times(dense_of(sigma, w.dim()), w);
    return trace_product(ws, ws);
}

double trace_cross_exact(const CovarianceRep& sa, const CovarianceRep& sb, const WeightSpecd& w) {
    const auto* ia = as_identity(sa);
    const auto* ib = as_identity(sb);
    if (ia && ib) return ia->scale * ib->scale * trace_w_squared(w);
    return trace_product(w_times(dense_of(sa, w.dim()), w), w_times(dense_of(sb, w.dim()), w));
}

double null_variance_exact(std::span<const CovarianceRep> sigmas, const Contrast& contrast, const WeightSpecd& w) {
    const auto k = static_cast<Eigen::Index>(sigmas.size());
    if (k != contrast.groups() || static_cast<Eigen::Index>(contrast.n_sizes.size()) != k) {
        throw Error(ErrorKind::InvalidDimension, "covariance count does not match contrast");
    }
    // Dense W Sigma products are shared across pairs when a structured shortcut does not apply.
    std::vector<Eigen::MatrixXd> ws(k);
    auto ws_of = [&](Eigen::Index a) -> const Eigen::MatrixXd& {
        if (ws[a].size() == 0) ws[a] = w_times(dense_of(sigmas[a], w.dim()), w);
        return ws[a];
    };
    double within = 0.0, cross = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
        const double na = double(contrast.n_sizes[a]);
        const double daa = contrast.d(a, a);
        if (daa != 0.0) {
            const double t = as_identity(sigmas[a]) ? trace_w_sigma_sq_exact(sigmas[a], w)
                                                    : trace_product(ws_of(a), ws_of(a));
            within += daa * daa * t / (na * (na - 1.0));
        }
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const double dab = contrast.d(a, b);
            if (dab == 0.0) continue;
            const double nb = double(contrast.n_sizes[b]);
            const double t = as_identity(sigmas[a]) && as_identity(sigmas[b])
                                 ? trace_cross_exact(sigmas[a], sigmas[b], w)
                                 : trace_product(ws_of(a), ws_of(b));
            cross += dab * dab * t / (na * nb);
        }
    }
    return 2.0 * (within + 2.0 * cross);
}

double alternative_variance(const std::vector<Eigen::VectorXd>& mus, std::span<const CovarianceRep> sigmas,
                            const Contrast& contrast, const WeightSpecd& w) {
    const auto k = static_cast<Eigen::Index>(mus.size());
    if (k != contrast.groups() || static_cast<Eigen::Index>(sigmas.size()) != k) {
        throw Error(ErrorKind::InvalidDimension, "means and covariances must match the contrast");
    }
    double total = 0.0;
    for (Eigen::Index b = 0; b < k; ++b) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(w.dim());
        for (Eigen::Index a = 0; a < k; ++a) {
            if (mus[a].size() != w.dim()) throw Error(ErrorKind::InvalidDimension, "mean has wrong dimension");
            u += contrast.d(a, b) * mus[a];
        }
        total += sigma_quadratic(sigmas[b], apply_w(u, w)) / double(contrast.n_sizes[b]);
    }
    return total;
}

}  // namespace glht
