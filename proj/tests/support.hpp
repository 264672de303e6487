#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "glht/contrast.hpp"
#include "glht/statistic.hpp"
#include "glht/weights.hpp"

namespace glht::testing {

inline double rel_err(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1e-300});
    return std::abs(got - want) / scale;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
    return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1); }

inline long uniform_int(std::mt19937_64& rng, long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(rng);
}

inline Eigen::MatrixXd dense_w(const WeightSpecd& w) {
    Eigen::MatrixXd m = w.a * w.a.transpose();
    m.diagonal() += w.beta_sq;
    return m;
}

/// Full-row-rank q x K contrast with rows summing to zero.
inline Eigen::MatrixXd random_contrast(std::mt19937_64& rng, Eigen::Index q, Eigen::Index k) {
    for (;;) {
        Eigen::MatrixXd g = random_matrix(rng, q, k);
        g.colwise() -= g.rowwise().mean();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
        const auto& s = svd.singularValues();
        if (s(q - 1) > 1e-3 * s(0)) return g;
    }
}

struct Instance {
    GroupedSampled sample;
    Contrast contrast;
    WeightSpecd weights;
};

/// K in {2,3,4}, n_a in [4,12], p in [1,30], random contrast, default weights.
inline Instance random_instance(std::mt19937_64& rng, ExponentMode mode = ExponentMode::PaperLiteral) {
    Instance inst;
    const long k = uniform_int(rng, 2, 4);
    const long p = uniform_int(rng, 1, 30);
    const long q = uniform_int(rng, 1, k - 1);
    std::vector<long> n;
    for (long a = 0; a < k; ++a) {
        n.push_back(uniform_int(rng, 4, 12));
        Eigen::MatrixXd g = random_matrix(rng, n.back(), p);
        g.rowwise() += random_vector(rng, p).transpose();
        inst.sample.groups.push_back(g);
    }
    inst.contrast = build_contrast({random_contrast(rng, q, k), mode}, n);
    inst.weights = default_weights(p);
    return inst;
}

/// Literal unbiased tr((W Sigma)^2) estimate from materialized W and Sigma_hat.
inline double dense_trace_sq_hat(const Eigen::MatrixXd& rows, const WeightSpecd& w) {
    const double n = double(rows.rows());
    const Eigen::MatrixXd c = rows.rowwise() - rows.colwise().mean();
    const Eigen::MatrixXd s = c.transpose() * c / (n - 1);
    const Eigen::MatrixXd wm = dense_w(w);
    const Eigen::MatrixXd ws = wm * s;
    const double tr = ws.trace();
    const double tr_sq = (ws * ws).trace();
    double q = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        const double v = c.row(i) * wm * c.row(i).transpose();
        q += v * v;
    }
    q /= n - 1;
    return (n - 1) / (n * (n - 2) * (n - 3)) * ((n - 1) * (n - 2) * tr_sq + tr * tr - n * q);
}

/// tr(W Sigma_hat_a W Sigma_hat_b) from materialized matrices.
inline double dense_trace_cross(const Eigen::MatrixXd& ya, const Eigen::MatrixXd& yb, const WeightSpecd& w) {
    auto cov = [](const Eigen::MatrixXd& y) {
        const Eigen::MatrixXd c = y.rowwise() - y.colwise().mean();
        return Eigen::MatrixXd(c.transpose() * c / double(y.rows() - 1));
    };
    const Eigen::MatrixXd wm = dense_w(w);
    return (wm * cov(ya) * wm * cov(yb)).trace();
}

}  // namespace glht::testing
