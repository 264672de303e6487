#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glht/contrast.hpp"
#include "glht/covariance.hpp"
#include "glht/error.hpp"
#include "glht/normal.hpp"
#include "glht/weights.hpp"

namespace glht {

/// K groups of observations; group a is an n_a x p matrix, one row per observation.
template <typename Scalar>
struct GroupedSample {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    std::vector<Matrix> groups;

    Eigen::Index groups_count() const { return static_cast<Eigen::Index>(groups.size()); }
    Eigen::Index dim() const { return groups.empty() ? 0 : groups.front().cols(); }

    std::vector<long> sizes() const {
        std::vector<long> n;
        n.reserve(groups.size());
        for (const auto& g : groups) n.push_back(static_cast<long>(g.rows()));
        return n;
    }

    void validate() const {
        if (groups.empty()) throw Error(ErrorKind::InvalidDimension, "sample has no groups");
        const Eigen::Index p = dim();
        if (p < 1) throw Error(ErrorKind::InvalidDimension, "sample dimension must be at least 1");
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i].cols() != p) {
                throw Error(ErrorKind::InvalidDimension, "group " + std::to_string(i + 1) + " has dimension " +
                                                             std::to_string(groups[i].cols()) + ", expected " +
                                                             std::to_string(p));
            }
            if (groups[i].rows() < 4) {
                throw Error(ErrorKind::SampleTooSmall, "group " + std::to_string(i + 1) + " has " +
                                                           std::to_string(groups[i].rows()) +
                                                           " observations, at least 4 are required");
            }
        }
    }
};

using GroupedSampled = GroupedSample<double>;

/// Sample mean and centered rows of one group. The sample covariance is
/// carried implicitly: Sigma_hat = centered^T centered / (n - 1).
template <typename Scalar>
struct GroupSummary {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> centered;

    Eigen::Index n() const { return centered.rows(); }
};

template <typename Scalar>
struct TestResult {
    Scalar t_n{};
    Scalar sigma_hat_sq{};
    std::optional<Scalar> z;
    std::optional<Scalar> p_value;
    bool degenerate_variance = false;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> trace_w_sigma;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> trace_w_sigma_sq;
    // Off-diagonal entries only; the diagonal is left at zero.
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> trace_cross;
};

template <typename Scalar>
GroupSummary<Scalar> summarize_group(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rows) {
    GroupSummary<Scalar> s;
    s.mean = rows.colwise().mean().transpose();
    s.centered = rows.rowwise() - s.mean.transpose();
    return s;
}

template <typename Scalar>
std::vector<GroupSummary<Scalar>> summarize(const GroupedSample<Scalar>& sample) {
    sample.validate();
    std::vector<GroupSummary<Scalar>> out;
    out.reserve(sample.groups.size());
    for (const auto& g : sample.groups) out.push_back(summarize_group<Scalar>(g));
    return out;
}

namespace detail {

template <typename Scalar>
void check_consistent(const std::vector<GroupSummary<Scalar>>& summaries, const Contrast& contrast,
                      const WeightSpec<Scalar>& w) {
    if (summaries.empty()) throw Error(ErrorKind::InvalidDimension, "no groups");
    if (static_cast<Eigen::Index>(summaries.size()) != contrast.groups()) {
        throw Error(ErrorKind::InvalidDimension, "sample has " + std::to_string(summaries.size()) +
                                                     " groups, contrast expects " +
                                                     std::to_string(contrast.groups()));
    }
    for (std::size_t a = 0; a < summaries.size(); ++a) {
        if (summaries[a].mean.size() != w.dim()) {
            throw Error(ErrorKind::InvalidDimension, "group " + std::to_string(a + 1) + " has dimension " +
                                                         std::to_string(summaries[a].mean.size()) +
                                                         ", weights have dimension " + std::to_string(w.dim()));
        }
        if (!contrast.n_sizes.empty() && contrast.n_sizes[a] != summaries[a].n()) {
            throw Error(ErrorKind::InvalidDimension, "contrast was built for different group sizes");
        }
    }
}

template <typename Scalar>
void require_four(Eigen::Index n) {
    if (n < 4) {
        throw Error(ErrorKind::SampleTooSmall,
                    "group has " + std::to_string(n) + " observations, at least 4 are required");
    }
}

/// Trace functionals of one group from its within-group Gram matrix q_ij.
template <typename Scalar>
struct WithinTraces {
    Scalar trace;     // tr(W Sigma_hat)
    Scalar trace_sq;  // unbiased estimate of tr((W Sigma)^2)
};

template <typename Scalar>
WithinTraces<Scalar> within_traces(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q) {
    const Scalar n = static_cast<Scalar>(q.rows());
    const Scalar nm1 = n - 1;
    const Scalar tr = q.trace() / nm1;
    const Scalar tr_of_sq = q.squaredNorm() / (nm1 * nm1);
    const Scalar fourth = q.diagonal().squaredNorm() / nm1;
    const Scalar est = nm1 / (n * (n - 2) * (n - 3)) * (nm1 * (n - 2) * tr_of_sq + tr * tr - n * fourth);
    return {tr, est};
}

}  // namespace detail

/// tr(W Sigma_hat) from the diagonal of the within-group Gram matrix.
template <typename Scalar>
Scalar trace_w_sigma_hat(const GroupSummary<Scalar>& s, const WeightSpec<Scalar>& w) {
    if (s.n() < 2) throw Error(ErrorKind::SampleTooSmall, "trace needs at least 2 observations");
    Scalar sum(0);
    for (Eigen::Index i = 0; i < s.n(); ++i) sum += w_quadratic_self(s.centered.row(i), w);
    return sum / static_cast<Scalar>(s.n() - 1);
}

/// Unbiased estimate of tr((W Sigma)^2):
///   (n-1) / (n (n-2) (n-3)) * ((n-1)(n-2) tr((W S)^2) + tr^2(W S) - n Q),
/// with Q = (n-1)^{-1} sum_i ||W^{1/2}(y_i - ybar)||^4. Costs O(n^2 p).
template <typename Scalar>
Scalar trace_w_sigma_sq_hat(const GroupSummary<Scalar>& s, const WeightSpec<Scalar>& w) {
    detail::require_four<Scalar>(s.n());
    return detail::within_traces<Scalar>(w_gram(s.centered, s.centered, w)).trace_sq;
}

/// tr(W Sigma_hat_a W Sigma_hat_b), an unbiased estimate of tr(W Sigma_a W Sigma_b)
/// for independent groups.
template <typename Scalar>
Scalar trace_cross_hat(const GroupSummary<Scalar>& sa, const GroupSummary<Scalar>& sb,
                       const WeightSpec<Scalar>& w) {
    if (sa.mean.size() != sb.mean.size()) {
        throw Error(ErrorKind::InvalidDimension, "groups have different dimensions");
    }
    const auto g = w_gram(sa.centered, sb.centered, w);
    return g.squaredNorm() / (static_cast<Scalar>(sa.n() - 1) * static_cast<Scalar>(sb.n() - 1));
}

/// T_n = sum_{a,b} d_ab ybar_a^T W ybar_b - sum_a d_aa tr(W Sigma_hat_a) / n_a.
template <typename Scalar>
Scalar t_statistic(const std::vector<GroupSummary<Scalar>>& summaries, const Contrast& contrast,
                   const WeightSpec<Scalar>& w) {
    detail::check_consistent(summaries, contrast, w);
    const auto k = static_cast<Eigen::Index>(summaries.size());
    Scalar total(0);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            total += static_cast<Scalar>(contrast.d(a, b)) * w_quadratic(summaries[a].mean, summaries[b].mean, w);
        }
    }
    for (Eigen::Index a = 0; a < k; ++a) {
        total -= static_cast<Scalar>(contrast.d(a, a)) * trace_w_sigma_hat(summaries[a], w) /
                 static_cast<Scalar>(summaries[a].n());
    }
    return total;
}

template <typename Scalar>
Scalar t_statistic(const GroupedSample<Scalar>& sample, const Contrast& contrast, const WeightSpec<Scalar>& w) {
    return t_statistic(summarize(sample), contrast, w);
}

/// Brute-force U-statistic form: sum_a d_aa S_aa + sum_{a!=b} d_ab S_ab with
/// S_aa = sum_{i!=j} y_ai^T W y_aj / (n_a (n_a - 1)) and
/// S_ab = sum_{i,j} y_ai^T W y_bj / (n_a n_b). O(n^2 p); for verification.
template <typename Scalar>
Scalar t_statistic_oracle(const GroupedSample<Scalar>& sample, const Contrast& contrast,
                          const WeightSpec<Scalar>& w) {
    const auto k = sample.groups_count();
    if (k != contrast.groups()) throw Error(ErrorKind::InvalidDimension, "group count mismatch");
    Scalar total(0);
    for (Eigen::Index a = 0; a < k; ++a) {
        const auto& ya = sample.groups[a];
        for (Eigen::Index b = 0; b < k; ++b) {
            const auto& yb = sample.groups[b];
            Scalar sum(0);
            for (Eigen::Index i = 0; i < ya.rows(); ++i) {
                for (Eigen::Index j = 0; j < yb.rows(); ++j) {
                    if (a == b && i == j) continue;
                    sum += w_quadratic(ya.row(i), yb.row(j), w);
                }
            }
            const Scalar na = static_cast<Scalar>(ya.rows());
            const Scalar nb = static_cast<Scalar>(yb.rows());
            const Scalar s = a == b ? sum / (na * (na - 1)) : sum / (na * nb);
            total += static_cast<Scalar>(contrast.d(a, b)) * s;
        }
    }
    return total;
}

/// Unbiased estimate of the null variance:
///   2 (sum_a d_aa^2 trhat((W S_a)^2) / (n_a (n_a-1)) + sum_{a!=b} d_ab^2 tr(W S_a W S_b) / (n_a n_b)).
template <typename Scalar>
Scalar variance_hat(const std::vector<GroupSummary<Scalar>>& summaries, const Contrast& contrast,
                    const WeightSpec<Scalar>& w) {
    detail::check_consistent(summaries, contrast, w);
    const auto k = static_cast<Eigen::Index>(summaries.size());
    Scalar within(0), cross(0);
    for (Eigen::Index a = 0; a < k; ++a) {
        const Scalar na = static_cast<Scalar>(summaries[a].n());
        const Scalar daa = static_cast<Scalar>(contrast.d(a, a));
        within += daa * daa * trace_w_sigma_sq_hat(summaries[a], w) / (na * (na - 1));
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const Scalar dab = static_cast<Scalar>(contrast.d(a, b));
            if (dab == Scalar(0)) continue;
            const Scalar nb = static_cast<Scalar>(summaries[b].n());
            cross += dab * dab * trace_cross_hat(summaries[a], summaries[b], w) / (na * nb);
        }
    }
    // Unordered pairs each appear twice in the sum over a != b.
    return Scalar(2) * (within + Scalar(2) * cross);
}

/// Full test: statistic, variance estimate, one-sided z and p-value. Each
/// Gram matrix is formed once and shared between the trace functionals.
template <typename Scalar>
TestResult<Scalar> run_test(const std::vector<GroupSummary<Scalar>>& summaries, const Contrast& contrast,
                            const WeightSpec<Scalar>& w) {
    detail::check_consistent(summaries, contrast, w);
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto k = static_cast<Eigen::Index>(summaries.size());
    TestResult<Scalar> r;
    r.trace_w_sigma = Vector::Zero(k);
    r.trace_w_sigma_sq = Vector::Zero(k);
    r.trace_cross = Matrix::Zero(k, k);

    Scalar t(0), within(0), cross(0);
    for (Eigen::Index a = 0; a < k; ++a) {
        detail::require_four<Scalar>(summaries[a].n());
        const auto tr = detail::within_traces<Scalar>(w_gram(summaries[a].centered, summaries[a].centered, w));
        r.trace_w_sigma(a) = tr.trace;
        r.trace_w_sigma_sq(a) = tr.trace_sq;
        const Scalar na = static_cast<Scalar>(summaries[a].n());
        const Scalar daa = static_cast<Scalar>(contrast.d(a, a));
        t -= daa * tr.trace / na;
        within += daa * daa * tr.trace_sq / (na * (na - 1));
    }
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            t += static_cast<Scalar>(contrast.d(a, b)) * w_quadratic(summaries[a].mean, summaries[b].mean, w);
        }
    }
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const Scalar c = trace_cross_hat(summaries[a], summaries[b], w);
            r.trace_cross(a, b) = r.trace_cross(b, a) = c;
            const Scalar dab = static_cast<Scalar>(contrast.d(a, b));
            cross += dab * dab * c / (static_cast<Scalar>(summaries[a].n()) * static_cast<Scalar>(summaries[b].n()));
        }
    }
    r.t_n = t;
    r.sigma_hat_sq = Scalar(2) * (within + Scalar(2) * cross);
    if (r.sigma_hat_sq > Scalar(0)) {
        r.z = t / std::sqrt(r.sigma_hat_sq);
        r.p_value = static_cast<Scalar>(normal_sf(static_cast<double>(*r.z)));
    } else {
        r.degenerate_variance = true;
    }
    return r;
}

template <typename Scalar>
TestResult<Scalar> run_test(const GroupedSample<Scalar>& sample, const Contrast& contrast,
                            const WeightSpec<Scalar>& w) {
    return run_test(summarize(sample), contrast, w);
}

/// sum_{a,b} d_ab mu_a^T W mu_b, the closed form of the random integration.
template <typename Scalar>
Scalar signal_norm(const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& mus, const Contrast& contrast,
                   const WeightSpec<Scalar>& w) {
    const auto k = static_cast<Eigen::Index>(mus.size());
    if (k != contrast.groups()) throw Error(ErrorKind::InvalidDimension, "mean count does not match contrast");
    Scalar total(0);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            total += static_cast<Scalar>(contrast.d(a, b)) * w_quadratic(mus[a], mus[b], w);
    return total;
}

/// Phi(-z_level + signal / sigma0).
double power_prediction(double signal, double sigma0, double level);

/// Exact tr(W Sigma).
double trace_w_sigma_exact(const CovarianceRep& sigma, const WeightSpecd& w);
/// Exact tr((W Sigma)^2).
double trace_w_sigma_sq_exact(const CovarianceRep& sigma, const WeightSpecd& w);
/// Exact tr(W Sigma_a W Sigma_b).
double trace_cross_exact(const CovarianceRep& sa, const CovarianceRep& sb, const WeightSpecd& w);

/// Null variance of T_n from the true covariances.
double null_variance_exact(std::span<const CovarianceRep> sigmas, const Contrast& contrast, const WeightSpecd& w);

/// Variance of the signal-noise cross term S_n under a fixed alternative:
/// sum_{a,b,c} d_ab d_bc mu_a^T W Sigma_b W mu_c / n_b.
double alternative_variance(const std::vector<Eigen::VectorXd>& mus, std::span<const CovarianceRep> sigmas,
                            const Contrast& contrast, const WeightSpecd& w);

}  // namespace glht
