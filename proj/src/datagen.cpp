#include "glht/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace glht {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t group)
    : engine_(splitmix64(splitmix64(splitmix64(seed) ^ replicate) ^ group)) {}

double RandomStream::uniform() {
    // 53 random bits, shifted half a step off zero.
    return (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

double excess_kurtosis(Distribution d) {
    switch (d) {
        case Distribution::StandardNormal: return 0.0;
        case Distribution::StandardizedT4: return std::numeric_limits<double>::infinity();
        case Distribution::StandardizedChiSq1: return 12.0;
    }
    return 0.0;
}

double draw_innovation(Distribution d, RandomStream& rng) {
    switch (d) {
        case Distribution::StandardNormal:
            return rng.normal();
        case Distribution::StandardizedT4: {
            const double n = rng.normal();
            // chi^2 with 4 degrees of freedom is a sum of two Exp(1/2) draws.
            const double v = -2.0 * std::log(rng.uniform() * rng.uniform());
            return n / std::sqrt(v / 4.0) / std::numbers::sqrt2;
        }
        case Distribution::StandardizedChiSq1: {
            const double n = rng.normal();
            return (n * n - 1.0) / std::numbers::sqrt2;
        }
    }
    return 0.0;
}

Eigen::VectorXd mean_alternative_vector(Eigen::Index p, const MeanAlternative& alt, std::span<const long> n_sizes) {
    if (p < 1) throw Error(ErrorKind::InvalidDimension, "dimension must be at least 1");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    if (alt.r == 0.0) return mu;
    double inv_sum = 0.0;
    for (long n : n_sizes) inv_sum += 1.0 / double(n);
    const double value = std::sqrt(2.0 * alt.r * inv_sum * std::log10(double(p)));
    auto nonzero = static_cast<Eigen::Index>(std::floor(std::pow(double(p), 1.0 - alt.t)));
    nonzero = std::clamp<Eigen::Index>(nonzero, 0, p);
    mu.head(nonzero).setConstant(value);
    return mu;
}

GroupedSampled gen_sample(Eigen::Index p, std::span<const long> n_sizes, std::span<const CovarianceModel> covariances,
                          Distribution dist, const std::vector<Eigen::VectorXd>& means, std::uint64_t seed,
                          std::uint64_t replicate_id) {
    const std::size_t k = n_sizes.size();
    if (covariances.size() != k || means.size() != k) {
        throw Error(ErrorKind::InvalidDimension, "need one covariance and one mean per group");
    }
    GroupedSampled sample;
    sample.groups.reserve(k);
    Eigen::VectorXd z(p);
    for (std::size_t a = 0; a < k; ++a) {
        if (means[a].size() != p) throw Error(ErrorKind::InvalidDimension, "mean vector has wrong dimension");
        RandomStream rng(seed, replicate_id, a);
        Eigen::MatrixXd rows(n_sizes[a], p);
        for (long i = 0; i < n_sizes[a]; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) z(j) = draw_innovation(dist, rng);
            rows.row(i) = (covariances[a].apply_factor(z) + means[a]).transpose();
        }
        sample.groups.push_back(std::move(rows));
    }
    return sample;
}

std::vector<CovarianceModel> covariance_case(const std::string& name, Eigen::Index groups) {
    if (groups != 4) {
        throw Error(ErrorKind::Config, "covariance preset '" + name + "' is defined for 4 groups, got " +
                                           std::to_string(groups));
    }
    if (name == "case1") return std::vector<CovarianceModel>(4, CovarianceModel::identity(3.0));
    if (name == "case3") return std::vector<CovarianceModel>(4, CovarianceModel::identity(4.0));
    if (name == "case2") {
        return {CovarianceModel::ar(0.4, 1.0), CovarianceModel::ar(0.4, 2.0), CovarianceModel::ar(0.4, 1.5),
                CovarianceModel::ar(0.4, 4.0)};
    }
    if (name == "case4") {
        return {CovarianceModel::ar(0.5, 1.0), CovarianceModel::ar(0.5, 1.5), CovarianceModel::ar(0.5, 2.5),
                CovarianceModel::ar(0.5, 3.0)};
    }
    throw Error(ErrorKind::Config, "unknown covariance case '" + name + "'");
}

Distribution distribution_from_name(const std::string& name) {
    if (name == "model1") return Distribution::StandardNormal;
    if (name == "model2") return Distribution::StandardizedT4;
    if (name == "model3") return Distribution::StandardizedChiSq1;
    throw Error(ErrorKind::Config, "unknown distribution model '" + name + "'");
}

std::string distribution_name(Distribution d) {
    switch (d) {
        case Distribution::StandardNormal: return "model1";
        case Distribution::StandardizedT4: return "model2";
        case Distribution::StandardizedChiSq1: return "model3";
    }
    return "model1";
}

}  // namespace glht
