#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glht/covariance.hpp"
#include "glht/statistic.hpp"

namespace glht {

/// Law of the i.i.d. standardized factor components.
enum class Distribution {
    StandardNormal,      // N(0, 1)
    StandardizedT4,      // t_4 / sqrt(2); infinite fourth moment
    StandardizedChiSq1,  // (chi^2_1 - 1) / sqrt(2)
};

/// Excess kurtosis E z^4 - 3 of the component law (infinity for t_4).
double excess_kurtosis(Distribution d);

/// Random stream for one (seed, replicate, group) triple.
///
/// The 64-bit engine state is std::mt19937_64 seeded with
/// splitmix64(splitmix64(splitmix64(seed) ^ replicate) ^ group), so every
/// replicate and group owns an independent stream and replicates can be
/// generated in any order. Uniforms and normals are derived here rather than
/// through <random> distributions, whose output is implementation-defined.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t group);
    explicit RandomStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal (Box-Muller, second deviate cached).
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

double draw_innovation(Distribution d, RandomStream& rng);

/// Sparse mean shift: the leading floor(p^{1-t}) coordinates share the value
/// sqrt(2 r (sum_a 1/n_a) log10 p), the rest are zero.
struct MeanAlternative {
    double r = 0.0;
    double t = 0.0;
    Eigen::Index target_group = 3;  // zero-based; the last of four groups
};

Eigen::VectorXd mean_alternative_vector(Eigen::Index p, const MeanAlternative& alt, std::span<const long> n_sizes);

/// Factor-model sample: row i of group a is Gamma_a z + mu_a, with z made of
/// p i.i.d. draws from `dist`. Deterministic in (seed, replicate_id).
GroupedSampled gen_sample(Eigen::Index p, std::span<const long> n_sizes, std::span<const CovarianceModel> covariances,
                          Distribution dist, const std::vector<Eigen::VectorXd>& means, std::uint64_t seed,
                          std::uint64_t replicate_id);

/// Named covariance presets for four groups:
///   case1: 3I for all groups
///   case2: AR(0.4) scaled by (1, 2, 1.5, 4)
///   case3: 4I for all groups
///   case4: AR(0.5) scaled by (1, 1.5, 2.5, 3)
std::vector<CovarianceModel> covariance_case(const std::string& name, Eigen::Index groups);

/// "model1" | "model2" | "model3".
Distribution distribution_from_name(const std::string& name);
std::string distribution_name(Distribution d);

}  // namespace glht
