#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glht/contrast.hpp"
#include "glht/datagen.hpp"
#include "glht/statistic.hpp"
#include "glht/weights.hpp"

namespace glht {

struct SimulationConfig {
    Eigen::Index p = 0;
    std::vector<long> n_sizes;
    ContrastInput contrast;
    // Empty means default_weights(p).
    std::optional<WeightSpecd> weights;
    std::string cov_case = "case1";
    // Empty means covariance_case(cov_case, K).
    std::vector<CovarianceModel> covariances;
    Distribution dist = Distribution::StandardNormal;
    // Empty means the null hypothesis (all means zero).
    std::optional<MeanAlternative> alternative;
    long replicates = 2000;
    double level = 0.05;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool keep_records = false;
};

struct ReplicateRecord {
    long id = 0;
    double t_n = 0.0;
    double sigma_hat_sq = 0.0;
    std::optional<double> z;
    bool rejected = false;
};

struct CalibrationReport {
    long replicates = 0;
    long rejections = 0;
    long degenerate = 0;
    // Over non-degenerate replicates; a degenerate replicate never rejects.
    double rejection_rate = 0.0;
    double rejection_se = 0.0;
    double critical_value = 0.0;
    double z_mean = 0.0;
    double z_variance = 0.0;
    double ks_distance = 0.0;
    double t_mean = 0.0;
    double t_variance = 0.0;
    double variance_hat_mean = 0.0;
    double null_variance = 0.0;
    // Empirical Var(T_n) / null variance; empty when the null variance is zero.
    std::optional<double> variance_ratio;
    double signal = 0.0;
    std::optional<double> predicted_power;
    std::vector<ReplicateRecord> records;
};

/// Resolved per-run quantities shared by every replicate.
struct PreparedSimulation {
    Contrast contrast;
    WeightSpecd weights;
    std::vector<CovarianceModel> covariances;
    std::vector<Eigen::VectorXd> means;
};

/// Checks the configuration and resolves contrast, weights, covariances and
/// means. Any inconsistency surfaces as an ErrorKind::Config error.
PreparedSimulation prepare_simulation(const SimulationConfig& config);

/// Sample of replicate `replicate_id` (1-based) for a prepared configuration.
GroupedSampled simulate_sample(const SimulationConfig& config, const PreparedSimulation& prepared,
                               std::uint64_t replicate_id);

/// Runs replicates 1..R across `threads` workers. The report depends only on
/// (config, seed): results are combined in replicate-id order.
CalibrationReport run_replicates(const SimulationConfig& config);

/// sup_x |F_n(x) - Phi(x)| of the sample against the standard normal.
double ks_distance_normal(std::vector<double> sample);

struct SizeGrid {
    std::vector<Eigen::Index> dims;
    std::vector<Distribution> models;
    std::vector<std::string> cases;
};

struct SizeRow {
    std::string cov_case;
    Eigen::Index p = 0;
    Distribution model = Distribution::StandardNormal;
    CalibrationReport report;
};

/// Null rejection rates over dims x models x cases, ordered case, p, model.
std::vector<SizeRow> size_table(const SimulationConfig& base, const SizeGrid& grid,
                                const std::function<void(const SizeRow&)>& on_row = {});
std::string size_table_csv(const SimulationConfig& base, const std::vector<SizeRow>& rows);

struct PowerRow {
    double r = 0.0;
    double t = 0.0;
    Eigen::Index p = 0;
    double empirical_power = 0.0;
    double std_error = 0.0;
    double predicted_power = 0.0;
    CalibrationReport report;
};

/// Empirical power over r x t at base.p, with the asymptotic prediction
/// Phi(-z_level + RI / sigma) from the true parameters.
std::vector<PowerRow> power_curve(const SimulationConfig& base, const std::vector<double>& r_values,
                                  const std::vector<double>& t_values,
                                  const std::function<void(const PowerRow&)>& on_row = {});
std::string power_curve_csv(const std::vector<PowerRow>& rows);

/// Empirical Var(T_n) over the replicates divided by the exact null variance;
/// empty when the exact variance is zero.
std::optional<double> variance_diagnostic(const SimulationConfig& null_config);

struct RiCheck {
    double monte_carlo = 0.0;
    double closed_form = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of the weighted integral of ||sum_a g_a delta^T mu_a||^2
/// with delta_i ~ N(a_i, beta_i^2) independent, against signal_norm.
RiCheck ri_integration_check(const std::vector<Eigen::VectorXd>& mus, const Contrast& contrast, const WeightSpecd& w,
                             long draws, std::uint64_t seed = 1);

std::string replicate_log_csv(const CalibrationReport& report);

}  // namespace glht
