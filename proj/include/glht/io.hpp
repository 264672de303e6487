#pragma once

#include <istream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "glht/contrast.hpp"
#include "glht/montecarlo.hpp"
#include "glht/statistic.hpp"
#include "glht/weights.hpp"

namespace glht {

/// Grouped observations read from CSV; labels[a] names sample.groups[a].
struct Dataset {
    std::vector<std::string> labels;
    GroupedSampled sample;
};

/// Reads `label,x1,...,xp` rows after a header line. Groups are ordered by
/// first appearance unless `order` lists every label explicitly.
/// Row numbers in errors count file lines, header included.
Dataset read_dataset_csv(std::istream& in, const std::optional<std::vector<std::string>>& order = std::nullopt);

/// Header `group,x1,...,xp`; values in shortest round-trip form.
std::string write_dataset_csv(const Dataset& data);

/// Contrast given as a preset name ("manova", "pairwise:<a>,<b>") or as
/// explicit rows.
using ContrastSpec = std::variant<std::string, Eigen::MatrixXd>;

struct RunConfig {
    ContrastSpec contrast = std::string("manova");
    ExponentMode exponent_mode = ExponentMode::PaperLiteral;
    double level = 0.05;
    std::optional<WeightSpecd> weights;
    std::optional<std::vector<std::string>> groups;

    // Simulation settings; lists expand into a grid.
    std::vector<Eigen::Index> dims;
    std::vector<long> n_sizes;
    std::vector<std::string> cases;
    std::vector<Distribution> models;
    std::vector<double> r_values;
    std::vector<double> t_values;
    bool has_alternative = false;
    Eigen::Index target_group = 3;
    long replicates = 2000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool keep_records = false;
};

/// Schema-checked parse; unknown keys are rejected with ErrorKind::Config.
RunConfig parse_run_config(const nlohmann::json& doc);

/// Resolves the contrast spec against the group labels.
Eigen::MatrixXd resolve_contrast(const ContrastSpec& spec, const std::vector<std::string>& labels);

/// Base simulation config (first grid cell) for a parsed run config.
SimulationConfig simulation_base(const RunConfig& cfg);

nlohmann::json to_json(const TestResult<double>& r, const std::vector<std::string>& labels,
                       const std::vector<long>& n_sizes, Eigen::Index p, double level);
nlohmann::json to_json(const CalibrationReport& r);

}  // namespace glht
