#include "glht/io.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "glht/format.hpp"
#include "glht/normal.hpp"

namespace glht {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(long row, const std::string& what) {
    throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ": " + what);
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& field, long row, std::size_t column) {
    if (field.empty()) parse_error(row, "missing value in column " + std::to_string(column));
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        parse_error(row, "column " + std::to_string(column) + " is not a finite number: '" + field + "'");
    }
    return v;
}

double get_number(const json& j, const std::string& key) {
    if (!j.is_number()) config_error("'" + key + "' must be a number");
    return j.get<double>();
}

long get_integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) config_error("'" + key + "' must be an integer");
    return j.get<long>();
}

std::vector<double> number_list(const json& j, const std::string& key) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array() || j.empty()) config_error("'" + key + "' must be a number or a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(get_number(e, key));
    return out;
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
    if (j.is_string()) return {j.get<std::string>()};
    if (!j.is_array() || j.empty()) config_error("'" + key + "' must be a string or a non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) config_error("'" + key + "' entries must be strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) config_error("'contrast' must be a preset name or a non-empty array");
    if (j.front().is_number()) {
        Eigen::MatrixXd m(1, static_cast<Eigen::Index>(j.size()));
        for (std::size_t c = 0; c < j.size(); ++c) m(0, static_cast<Eigen::Index>(c)) = get_number(j[c], "contrast");
        return m;
    }
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) config_error("'contrast' rows must be non-empty arrays of numbers");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) config_error("'contrast' rows must all have the same length");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = get_number(j[r][c], "contrast");
        }
    }
    return m;
}

Eigen::Index find_group(const std::string& name, const std::vector<std::string>& labels) {
    const auto it = std::find(labels.begin(), labels.end(), name);
    if (it != labels.end()) return it - labels.begin();
    long idx = 0;
    auto res = std::from_chars(name.data(), name.data() + name.size(), idx);
    if (res.ec == std::errc() && res.ptr == name.data() + name.size() && idx >= 1 &&
        idx <= static_cast<long>(labels.size())) {
        return idx - 1;
    }
    config_error("pairwise contrast names unknown group '" + name + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Dataset read_dataset_csv(std::istream& in, const std::optional<std::vector<std::string>>& order) {
    std::string line;
    long row = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!trim(line).empty()) {
            width = split_fields(line).size();
            break;
        }
    }
    if (width == 0) throw Error(ErrorKind::Parse, "dataset is empty");
    if (width < 2) parse_error(row, "header needs a label column and at least one feature column");
    const auto p = static_cast<Eigen::Index>(width - 1);

    std::vector<std::string> seen;
    std::map<std::string, std::vector<std::vector<double>>> rows;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != width) {
            parse_error(row, "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) parse_error(row, "missing group label");
        std::vector<double> values(static_cast<std::size_t>(p));
        for (std::size_t c = 1; c < width; ++c) values[c - 1] = parse_number(fields[c], row, c + 1);
        auto [it, inserted] = rows.try_emplace(fields[0]);
        if (inserted) seen.push_back(fields[0]);
        it->second.push_back(std::move(values));
    }

    Dataset data;
    if (order) {
        const std::set<std::string> want(order->begin(), order->end());
        const std::set<std::string> have(seen.begin(), seen.end());
        if (want.size() != order->size() || want != have) {
            config_error("'groups' must list every group label in the data exactly once");
        }
        data.labels = *order;
    } else {
        data.labels = seen;
    }
    if (data.labels.size() < 2) throw Error(ErrorKind::Parse, "dataset needs at least 2 distinct group labels");
    for (const auto& label : data.labels) {
        const auto& g = rows.at(label);
        if (g.size() < 4) {
            throw Error(ErrorKind::SampleTooSmall, "group '" + label + "' has " + std::to_string(g.size()) +
                                                       " observations, at least 4 are required");
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(g.size()), p);
        for (std::size_t i = 0; i < g.size(); ++i)
            for (Eigen::Index j = 0; j < p; ++j) m(static_cast<Eigen::Index>(i), j) = g[i][static_cast<std::size_t>(j)];
        data.sample.groups.push_back(std::move(m));
    }
    return data;
}

std::string write_dataset_csv(const Dataset& data) {
    std::ostringstream out;
    const Eigen::Index p = data.sample.dim();
    out << "group";
    for (Eigen::Index j = 0; j < p; ++j) out << ",x" << (j + 1);
    out << '\n';
    for (std::size_t a = 0; a < data.sample.groups.size(); ++a) {
        const auto& g = data.sample.groups[a];
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            out << data.labels[a];
            for (Eigen::Index j = 0; j < p; ++j) out << ',' << format_double(g(i, j));
            out << '\n';
        }
    }
    return out.str();
}

RunConfig parse_run_config(const json& doc) {
    if (!doc.is_object()) config_error("configuration must be a JSON object");
    static const std::set<std::string> known = {"contrast", "exponent_mode", "level",     "weights",  "groups",
                                                "p",        "n_sizes",       "case",      "model",    "alternative",
                                                "replicates", "seed",        "threads",   "keep_records"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) config_error("unknown key '" + key + "'");
    }
    RunConfig cfg;
    if (doc.contains("contrast")) {
        const auto& c = doc["contrast"];
        if (c.is_string()) {
            const auto s = c.get<std::string>();
            if (s != "manova" && s.rfind("pairwise:", 0) != 0) config_error("unknown contrast preset '" + s + "'");
            cfg.contrast = s;
        } else {
            cfg.contrast = matrix_from_json(c);
        }
    }
    if (doc.contains("exponent_mode")) {
        const auto& m = doc["exponent_mode"];
        if (m == "paper_literal") {
            cfg.exponent_mode = ExponentMode::PaperLiteral;
        } else if (m == "inverse_root") {
            cfg.exponent_mode = ExponentMode::InverseRoot;
        } else {
            config_error("'exponent_mode' must be \"paper_literal\" or \"inverse_root\"");
        }
    }
    if (doc.contains("level")) {
        cfg.level = get_number(doc["level"], "level");
        if (!(cfg.level > 0.0 && cfg.level < 1.0)) config_error("'level' must lie strictly between 0 and 1");
    }
    if (doc.contains("weights")) {
        const auto& w = doc["weights"];
        if (w.is_string()) {
            if (w != "default") config_error("'weights' must be \"default\" or an object with 'a' and 'beta_sq'");
        } else if (w.is_object()) {
            for (const auto& [key, value] : w.items()) {
                if (key != "a" && key != "beta_sq") config_error("unknown key 'weights." + key + "'");
            }
            if (!w.contains("a") || !w.contains("beta_sq")) config_error("'weights' needs both 'a' and 'beta_sq'");
            const auto a = number_list(w["a"], "weights.a");
            const auto b = number_list(w["beta_sq"], "weights.beta_sq");
            try {
                cfg.weights = WeightSpecd(Eigen::Map<const Eigen::VectorXd>(a.data(), Eigen::Index(a.size())),
                                          Eigen::Map<const Eigen::VectorXd>(b.data(), Eigen::Index(b.size())));
            } catch (const Error& e) {
                config_error(std::string("weights: ") + e.what());
            }
        } else {
            config_error("'weights' must be \"default\" or an object with 'a' and 'beta_sq'");
        }
    }
    if (doc.contains("groups")) cfg.groups = string_list(doc["groups"], "groups");

    if (doc.contains("p")) {
        for (double v : number_list(doc["p"], "p")) {
            if (v < 1 || v != std::floor(v)) config_error("'p' entries must be positive integers");
            cfg.dims.push_back(static_cast<Eigen::Index>(v));
        }
    }
    if (doc.contains("n_sizes")) {
        const auto& n = doc["n_sizes"];
        if (!n.is_array()) config_error("'n_sizes' must be an array of integers");
        for (const auto& e : n) cfg.n_sizes.push_back(get_integer(e, "n_sizes"));
    }
    if (doc.contains("case")) cfg.cases = string_list(doc["case"], "case");
    if (doc.contains("model")) {
        for (const auto& m : string_list(doc["model"], "model")) cfg.models.push_back(distribution_from_name(m));
    }
    if (doc.contains("alternative") && !doc["alternative"].is_null()) {
        const auto& alt = doc["alternative"];
        if (!alt.is_object()) config_error("'alternative' must be null or an object");
        for (const auto& [key, value] : alt.items()) {
            if (key != "r" && key != "t" && key != "target_group") config_error("unknown key 'alternative." + key + "'");
        }
        if (!alt.contains("r") || !alt.contains("t")) config_error("'alternative' needs 'r' and 't'");
        cfg.has_alternative = true;
        cfg.r_values = number_list(alt["r"], "alternative.r");
        cfg.t_values = number_list(alt["t"], "alternative.t");
        cfg.target_group = alt.contains("target_group") ? get_integer(alt["target_group"], "alternative.target_group") - 1
                                                        : -1;
    } else {
        cfg.target_group = -1;
    }
    if (doc.contains("replicates")) cfg.replicates = get_integer(doc["replicates"], "replicates");
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) config_error("'seed' must be a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("threads")) {
        const long t = get_integer(doc["threads"], "threads");
        if (t < 1) config_error("'threads' must be at least 1");
        cfg.threads = static_cast<unsigned>(t);
    }
    if (doc.contains("keep_records")) {
        if (!doc["keep_records"].is_boolean()) config_error("'keep_records' must be a boolean");
        cfg.keep_records = doc["keep_records"].get<bool>();
    }
    return cfg;
}

Eigen::MatrixXd resolve_contrast(const ContrastSpec& spec, const std::vector<std::string>& labels) {
    const auto k = static_cast<Eigen::Index>(labels.size());
    if (const auto* m = std::get_if<Eigen::MatrixXd>(&spec)) {
        if (m->cols() != k) {
            config_error("contrast has " + std::to_string(m->cols()) + " columns but the data has " +
                         std::to_string(k) + " groups");
        }
        return *m;
    }
    const auto& name = std::get<std::string>(spec);
    if (name == "manova") return manova_contrast(k);
    const std::string rest = name.substr(std::string("pairwise:").size());
    const auto comma = rest.find(',');
    if (comma == std::string::npos) config_error("pairwise contrast must look like \"pairwise:<a>,<b>\"");
    const auto first = find_group(trim(rest.substr(0, comma)), labels);
    const auto second = find_group(trim(rest.substr(comma + 1)), labels);
    if (first == second) config_error("pairwise contrast needs two different groups");
    return pairwise_contrast(k, first, second);
}

SimulationConfig simulation_base(const RunConfig& cfg) {
    if (cfg.dims.empty()) config_error("simulation needs 'p'");
    if (cfg.n_sizes.empty()) config_error("simulation needs 'n_sizes'");
    SimulationConfig sim;
    sim.p = cfg.dims.front();
    sim.n_sizes = cfg.n_sizes;
    std::vector<std::string> labels;
    for (std::size_t a = 0; a < cfg.n_sizes.size(); ++a) labels.push_back("g" + std::to_string(a + 1));
    sim.contrast.g_tilde = resolve_contrast(cfg.contrast, labels);
    sim.contrast.exponent_mode = cfg.exponent_mode;
    sim.weights = cfg.weights;
    sim.cov_case = cfg.cases.empty() ? "case1" : cfg.cases.front();
    sim.dist = cfg.models.empty() ? Distribution::StandardNormal : cfg.models.front();
    if (cfg.has_alternative) {
        MeanAlternative alt;
        alt.r = cfg.r_values.front();
        alt.t = cfg.t_values.front();
        alt.target_group =
            cfg.target_group >= 0 ? cfg.target_group : static_cast<Eigen::Index>(cfg.n_sizes.size()) - 1;
        sim.alternative = alt;
    }
    sim.replicates = cfg.replicates;
    sim.level = cfg.level;
    sim.seed = cfg.seed;
    sim.threads = cfg.threads;
    sim.keep_records = cfg.keep_records;
    return sim;
}

json to_json(const TestResult<double>& r, const std::vector<std::string>& labels, const std::vector<long>& n_sizes,
             Eigen::Index p, double level) {
    json groups = json::array();
    for (std::size_t a = 0; a < labels.size(); ++a) {
        groups.push_back({{"label", labels[a]},
                          {"n", n_sizes[a]},
                          {"trace_w_sigma", r.trace_w_sigma(Eigen::Index(a))},
                          {"trace_w_sigma_sq", r.trace_w_sigma_sq(Eigen::Index(a))}});
    }
    json cross = json::array();
    for (Eigen::Index a = 0; a < r.trace_cross.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < r.trace_cross.cols(); ++b) row.push_back(r.trace_cross(a, b));
        cross.push_back(row);
    }
    json reject = nullptr;
    if (r.z) reject = *r.z >= normal_upper_quantile(level);
    return {{"statistic", r.t_n},
            {"sigma_hat_sq", r.sigma_hat_sq},
            {"z", optional_number(r.z)},
            {"p_value", optional_number(r.p_value)},
            {"level", level},
            {"reject", reject},
            {"p", p},
            {"groups", groups},
            {"trace_cross", cross},
            {"flags", {{"degenerate_variance", r.degenerate_variance}}}};
}

json to_json(const CalibrationReport& r) {
    return {{"replicates", r.replicates},
            {"rejections", r.rejections},
            {"rejection_rate", r.rejection_rate},
            {"rejection_se", r.rejection_se},
            {"degenerate", r.degenerate},
            {"critical_value", r.critical_value},
            {"z_mean", r.z_mean},
            {"z_variance", r.z_variance},
            {"ks_distance", r.ks_distance},
            {"t_mean", r.t_mean},
            {"t_variance", r.t_variance},
            {"variance_hat_mean", r.variance_hat_mean},
            {"null_variance", r.null_variance},
            {"variance_ratio", optional_number(r.variance_ratio)},
            {"signal", r.signal},
            {"predicted_power", optional_number(r.predicted_power)}};
}

}  // namespace glht
