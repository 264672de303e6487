#include "glht/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "glht/format.hpp"
#include "glht/io.hpp"
#include "glht/montecarlo.hpp"

namespace glht {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kThreadsEnv = "GLHT_THREADS";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, "config '" + path + "': " + e.what());
    }
    return parse_run_config(doc);
}

Dataset load_dataset(const std::string& path, const RunConfig& cfg) {
    std::istringstream in(read_file(path));
    return read_dataset_csv(in, cfg.groups);
}

unsigned default_threads() {
    if (const char* env = std::getenv(kThreadsEnv)) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

struct Options {
    std::string config;
    std::string data;
    std::string out_dir;
    std::string out;
    std::string emit_data;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<double> level;
    std::uint64_t replicate = 1;
};

void apply_overrides(RunConfig& cfg, const Options& opt, bool threads_in_config) {
    if (opt.level) {
        if (!(*opt.level > 0.0 && *opt.level < 1.0)) throw Error(ErrorKind::Config, "--level must lie in (0, 1)");
        cfg.level = *opt.level;
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.threads) {
        if (*opt.threads < 1) throw Error(ErrorKind::Config, "--threads must be at least 1");
        cfg.threads = *opt.threads;
    } else if (!threads_in_config) {
        cfg.threads = default_threads();
    }
}

bool config_sets_threads(const std::string& path) {
    if (path.empty()) return false;
    try {
        const auto doc = json::parse(read_file(path));
        return doc.is_object() && doc.contains("threads");
    } catch (...) {
        return false;
    }
}

int cmd_test(const Options& opt, std::ostream& out) {
    RunConfig cfg = load_config(opt.config);
    apply_overrides(cfg, opt, true);
    const Dataset data = load_dataset(opt.data, cfg);
    ContrastInput input{resolve_contrast(cfg.contrast, data.labels), cfg.exponent_mode};
    const auto sizes = data.sample.sizes();
    const Contrast contrast = build_contrast(input, sizes);
    const WeightSpecd w = cfg.weights ? *cfg.weights : default_weights(data.sample.dim());
    const auto result = run_test(data.sample, contrast, w);
    out << to_json(result, data.labels, sizes, data.sample.dim(), cfg.level).dump(2) << '\n';
    return kExitOk;
}

int cmd_contrasts(const Options& opt, std::ostream& out) {
    RunConfig cfg = load_config(opt.config);
    apply_overrides(cfg, opt, true);
    const Dataset data = load_dataset(opt.data, cfg);
    const auto sizes = data.sample.sizes();
    const auto k = static_cast<Eigen::Index>(data.labels.size());
    const WeightSpecd w = cfg.weights ? *cfg.weights : default_weights(data.sample.dim());
    const auto summaries = summarize(data.sample);
    const double crit = normal_upper_quantile(cfg.level);
    json pairs = json::array();
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            const Contrast c = build_contrast({pairwise_contrast(k, a, b), cfg.exponent_mode}, sizes);
            const auto r = run_test(summaries, c, w);
            pairs.push_back({{"first", data.labels[a]},
                             {"second", data.labels[b]},
                             {"statistic", r.t_n},
                             {"sigma_hat_sq", r.sigma_hat_sq},
                             {"z", r.z ? json(*r.z) : json(nullptr)},
                             {"p_value", r.p_value ? json(*r.p_value) : json(nullptr)},
                             {"reject", r.z ? json(*r.z >= crit) : json(nullptr)},
                             {"degenerate_variance", r.degenerate_variance}});
        }
    }
    json doc = {{"groups", data.labels}, {"level", cfg.level}, {"pairs", pairs}};
    out << doc.dump(2) << '\n';
    return kExitOk;
}

Dataset emitted_dataset(const SimulationConfig& base, std::uint64_t replicate) {
    const auto prep = prepare_simulation(base);
    Dataset data;
    data.sample = simulate_sample(base, prep, replicate);
    for (std::size_t a = 0; a < base.n_sizes.size(); ++a) data.labels.push_back("g" + std::to_string(a + 1));
    return data;
}

int cmd_emit_data(const Options& opt, std::ostream& out) {
    RunConfig cfg = load_config(opt.config);
    apply_overrides(cfg, opt, true);
    if (opt.replicate < 1) throw Error(ErrorKind::Config, "--replicate must be at least 1");
    const std::string csv = write_dataset_csv(emitted_dataset(simulation_base(cfg), opt.replicate));
    if (opt.out.empty()) {
        out << csv;
    } else {
        write_file(opt.out, csv);
    }
    return kExitOk;
}

std::string cell_name(const std::string& cov_case, Eigen::Index p, Distribution model) {
    return cov_case + "_p" + std::to_string(p) + "_" + distribution_name(model);
}

int cmd_simulate(const Options& opt, std::ostream& out) {
    RunConfig cfg = load_config(opt.config);
    apply_overrides(cfg, opt, config_sets_threads(opt.config));
    SimulationConfig base = simulation_base(cfg);
    const std::vector<std::string> cases = cfg.cases.empty() ? std::vector<std::string>{"case1"} : cfg.cases;
    const std::vector<Distribution> models =
        cfg.models.empty() ? std::vector<Distribution>{Distribution::StandardNormal} : cfg.models;

    // Validate every grid cell before any replicate runs.
    for (const auto& c : cases) {
        for (auto p : cfg.dims) {
            for (auto m : models) {
                SimulationConfig cell = base;
                cell.p = p;
                cell.cov_case = c;
                cell.dist = m;
                if (cfg.has_alternative) {
                    for (double r : cfg.r_values) {
                        for (double t : cfg.t_values) {
                            cell.alternative->r = r;
                            cell.alternative->t = t;
                            prepare_simulation(cell);
                        }
                    }
                } else {
                    prepare_simulation(cell);
                }
            }
        }
    }
    if (cfg.has_alternative && (cases.size() != 1 || models.size() != 1)) {
        throw Error(ErrorKind::Config, "power curves take a single 'case' and 'model'");
    }
    if (opt.out_dir.empty()) throw Error(ErrorKind::Config, "simulate needs --out-dir");
    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "'");

    if (!opt.emit_data.empty()) write_file(opt.emit_data, write_dataset_csv(emitted_dataset(base, 1)));

    json cells = json::array();
    if (!cfg.has_alternative) {
        const SizeGrid grid{cfg.dims, models, cases};
        const auto rows = size_table(base, grid, [&](const SizeRow& row) {
            out << "case=" << row.cov_case << " p=" << row.p << " model=" << distribution_name(row.model)
                << " rate=" << format_double(row.report.rejection_rate)
                << " se=" << format_double(row.report.rejection_se) << " degenerate=" << row.report.degenerate
                << '\n';
            if (cfg.keep_records) {
                write_file(dir / ("replicates_" + cell_name(row.cov_case, row.p, row.model) + ".csv"),
                           replicate_log_csv(row.report));
            }
        });
        write_file(dir / "size_table.csv", size_table_csv(base, rows));
        for (const auto& row : rows) {
            json j = to_json(row.report);
            j["case"] = row.cov_case;
            j["p"] = row.p;
            j["model"] = distribution_name(row.model);
            cells.push_back(j);
        }
    } else {
        std::vector<PowerRow> all;
        for (auto p : cfg.dims) {
            SimulationConfig cell = base;
            cell.p = p;
            auto rows = power_curve(cell, cfg.r_values, cfg.t_values, [&](const PowerRow& row) {
                out << "case=" << cases.front() << " p=" << row.p << " model=" << distribution_name(models.front())
                    << " r=" << format_double(row.r) << " t=" << format_double(row.t)
                    << " power=" << format_double(row.empirical_power)
                    << " predicted=" << format_double(row.predicted_power) << '\n';
                if (cfg.keep_records) {
                    write_file(dir / ("replicates_" + cell_name(cases.front(), row.p, models.front()) + "_r" +
                                      format_double(row.r) + "_t" + format_double(row.t) + ".csv"),
                               replicate_log_csv(row.report));
                }
            });
            for (auto& row : rows) {
                json j = to_json(row.report);
                j["case"] = cases.front();
                j["p"] = row.p;
                j["model"] = distribution_name(models.front());
                j["r"] = row.r;
                j["t"] = row.t;
                cells.push_back(j);
                all.push_back(std::move(row));
            }
        }
        write_file(dir / "power_curve.csv", power_curve_csv(all));
    }
    json report = {{"kind", cfg.has_alternative ? "power" : "size"},
                   {"seed", cfg.seed},
                   {"replicates", cfg.replicates},
                   {"level", cfg.level},
                   {"cells", cells}};
    write_file(dir / "report.json", report.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"High-dimensional general linear hypothesis test by random integration", "glht"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    double level = 0.0;

    auto add_level = [&](CLI::App* sub) { return sub->add_option("--level", level, "Nominal test level"); };
    auto add_seed = [&](CLI::App* sub) { return sub->add_option("--seed", seed, "Random seed"); };

    auto* test = app.add_subcommand("test", "Run the test on a grouped CSV dataset");
    test->add_option("--data", opt.data, "CSV with a group label column then features")->required();
    test->add_option("--config", opt.config, "JSON run configuration");
    auto* test_level = add_level(test);

    auto* contrasts = app.add_subcommand("contrasts", "Test every pairwise contrast");
    contrasts->add_option("--data", opt.data, "CSV with a group label column then features")->required();
    contrasts->add_option("--config", opt.config, "JSON run configuration");
    auto* contrasts_level = add_level(contrasts);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo size or power study");
    simulate->add_option("--config", opt.config, "JSON simulation configuration")->required();
    simulate->add_option("--out-dir", opt.out_dir, "Directory for tables and reports")->required();
    simulate->add_option("--emit-data", opt.emit_data, "Also write replicate 1 of the first cell as CSV");
    auto* sim_seed = add_seed(simulate);
    auto* sim_threads = simulate->add_option("--threads", threads, "Worker threads (default $GLHT_THREADS or 1)");
    auto* sim_level = add_level(simulate);

    auto* emit = app.add_subcommand("emit-data", "Write one simulated dataset as CSV");
    emit->add_option("--config", opt.config, "JSON simulation configuration")->required();
    emit->add_option("--out", opt.out, "Output CSV path (standard output when absent)");
    emit->add_option("--replicate", opt.replicate, "Replicate id, 1-based");
    auto* emit_seed = add_seed(emit);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalid;
    }

    for (auto* o : {test_level, contrasts_level, sim_level}) {
        if (o->count()) opt.level = level;
    }
    for (auto* o : {sim_seed, emit_seed}) {
        if (o->count()) opt.seed = seed;
    }
    if (sim_threads->count()) opt.threads = threads;

    try {
        if (test->parsed()) return cmd_test(opt, out);
        if (contrasts->parsed()) return cmd_contrasts(opt, out);
        if (simulate->parsed()) return cmd_simulate(opt, out);
        return cmd_emit_data(opt, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return kExitInvalid;
    } catch (const IoError& e) {
        err << "error: io: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace glht
