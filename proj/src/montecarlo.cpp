#include "glht/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "glht/format.hpp"
#include "glht/normal.hpp"

namespace glht {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

std::string join_sizes(const std::vector<long>& n) {
    std::string s;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(n[i]);
    }
    return s;
}

}  // namespace

PreparedSimulation prepare_simulation(const SimulationConfig& config) {
    if (config.replicates < 1) config_error("replicates must be at least 1");
    if (!(config.level > 0.0 && config.level < 1.0)) config_error("level must lie strictly between 0 and 1");
    if (config.p < 1) config_error("p must be at least 1");
    const auto k = static_cast<Eigen::Index>(config.n_sizes.size());
    if (k < 2) config_error("at least 2 groups are required");

    PreparedSimulation prep;
    try {
        prep.contrast = build_contrast(config.contrast, config.n_sizes);
    } catch (const Error& e) {
        config_error(std::string("contrast: ") + e.what());
    }

    if (config.weights) {
        if (config.weights->dim() != config.p) {
            config_error("explicit weights have dimension " + std::to_string(config.weights->dim()) +
                         ", expected " + std::to_string(config.p));
        }
        prep.weights = *config.weights;
    } else {
        prep.weights = default_weights(config.p);
    }

    prep.covariances = config.covariances.empty() ? covariance_case(config.cov_case, k) : config.covariances;
    if (static_cast<Eigen::Index>(prep.covariances.size()) != k) {
        config_error("need one covariance per group");
    }
    for (const auto& c : prep.covariances) {
        if (!(c.scale >= 0.0) || !(std::abs(c.rho) < 1.0)) config_error("invalid covariance parameters");
    }

    prep.means.assign(k, Eigen::VectorXd::Zero(config.p));
    if (config.alternative) {
        const auto& alt = *config.alternative;
        if (alt.target_group < 0 || alt.target_group >= k) config_error("alternative target group out of range");
        if (!(alt.r >= 0.0)) config_error("signal strength r must be non-negative");
        if (!(alt.t >= 0.0 && alt.t <= 1.0)) config_error("sparsity t must lie in [0, 1]");
        prep.means[alt.target_group] = mean_alternative_vector(config.p, alt, config.n_sizes);
    }
    return prep;
}

GroupedSampled simulate_sample(const SimulationConfig& config, const PreparedSimulation& prepared,
                               std::uint64_t replicate_id) {
    return gen_sample(config.p, config.n_sizes, prepared.covariances, config.dist, prepared.means, config.seed,
                      replicate_id);
}

double ks_distance_normal(std::vector<double> sample) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = double(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = normal_cdf(sample[i]);
        d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
    }
    return d;
}

CalibrationReport run_replicates(const SimulationConfig& config) {
    const PreparedSimulation prep = prepare_simulation(config);
    const double crit = normal_upper_quantile(config.level);
    const long r = config.replicates;

    std::vector<ReplicateRecord> records(static_cast<std::size_t>(r));
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (long i = next++; i < r; i = next++) {
            try {
                const auto sample = simulate_sample(config, prep, static_cast<std::uint64_t>(i + 1));
                const auto res = run_test(sample, prep.contrast, prep.weights);
                ReplicateRecord& rec = records[static_cast<std::size_t>(i)];
                rec.id = i + 1;
                rec.t_n = res.t_n;
                rec.sigma_hat_sq = res.sigma_hat_sq;
                rec.z = res.z;
                rec.rejected = res.z && *res.z >= crit;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = r;
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(r)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    CalibrationReport rep;
    rep.replicates = r;
    rep.critical_value = crit;
    std::vector<double> zs;
    zs.reserve(records.size());
    double t_sum = 0.0, vh_sum = 0.0;
    for (const auto& rec : records) {
        t_sum += rec.t_n;
        vh_sum += rec.sigma_hat_sq;
        if (!rec.z) {
            ++rep.degenerate;
            continue;
        }
        zs.push_back(*rec.z);
        if (rec.rejected) ++rep.rejections;
    }
    rep.t_mean = t_sum / double(r);
    rep.variance_hat_mean = vh_sum / double(r);
    double t_ss = 0.0;
    for (const auto& rec : records) t_ss += (rec.t_n - rep.t_mean) * (rec.t_n - rep.t_mean);
    rep.t_variance = r > 1 ? t_ss / double(r - 1) : 0.0;

    const auto valid = static_cast<long>(zs.size());
    if (valid > 0) {
        rep.rejection_rate = double(rep.rejections) / double(valid);
        rep.rejection_se = std::sqrt(rep.rejection_rate * (1.0 - rep.rejection_rate) / double(valid));
        double z_sum = 0.0;
        for (double z : zs) z_sum += z;
        rep.z_mean = z_sum / double(valid);
        double z_ss = 0.0;
        for (double z : zs) z_ss += (z - rep.z_mean) * (z - rep.z_mean);
        rep.z_variance = valid > 1 ? z_ss / double(valid - 1) : 0.0;
        rep.ks_distance = ks_distance_normal(zs);
    }

    std::vector<CovarianceRep> reps(prep.covariances.begin(), prep.covariances.end());
    rep.null_variance = null_variance_exact(reps, prep.contrast, prep.weights);
    if (rep.null_variance > 0.0) rep.variance_ratio = rep.t_variance / rep.null_variance;
    rep.signal = signal_norm(prep.means, prep.contrast, prep.weights);
    if (config.alternative && rep.null_variance > 0.0) {
        rep.predicted_power = power_prediction(rep.signal, std::sqrt(rep.null_variance), config.level);
    }
    if (config.keep_records) rep.records = std::move(records);
    return rep;
}

std::vector<SizeRow> size_table(const SimulationConfig& base, const SizeGrid& grid,
                                const std::function<void(const SizeRow&)>& on_row) {
    std::vector<SizeRow> rows;
    for (const auto& cov_case : grid.cases) {
        for (Eigen::Index p : grid.dims) {
            for (Distribution model : grid.models) {
                SimulationConfig cfg = base;
                cfg.p = p;
                cfg.cov_case = cov_case;
                cfg.covariances.clear();
                cfg.dist = model;
                cfg.alternative.reset();
                rows.push_back({cov_case, p, model, run_replicates(cfg)});
                if (on_row) on_row(rows.back());
            }
        }
    }
    return rows;
}

std::string size_table_csv(const SimulationConfig& base, const std::vector<SizeRow>& rows) {
    std::ostringstream out;
    out << "case,n_sizes,p,model,rejection_rate,std_error,degenerate,replicates\n";
    for (const auto& row : rows) {
        out << row.cov_case << ',' << join_sizes(base.n_sizes) << ',' << row.p << ','
            << distribution_name(row.model) << ',' << format_double(row.report.rejection_rate) << ','
            << format_double(row.report.rejection_se) << ',' << row.report.degenerate << ','
            << row.report.replicates << '\n';
    }
    return out.str();
}

std::vector<PowerRow> power_curve(const SimulationConfig& base, const std::vector<double>& r_values,
                                  const std::vector<double>& t_values,
                                  const std::function<void(const PowerRow&)>& on_row) {
    std::vector<PowerRow> rows;
    for (double r : r_values) {
        for (double t : t_values) {
            SimulationConfig cfg = base;
            MeanAlternative alt = base.alternative.value_or(MeanAlternative{});
            alt.r = r;
            alt.t = t;
            cfg.alternative = alt;
            auto rep = run_replicates(cfg);
            PowerRow row;
            row.r = r;
            row.t = t;
            row.p = base.p;
            row.empirical_power = rep.rejection_rate;
            row.std_error = rep.rejection_se;
            row.predicted_power = rep.predicted_power.value_or(base.level);
            row.report = std::move(rep);
            rows.push_back(std::move(row));
            if (on_row) on_row(rows.back());
        }
    }
    return rows;
}

std::string power_curve_csv(const std::vector<PowerRow>& rows) {
    std::ostringstream out;
    out << "r,t,p,empirical_power,std_error,predicted_power\n";
    for (const auto& row : rows) {
        out << format_double(row.r) << ',' << format_double(row.t) << ',' << row.p << ','
            << format_double(row.empirical_power) << ',' << format_double(row.std_error) << ','
            << format_double(row.predicted_power) << '\n';
    }
    return out.str();
}

std::optional<double> variance_diagnostic(const SimulationConfig& null_config) {
    SimulationConfig cfg = null_config;
    cfg.alternative.reset();
    return run_replicates(cfg).variance_ratio;
}

RiCheck ri_integration_check(const std::vector<Eigen::VectorXd>& mus, const Contrast& contrast, const WeightSpecd& w,
                             long draws, std::uint64_t seed) {
    if (draws < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 draws");
    const auto k = static_cast<Eigen::Index>(mus.size());
    if (k != contrast.groups()) throw Error(ErrorKind::InvalidDimension, "mean count does not match contrast");
    Eigen::MatrixXd m(w.dim(), k);
    for (Eigen::Index a = 0; a < k; ++a) {
        if (mus[a].size() != w.dim()) throw Error(ErrorKind::InvalidDimension, "mean has wrong dimension");
        m.col(a) = mus[a];
    }
    const Eigen::VectorXd sd = w.beta_sq.cwiseSqrt();
    RandomStream rng(seed, 0, 0);
    Eigen::VectorXd delta(w.dim());
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < draws; ++i) {
        for (Eigen::Index j = 0; j < w.dim(); ++j) delta(j) = w.a(j) + sd(j) * rng.normal();
        const Eigen::VectorXd proj = m.transpose() * delta;
        const double value = proj.dot(contrast.d * proj);
        const double diff = value - mean;
        mean += diff / double(i + 1);
        m2 += diff * (value - mean);
    }
    RiCheck out;
    out.monte_carlo = mean;
    out.std_error = std::sqrt(m2 / double(draws - 1) / double(draws));
    out.closed_form = signal_norm(mus, contrast, w);
    return out;
}

std::string replicate_log_csv(const CalibrationReport& report) {
    std::ostringstream out;
    out << "replicate,t_n,sigma_hat_sq,z,rejected\n";
    for (const auto& rec : report.records) {
        out << rec.id << ',' << format_double(rec.t_n) << ',' << format_double(rec.sigma_hat_sq) << ','
            << (rec.z ? format_double(*rec.z) : std::string()) << ',' << (rec.rejected ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace glht
