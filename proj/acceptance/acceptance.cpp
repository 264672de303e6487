// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "glht/cli.hpp"
#include "glht/io.hpp"
#include "glht/montecarlo.hpp"
#include "support.hpp"

using namespace glht;
using namespace glht::testing;
using nlohmann::json;

#ifndef GLHT_ACCEPTANCE_DIR
#define GLHT_ACCEPTANCE_DIR "acceptance"
#endif

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SimulationConfig table_config(Eigen::Index p, const std::string& cov_case, Distribution dist, long replicates,
                              std::uint64_t seed) {
    SimulationConfig cfg;
    cfg.p = p;
    cfg.n_sizes = {20, 30, 45, 50};
    cfg.contrast = {manova_contrast(4), ExponentMode::PaperLiteral};
    cfg.cov_case = cov_case;
    cfg.dist = dist;
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    return cfg;
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(20240101);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto mode = rep % 2 ? ExponentMode::InverseRoot : ExponentMode::PaperLiteral;
        const Instance inst = random_instance(rng, mode);
        worst = std::max(worst, rel_err(t_statistic(inst.sample, inst.contrast, inst.weights),
                                        t_statistic_oracle(inst.sample, inst.contrast, inst.weights)));
    }
    return {worst <= 1e-10, fmt("200 instances, max relative error %.2e (limit 1e-10)", worst)};
}

Outcome dense_traces() {
    std::mt19937_64 rng(20240202);
    double worst_sq = 0.0, worst_cross = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const long p = uniform_int(rng, 1, 40);
        const Eigen::MatrixXd ya = random_matrix(rng, uniform_int(rng, 4, 15), p);
        const Eigen::MatrixXd yb = random_matrix(rng, uniform_int(rng, 4, 15), p) * 2.0;
        const auto w = default_weights(p);
        const auto sa = summarize_group(ya), sb = summarize_group(yb);
        worst_sq = std::max(worst_sq, rel_err(trace_w_sigma_sq_hat(sa, w), dense_trace_sq_hat(ya, w)));
        worst_cross = std::max(worst_cross, rel_err(trace_cross_hat(sa, sb, w), dense_trace_cross(ya, yb, w)));
    }
    return {worst_sq <= 1e-10 && worst_cross <= 1e-10,
            fmt("100 instances, max relative error %.2e (within) %.2e (cross), limit 1e-10", worst_sq, worst_cross)};
}

Outcome empirical_size() {
    const auto a = run_replicates(table_config(100, "case1", Distribution::StandardNormal, 2000, 1));
    const auto b = run_replicates(table_config(100, "case2", Distribution::StandardizedChiSq1, 2000, 2));
    auto in_band = [](double r) { return r >= 0.040 && r <= 0.068; };
    return {in_band(a.rejection_rate) && in_band(b.rejection_rate),
            fmt("case1/model1 %.4f, case2/model3 %.4f, band [0.040, 0.068]", a.rejection_rate, b.rejection_rate)};
}

CalibrationReport case1_p50;

Outcome variance_formula() {
    case1_p50 = run_replicates(table_config(50, "case1", Distribution::StandardNormal, 5000, 3));
    const auto b = run_replicates(table_config(50, "case2", Distribution::StandardNormal, 5000, 4));
    const double ra = case1_p50.variance_ratio.value_or(0.0), rb = b.variance_ratio.value_or(0.0);
    auto in_band = [](double r) { return r >= 0.90 && r <= 1.10; };
    return {in_band(ra) && in_band(rb), fmt("Var(T)/exact: case1 %.4f, case2 %.4f, band [0.90, 1.10]", ra, rb)};
}

Outcome unbiasedness() {
    const Eigen::Index p = 20;
    const long n = 40, reps = 5000;
    const auto w = default_weights(p);
    const std::vector<CovarianceModel> cov{CovarianceModel::ar(0.4, 1.0)};
    const std::vector<Eigen::VectorXd> mu{Eigen::VectorXd::Zero(p)};
    const std::vector<long> sizes{n};
    double mean = 0.0;
    for (long r = 1; r <= reps; ++r) {
        const auto s = gen_sample(p, sizes, cov, Distribution::StandardNormal, mu, 5, std::uint64_t(r));
        mean += trace_w_sigma_sq_hat(summarize_group(s.groups[0]), w);
    }
    mean /= double(reps);
    const Eigen::MatrixXd wm = dense_w(w), sigma = cov[0].dense(p);
    const double truth = (wm * sigma * wm * sigma).trace();
    const double dev_trace = mean / truth - 1.0;
    if (case1_p50.replicates == 0) {
        case1_p50 = run_replicates(table_config(50, "case1", Distribution::StandardNormal, 5000, 3));
    }
    const double dev_var = case1_p50.variance_hat_mean / case1_p50.null_variance - 1.0;
    return {std::abs(dev_trace) <= 0.03 && std::abs(dev_var) <= 0.05,
            fmt("trace estimator %+.2f%% (limit 3%%), variance estimator %+.2f%% (limit 5%%)", 100 * dev_trace,
                100 * dev_var)};
}

Outcome null_normality() {
    const auto r = run_replicates(table_config(500, "case1", Distribution::StandardNormal, 2000, 6));
    return {r.ks_distance < 0.0364 && r.degenerate == 0,
            fmt("KS %.4f (limit 0.0364), degenerate %ld", r.ks_distance, r.degenerate)};
}

Outcome integration_check() {
    std::mt19937_64 rng(7);
    const Contrast c = build_contrast({pairwise_contrast(2, 0, 1), ExponentMode::PaperLiteral}, std::vector<long>{15, 20});
    const auto w = default_weights(3);
    const std::vector<Eigen::VectorXd> mus{random_vector(rng, 3) * 0.5, random_vector(rng, 3) * 0.5};
    const auto r = ri_integration_check(mus, c, w, 1000000, 8);
    const double rel = rel_err(r.monte_carlo, r.closed_form);
    const std::vector<Eigen::VectorXd> zero(2, Eigen::VectorXd::Zero(3));
    const auto z = ri_integration_check(zero, c, w, 1000000, 9);
    const bool zero_ok = z.monte_carlo == 0.0 && z.closed_form == 0.0;
    return {rel <= 0.02 && zero_ok, fmt("relative gap %.4f (limit 0.02), MC %.6g vs closed form %.6g; zero means %s",
                                        rel, r.monte_carlo, r.closed_form, zero_ok ? "exact" : "nonzero")};
}

double z_of(const GroupedSampled& s, const Eigen::MatrixXd& g, ExponentMode mode, const WeightSpecd& w) {
    const auto r = run_test(s, build_contrast({g, mode}, s.sizes()), w);
    return r.z.value_or(std::nan(""));
}

Outcome invariances() {
    std::mt19937_64 rng(8);
    double scalar_gap = 0.0, transform_gap = 0.0, data_gap = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const long k = uniform_int(rng, 3, 5), p = uniform_int(rng, 2, 30), q = uniform_int(rng, 1, k - 1);
        GroupedSampled s;
        for (long a = 0; a < k; ++a) s.groups.push_back(random_matrix(rng, uniform_int(rng, 5, 12), p));
        const auto w = default_weights(p);
        const Eigen::MatrixXd g = random_contrast(rng, q, k);
        const double c = (rep % 2 ? -1.0 : 1.0) * (0.1 + 5.0 * std::abs(random_vector(rng, 1)(0)));
        for (auto mode : {ExponentMode::PaperLiteral, ExponentMode::InverseRoot}) {
            scalar_gap = std::max(scalar_gap, rel_err(z_of(s, c * g, mode, w), z_of(s, g, mode, w)));
        }
        Eigen::MatrixXd pm;
        do {
            pm = random_matrix(rng, q, q);
        } while (std::abs(pm.determinant()) < 1e-2);
        transform_gap = std::max(transform_gap, rel_err(z_of(s, pm * g, ExponentMode::InverseRoot, w),
                                                        z_of(s, g, ExponentMode::InverseRoot, w)));

        const Contrast con = build_contrast({g, ExponentMode::PaperLiteral}, s.sizes());
        const auto base = run_test(s, con, w);
        GroupedSampled moved = s;
        const Eigen::RowVectorXd shift = random_vector(rng, p).transpose() * 3.0;
        for (auto& grp : moved.groups) grp = ((grp * 2.5).rowwise() + shift).eval();
        const auto r = run_test(moved, con, w);
        GroupedSampled perm = s;
        for (auto& grp : perm.groups) grp = grp.colwise().reverse().eval();
        const auto rp = run_test(perm, con, w);
        data_gap = std::max({data_gap, rel_err(r.t_n, 6.25 * base.t_n), rel_err(r.sigma_hat_sq, 39.0625 * base.sigma_hat_sq),
                             rel_err(*r.z, *base.z), rel_err(rp.t_n, base.t_n), rel_err(rp.sigma_hat_sq, base.sigma_hat_sq)});
    }
    return {scalar_gap <= 1e-10 && transform_gap <= 1e-8 && data_gap <= 1e-10,
            fmt("scalar rescale %.2e (1e-10), P-transform %.2e (1e-8), data rescale/shift/permute %.2e (1e-10)",
                scalar_gap, transform_gap, data_gap)};
}

Outcome power_trends() {
    auto base = table_config(100, "case1", Distribution::StandardNormal, 1000, 10);
    base.alternative = MeanAlternative{0.0, 0.1, 3};
    const auto by_r = power_curve(base, {0.03, 0.06, 0.09, 0.12}, {0.1});
    const auto by_t = power_curve(base, {0.12}, {0.1, 0.15, 0.2, 0.25});
    auto sigma = [](const PowerRow& a, const PowerRow& b) {
        return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    };
    bool ok = true;
    std::string powers_r, powers_t;
    for (std::size_t i = 0; i < by_r.size(); ++i) {
        powers_r += fmt(i ? " %.3f" : "%.3f", by_r[i].empirical_power);
        if (i && !(by_r[i].empirical_power > by_r[i - 1].empirical_power)) ok = false;
    }
    if (!(by_r.back().empirical_power - by_r.front().empirical_power > 2.0 * sigma(by_r.front(), by_r.back()))) ok = false;
    for (std::size_t i = 0; i < by_t.size(); ++i) {
        powers_t += fmt(i ? " %.3f" : "%.3f", by_t[i].empirical_power);
        if (i && by_t[i].empirical_power > by_t[i - 1].empirical_power + 2.0 * sigma(by_t[i - 1], by_t[i])) ok = false;
    }
    return {ok, "power over r at t=0.1: " + powers_r + "; over t at r=0.12: " + powers_t};
}

Outcome contrasts_golden() {
    const std::string dir = GLHT_ACCEPTANCE_DIR;
    const std::string data = dir + "/data/synthetic4.csv";
    const std::string golden = dir + "/data/contrasts_golden.json";
    std::ostringstream out, err;
    const int code = run_cli({"glht", "contrasts", "--data", data}, out, err);
    if (code != 0) return {false, "cli exited with " + std::to_string(code) + ": " + err.str()};
    std::ifstream in(golden);
    if (!in) return {false, "golden file missing: " + golden};
    const json want = json::parse(in);
    const json got = json::parse(out.str());
    if (got["groups"] != want["groups"] || got["pairs"].size() != want["pairs"].size()) {
        return {false, "group labels or pair count differ from the golden table"};
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < want["pairs"].size(); ++i) {
        const auto& a = got["pairs"][i];
        const auto& b = want["pairs"][i];
        if (a["first"] != b["first"] || a["second"] != b["second"] || a["reject"] != b["reject"]) {
            return {false, "pair " + std::to_string(i) + " differs from the golden table"};
        }
        for (const char* key : {"statistic", "sigma_hat_sq", "z", "p_value"}) {
            worst = std::max(worst, rel_err(a[key].get<double>(), b[key].get<double>()));
        }
    }
    return {worst <= 1e-12, fmt("%zu pairs, max relative deviation %.2e (limit 1e-12)", want["pairs"].size(), worst)};
}

}  // namespace

int main() {
    report(1, "oracle equivalence", oracle_equivalence);
    report(2, "dense trace equivalence", dense_traces);
    report(3, "empirical size", empirical_size);
    report(4, "null variance formula", variance_formula);
    report(5, "estimator unbiasedness", unbiasedness);
    report(6, "null normality", null_normality);
    report(7, "random integration closed form", integration_check);
    report(8, "invariance suite", invariances);
    report(9, "power trends", power_trends);
    report(10, "pairwise contrasts golden table", contrasts_golden);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
