#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "glht/datagen.hpp"
#include "support.hpp"

using namespace glht;

namespace {

struct Moments {
    double mean = 0.0, var = 0.0, skew = 0.0, min = 1e300;
};

// Skewness of the sample clipped to [-c, c].
double clipped_skewness(const std::vector<double>& x, double c) {
    double m = 0.0;
    for (double v : x) m += std::clamp(v, -c, c);
    m /= double(x.size());
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = std::clamp(v, -c, c) - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    return (m3 / double(x.size())) / std::pow(m2 / double(x.size()), 1.5);
}

Moments moments(Distribution d, long draws, std::uint64_t seed) {
    RandomStream rng(seed, 0, 0);
    std::vector<double> x(static_cast<std::size_t>(draws));
    Moments m;
    for (auto& v : x) {
        v = draw_innovation(d, rng);
        m.mean += v;
        m.min = std::min(m.min, v);
    }
    m.mean /= double(draws);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double c = v - m.mean;
        m2 += c * c;
        m3 += c * c * c;
    }
    m.var = m2 / double(draws - 1);
    m.skew = d == Distribution::StandardizedT4 ? clipped_skewness(x, 10.0)
                                               : (m3 / double(draws)) / std::pow(m2 / double(draws), 1.5);
    return m;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd c = y.rowwise() - y.colwise().mean();
    return c.transpose() * c / double(y.rows() - 1);
}

}  // namespace

TEST_CASE("innovation moments") {
    for (auto d : {Distribution::StandardNormal, Distribution::StandardizedT4, Distribution::StandardizedChiSq1}) {
        CAPTURE(distribution_name(d));
        const auto m = moments(d, 1000000, 42);
        CHECK(std::abs(m.mean) <= 0.005);
        CHECK(std::abs(m.var - 1.0) <= 0.01);
        if (d == Distribution::StandardizedT4) CHECK(std::abs(m.skew) <= 0.05);
        if (d == Distribution::StandardizedChiSq1) CHECK(m.min >= -0.7072);
    }
    CHECK(excess_kurtosis(Distribution::StandardNormal) == 0.0);
    CHECK(std::isinf(excess_kurtosis(Distribution::StandardizedT4)));
    CHECK(excess_kurtosis(Distribution::StandardizedChiSq1) == 12.0);
}

TEST_CASE("uniforms stay in the open unit interval") {
    RandomStream rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("streams for different replicates are uncorrelated") {
    RandomStream a(5, 1, 0), b(5, 2, 0);
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double x = a.normal(), y = b.normal();
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    const double cov = sab / n - sa / n * sb / n;
    const double rho = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(rho) <= 0.05);
}

TEST_CASE("closed-form AR factor") {
    for (double rho : {0.0, 0.4, 0.5, -0.7, 0.95}) {
        for (Eigen::Index p : {1, 2, 17, 200}) {
            const auto m = CovarianceModel::ar(rho, 2.5);
            const Eigen::MatrixXd sigma = m.dense(p);
            const Eigen::MatrixXd g = m.factor_dense(p);
            CHECK((g * g.transpose() - sigma).norm() <= 1e-10 * sigma.norm());
            const Eigen::MatrixXd chol = sigma.llt().matrixL();
            CHECK((g - chol).norm() <= 1e-10 * chol.norm());
            std::mt19937_64 rng(p);
            const Eigen::VectorXd z = glht::testing::random_vector(rng, p);
            CHECK((m.apply_factor(z) - g * z).norm() <= 1e-12 * (1.0 + (g * z).norm()));
            CHECK((m.apply_factor_transpose(z) - g.transpose() * z).norm() <= 1e-12 * (1.0 + (g.transpose() * z).norm()));
        }
    }
    const auto id = CovarianceModel::identity(3.0);
    CHECK((id.dense(4) - 3.0 * Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);
    CHECK((id.factor_dense(4) * id.factor_dense(4).transpose() - id.dense(4)).norm() < 1e-14);
}

TEST_CASE("mean alternative") {
    const std::vector<long> n{20, 30, 45, 50};
    MeanAlternative alt{0.0, 0.1, 3};
    CHECK(mean_alternative_vector(100, alt, n).isZero());

    alt.r = 0.03;
    const Eigen::VectorXd mu = mean_alternative_vector(100, alt, n);
    const double inv = 1.0 / 20 + 1.0 / 30 + 1.0 / 45 + 1.0 / 50;
    const double value = std::sqrt(2.0 * 0.03 * inv * 2.0);
    CHECK((mu.array() != 0.0).count() == 63);
    CHECK(mu.head(63).isApproxToConstant(value, 1e-15));
    CHECK(value == doctest::Approx(0.12275).epsilon(1e-4));

    alt.t = 1.0;
    CHECK((mean_alternative_vector(100, alt, n).array() != 0.0).count() == 1);
    alt.t = 0.0;
    CHECK((mean_alternative_vector(37, alt, n).array() != 0.0).count() == 37);
}

TEST_CASE("zero covariance reproduces the means") {
    const std::vector<long> n{4, 5};
    const std::vector<CovarianceModel> cov{CovarianceModel::identity(0.0), CovarianceModel::ar(0.3, 0.0)};
    const std::vector<Eigen::VectorXd> mu{Eigen::VectorXd::LinSpaced(3, 1, 3), Eigen::VectorXd::Constant(3, -2.0)};
    const auto s = gen_sample(3, n, cov, Distribution::StandardizedT4, mu, 9, 1);
    for (int a = 0; a < 2; ++a) {
        REQUIRE(s.groups[a].rows() == n[a]);
        for (Eigen::Index i = 0; i < n[a]; ++i) CHECK(s.groups[a].row(i).transpose() == mu[a]);
    }
}

TEST_CASE("sample covariance converges to the truth") {
    const std::vector<CovarianceModel> cov{CovarianceModel::identity(3.0)};
    const std::vector<Eigen::VectorXd> mu{Eigen::VectorXd::Zero(5)};
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(5, 5);
    for (std::uint64_t rep = 1; rep <= 10; ++rep) {
        s += sample_cov(gen_sample(5, std::vector<long>{2000}, cov, Distribution::StandardNormal, mu, 1, rep).groups[0]);
    }
    s /= 10.0;
    CHECK((s - 3.0 * Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 0.15);

    const std::vector<CovarianceModel> ar{CovarianceModel::ar(0.4, 2.0)};
    const Eigen::MatrixXd truth = ar[0].dense(5);
    std::vector<double> errs;
    for (long n : {100, 1000, 10000}) {
        double e = 0.0;
        for (std::uint64_t rep = 1; rep <= 10; ++rep) {
            const auto y = gen_sample(5, std::vector<long>{n}, ar, Distribution::StandardNormal, mu, 3, rep);
            e += (sample_cov(y.groups[0]) - truth).norm() / truth.norm();
        }
        errs.push_back(e / 10.0);
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
}

TEST_CASE("generation is deterministic in seed and replicate") {
    const auto cov = covariance_case("case2", 4);
    const std::vector<long> n{5, 6, 7, 8};
    const std::vector<Eigen::VectorXd> mu(4, Eigen::VectorXd::Zero(12));
    const auto a = gen_sample(12, n, cov, Distribution::StandardizedChiSq1, mu, 99, 3);
    const auto b = gen_sample(12, n, cov, Distribution::StandardizedChiSq1, mu, 99, 3);
    const auto c = gen_sample(12, n, cov, Distribution::StandardizedChiSq1, mu, 99, 4);
    for (int g = 0; g < 4; ++g) {
        CHECK(a.groups[g] == b.groups[g]);
        CHECK(a.groups[g] != c.groups[g]);
    }
}

TEST_CASE("covariance presets") {
    auto c = covariance_case("case1", 4);
    for (const auto& m : c) {
        CHECK(m.kind == CovarianceModel::Kind::ScaledIdentity);
        CHECK(m.scale == 3.0);
    }
    c = covariance_case("case2", 4);
    const double s2[] = {1, 2, 1.5, 4};
    for (int a = 0; a < 4; ++a) {
        CHECK(c[a].kind == CovarianceModel::Kind::ScaledAR);
        CHECK(c[a].rho == 0.4);
        CHECK(c[a].scale == s2[a]);
    }
    c = covariance_case("case3", 4);
    CHECK(c[2].scale == 4.0);
    c = covariance_case("case4", 4);
    const double s4[] = {1, 1.5, 2.5, 3};
    for (int a = 0; a < 4; ++a) {
        CHECK(c[a].rho == 0.5);
        CHECK(c[a].scale == s4[a]);
    }
    CHECK_THROWS_AS(covariance_case("case5", 4), Error);
    CHECK_THROWS_AS(covariance_case("case1", 3), Error);
    CHECK(distribution_from_name("model2") == Distribution::StandardizedT4);
    CHECK(distribution_name(Distribution::StandardizedChiSq1) == "model3");
    CHECK_THROWS_AS(distribution_from_name("model4"), Error);
}
