#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

#include "glht/cli.hpp"
#include "glht/io.hpp"
#include "support.hpp"

using namespace glht;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "glht");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("glht_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string constant_groups_csv() {
    std::string csv = "group,x1,x2\n";
    for (const char* g : {"a", "b"})
        for (int i = 0; i < 4; ++i) csv += std::string(g) + ",1.5,-2\n";
    return csv;
}

const char* kSimConfig = R"({"p": [12], "n_sizes": [6, 7, 8, 9], "case": "case2", "model": "model3",
                             "replicates": 30, "seed": 11})";

}  // namespace

TEST_CASE("test on identical constant groups") {
    TempDir dir;
    const auto data = dir.file("d.csv", constant_groups_csv());
    const auto cfg = dir.file("c.json", R"({"contrast": "pairwise:a,b"})");
    const auto r = run({"test", "--data", data, "--config", cfg});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["statistic"].get<double>() == 0.0);
    CHECK(j["flags"]["degenerate_variance"].get<bool>());
    CHECK(j["z"].is_null());
    CHECK(j["p_value"].is_null());
}

TEST_CASE("emitted data round-trips through the test command") {
    TempDir dir;
    const auto cfg = dir.file("c.json", kSimConfig);
    const auto csv_path = dir / "d.csv";
    REQUIRE(run({"emit-data", "--config", cfg, "--out", csv_path, "--replicate", "2"}).code == 0);

    const auto parsed = parse_run_config(json::parse(kSimConfig));
    const auto base = simulation_base(parsed);
    const auto prep = prepare_simulation(base);
    const auto sample = simulate_sample(base, prep, 2);

    std::ifstream in(csv_path);
    const Dataset back = read_dataset_csv(in);
    REQUIRE(back.sample.groups.size() == 4);
    for (std::size_t a = 0; a < 4; ++a) {
        REQUIRE(back.sample.groups[a].rows() == sample.groups[a].rows());
        CHECK(back.sample.groups[a] == sample.groups[a]);
    }

    const auto r = run({"test", "--data", csv_path, "--config", dir.file("t.json", "{}")});
    REQUIRE(r.code == 0);
    const auto expected = run_test(sample, prep.contrast, prep.weights);
    const auto j = json::parse(r.out);
    CHECK(j["statistic"].get<double>() == expected.t_n);
    CHECK(j["sigma_hat_sq"].get<double>() == expected.sigma_hat_sq);
    CHECK(j["z"].get<double>() == *expected.z);
    CHECK(j["groups"].size() == 4);
}

TEST_CASE("small group is rejected by name") {
    TempDir dir;
    std::string csv = "label,x1\n";
    for (int i = 0; i < 5; ++i) csv += "big," + std::to_string(i) + "\n";
    for (int i = 0; i < 3; ++i) csv += "tiny," + std::to_string(i) + "\n";
    const auto r = run({"test", "--data", dir.file("d.csv", csv)});
    CHECK(r.code == kExitInvalid);
    CHECK(r.out.empty());
    CHECK(r.err == "error: sample-too-small: group 'tiny' has 3 observations, at least 4 are required\n");
}

TEST_CASE("malformed rows report the line") {
    TempDir dir;
    const auto r = run({"test", "--data", dir.file("d.csv", "g,x1,x2\na,1,2\na,1\n")});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.rfind("error: parse: row 3:", 0) == 0);

    const auto r2 = run({"test", "--data", dir.file("e.csv", "g,x1\na,1\na,zz\n")});
    CHECK(r2.code == kExitInvalid);
    CHECK(r2.err.rfind("error: parse: row 3:", 0) == 0);

    const auto r3 = run({"test", "--data", dir.file("f.csv", "g,x1\na,1\na,2\na,3\na,4\n")});
    CHECK(r3.code == kExitInvalid);
    CHECK(r3.err.rfind("error: parse:", 0) == 0);
}

TEST_CASE("contrast and group count mismatch") {
    TempDir dir;
    const auto data = dir.file("d.csv", constant_groups_csv());
    const auto cfg = dir.file("c.json", R"({"contrast": [[1, -1, 0]]})");
    const auto r = run({"test", "--data", data, "--config", cfg});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err == "error: config: contrast has 3 columns but the data has 2 groups\n");
}

TEST_CASE("config validation") {
    TempDir dir;
    const auto data = dir.file("d.csv", constant_groups_csv());
    auto r = run({"test", "--data", data, "--config", dir.file("c.json", R"({"colour": 1})")});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err == "error: config: unknown key 'colour'\n");

    r = run({"test", "--data", data, "--config", dir.file("b.json", "{not json")});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.rfind("error: parse:", 0) == 0);

    r = run({"test", "--data", data, "--level", "1.5"});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err == "error: config: --level must lie in (0, 1)\n");
}

TEST_CASE("missing files are io errors") {
    const auto r = run({"test", "--data", "/nonexistent/data.csv"});
    CHECK(r.code == kExitIo);
    CHECK(r.err == "error: io: cannot open '/nonexistent/data.csv'\n");
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == kExitInvalid);
    CHECK(run({"frobnicate"}).code == kExitInvalid);
    CHECK(run({"test"}).code == kExitInvalid);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("pairwise contrasts table") {
    TempDir dir;
    std::mt19937_64 rng(8);
    Dataset d2;
    d2.labels = {"x", "y"};
    d2.sample.groups = {glht::testing::random_matrix(rng, 6, 3), glht::testing::random_matrix(rng, 7, 3)};
    auto r = run({"contrasts", "--data", dir.file("two.csv", write_dataset_csv(d2))});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["pairs"].size() == 1);

    Dataset d4;
    d4.labels = {"w", "x", "y", "z"};
    for (int a = 0; a < 4; ++a) d4.sample.groups.push_back(glht::testing::random_matrix(rng, 5 + a, 3));
    const auto path = dir.file("four.csv", write_dataset_csv(d4));
    r = run({"contrasts", "--data", path});
    REQUIRE(r.code == 0);
    j = json::parse(r.out);
    REQUIRE(j["pairs"].size() == 6);
    CHECK(j["pairs"][0]["first"] == "w");
    CHECK(j["pairs"][0]["second"] == "x");
    CHECK(j["pairs"][5]["first"] == "y");
    CHECK(j["pairs"][5]["second"] == "z");
    CHECK(run({"contrasts", "--data", path}).out == r.out);
}

TEST_CASE("simulate smoke run is deterministic") {
    TempDir dir;
    const auto cfg = dir.file("c.json", kSimConfig);
    const auto r1 = run({"simulate", "--config", cfg, "--out-dir", dir / "a"});
    REQUIRE(r1.code == 0);
    CHECK(r1.out.rfind("case=case2 p=12 model=model3 rate=", 0) == 0);
    const auto r2 = run({"simulate", "--config", cfg, "--out-dir", dir / "b", "--threads", "3"});
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "a/size_table.csv") == slurp(dir / "b/size_table.csv"));
    CHECK(slurp(dir / "a/report.json") == slurp(dir / "b/report.json"));
    const auto report = json::parse(slurp(dir / "a/report.json"));
    CHECK(report["kind"] == "size");
    CHECK(report["cells"].size() == 1);
    CHECK(report["cells"][0]["replicates"] == 30);
}

TEST_CASE("simulate power grid") {
    TempDir dir;
    const auto cfg = dir.file("c.json", R"({"p": [10, 14], "n_sizes": [6, 6, 6, 6], "replicates": 20,
        "keep_records": true, "alternative": {"r": [0.1, 0.3], "t": [0.2]}})");
    const auto r = run({"simulate", "--config", cfg, "--out-dir", dir / "o"});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "o/power_curve.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(fs::exists(dir / "o/replicates_case1_p14_model1_r0.3_t0.2.csv"));
}

TEST_CASE("invalid simulation config writes nothing") {
    TempDir dir;
    const auto cfg = dir.file("c.json", R"({"p": [10, 20], "n_sizes": [6, 6, 3, 6], "replicates": 5})");
    const auto r = run({"simulate", "--config", cfg, "--out-dir", dir / "o"});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.rfind("error: config: contrast: group 3 has 3 observations", 0) == 0);
    CHECK_FALSE(fs::exists(dir / "o"));

    const auto bad_case = dir.file("d.json", R"({"p": [10], "n_sizes": [6, 6, 6], "case": "case1", "replicates": 5})");
    CHECK(run({"simulate", "--config", bad_case, "--out-dir", dir / "o"}).code == kExitInvalid);
    CHECK_FALSE(fs::exists(dir / "o"));
}

TEST_CASE("csv round trip is exact") {
    std::mt19937_64 rng(19);
    Dataset d;
    d.labels = {"p", "q", "r"};
    for (int a = 0; a < 3; ++a) d.sample.groups.push_back(glht::testing::random_matrix(rng, 4 + a, 6) * 1e3);
    std::istringstream in(write_dataset_csv(d));
    const Dataset back = read_dataset_csv(in);
    CHECK(back.labels == d.labels);
    for (int a = 0; a < 3; ++a) CHECK(back.sample.groups[a] == d.sample.groups[a]);
}

TEST_CASE("explicit group order") {
    std::istringstream in("g,x\nb,1\nb,2\nb,3\nb,4\na,5\na,6\na,7\na,8\n");
    const Dataset d = read_dataset_csv(in, std::vector<std::string>{"a", "b"});
    CHECK(d.labels == std::vector<std::string>{"a", "b"});
    CHECK(d.sample.groups[0](0, 0) == 5.0);
}
