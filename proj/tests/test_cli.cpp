#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("vme_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, const std::string& body) const { std::ofstream(path(name)) << body; }

    std::string read(const fs::path& p) const {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    /// Runs the CLI, capturing stdout and stderr in files under the test directory.
    int vme(const std::string& args, const std::string& env = "") const {
        const std::string cmd = env + " " + std::string(VME_CLI_PATH) + " " + args + " > " + path("stdout").string() +
                                " 2> " + path("stderr").string();
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    std::string config_path(const std::string& name) const {
        return std::string(VME_SOURCE_DIR) + "/configs/" + name;
    }

    fs::path dir_;
};

json matrix(const std::vector<std::vector<double>>& re, const std::vector<std::vector<double>>& im) {
    return json{{"dim", re.size()}, {"re", re}, {"im", im}};
}

std::map<std::string, double> terms(const json& pauli) {
    std::map<std::string, double> out;
    for (const auto& t : pauli) {
        EXPECT_EQ(t.at("coeff_im").get<double>(), 0.0);
        out[t.at("axes").get<std::string>()] = t.at("coeff_re").get<double>();
    }
    return out;
}

std::set<double> summary_groups(const std::string& csv) {
    std::set<double> groups;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto a = line.find(',');
        groups.insert(std::stod(line.substr(a + 1, line.find(',', a + 1) - a - 1)));
    }
    return groups;
}

const char* kOneQubit = R"({"model": "one_qubit", "part": "real", "n_runs": 40, "seed": 11,
                             "estimator": {"mode": "shot", "shots": 200, "repeats": 5}})";

}  // namespace

TEST_F(CliTest, MalformedJsonExitsTwo) {
    write("bad.json", "{\"model\": \"one_qubit\", ");
    EXPECT_EQ(vme("run --config " + path("bad.json").string() + " --out " + path("o").string()), 2);
    EXPECT_FALSE(read(path("stderr")).empty());
    EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(CliTest, UnknownKeyExitsTwo) {
    write("c.json", R"({"model": "one_qubit", "part": "real", "colour": "blue"})");
    EXPECT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 2);
    EXPECT_NE(read(path("stderr")).find("colour"), std::string::npos);
}

TEST_F(CliTest, MissingConfigExitsThree) {
    EXPECT_EQ(vme("run --config " + path("nope.json").string() + " --out " + path("o").string()), 3);
}

TEST_F(CliTest, UnwritableOutputExitsThree) {
    write("c.json", kOneQubit);
    write("blocker", "x");
    EXPECT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("blocker/sub").string()), 3);
}

TEST_F(CliTest, BadThreadEnvExitsTwo) {
    write("c.json", kOneQubit);
    EXPECT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string(), "VME_THREADS=many"), 2);
}

TEST_F(CliTest, OneQubitRealHasThreeGroups) {
    ASSERT_EQ(vme("run --config " + config_path("fig3_one_qubit_real_exact.json") + " --out " + path("o").string()), 0);
    // Oracle: real parts of W^D_1 in the eigenbasis of X, from Eigen's solver.
    Eigen::Matrix2d h;
    h << 0, 1, 1, 0;
    Eigen::Matrix2cd wd;
    wd << 5, std::complex<double>(2, -2), std::complex<double>(2, 2), 3;
    Eigen::Matrix2cd had;
    had << 1, 1, 1, -1;
    had /= std::sqrt(2.0);
    const Eigen::Matrix2cd w = had * wd * had;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    Eigen::Matrix2d v = es.eigenvectors();
    for (int k = 0; k < 2; ++k)
        if ((std::abs(v(0, k)) > 1e-9 ? v(0, k) : v(1, k)) < 0) v.col(k) *= -1.0;
    const Eigen::Matrix2cd u = v.cast<std::complex<double>>();
    const Eigen::Matrix2cd in_basis = u.adjoint() * w * u;
    std::set<double> expected;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) expected.insert(std::round(in_basis(r, c).real() * 1e6) / 1e6);
    EXPECT_EQ(summary_groups(read(path("o/summary.csv"))), expected);
    for (const char* f : {"runs.json", "summary.csv", "angles.csv", "errors.csv", "report.json", "manifest.json"})
        EXPECT_TRUE(fs::exists(path("o") / f)) << f;
    EXPECT_FALSE(fs::exists(path("o/heatmap.csv")));
    const json manifest = json::parse(read(path("o/manifest.json")));
    EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 20240607u);
    EXPECT_EQ(manifest.at("version"), "1.0.0");
}

TEST_F(CliTest, RerunIsByteIdenticalAcrossThreadCounts) {
    write("c.json", kOneQubit);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("a").string(), "VME_THREADS=1"), 0);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("b").string(), "VME_THREADS=3"), 0);
    for (const char* f : {"runs.json", "summary.csv", "angles.csv", "errors.csv", "report.json"})
        EXPECT_EQ(read(path("a") / f), read(path("b") / f)) << f;
}

TEST_F(CliTest, ManifestReproducesOutputs) {
    write("c.json", kOneQubit);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("a").string() + " --seed 99"), 0);
    ASSERT_EQ(vme("run --config " + path("a/manifest.json").string() + " --out " + path("b").string()), 0);
    for (const char* f : {"runs.json", "summary.csv", "errors.csv"})
        EXPECT_EQ(read(path("a") / f), read(path("b") / f)) << f;
}

TEST_F(CliTest, SeedOverrideChangesShotOutput) {
    write("c.json", kOneQubit);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("a").string()), 0);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("b").string() + " --seed 12"), 0);
    EXPECT_NE(read(path("a/runs.json")), read(path("b/runs.json")));
}

TEST_F(CliTest, HeatmapWrittenWhenRequested) {
    write("c.json", R"({"model": "one_qubit", "part": "imaginary", "n_runs": 20,
                        "report": {"heatmap": true, "range": [-4.1, 4.1]}})");
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 0);
    const std::string csv = read(path("o/heatmap.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,bin_lo,bin_hi,count");
    const json rep = json::parse(read(path("o/report.json")));
    EXPECT_TRUE(rep.contains("heatmap"));
}

TEST_F(CliTest, DecomposeOneQubitMatrix) {
    write("w.json", matrix({{5, 2}, {2, 3}}, {{0, -2}, {2, 0}}).dump());
    ASSERT_EQ(vme("decompose " + path("w.json").string()), 0);
    const json out = json::parse(read(path("stdout")));
    const auto t = terms(out.at("pauli"));
    EXPECT_EQ(t.size(), 4u);
    EXPECT_NEAR(t.at("I"), 4.0, 1e-12);
    EXPECT_NEAR(t.at("X"), 2.0, 1e-12);
    EXPECT_NEAR(t.at("Y"), 2.0, 1e-12);
    EXPECT_NEAR(t.at("Z"), 1.0, 1e-12);
    EXPECT_EQ(out.at("w_real").at("re")[0][1].get<double>(), 2.0);
    EXPECT_EQ(out.at("w_imag").at("im")[0][1].get<double>(), -2.0);
}

TEST_F(CliTest, DecomposeIdentity) {
    write("id.json", matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}},
                            {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}})
                         .dump());
    ASSERT_EQ(vme("decompose " + path("id.json").string()), 0);
    const auto t = terms(json::parse(read(path("stdout"))).at("pauli"));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_NEAR(t.at("II"), 1.0, 1e-15);
}

TEST_F(CliTest, DecomposeNonHermitianExitsTwo) {
    write("w.json", matrix({{1, 2}, {0, 1}}, {{0, 0}, {0, 0}}).dump());
    EXPECT_EQ(vme("decompose " + path("w.json").string()), 2);
    write("w3.json", matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}).dump());
    EXPECT_EQ(vme("decompose " + path("w3.json").string()), 2);
}

TEST_F(CliTest, ReportRegroupsWithTighterTolerance) {
    write("c.json", kOneQubit);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 0);
    const json runs = json::parse(read(path("o/runs.json")));
    ASSERT_EQ(vme("report " + path("o/runs.json").string() + " --out " + path("r").string() + " --tolerance 0.3"), 0);
    const json rep = json::parse(read(path("r/report.json")));
    EXPECT_EQ(rep.at("tolerance").get<double>(), 0.3);

    std::map<double, int> expected;
    int unassigned = 0;
    for (const auto& r : runs.at("runs")) {
        bool hit = false;
        if (!r.at("final_value").is_null() && r.at("status") != "failed") {
            const double f = r.at("final_value").get<double>();
            for (double t : {2.0, 3.0, 5.0})
                if (std::abs(f - t) <= 0.3) {
                    ++expected[t];
                    hit = true;
                }
        }
        unassigned += !hit;
    }
    std::map<double, int> got;
    for (const auto& g : rep.at("groups")) got[g.at("target").get<double>()] = g.at("count").get<int>();
    EXPECT_EQ(got, expected);
    EXPECT_EQ(rep.at("unassigned").get<int>(), unassigned);
    // runs.json is left untouched by report.
    EXPECT_EQ(json::parse(read(path("o/runs.json"))), runs);
}

TEST_F(CliTest, ReportZeroToleranceUnassignsAll) {
    write("c.json", kOneQubit);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 0);
    ASSERT_EQ(vme("report " + path("o/runs.json").string() + " --tolerance 0"), 0);
    const json rep = json::parse(read(path("o/report.json")));
    EXPECT_EQ(rep.at("unassigned").get<int>(), 40);
    EXPECT_TRUE(rep.at("groups").empty());
    EXPECT_EQ(read(path("o/summary.csv")), "iteration,group,median,p04,p96,count\n");
}

TEST_F(CliTest, ReportEmptyRunsList) {
    write("c.json", kOneQubit);
    ASSERT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 0);
    json runs = json::parse(read(path("o/runs.json")));
    runs["runs"] = json::array();
    write("empty.json", runs.dump());
    ASSERT_EQ(vme("report " + path("empty.json").string() + " --out " + path("e").string()), 0);
    EXPECT_EQ(read(path("e/summary.csv")), "iteration,group,median,p04,p96,count\n");
    EXPECT_EQ(read(path("e/errors.csv")), "iteration,group,median,p25,p75,count\n");
    EXPECT_EQ(json::parse(read(path("e/report.json"))).at("n_runs").get<int>(), 0);
}

TEST_F(CliTest, ReportSchemaMismatchExitsTwo) {
    write("r.json", R"({"schema": "other", "runs": []})");
    EXPECT_EQ(vme("report " + path("r.json").string()), 2);
    write("r2.json", R"([1, 2, 3])");
    EXPECT_EQ(vme("report " + path("r2.json").string()), 2);
}

TEST_F(CliTest, ShippedConfigsReproduceGoldenOutputs) {
    const fs::path src(VME_SOURCE_DIR);
    int checked = 0;
    for (const auto& entry : fs::directory_iterator(src / "configs")) {
        const std::string name = entry.path().stem().string();
        const fs::path golden = src / "golden" / name;
        ASSERT_TRUE(fs::is_directory(golden)) << name;
        ASSERT_EQ(vme("run --config " + entry.path().string() + " --out " + path(name).string()), 0) << name;
        for (const char* f : {"summary.csv", "angles.csv", "errors.csv", "heatmap.csv", "report.json"}) {
            ASSERT_EQ(fs::exists(golden / f), fs::exists(path(name) / f)) << name << "/" << f;
            if (fs::exists(golden / f)) EXPECT_EQ(read(path(name) / f), read(golden / f)) << name << "/" << f;
        }
        ++checked;
    }
    EXPECT_EQ(checked, 11);
}

TEST_F(CliTest, UnsupportedCustomDimensionExitsTwo) {
    json id3 = matrix({{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    json cfg{{"model", "custom"}, {"part", "real"}, {"hamiltonian", id3}, {"observable", id3}};
    write("c.json", cfg.dump());
    EXPECT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 2);
    write("f.json", R"({"model": "two_qubit", "part": "real", "init": {"kind": "fixed", "angles_i": [0.1], "angles_j": [0.2]}})");
    EXPECT_EQ(vme("run --config " + path("f.json").string() + " --out " + path("o").string()), 2);
}

TEST_F(CliTest, ComplexCustomHamiltonianExitsTwo) {
    json h = matrix({{0, 1}, {1, 0}}, {{0, -1}, {1, 0}});
    json w = matrix({{1, 0}, {0, 2}}, {{0, 0}, {0, 0}});
    write("c.json", json{{"model", "custom"}, {"part", "real"}, {"hamiltonian", h}, {"observable", w}}.dump());
    EXPECT_EQ(vme("run --config " + path("c.json").string() + " --out " + path("o").string()), 2);
}
