#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "onsager/onsf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("onsager_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    CliRun run(const std::string& args) const {
        const std::string err = path("stderr.txt");
        const std::string cmd = std::string(ONSAGER_CLI_PATH) + " " + args + " 2>" + err;
        CliRun r;
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return r;
        char buf[4096];
        std::size_t got;
        while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
        const int status = pclose(pipe);
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.err = slurp(err);
        return r;
    }

    static std::string slurp(const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    /// Generates a field and returns the velocity path.
    std::string gen(const std::string& name, const std::string& args) const {
        const std::string u = path(name + ".onsf");
        const CliRun r = run("gen " + args + " --out " + u);
        EXPECT_EQ(r.code, 0) << r.err;
        return u;
    }

    fs::path dir_;
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream cs(line);
        std::string cell;
        while (std::getline(cs, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

/// Values of the fit stanza, keyed by variant.
std::map<std::string, std::vector<double>> fit_stanza(const std::string& text) {
    std::map<std::string, std::vector<double>> out;
    const auto rows = csv_rows(text);
    bool in_fit = false;
    for (const auto& r : rows) {
        if (!r.empty() && r[0] == "variant") {
            in_fit = true;
            continue;
        }
        if (in_fit && r.size() == 4 && !r[1].empty()) out[r[0]] = {std::stod(r[1]), std::stod(r[2]), std::stod(r[3])};
    }
    return out;
}

} // namespace

TEST_F(Cli, GenTaylorGreenWritesBothFields) {
    const std::string u = path("tg.onsf");
    const CliRun r = run("gen --kind taylor-green --n 64 --out " + u);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(u));
    EXPECT_TRUE(fs::exists(path("tg.p.onsf")));
    const json prov = json::parse(r.out);
    EXPECT_EQ(prov["kind"], "taylor_green");
    EXPECT_LE(prov["divergence_residual"].get<double>(), 1e-10);
    EXPECT_LE(prov["momentum_residual"].get<double>(), 1e-10);
    EXPECT_EQ(prov["pressure"], "generator");
}

TEST_F(Cli, GenShearMarksExactSolution) {
    const CliRun r = run("gen --kind shear --a 1 --b -1 --w 0 --n 128 --out " + path("s.onsf"));
    ASSERT_EQ(r.code, 0) << r.err;
    const json prov = json::parse(r.out);
    EXPECT_TRUE(prov["exact_solution"].get<bool>());
    EXPECT_EQ(prov["params"]["w"], 0.0);
}

TEST_F(Cli, GenIsDeterministic) {
    const CliRun a = run("gen --kind weier --theta 0.333 --seed 7 --out " + path("a.onsf"));
    const CliRun b = run("gen --kind weier --theta 0.333 --seed 7 --out " + path("b.onsf"));
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(slurp(path("a.onsf")), slurp(path("b.onsf")));
    EXPECT_FALSE(fs::exists(path("a.p.onsf")));
    const json prov = json::parse(a.out);
    EXPECT_EQ(prov["params"]["levels"], 4);
    EXPECT_EQ(prov["pressure"], "leray");
    EXPECT_FALSE(prov["warnings"].empty());
}

TEST_F(Cli, SweepTaylorGreenCsvSchemaAndSlope) {
    const std::string u = gen("tg", "--kind tg --n 256");
    const CliRun r = run("sweep --u " + u + " --p " + path("tg.p.onsf") + " --scales-h 4,8,16,32");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_GE(rows.size(), 5u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"ell", "l1_dr", "l1_cet", "l1_balance", "kernel", "nonsolution_flag"}));
    EXPECT_EQ(rows[1][4], "bump");
    EXPECT_EQ(rows[1][5], "false");
    EXPECT_FALSE(rows[1][3].empty());
    const auto fits = fit_stanza(r.out);
    ASSERT_TRUE(fits.count("dr"));
    EXPECT_GE(fits.at("dr")[0], 1.9);
    EXPECT_GE(fits.at("cet")[0], 1.9);
}

TEST_F(Cli, SweepWeierstrassIsSupercritical) {
    const std::string u = gen("w", "--kind weier --theta 0.2 --levels 6 --seed 7 --n 256");
    const CliRun r = run("sweep --u " + u + " --scales-h 4,8,16,32 --fit-drop-largest 0 --fit-drop-smallest 0");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(fit_stanza(r.out).at("dr")[0], -0.4, 0.25);
}

TEST_F(Cli, SweepBurgersIsScaleFreeAndFlagged) {
    const std::string u = gen("b", "--kind burgers --a 1 --b -1 --n 256");
    const CliRun r = run("sweep --u " + u + " --scales-h 4,8,16,32 --kernel quartic");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    EXPECT_EQ(rows[1][5], "true");
    EXPECT_EQ(rows[1][3], "");
    const auto fit = fit_stanza(r.out).at("dr");
    EXPECT_NEAR(fit[0], 0.0, 0.1);
    EXPECT_GT(fit[1], 0.0);
    EXPECT_NE(r.err.find("Leray"), std::string::npos);
}

TEST_F(Cli, SweepJsonAndDeterminism) {
    const std::string u = gen("r", "--kind random --theta 0.4 --seed 3 --n 64");
    const CliRun a = run("sweep --u " + u + " --format json");
    const CliRun b = run("sweep --u " + u + " --format json");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const json j = json::parse(a.out);
    EXPECT_EQ(j["rows"].size(), 4u); // 2h .. 16h with 2 ell < L
    EXPECT_TRUE(j["rows"][0]["l1_balance"].is_null());
}

TEST_F(Cli, SweepMisalignedScaleIsNamed) {
    const std::string u = gen("tg", "--kind tg --n 64");
    const CliRun r = run("sweep --u " + u + " --scales 0.1,0.0625,0.125");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("0.1"), std::string::npos);
    EXPECT_NE(r.err.find("not an integer multiple"), std::string::npos);
}

TEST_F(Cli, TraceShearSheet) {
    const std::string u = gen("s", "--kind shear --n 64");
    const CliRun r = run("trace --u " + u + " --p " + path("s.p.onsf"));
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_LE(j["aggregates"]["R_inc"].get<double>(), 1e-12);
    EXPECT_LE(j["aggregates"]["R_p"].get<double>(), 1e-12);
    EXPECT_LE(j["aggregates"]["D_sigma_total"].get<double>(), 1e-12);
    ASSERT_EQ(j["samples"].size(), 64u);
    for (const auto& s : j["samples"]) EXPECT_EQ(s["class"], "S2");
}

TEST_F(Cli, TraceBurgersShock) {
    const std::string u = gen("b", "--kind burgers --n 64");
    const CliRun single = run("trace --u " + u + " --axis 0 --position 0.5");
    const CliRun twin = run("trace --u " + u + " --axis 0 --position 0.5 --mirrored");
    ASSERT_EQ(single.code, 0) << single.err;
    const json a = json::parse(single.out), b = json::parse(twin.out);
    // |u_R - u_L| = 2 over a unit-length interface; the mirrored twin doubles it
    EXPECT_NEAR(a["aggregates"]["R_inc"].get<double>(), 2.0, 1e-12);
    EXPECT_NEAR(b["aggregates"]["R_inc"].get<double>(), 4.0, 1e-12);
    EXPECT_NEAR(a["aggregates"]["D_sigma_total"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(a["pressure"], "zero");
    for (const auto& s : a["samples"]) EXPECT_EQ(s["class"], "S1");
}

TEST_F(Cli, TraceConstantFieldAndUnconvergedExit) {
    const onsager::Grid g = onsager::Grid::square(32);
    const std::string c = path("c.onsf");
    onsager::onsf::write_field(c, onsager::GridField::constant(g, std::array<double, 2>{0.5, -1.5}));
    const CliRun r = run("trace --u " + c + " --axis 0 --position 0.25");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    for (const char* k : {"R_inc", "R_p", "R_mom", "D_sigma_total"}) EXPECT_EQ(j["aggregates"][k].get<double>(), 0.0);

    const std::string s = gen("smooth", "--kind shear --w 0.0625 --n 64");
    const std::string report = path("report.json");
    const CliRun bad = run("trace --u " + s + " --out " + report);
    EXPECT_EQ(bad.code, 2);
    const json partial = json::parse(slurp(report));
    EXPECT_EQ(partial["converged"], 0);
    const CliRun loose = run("trace --u " + s + " --cauchy-tol 1");
    EXPECT_EQ(loose.code, 0);
}

TEST_F(Cli, NormsCsv) {
    const onsager::Grid g = onsager::Grid::square(32);
    const std::string c = path("c.onsf");
    onsager::onsf::write_field(c, onsager::GridField::constant(g, std::array<double, 2>{0.5, -1.5}));
    const CliRun r = run("norms --u " + c);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"kind", "scale", "value"}));
    bool saw_bd = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 3u) << rows[i][0];
        saw_bd = saw_bd || rows[i][0] == "bd_longitudinal[1 0]";
        if (rows[i][0] == "vmo_vanishing") {
            EXPECT_EQ(rows[i][2], "1");
            continue;
        }
        EXPECT_LE(std::abs(std::stod(rows[i][2])), 1e-14) << rows[i][0];
    }
    EXPECT_TRUE(saw_bd);
    EXPECT_EQ(run("norms --u " + c + " --kind holder").code, 1);
}

TEST_F(Cli, DensityTables) {
    const std::string tg = gen("tg", "--kind tg --n 128");
    const CliRun r = run("density --u " + tg);
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = csv_rows(r.out);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"delta", "ell", "t_full", "t_smooth_leg", "t_remainder"}));
    ASSERT_EQ(rows.size(), 10u);
    // rows: per delta (decreasing), ell decreasing; smooth data decays in ell in every column
    for (int d = 0; d < 3; ++d)
        for (int k = 1; k < 3; ++k)
            for (int col = 2; col < 5; ++col)
                EXPECT_LT(std::stod(rows[1 + 3 * d + k][col]), std::stod(rows[3 * d + k][col]));

    const std::string w = gen("w", "--kind weier --theta 0.4 --seed 1 --n 128");
    rows = csv_rows(run("density --u " + w + " --deltas-h 16,8,4 --ells-h 8,4,2").out);
    ASSERT_EQ(rows.size(), 10u);
    for (int d = 0; d < 3; ++d)
        for (int k = 1; k < 3; ++k) EXPECT_LT(std::stod(rows[1 + 3 * d + k][3]), std::stod(rows[3 * d + k][3]));

    const onsager::Grid g = onsager::Grid::square(64);
    const std::string c = path("c.onsf");
    onsager::onsf::write_field(c, onsager::GridField::constant(g, std::array<double, 2>{2.0, 1.0}));
    rows = csv_rows(run("density --u " + c + " --deltas-h 8,4 --ells-h 4,2").out);
    for (std::size_t i = 1; i < rows.size(); ++i)
        for (int col = 2; col < 5; ++col) EXPECT_EQ(std::stod(rows[i][col]), 0.0);
}

TEST_F(Cli, FluxSummaryAndOutput) {
    const std::string u = gen("b", "--kind burgers --n 128");
    const std::string out = path("flux.onsf");
    const CliRun r = run("flux --u " + u + " --variant dr --scale-h 8 --kernel quartic --out " + out);
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["l1"].get<double>(), 4.0, 0.08);
    EXPECT_EQ(onsager::onsf::read_field(out).components(), 1);
    EXPECT_EQ(run("flux --u " + u + " --variant balance").code, 1);
}

TEST_F(Cli, UsageAndIoErrors) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("sweep --bogus").code, 1);
    const CliRun missing = run("sweep --u " + path("nope.onsf"));
    EXPECT_EQ(missing.code, 1);
    EXPECT_FALSE(missing.err.empty());
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("gen --kind vortex --out " + path("x.onsf")).code, 1);
}
