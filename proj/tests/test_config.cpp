#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ostlab/experiment.hpp"

using namespace ostlab;

namespace {

const char* kSample = R"(; sample
[experiment]
kind = decay-scan
seed = 7

[symbol]
family = NPBO
eta = 0.5

[grid]
L = 100
N = 2048

[datum]
family = lorentz_power
amplitude = 0.05
parameter = 3

[datum.odd]
family = odd_power
amplitude = 0.05
parameter = 4
epsilon = 1

[lwp]
p = 1, 2, inf
)";

std::string key_of(const std::string& text) {
    try {
        parse_config_string(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

}  // namespace

TEST(Config, ParsesSample) {
    const auto c = parse_config_string(kSample);
    EXPECT_EQ(c.experiment.kind, "decay-scan");
    EXPECT_EQ(c.experiment.seed, 7u);
    EXPECT_EQ(c.symbol.family, Family::NPBO);
    EXPECT_EQ(c.symbol.convention, Convention::ANGULAR);
    EXPECT_EQ(c.grid.N, 2048u);
    ASSERT_EQ(c.members.count("odd"), 1u);
    EXPECT_EQ(c.members.at("odd").datum.family, DatumFamily::ODD_POWER);
    ASSERT_EQ(c.lwp.p.size(), 3u);
    EXPECT_TRUE(std::isinf(c.lwp.p[2]));
}

TEST(Config, RoundTripsThroughIni) {
    const auto c = parse_config_string(kSample);
    EXPECT_EQ(parse_config_string(to_ini(c)), c);
    const ExperimentConfig d = parse_config_string("[experiment]\nkind = kernel\n");
    EXPECT_EQ(parse_config_string(to_ini(d)), d);
}

TEST(Config, UnknownKeyIsNamed) { EXPECT_EQ(key_of("[experiment]\nkind = kernel\n[grid]\nLL = 3\n"), "grid.LL"); }

TEST(Config, UnknownSectionIsNamed) { EXPECT_EQ(key_of("[experiment]\nkind = kernel\n[bogus]\nx = 1\n"), "bogus"); }

TEST(Config, InvalidValuesAreNamed) {
    EXPECT_EQ(key_of("[experiment]\nkind = kernel\n[grid]\nN = 1000\n"), "grid.N");
    EXPECT_EQ(key_of("[experiment]\nkind = kernel\n[symbol]\neta = -1\n"), "symbol.eta");
    EXPECT_EQ(key_of("[experiment]\nkind = kernel\n[symbol]\neta = abc\n"), "symbol.eta");
    EXPECT_EQ(key_of("[experiment]\nkind = nonsense\n"), "experiment.kind");
}

TEST(Config, MissingFileIsConfigError) {
    EXPECT_THROW(load_config("/nonexistent/ost.cfg"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
    const std::filesystem::path dir = OSTLAB_CONFIG_DIR;
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".cfg") continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 6u);
}

TEST(Csv, EscapesPerRfc4180) {
    EXPECT_EQ(CsvTable::escape("plain"), "plain");
    EXPECT_EQ(CsvTable::escape("a,b"), "\"a,b\"");
    EXPECT_EQ(CsvTable::escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(CsvTable::escape("two\nlines"), "\"two\nlines\"");
}

TEST(Csv, RowsEndWithCrLf) {
    CsvTable t{"t.csv", {"x", "y"}, {}};
    t.add({"1", "a,b"});
    EXPECT_EQ(t.str(), "x,y\r\n1,\"a,b\"\r\n");
}

TEST(Outcome, OnlyEnforcedChecksDecide) {
    ExperimentOutcome o;
    o.check("informational", 5.0, 0.0, 1.0, false);
    EXPECT_TRUE(o.pass);
    o.check("nan fails", std::nan(""), 0.0, 1.0);
    EXPECT_FALSE(o.pass);
}

TEST(Report, EmbedsConfigAndVersion) {
    const auto c = parse_config_string(kSample);
    ExperimentOutcome o;
    const auto r = make_report(c, o, "2026-01-01T00:00:00Z");
    EXPECT_EQ(r["tool"], kToolVersion);
    EXPECT_EQ(r["config"]["grid"]["N"], 2048);
    EXPECT_EQ(parse_config_string(r["config_ini"].get<std::string>()), c);
}

TEST(Report, DeterministicApartFromTimestamp) {
    const auto c = parse_config_string("[experiment]\nkind = constants\n[grid]\nL = 100\nN = 1024\n[solver]\nT = 0.2\ndt = 0.01\n");
    const auto a = make_report(c, run_experiment(c), "x");
    const auto b = make_report(c, run_experiment(c), "x");
    EXPECT_EQ(a.dump(), b.dump());
}
