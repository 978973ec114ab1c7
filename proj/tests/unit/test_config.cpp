#include <string>

#include <gtest/gtest.h>

#include "fpg/config.hpp"

using namespace fpg;

namespace {

std::string field_of(const std::string& text, RunMode mode) {
    try {
        parse_config(text).validate(mode);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "";
}

const char* sweep_text = R"(
mode = sweep          # trailing comment
problem.d = 1
problem.T = 2
problem.tau = 0.05
problem.nu = 0.75
problem.kappa_left = 0.2
problem.kappa_right = 0.2
case.kind = I
sweep.axis = temporal
sweep.orders = 3, 5, 7, 9, 11
sweep.fixed_order = 19
output.path = out.csv
)";

}  // namespace

TEST(Config, ParsesSweep) {
    const auto cfg = parse_config(sweep_text);
    ASSERT_TRUE(cfg.mode.has_value());
    EXPECT_EQ(*cfg.mode, RunMode::Sweep);
    EXPECT_EQ(cfg.problem.tau, 0.05);
    EXPECT_EQ(cfg.problem.kappa_right[0], 0.2);
    ASSERT_TRUE(cfg.sweep.has_value());
    EXPECT_EQ(cfg.sweep->orders, (std::vector<int>{3, 5, 7, 9, 11}));
    EXPECT_EQ(cfg.sweep->fixed_order, 19);
    ASSERT_TRUE(cfg.manufactured.has_value());
    EXPECT_EQ(cfg.manufactured->kind, CaseKind::CaseI);
    EXPECT_EQ(cfg.output_path, "out.csv");
    EXPECT_NO_THROW(cfg.validate(RunMode::Sweep));
}

TEST(Config, BroadcastsPerDimensionValues) {
    const auto cfg = parse_config("problem.d = 2\nproblem.nu = 0.6, 0.8\nproblem.kappa_left = 0.3\n");
    EXPECT_EQ(cfg.problem.nu, (std::vector<double>{0.6, 0.8}));
    EXPECT_EQ(cfg.problem.kappa_left, (std::vector<double>{0.3, 0.3}));
    EXPECT_EQ(cfg.problem.intervals.size(), 2u);
}

TEST(Config, HalfTemporalOrderRejected) {
    std::string t = sweep_text;
    t.replace(t.find("0.05"), 4, "0.5");
    try {
        parse_config(t).validate(RunMode::Sweep);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "problem.tau");
        EXPECT_NE(std::string(e.what()).find("2 tau != 1"), std::string::npos);
    }
}

TEST(Config, FieldPathsOnErrors) {
    EXPECT_EQ(field_of("problem.bogus = 1", RunMode::Solve), "problem.bogus");
    EXPECT_EQ(field_of("problem.nu = abc", RunMode::Solve), "problem.nu");
    EXPECT_EQ(field_of("problem.nu = 0.3\ncase.kind = I\nresolution.n_time = 3\n", RunMode::Solve), "problem.nu");
    EXPECT_EQ(field_of("mode = fly", RunMode::Solve), "mode");
    EXPECT_EQ(field_of("case.kind = III", RunMode::Solve), "case.kind");
    EXPECT_EQ(field_of("seed = -4", RunMode::Verify), "seed");
    EXPECT_EQ(field_of("problem.T = 1\nproblem.T = 2\n", RunMode::Solve), "problem.T");
    EXPECT_EQ(field_of("just text", RunMode::Solve), "line 1");
}

TEST(Config, SweepOrdersMustIncrease) {
    std::string t = sweep_text;
    t.replace(t.find("3, 5, 7"), 7, "5, 3, 7");
    EXPECT_EQ(field_of(t, RunMode::Sweep), "sweep.orders");
    EXPECT_EQ(field_of("case.kind = I\nsweep.axis = spatial\nsweep.orders = 3\nproblem.kappa_left = 0.2\n"
                       "problem.kappa_right = 0.2\n",
                       RunMode::Sweep),
              "");
    EXPECT_EQ(field_of("case.kind = I\nsweep.axis = spatial\n", RunMode::Sweep), "sweep.orders");
}

TEST(Config, ModeRequirements) {
    EXPECT_EQ(field_of("problem.tau = 0.3", RunMode::Sweep), "case.kind");
    EXPECT_EQ(field_of("problem.tau = 0.3", RunMode::InfSup), "infsup.orders");
    EXPECT_EQ(field_of("", RunMode::Verify), "");
    EXPECT_EQ(field_of("case.kind = II\nresolution.n_time = 0\n", RunMode::Solve), "resolution.n_time");
}

TEST(Config, ShippedFixturesValidate) {
    for (const char* name : {"temporal_caseI_tau005", "temporal_caseI_tau045", "spatial_caseI_nu055",
                             "spatial_caseI_nu095", "spatial_caseII_nu055", "spatial_caseII_nu095", "solve_caseI",
                             "verify", "infsup"}) {
        const auto cfg = load_config(std::string(FPG_CONFIG_DIR) + "/" + name + ".cfg");
        ASSERT_TRUE(cfg.mode.has_value()) << name;
        EXPECT_NO_THROW(cfg.validate(*cfg.mode)) << name;
    }
    const auto bad = load_config(std::string(FPG_CONFIG_DIR) + "/invalid_two_tau_one.cfg");
    EXPECT_THROW(bad.validate(RunMode::Sweep), ValidationError);
}

TEST(Config, MissingFileIsValidationError) {
    EXPECT_THROW(load_config("/nonexistent/path.cfg"), ValidationError);
}
