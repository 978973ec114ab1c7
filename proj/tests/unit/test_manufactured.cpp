#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fpg/manufactured.hpp"

using namespace fpg;

namespace {

double at(const ManufacturedCase& c, const ProblemSpec& s, double t, double x) {
    const std::vector<double> p{x};
    return exact_solution(c, s, t, p);
}

double force(const ManufacturedCase& c, const ProblemSpec& s, double t, double x) {
    const std::vector<double> p{x};
    return forcing_strong(c, s, t, p);
}

}  // namespace

TEST(CaseOne, InitialAndBoundaryValuesVanish) {
    const auto spec = diffusion_setup(0.25, 0.55);
    const auto c = ManufacturedCase::case_one();
    EXPECT_EQ(at(c, spec, 0.0, 0.3), 0.0);
    EXPECT_NEAR(at(c, spec, 1.3, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(at(c, spec, 1.3, -1.0), 0.0, 1e-15);
}

TEST(CaseOne, DirectSubstitution) {
    const auto spec = diffusion_setup(0.25, 0.55);
    EXPECT_NEAR(at(ManufacturedCase::case_one(), spec, 1.0, 0.0), 1.0 - std::pow(2.0, 0.55), 1e-14);
}

TEST(CaseTwo, VanishesAtBoundary) {
    const auto spec = diffusion_setup(0.25, 0.95);
    for (int n : {1, 2, 3}) {
        const auto c = ManufacturedCase::case_two(n);
        EXPECT_NEAR(at(c, spec, 1.7, -1.0), 0.0, 1e-14);
        EXPECT_NEAR(at(c, spec, 1.7, 1.0), 0.0, 1e-12);
        EXPECT_NEAR(at(c, spec, 1.0, 0.25), std::sin(n * std::numbers::pi * 1.25), 1e-13);
    }
}

TEST(CaseValidation, RejectsBadParameters) {
    ManufacturedCase c;
    c.p1 = -1.0;
    EXPECT_THROW(c.validate(), ValidationError);
    auto d = ManufacturedCase::case_two(0);
    EXPECT_THROW(d.validate(), ValidationError);
}

TEST(Forcing, TermDropoutLeavesTimeDerivativeAndReaction) {
    ProblemSpec spec = diffusion_setup(0.3, 0.75, 0.0);
    spec.gamma_coeff = 0.5;
    const auto c = ManufacturedCase::case_one();
    const double t = 1.4, x = -0.2;
    const double X = std::pow(1 + x, c.p2) - c.eps() * std::pow(1 + x, c.p3);
    const double dt = gamma_fn(c.p1 + 1) / gamma_fn(c.p1 + 1 - 0.6) * std::pow(t, c.p1 - 0.6);
    EXPECT_NEAR(force(c, spec, t, x), (dt + 0.5 * std::pow(t, c.p1)) * X, 1e-12);
}

TEST(Forcing, TemporalTermAtUnitTime) {
    ProblemSpec spec = diffusion_setup(0.25, 0.75, 0.0);
    const auto c = ManufacturedCase::case_one();
    const double x = 0.0;
    const double X = 1.0 - c.eps();
    EXPECT_NEAR(force(c, spec, 1.0, x), gamma_fn(6.05) / gamma_fn(6.05 - 0.5) * X, 1e-12);
}

TEST(Forcing, FrozenCaseOneValue) {
    // mpmath from the defining integrals
    const auto spec = diffusion_setup(0.25, 0.55);
    EXPECT_NEAR(force(ManufacturedCase::case_one(), spec, 1.3, 0.4), -11.99750312292027315, 1e-11);
}

TEST(Forcing, MatchesOracleAtRandomPoints) {
    const auto spec = diffusion_setup(0.25, 0.55);
    const auto c = ManufacturedCase::case_one();
    auto X = [&](double s) { return std::pow(1 + s, c.p2) - c.eps() * std::pow(1 + s, c.p3); };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.1, 2.0), ux(-0.9, 0.9);
    for (int i = 0; i < 10; ++i) {
        const double t = ut(rng), x = ux(rng);
        OracleOptions left, right;
        left.terminal_exponent = c.p3;
        right.terminal_exponent = 1.0;
        const double dl = rl_oracle(X, 1.1, Side::Left, x, left).value;
        const double dr = rl_oracle(X, 1.1, Side::Right, x, right).value;
        const double tt = gamma_fn(c.p1 + 1) / gamma_fn(c.p1 + 0.5) * std::pow(t, c.p1 - 0.5);
        const double ref = tt * X(x) - 0.2 * std::pow(t, c.p1) * (dl + dr);
        EXPECT_NEAR(force(c, spec, t, x), ref, 1e-7 * std::max(1.0, std::abs(ref))) << t << " " << x;
    }
}

TEST(Forcing, SeparableTermsReproduceStrongForm) {
    for (auto c : {ManufacturedCase::case_one(), ManufacturedCase::case_two(1), ManufacturedCase::case_two(2)}) {
        ProblemSpec spec = diffusion_setup(0.35, 0.8);
        spec.c_left = {0.3};
        spec.c_right = {0.1};
        spec.gamma_coeff = 0.4;
        spec.kappa_left = {0.25};
        const auto sep = forcing_terms(c, spec);
        for (double t : {0.2, 1.1, 1.9})
            for (double x : {-0.8, -0.1, 0.3, 0.85}) {
                const std::vector<double> p{x};
                const double strong = forcing_strong(c, spec, t, p);
                EXPECT_NEAR(sep(t, p), strong, 1e-10 * std::max(1.0, std::abs(strong)));
            }
    }
}

TEST(Forcing, TwoDimensionalProduct) {
    ProblemSpec spec = diffusion_setup(0.25, 0.75);
    spec.d = 2;
    spec.intervals = {Interval{-1, 1}, Interval{0, 2}};
    spec.mu = {0.25, 0.25};
    spec.nu = {0.75, 0.6};
    spec.c_left = spec.c_right = {0.0, 0.0};
    spec.kappa_left = spec.kappa_right = {0.2, 0.3};
    const auto c = ManufacturedCase::case_two(1);
    const auto sep = forcing_terms(c, spec);
    const std::vector<double> p{0.3, 1.4};
    EXPECT_NEAR(sep(1.2, p), forcing_strong(c, spec, 1.2, p), 1e-10);
}
