#include <cmath>

#include <gtest/gtest.h>

#include "fpg/analysis.hpp"

using namespace fpg;

namespace {

Resolution square(int n) {
    Resolution r;
    r.n_time = n;
    r.m_space = {n};
    return r;
}

// Solution inside the trial space: t^{3.25} = c (1+eta)^{1/4} (1+eta)^3 and
// (1+x)^3 - 2 (1+x)^2 = (1+x)^2 (x-1).
ManufacturedCase representable() {
    ManufacturedCase c;
    c.p1 = 3.25;
    c.p2 = 3.0;
    c.p3 = 2.0;
    return c;
}

}  // namespace

TEST(L2Error, ZeroSolutionIsOne) {
    const auto spec = diffusion_setup(0.25, 0.75);
    SpectralSolution sol{Eigen::VectorXd::Zero(16), spec, square(4), 0.0};
    EXPECT_NEAR(l2_rel_error(sol, ManufacturedCase::case_one()), 1.0, 1e-14);
    EXPECT_NEAR(energy_error(sol, ManufacturedCase::case_one()), 1.0, 1e-14);
}

TEST(L2Error, RepresentableSolutionIsReproduced) {
    const auto spec = diffusion_setup(0.25, 0.75);
    const auto c = representable();
    const auto sol = solve_problem(spec, square(5), forcing_terms(c, spec));
    EXPECT_LE(l2_rel_error(sol, c), 1e-12);
    EXPECT_LE(energy_error(sol, c), 1e-10);
}

TEST(L2Error, TwoDimensionalRepresentable) {
    ProblemSpec spec = diffusion_setup(0.25, 0.75);
    spec.d = 2;
    spec.intervals = {Interval{-1, 1}, Interval{-1, 1}};
    spec.mu = {0.25, 0.25};
    spec.nu = {0.75, 0.75};
    spec.c_left = spec.c_right = {0.0, 0.0};
    spec.kappa_left = spec.kappa_right = {0.2, 0.2};
    Resolution res;
    res.n_time = 4;
    res.m_space = {3, 3};
    const auto c = representable();
    const auto sol = solve_problem(spec, res, forcing_terms(c, spec));
    EXPECT_LE(l2_rel_error(sol, c), 1e-11);
    EXPECT_THROW(energy_error(sol, c), ShapeError);
}

TEST(L2Error, DecreasesUnderRefinement) {
    const auto spec = diffusion_setup(0.25, 0.55);
    const auto c = ManufacturedCase::case_two(1);
    double last = 1.0;
    for (int m : {5, 9, 13}) {
        Resolution res;
        res.n_time = 19;
        res.m_space = {m};
        const double e = l2_rel_error(solve_problem(spec, res, forcing_terms(c, spec)), c);
        EXPECT_LT(e, last);
        last = e;
    }
    EXPECT_LT(last, 1e-8);
}

TEST(ObservedRate, SyntheticPowerLaw) {
    std::vector<double> m{3, 5, 7, 9, 11}, e;
    for (double v : m) e.push_back(4.2 * std::pow(v, -5.0));
    EXPECT_NEAR(observed_rate(m, e), 5.0, 1e-10);
    EXPECT_NEAR(observed_rate(m, e, 0), 5.0, 1e-10);
    EXPECT_NEAR(observed_rate(m, std::vector<double>(5, 1e-3)), 0.0, 1e-12);
}

TEST(ObservedRate, WindowSelectsTail) {
    std::vector<double> m{2, 4, 8, 16}, e{1.0, 0.5, 1.0 / 64, 1.0 / 1024};
    EXPECT_NEAR(observed_rate(m, e, 2), 4.0, 1e-12);
    EXPECT_NEAR(observed_rate(m, e, 3), 4.5, 1e-12);
}

TEST(ObservedRate, RejectsDegenerateInput) {
    EXPECT_THROW(observed_rate({3}, {0.1}), DomainError);
    EXPECT_THROW(observed_rate({3, 5}, {0.1, 0.0}), DomainError);
    EXPECT_THROW(observed_rate({3, 3}, {0.1, 0.2}), DomainError);
    EXPECT_THROW(observed_rate({3, 5}, {0.1}), ShapeError);
}

TEST(ConvergenceSweep, SinglePointHasNoRate) {
    const auto spec = diffusion_setup(0.25, 0.75);
    const auto rec = convergence_sweep(spec, ManufacturedCase::case_one(), SweepAxis::Temporal, {5}, 9);
    ASSERT_EQ(rec.l2_errors.size(), 1u);
    EXPECT_FALSE(rec.rate_defined);
    EXPECT_TRUE(std::isnan(rec.observed_rate_l2));
}

TEST(ConvergenceSweep, RecordsEveryPoint) {
    const auto spec = diffusion_setup(0.45, 0.75);
    const auto rec = convergence_sweep(spec, ManufacturedCase::case_one(), SweepAxis::Temporal, {3, 5, 7}, 15);
    ASSERT_EQ(rec.orders_swept.size(), 3u);
    EXPECT_TRUE(rec.rate_defined);
    EXPECT_TRUE(rec.failures.empty());
    for (std::size_t i = 1; i < 3; ++i) EXPECT_LT(rec.l2_errors[i], rec.l2_errors[i - 1]);
    for (double r : rec.residuals) EXPECT_LT(r, 1e-10);
    EXPECT_GT(rec.observed_rate_l2, 5.0);
}

TEST(ConvergenceSweep, EmptyOrdersRejected) {
    EXPECT_THROW(convergence_sweep(diffusion_setup(0.25, 0.75), ManufacturedCase::case_one(), SweepAxis::Spatial, {}, 5),
                 ValidationError);
}

TEST(InfSup, OneByOneIsNormalizedPairing) {
    const auto spec = diffusion_setup(0.25, 0.75);
    const auto res = square(1);
    const auto A = assemble_lhs(spec, build_operator_matrices(spec, res));
    const auto g = energy_grams(spec, res);
    EXPECT_NEAR(discrete_inf_sup(spec, res), std::abs(A(0, 0)) / std::sqrt(g.trial(0, 0) * g.test(0, 0)), 1e-13);
}

TEST(InfSup, StableAcrossOrders) {
    const auto spec = diffusion_setup(0.25, 0.75);
    const double ref = discrete_inf_sup(spec, square(4));
    EXPECT_GT(ref, 0.0);
    for (int n = 2; n <= 10; ++n) {
        const double b = discrete_inf_sup(spec, square(n));
        EXPECT_LE(b, 2.0 * ref);
        EXPECT_GE(b, 0.5 * ref);
    }
}

TEST(InfSup, BoundedUnderCoefficientScaling) {
    const auto base = diffusion_setup(0.25, 0.75);
    auto big = base;
    big.kappa_left = {2.0};
    big.kappa_right = {2.0};
    const double b0 = discrete_inf_sup(base, square(4));
    const double b1 = discrete_inf_sup(big, square(4));
    EXPECT_LE(b1 / b0, 10.0);
    EXPECT_GT(b1, 0.0);
}
