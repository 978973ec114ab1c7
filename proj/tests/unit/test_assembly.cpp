#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fpg/assembly.hpp"
#include "fpg/manufactured.hpp"

using namespace fpg;

namespace {

ProblemSpec diffusion(double tau = 0.25, double nu = 0.75) { return ProblemSpec::diffusion_1d(tau, nu, 0.2, 2.0); }

Resolution square(int n, int d = 1) {
    Resolution r;
    r.n_time = n;
    r.m_space.assign(d, n);
    return r;
}

}  // namespace

TEST(TrialBasis, VanishesAtInitialTimeAndBoundary) {
    const auto spec = diffusion();
    const std::vector<double> x0{0.3}, xa{-1.0}, xb{1.0};
    for (int n = 1; n <= 4; ++n) {
        for (int m = 1; m <= 4; ++m) {
            const std::vector<int> mm{m};
            EXPECT_EQ(eval_trial_basis(spec, n, mm, 0.0, x0), 0.0);
            EXPECT_NEAR(eval_trial_basis(spec, n, mm, 1.1, xa), 0.0, 1e-14);
            EXPECT_NEAR(eval_trial_basis(spec, n, mm, 1.1, xb), 0.0, 1e-14);
        }
    }
}

TEST(TrialBasis, DirectValue) {
    const auto spec = diffusion();
    const std::vector<int> m{1};
    const std::vector<double> x{0.0};
    EXPECT_NEAR(eval_trial_basis(spec, 1, m, 1.0, x), -1.5, 1e-15);
}

TEST(TestBasis, VanishesAtFinalTimeAndSharesSpatialFactor) {
    const auto spec = diffusion();
    const std::vector<int> m{1};
    const std::vector<double> x{0.0};
    EXPECT_EQ(eval_test_basis(spec, 2, m, 2.0, x), 0.0);
    EXPECT_NEAR(eval_test_basis(spec, 1, m, 1.0, x), -1.5, 1e-15);
    const std::vector<int> m3{3};
    const std::vector<double> y{0.42};
    EXPECT_NEAR(eval_test_basis(spec, 1, m3, 1.0, y), eval_trial_basis(spec, 1, m3, 1.0, y), 1e-15);
}

TEST(Basis, RejectsPointsOutsideDomain) {
    const auto spec = diffusion();
    const std::vector<int> m{1};
    const std::vector<double> x{0.0}, far{1.5};
    EXPECT_THROW(eval_trial_basis(spec, 1, m, 2.5, x), DomainError);
    EXPECT_THROW(eval_trial_basis(spec, 1, m, 1.0, far), DomainError);
}

TEST(SpatialMode, ReducedFormConsistent) {
    for (int m = 1; m <= 8; ++m)
        for (double xi : {-0.9, -0.3, 0.2, 0.7})
            EXPECT_NEAR(spatial_mode(m, xi), (1 - xi * xi) * spatial_mode_reduced(m, xi), 1e-13);
}

TEST(TemporalMatrices, StiffnessDiagonalWithClosedForm) {
    const double tau = 0.25, T = 2.0;
    const auto tm = temporal_matrices(FracOrder(tau), 6, T, 16);
    for (int n = 0; n < 6; ++n)
        for (int k = 0; k < 6; ++k)
            if (n != k) {
                EXPECT_NEAR(tm.stiffness(k, n), 0.0, 1e-11);
            }
    EXPECT_NEAR(tm.stiffness(0, 0), gamma_fn(1.25) * gamma_fn(1.25) * 2.0, 1e-13);
    for (int n = 1; n <= 6; ++n) {
        const double c = gamma_fn(n + tau) / gamma_fn(n);
        EXPECT_NEAR(tm.stiffness(n - 1, n - 1), c * c * 2.0 / (2 * n - 1), 1e-12);
    }
    EXPECT_LE(tm.drift, quadrature_drift_tolerance);
}

TEST(TemporalMatrices, MassLeadingEntry) {
    const double tau = 0.3, T = 1.7;
    const auto tm = temporal_matrices(FracOrder(tau), 4, T, 14);
    const double expect = (T / 2) * std::pow(2.0, 2 * tau + 1) * std::pow(gamma_fn(tau + 1), 2) / gamma_fn(2 * tau + 2);
    EXPECT_NEAR(tm.mass(0, 0), expect, 1e-13);
}

TEST(TemporalMatrices, StiffnessScalesWithHorizon) {
    const double tau = 0.4;
    const auto a = temporal_matrices(FracOrder(tau), 3, 2.0, 13);
    const auto b = temporal_matrices(FracOrder(tau), 3, 5.0, 13);
    EXPECT_NEAR(b.stiffness(1, 1) / a.stiffness(1, 1), std::pow(2.0 / 5.0, 2 * tau - 1) / std::pow(1.0, 2 * tau - 1), 1e-12);
}

TEST(SpatialMatrices, MassPattern) {
    const auto M = spatial_mass(7, 1.0);
    EXPECT_NEAR(M(0, 0), 12.0 / 5.0, 1e-15);
    for (int r = 0; r < 7; ++r)
        for (int m = 0; m < 7; ++m)
            if (std::abs(r - m) != 0 && std::abs(r - m) != 2) {
                EXPECT_EQ(M(r, m), 0.0);
            }
    EXPECT_NEAR(M(0, 2), -2.0 / 5.0, 1e-15);
    EXPECT_NEAR(spatial_mass(3, 0.5)(1, 1), 0.5 * spatial_mass(3, 1.0)(1, 1), 1e-15);
}

TEST(SpatialMatrices, RightIsTransposeOfLeft) {
    for (double s : {0.55, 0.75, 0.95}) {
        const auto sm = spatial_matrices(FracOrder(s), 8, Interval{-1.0, 1.0}, 18);
        EXPECT_LT((sm.stiff_right - sm.stiff_left.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE(sm.drift, quadrature_drift_tolerance);
    }
}

TEST(SpatialMatrices, AgreesWithOracleQuadrature) {
    // (D_L^s phi_m, D_R^s phi_r) through Gauss-Jacobi(-s,-s) on the unreduced derivatives
    const double s = 0.6;
    const auto sm = spatial_matrices(FracOrder(s), 4, Interval{-1.0, 1.0}, 14);
    const auto rule = gauss_jacobi_rule(40, -s, -s);
    for (int r = 1; r <= 4; ++r) {
        for (int m = 1; m <= 4; ++m) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double x = rule.nodes[i];
                const double dl = frac_deriv_legendre(m + 1, FracOrder(s), Side::Left, x) -
                                  frac_deriv_legendre(m - 1, FracOrder(s), Side::Left, x);
                const double dr = frac_deriv_legendre(r + 1, FracOrder(s), Side::Right, x) -
                                  frac_deriv_legendre(r - 1, FracOrder(s), Side::Right, x);
                acc += rule.weights[i] * dl * dr * std::pow(1 - x * x, s);
            }
            EXPECT_NEAR(sm.stiff_left(r - 1, m - 1), acc, 1e-11);
        }
    }
}

TEST(SpatialMatrices, IntervalScaling) {
    const double s = 0.7;
    const auto ref = spatial_matrices(FracOrder(s), 5, Interval{-1.0, 1.0}, 15);
    const auto big = spatial_matrices(FracOrder(s), 5, Interval{0.0, 6.0}, 15);
    const double J = 3.0;
    EXPECT_LT((big.stiff_left - std::pow(J, 1 - 2 * s) * ref.stiff_left).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((big.mass - J * ref.mass).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LoadVector, ZeroForcingGivesZero) {
    const auto spec = diffusion();
    const auto F = load_vector(spec, square(3), ForcingFn([](double, std::span<const double>) { return 0.0; }));
    EXPECT_EQ(F.size(), 9);
    EXPECT_EQ(F.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LoadVector, TestFunctionSelfPairing) {
    const auto spec = diffusion(0.25);
    const std::vector<int> r{1};
    ForcingFn f = [&](double t, std::span<const double> x) { return eval_test_basis(spec, 1, r, t, x); };
    Resolution res = square(2);
    res.quad_order = 40;
    const auto F = load_vector(spec, res, f);
    const double tau = spec.tau;
    // (T/2) int (1-eta)^{2 tau} * 12/5
    const double expect = (spec.T / 2) * std::pow(2.0, 2 * tau + 1) / (2 * tau + 1) * 12.0 / 5.0;
    // the rule absorbs only one (1-eta)^tau factor, so convergence is algebraic
    EXPECT_GT(F[0], 0.0);
    EXPECT_NEAR(F[0], expect, 5e-6 * expect);
}

TEST(LoadVector, NonFiniteForcingNamesPoint) {
    const auto spec = diffusion();
    ForcingFn f = [](double, std::span<const double>) { return std::nan(""); };
    try {
        load_vector(spec, square(2), f);
        FAIL() << "expected EvaluationError";
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
    }
}

TEST(LoadVector, SeparableAgreesWithGenericAtHighOrder) {
    // Case I diffusion forcing: the generic rule converges slowly near the
    // singular endpoints, so it is pushed to many nodes and used as the oracle
    const auto spec = diffusion_setup(0.25, 0.55);
    const auto c = ManufacturedCase::case_one();
    const auto sep = load_vector(spec, square(3), forcing_terms(c, spec));
    Resolution fine = square(3);
    fine.quad_order = 400;
    const ForcingFn f = [&](double t, std::span<const double> x) { return forcing_strong(c, spec, t, x); };
    const auto gen = load_vector(spec, fine, f);
    EXPECT_LT((sep - gen).cwiseAbs().maxCoeff() / sep.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(OperatorMatrices, BlockShapes) {
    ProblemSpec spec = diffusion();
    Resolution res;
    res.n_time = 4;
    res.m_space = {3};
    const auto ops = build_operator_matrices(spec, res);
    EXPECT_EQ(ops.temporal.stiffness.rows(), 4);
    ASSERT_EQ(ops.spatial.size(), 1u);
    EXPECT_EQ(ops.spatial[0].nu_left.rows(), 3);
    EXPECT_EQ(ops.spatial[0].mu_right.cols(), 3);
}
