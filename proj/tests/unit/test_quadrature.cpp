#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fpg/quadrature.hpp"

using namespace fpg;

TEST(GaussJacobi, SingleNodeIsMidpoint) {
    const auto r = gauss_jacobi_rule(1, 0.0, 0.0);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r.nodes[0], 0.0, 1e-15);
    EXPECT_NEAR(r.weights[0], 2.0, 1e-15);
}

TEST(GaussJacobi, TwoPointLegendre) {
    const auto r = gauss_jacobi_rule(2, 0.0, 0.0);
    EXPECT_NEAR(r.nodes[0], -0.5773502692, 1e-10);
    EXPECT_NEAR(r.nodes[1], 0.5773502692, 1e-10);
    EXPECT_NEAR(r.weights[0], 1.0, 1e-14);
    EXPECT_NEAR(r.weights[1], 1.0, 1e-14);
}

TEST(GaussJacobi, FrozenWeightSum) {
    const auto r = gauss_jacobi_rule(4, -0.55, -0.55);
    const double sum = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
    EXPECT_NEAR(sum, 3.3820541215231944908, 1e-13);  // 2^{-0.1} Gamma(0.45)^2 / Gamma(0.9)
}

TEST(GaussJacobi, NodesIncreasingAndWeightsPositive) {
    for (int q : {3, 10, 40, 80}) {
        for (auto [a, b] : {std::pair{0.0, 0.0}, {-0.75, 0.3}, {2.5, -0.95}, {0.9, 0.9}}) {
            const auto r = gauss_jacobi_rule(q, a, b);
            for (int i = 0; i < q; ++i) {
                EXPECT_GT(r.weights[i], 0.0);
                EXPECT_GT(r.nodes[i], -1.0);
                EXPECT_LT(r.nodes[i], 1.0);
                if (i) {
                    EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
                }
            }
        }
    }
}

TEST(GaussJacobi, ExactForHighDegreeJacobiMoments) {
    // int (1-x)^a (1+x)^b (1+x)^j = 2^{a+b+j+1} B(a+1, b+j+1)
    const double a = -0.45, b = 0.2;
    for (int q : {5, 12, 25}) {
        const auto r = gauss_jacobi_rule(q, a, b);
        for (int j = 0; j <= 2 * q - 1; ++j) {
            const double exact = jacobi_weight_integral(a, b + j);
            const double got = integrate(r, [j](double x) { return std::pow(1.0 + x, j); });
            EXPECT_NEAR(got, exact, 1e-12 * exact) << "q=" << q << " j=" << j;
        }
    }
}

TEST(GaussJacobi, RejectsInvalidInput) {
    EXPECT_THROW(gauss_jacobi_rule(0, 0.0, 0.0), DomainError);
    EXPECT_THROW(gauss_jacobi_rule(3, -1.0, 0.0), DomainError);
    EXPECT_THROW(gauss_jacobi_rule(3, 0.0, -2.0), DomainError);
}

TEST(GaussLegendre, Monomials) {
    EXPECT_EQ(gauss_legendre_rule(1).nodes.size(), 1u);
    EXPECT_NEAR(integrate(gauss_legendre_rule(3), [](double x) { return std::pow(x, 4); }), 0.4, 1e-13);
    EXPECT_NEAR(integrate(gauss_legendre_rule(5), [](double x) { return std::pow(x, 8); }), 2.0 / 9.0, 1e-13);
}

TEST(Integrate, WeightSumAndExactness) {
    EXPECT_NEAR(integrate(gauss_jacobi_rule(2, 0, 0), [](double) { return 1.0; }), 2.0, 1e-15);
    EXPECT_NEAR(integrate(gauss_jacobi_rule(3, 0, 0), [](double x) { return x * x; }), 2.0 / 3.0, 1e-14);
}

TEST(Integrate, FrozenJacobiProduct) {
    // P1^{.75,-.75} P1^{-.75,.75} against (1-x^2)^{-.75}; mpmath beta integrals
    const auto r = gauss_jacobi_rule(8, -0.75, -0.75);
    const double got =
        integrate(r, [](double x) { return jacobi_p(1, {0.75, -0.75}, x) * jacobi_p(1, {-0.75, 0.75}, x); });
    EXPECT_NEAR(got, 0.54626199047752496051, 1e-13);
}

TEST(Integrate, NonFiniteIntegrandThrows) {
    EXPECT_THROW(integrate(gauss_legendre_rule(4), [](double) { return std::nan(""); }), EvaluationError);
}

TEST(RuleCache, ReturnsSharedRule) {
    const auto a = cached_gauss_jacobi(17, -0.3, 0.4);
    const auto b = cached_gauss_jacobi(17, -0.3, 0.4);
    EXPECT_EQ(a.get(), b.get());
    const auto c = cached_gauss_jacobi(17, -0.3, 0.5);
    EXPECT_NE(a.get(), c.get());
    EXPECT_EQ(a->nodes, gauss_jacobi_rule(17, -0.3, 0.4).nodes);
}
