#pragma once

// Gauss-Jacobi rules on (-1,1) for the weight (1-x)^alpha (1+x)^beta.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>
#include <vector>

#include "fpg/errors.hpp"
#include "fpg/specfun.hpp"

namespace fpg {

struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, inside (-1,1)
    std::vector<double> weights;  // positive
    JacobiParams weight_exponents;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Integral of (1-x)^alpha (1+x)^beta over (-1,1).
inline double jacobi_weight_integral(double alpha, double beta) {
    return std::pow(2.0, alpha + beta + 1.0) * gamma_fn(alpha + 1.0) * gamma_fn(beta + 1.0) /
           gamma_fn(alpha + beta + 2.0);
}

namespace detail {

// Jacobi matrix of the monic recurrence (Golub-Welsch).
inline void jacobi_matrix(int q, double a, double b, Eigen::VectorXd& diag, Eigen::VectorXd& sub) {
    diag.resize(q);
    sub.resize(std::max(q - 1, 0));
    const double ab = a + b;
    diag[0] = (b - a) / (ab + 2.0);
    for (int k = 1; k < q; ++k) {
        const double s = 2.0 * k + ab;
        diag[k] = (b * b - a * a) / (s * (s + 2.0));
    }
    if (q > 1) sub[0] = std::sqrt(4.0 * (1.0 + a) * (1.0 + b) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)));
    for (int k = 2; k < q; ++k) {
        const double s = 2.0 * k + ab;
        sub[k - 1] = std::sqrt(4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0)));
    }
}

}  // namespace detail

/// q-point Gauss-Jacobi rule, exact for (1-x)^alpha (1+x)^beta p(x) with deg p <= 2q-1.
///
/// Nodes come from the symmetric tridiagonal eigenproblem and are polished by
/// Newton steps on P_q^{alpha,beta}; weights use the derivative formula and are
/// normalized to the exact weight integral.
inline QuadratureRule gauss_jacobi_rule(int q, double alpha, double beta) {
    if (q < 1) throw DomainError("quadrature needs at least one node");
    const JacobiParams params{alpha, beta};
    params.validate();

    Eigen::VectorXd diag, sub;
    detail::jacobi_matrix(q, alpha, beta, diag, sub);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw ConvergenceError("Golub-Welsch eigensolver failed");

    QuadratureRule rule;
    rule.weight_exponents = params;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    const double mu0 = jacobi_weight_integral(alpha, beta);

    std::vector<double> gw_weights(q);
    for (int i = 0; i < q; ++i) {
        rule.nodes[i] = eig.eigenvalues()[i];
        const double v0 = eig.eigenvectors()(0, i);
        gw_weights[i] = mu0 * v0 * v0;
    }

    if (q == 1) {
        rule.weights[0] = mu0;
        return rule;
    }

    std::vector<double> shape(q);
    for (int i = 0; i < q; ++i) {
        double x = rule.nodes[i];
        for (int it = 0; it < 3; ++it) {
            const double p = jacobi_p(q, params, x);
            const double dp = jacobi_p_derivative(q, params, x);
            if (dp == 0.0) break;
            const double step = p / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        if (std::abs(x - rule.nodes[i]) < 1e-8 && x > -1.0 && x < 1.0) rule.nodes[i] = x;
        const double dp = jacobi_p_derivative(q, params, rule.nodes[i]);
        shape[i] = 1.0 / ((1.0 - rule.nodes[i]) * (1.0 + rule.nodes[i]) * dp * dp);
    }
    const double shape_sum = std::accumulate(shape.begin(), shape.end(), 0.0);
    for (int i = 0; i < q; ++i) {
        const double w = mu0 * shape[i] / shape_sum;
        rule.weights[i] = (std::isfinite(w) && w > 0.0) ? w : gw_weights[i];
    }
    return rule;
}

inline QuadratureRule gauss_legendre_rule(int q) { return gauss_jacobi_rule(q, 0.0, 0.0); }

/// Sum of w_i f(x_i). The caller matches f's singular factor to the rule's weight.
inline double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double v = f(rule.nodes[i]);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "integrand is not finite at node " << rule.nodes[i];
            throw EvaluationError(os.str());
        }
        sum += rule.weights[i] * v;
    }
    return sum;
}

/// Process-wide rule cache keyed by (q, alpha, beta); exponents quantized at 1e-14.
class RuleCache {
public:
    static RuleCache& instance() {
        static RuleCache cache;
        return cache;
    }

    std::shared_ptr<const QuadratureRule> get(int q, double alpha, double beta) {
        const Key key{q, quantize(alpha), quantize(beta)};
        {
            std::lock_guard lock(mutex_);
            if (auto it = rules_.find(key); it != rules_.end()) return it->second;
        }
        auto rule = std::make_shared<const QuadratureRule>(gauss_jacobi_rule(q, alpha, beta));
        std::lock_guard lock(mutex_);
        return rules_.try_emplace(key, std::move(rule)).first->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return rules_.size();
    }

private:
    using Key = std::tuple<int, long long, long long>;

    static long long quantize(double v) { return std::llround(v * 1e14); }

    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const QuadratureRule>> rules_;
};

inline std::shared_ptr<const QuadratureRule> cached_gauss_jacobi(int q, double alpha, double beta) {
    return RuleCache::instance().get(q, alpha, beta);
}

}  // namespace fpg
