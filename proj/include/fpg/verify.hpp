#pragma once

// Self-verification suite: analytic identities against the brute-force
// oracle, integration-by-parts pairings, Kronecker assembly against direct
// quadrature of the bilinear form, and quadrature exactness.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fpg/analysis.hpp"
#include "fpg/assembly.hpp"
#include "fpg/fraccalc.hpp"
#include "fpg/manufactured.hpp"
#include "fpg/quadrature.hpp"
#include "fpg/solver.hpp"

namespace fpg {

struct CheckResult {
    std::string name;
    double max_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string error;  // set when the check threw instead of producing a deviation
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    }
};

// ------------------------------------------------------------ individual checks

/// Largest |frac_deriv_legendre - rl_oracle| over n <= n_max, the given orders,
/// `points` interior points per order and both sides.
inline double legendre_identity_deviation(int n_max, const std::vector<double>& sigmas, int points,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.95, 0.95);
    double worst = 0.0;
    for (double sigma : sigmas) {
        for (int p = 0; p < points; ++p) {
            const double x = unif(rng);
            for (int n = 0; n <= n_max; ++n) {
                auto g = [n](double s) { return legendre_p(n, std::clamp(s, -1.0, 1.0)); };
                for (Side side : {Side::Left, Side::Right}) {
                    const double exact = frac_deriv_legendre(n, FracOrder(sigma), side, x);
                    worst = std::max(worst, std::abs(exact - rl_oracle(g, sigma, side, x).value));
                }
            }
        }
    }
    return worst;
}

/// Largest deviation of the polyfractonomial identity, trial (left) and test (right).
inline double temporal_identity_deviation(int n_max, const std::vector<double>& taus, int points, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.9, 0.9);
    double worst = 0.0;
    for (double tau : taus) {
        for (int p = 0; p < points; ++p) {
            const double eta = unif(rng);
            for (int n = 1; n <= n_max; ++n) {
                const double exact = frac_deriv_temporal_basis(n, FracOrder(tau), BasisKind::Trial, eta);
                auto trial = [n, tau](double s) { return temporal_trial(n, tau, std::clamp(s, -1.0, 1.0)); };
                auto test = [n, tau](double s) { return temporal_test(n, tau, std::clamp(s, -1.0, 1.0)); };
                OracleOptions opts;
                opts.terminal_exponent = tau;
                worst = std::max(worst, std::abs(exact - rl_oracle(trial, tau, Side::Left, eta, opts).value));
                worst = std::max(worst, std::abs(exact - rl_oracle(test, tau, Side::Right, eta, opts).value));
            }
        }
    }
    return worst;
}

namespace detail {

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
    return v;
}

}  // namespace detail

/// (D_R^{2nu} u, v) by the oracle versus the assembled (D_R^nu u, D_L^nu v), and
/// the mirrored left pairing, for random u, v in the spatial space on (-1,1).
inline double spatial_pairing_deviation(int m_count, const std::vector<double>& full_orders, int samples,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    // the integrand below is a polynomial of degree <= 2 m_count + 2 once the weight is removed
    const int q = m_count + 3;
    for (double order : full_orders) {
        const double nu = 0.5 * order;
        const SpatialMatrices sm = spatial_matrices(FracOrder(nu), m_count, Interval{}, m_count + 10);
        for (int s = 0; s < samples; ++s) {
            const Eigen::VectorXd a = detail::random_vector(rng, m_count);
            const Eigen::VectorXd b = detail::random_vector(rng, m_count);
            auto combo = [m_count](const Eigen::VectorXd& c) {
                return [m_count, c](double x) {
                    x = std::clamp(x, -1.0, 1.0);
                    double v = 0.0;
                    for (int m = 1; m <= m_count; ++m) v += c[m - 1] * spatial_mode(m, x);
                    return v;
                };
            };
            const auto u = combo(a);
            const auto v = combo(b);
            for (Side side : {Side::Right, Side::Left}) {
                // D^{2nu} u ~ dist^{1-2nu} at the terminal, v ~ dist there: weight dist^{2-2nu}
                const double e = 2.0 - order;
                const auto rule = side == Side::Right ? cached_gauss_jacobi(q, e, 0.0) : cached_gauss_jacobi(q, 0.0, e);
                double oracle = 0.0;
                for (std::size_t i = 0; i < rule->size(); ++i) {
                    const double x = rule->nodes[i];
                    const double dist = side == Side::Right ? 1.0 - x : 1.0 + x;
                    OracleOptions opts;
                    opts.terminal_exponent = 1.0;
                    const double d = rl_oracle(u, order, side, x, opts).value;
                    oracle += rule->weights[i] * d * v(x) / std::pow(dist, e);
                }
                const Eigen::MatrixXd& S = side == Side::Right ? sm.stiff_right : sm.stiff_left;
                const double assembled = b.dot(S * a);
                worst = std::max(worst, std::abs(oracle - assembled));
            }
        }
    }
    return worst;
}

/// (D_t^{2tau} u, v) on (-1,1) by the oracle versus the assembled temporal stiffness.
inline double temporal_pairing_deviation(int n_count, const std::vector<double>& taus, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    // polynomial of degree <= 2 n_count - 2 once the weight is removed; few nodes keep the oracle off the terminal
    const int q = n_count + 2;
    for (double tau : taus) {
        const TemporalMatrices tm = temporal_matrices(FracOrder(tau), n_count, 2.0, n_count + 10);
        for (int s = 0; s < samples; ++s) {
            const Eigen::VectorXd a = detail::random_vector(rng, n_count);
            const Eigen::VectorXd b = detail::random_vector(rng, n_count);
            auto u = [&, tau](double eta) {
                eta = std::clamp(eta, -1.0, 1.0);
                double val = 0.0;
                for (int n = 1; n <= n_count; ++n) val += a[n - 1] * temporal_trial(n, tau, eta);
                return val;
            };
            auto v_reduced = [&, tau](double eta) {
                double val = 0.0;
                const auto p = jacobi_p_all(n_count - 1, {tau, -tau}, eta);
                for (int k = 0; k < n_count; ++k) val += b[k] * p[k];
                return val;
            };
            // D^{2tau} u ~ (1+eta)^{-tau}, v = (1-eta)^tau * reduced: weight (1-eta)^tau (1+eta)^{-tau}
            const auto rule = cached_gauss_jacobi(q, tau, -tau);
            double oracle = 0.0;
            for (std::size_t i = 0; i < rule->size(); ++i) {
                const double eta = rule->nodes[i];
                OracleOptions opts;
                opts.terminal_exponent = tau;
                const double d = rl_oracle(u, 2.0 * tau, Side::Left, eta, opts).value;
                oracle += rule->weights[i] * d * std::pow(1.0 + eta, tau) * v_reduced(eta);
            }
            worst = std::max(worst, std::abs(oracle - b.dot(tm.stiffness * a)));
        }
    }
    return worst;
}

/// Bilinear form a(trial_j, test_i) by direct tensor quadrature of pointwise
/// derivative values over the full space-time box, one term at a time.
inline Eigen::MatrixXd bilinear_bruteforce(const ProblemSpec& spec, const Resolution& res, int q = 12) {
    spec.validate();
    res.validate(spec);
    const int d = spec.d;
    const Eigen::Index size = static_cast<Eigen::Index>(res.total_size());
    std::vector<std::vector<int>> index(size);
    for (Eigen::Index flat = 0; flat < size; ++flat) {
        std::vector<int> idx(d + 1);
        Eigen::Index rem = flat;
        for (int j = d; j >= 1; --j) {
            idx[j] = static_cast<int>(rem % res.m_space[j - 1]) + 1;
            rem /= res.m_space[j - 1];
        }
        idx[0] = static_cast<int>(rem) + 1;
        index[flat] = idx;
    }

    const double tau = spec.tau;
    const double T = spec.T;
    const double tscale = std::pow(2.0 / T, tau);
    const auto gl = cached_gauss_jacobi(q, 0.0, 0.0);
    const auto gt = cached_gauss_jacobi(q, tau, tau);

    // which 1-D rule and integrand kind each axis uses for one term
    enum class Kind { Value, TimeTrialDeriv, Frac };
    struct Axis {
        std::shared_ptr<const QuadratureRule> rule;
        Kind kind = Kind::Value;
        double sigma = 0.0;
        Side trial_side = Side::Left;  // trial derivative side; the test side is the opposite one
    };
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size, size);

    auto add_term = [&](double coefficient, const std::vector<Axis>& axes) {
        if (coefficient == 0.0) return;
        // node tables per axis: trial and test factor values times the weight correction
        std::vector<std::vector<std::vector<double>>> trial_tab(d + 1), test_tab(d + 1);
        for (int ax = 0; ax <= d; ++ax) {
            const auto& rule = *axes[ax].rule;
            const int modes = ax == 0 ? res.n_time : res.m_space[ax - 1];
            const double J = ax == 0 ? 0.5 * T : spec.intervals[ax - 1].half_length();
            trial_tab[ax].assign(modes, std::vector<double>(rule.size()));
            test_tab[ax].assign(modes, std::vector<double>(rule.size()));
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double y = rule.nodes[i];
                const double wa = rule.weight_exponents.alpha;
                const double wb = rule.weight_exponents.beta;
                const double corr = J / (std::pow(1.0 - y, wa) * std::pow(1.0 + y, wb));
                for (int m = 1; m <= modes; ++m) {
                    double tr = 0.0, te = 0.0;
                    if (ax == 0) {
                        if (axes[ax].kind == Kind::TimeTrialDeriv) {
                            tr = tscale * frac_deriv_temporal_basis(m, FracOrder(tau), BasisKind::Trial, y);
                            te = tscale * frac_deriv_temporal_basis(m, FracOrder(tau), BasisKind::Test, y);
                        } else {
                            tr = temporal_trial(m, tau, y);
                            te = temporal_test(m, tau, y);
                        }
                    } else if (axes[ax].kind == Kind::Frac) {
                        const double scale = std::pow(J, -axes[ax].sigma);
                        const FracOrder s(axes[ax].sigma);
                        tr = scale * frac_deriv_legendre(m + 1, s, axes[ax].trial_side, y) -
                             scale * frac_deriv_legendre(m - 1, s, axes[ax].trial_side, y);
                        const Side ts = opposite(axes[ax].trial_side);
                        te = scale * (frac_deriv_legendre(m + 1, s, ts, y) - frac_deriv_legendre(m - 1, s, ts, y));
                    } else {
                        tr = spatial_mode(m, y);
                        te = tr;
                    }
                    trial_tab[ax][m - 1][i] = tr * corr;
                    test_tab[ax][m - 1][i] = te;
                }
            }
        }
        for (Eigen::Index r = 0; r < size; ++r)
            for (Eigen::Index c = 0; c < size; ++c) {
                // a tensor rule on a product integrand is the product of the axis sums
                double prod = coefficient;
                for (int ax = 0; ax <= d; ++ax) {
                    const auto& rule = *axes[ax].rule;
                    const auto& tr = trial_tab[ax][index[c][ax] - 1];
                    const auto& te = test_tab[ax][index[r][ax] - 1];
                    double s = 0.0;
                    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * tr[i] * te[i];
                    prod *= s;
                }
                A(r, c) += prod;
            }
    };

    std::vector<Axis> axes(d + 1, Axis{gl, Kind::Value});
    axes[0] = {gl, Kind::TimeTrialDeriv};
    add_term(1.0, axes);
    for (int i = 0; i < d; ++i) {
        const struct {
            double coef;
            double sigma;
            Side side;
        } terms[] = {{spec.c_left[i], spec.mu[i], Side::Left},
                     {spec.c_right[i], spec.mu[i], Side::Right},
                     {-spec.kappa_left[i], spec.nu[i], Side::Left},
                     {-spec.kappa_right[i], spec.nu[i], Side::Right}};
        for (const auto& t : terms) {
            std::vector<Axis> ax(d + 1, Axis{gl, Kind::Value});
            ax[0] = {gt, Kind::Value};
            ax[i + 1] = {cached_gauss_jacobi(q, -t.sigma, -t.sigma), Kind::Frac, t.sigma, t.side};
            add_term(t.coef, ax);
        }
    }
    std::vector<Axis> ax(d + 1, Axis{gl, Kind::Value});
    ax[0] = {gt, Kind::Value};
    add_term(spec.gamma_coeff, ax);
    return A;
}

/// Random constant-coefficient problem with d spatial dimensions.
inline ProblemSpec random_problem(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ProblemSpec p;
    p.d = d;
    p.T = 0.5 + 2.0 * unif(rng);
    p.tau = 0.05 + 0.4 * unif(rng);
    for (int j = 0; j < d; ++j) {
        const double a = -1.0 - unif(rng);
        p.intervals.push_back({a, a + 0.5 + 2.0 * unif(rng)});
        p.mu.push_back(0.05 + 0.4 * unif(rng));
        p.nu.push_back(0.55 + 0.4 * unif(rng));
        p.c_left.push_back(unif(rng) - 0.5);
        p.c_right.push_back(unif(rng) - 0.5);
        p.kappa_left.push_back(0.1 + unif(rng));
        p.kappa_right.push_back(0.1 + unif(rng));
    }
    p.gamma_coeff = unif(rng) - 0.5;
    return p;
}

/// Largest entrywise |Kronecker lhs - brute force|, relative to max(1, max |entry|).
inline double kronecker_deviation(int d, int max_order, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> order(1, max_order);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ProblemSpec spec = random_problem(rng, d);
        Resolution res;
        res.n_time = order(rng);
        for (int j = 0; j < d; ++j) res.m_space.push_back(order(rng));
        const OperatorMatrices ops = build_operator_matrices(spec, res);
        const Eigen::MatrixXd kron = assemble_lhs(spec, ops);
        const Eigen::MatrixXd brute = bilinear_bruteforce(spec, res);
        const double scale = std::max(1.0, brute.cwiseAbs().maxCoeff());
        worst = std::max(worst, (kron - brute).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

/// Sylvester path versus the dense solve for Case I diffusion at the given order.
inline double sylvester_deviation(int order, double tau = 0.25, double nu = 0.75) {
    const ProblemSpec spec = diffusion_setup(tau, nu);
    Resolution res;
    res.n_time = order;
    res.m_space = {order};
    const OperatorMatrices ops = build_operator_matrices(spec, res);
    const Eigen::VectorXd load = load_vector(spec, res, forcing_terms(ManufacturedCase::case_one(), spec));
    const SpectralSolution direct = solve_direct(assemble_global(spec, res, ops, load), spec, res);
    const SpectralSolution sylv = solve_sylvester(spec, res, ops, load);
    return (direct.coeffs - sylv.coeffs).norm() / direct.coeffs.norm();
}

/// Weight exponent pairs requested by assembly, the error norms and the
/// load vectors for the given problem and manufactured case.
inline std::vector<std::pair<double, double>> assembly_weight_pairs(const ProblemSpec& spec, const ManufacturedCase& c) {
    std::vector<std::pair<double, double>> pairs = {{0.0, 0.0}};
    const double tau = spec.tau;
    pairs.push_back({tau, tau});
    pairs.push_back({tau, 0.0});
    pairs.push_back({0.0, 2.0 * tau});
    pairs.push_back({2.0 * tau, 0.0});
    pairs.push_back({tau, c.p1});
    pairs.push_back({tau, c.p1 - 2.0 * tau});
    for (int j = 0; j < spec.d; ++j) {
        for (double s : {spec.mu[j], spec.nu[j]}) pairs.push_back({-s, -s});
        const double nu = spec.nu[j];
        pairs.push_back({0.0, 2.0 - 2.0 * nu});
        pairs.push_back({2.0 - 2.0 * nu, 0.0});
        const double s2 = 2.0 * nu;
        std::vector<double> lefts = {1.0, 2.0 - s2};
        if (c.kind == CaseKind::CaseI)
            for (double p : {c.p2, c.p3}) {
                lefts.push_back(1.0 + p);
                lefts.push_back(1.0 + p - s2);
            }
        for (double b : lefts) pairs.push_back({1.0, b});
        pairs.push_back({2.0 - s2, 1.0});
    }
    return pairs;
}

/// Worst relative error integrating random polynomials of degree 2q-1 against
/// each weight, compared with the beta-function closed form.
inline double quadrature_exactness_deviation(const std::vector<int>& qs,
                                             const std::vector<std::pair<double, double>>& weights,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int q : qs)
        for (const auto& [alpha, beta] : weights) {
            const auto& rule = *cached_gauss_jacobi(q, alpha, beta);
            // p(x) = sum_j c_j (1+x)^j, scaled so each term contributes O(1)
            const int deg = 2 * q - 1;
            std::vector<double> coef(deg + 1), moment(deg + 1);
            double exact = 0.0, magnitude = 0.0;
            for (int j = 0; j <= deg; ++j) {
                moment[j] = std::exp((alpha + beta + j + 1.0) * std::numbers::ln2 + std::lgamma(alpha + 1.0) +
                                     std::lgamma(beta + j + 1.0) - std::lgamma(alpha + beta + j + 2.0));
                coef[j] = unif(rng) / moment[j];
                exact += coef[j] * moment[j];
                magnitude += std::abs(coef[j] * moment[j]);
            }
            double approx = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                double p = 0.0;
                const double h = 1.0 + rule.nodes[i];
                for (int j = deg; j >= 0; --j) p = p * h + coef[j];
                approx += rule.weights[i] * p;
            }
            worst = std::max(worst, std::abs(approx - exact) / magnitude);
        }
    return worst;
}

/// Default node counts checked for exactness: {2..16} plus the default assembly orders.
inline std::vector<int> exactness_orders() {
    std::vector<int> qs;
    for (int q = 2; q <= 16; ++q) qs.push_back(q);
    for (int q : {21, 29, 30, 39}) qs.push_back(q);
    return qs;
}

// ------------------------------------------------------------------ the suite

/// Runs every check; tolerance_scale multiplies the shipped tolerances.
inline VerifyReport verify_suite(std::uint64_t seed = 1, double tolerance_scale = 1.0) {
    VerifyReport report;
    auto run = [&](const std::string& name, double tol, const std::function<double()>& body) {
        CheckResult r{name, 0.0, tol * tolerance_scale, false, {}};
        try {
            r.max_dev = body();
            r.pass = std::isfinite(r.max_dev) && r.max_dev <= r.tol;
        } catch (const std::exception& e) {
            r.error = e.what();
            r.max_dev = std::numeric_limits<double>::infinity();
        }
        report.checks.push_back(std::move(r));
    };

    const std::vector<double> sigmas = {0.05, 0.25, 0.55, 0.75, 0.95};
    run("legendre_derivative_identity", 1e-7, [&] { return legendre_identity_deviation(12, sigmas, 20, seed); });
    run("polyfractonomial_identity", 1e-7,
        [&] { return temporal_identity_deviation(8, {0.05, 0.25, 0.45, 0.7, 0.95}, 10, seed + 1); });
    run("spatial_pairing", 1e-6, [&] { return spatial_pairing_deviation(6, {1.1, 1.5, 1.9}, 3, seed + 2); });
    run("temporal_pairing", 1e-6, [&] { return temporal_pairing_deviation(6, {0.05, 0.25, 0.45, 0.7, 0.95}, 3, seed + 3); });
    run("kronecker_vs_bruteforce_d1", 1e-10, [&] { return kronecker_deviation(1, 3, 6, seed + 4); });
    run("kronecker_vs_bruteforce_d2", 1e-10, [&] { return kronecker_deviation(2, 3, 4, seed + 5); });
    run("sylvester_vs_direct", 1e-10, [&] { return sylvester_deviation(11); });
    run("quadrature_exactness", 1e-11, [&] {
        std::vector<std::pair<double, double>> w;
        for (double a : {0.0, 0.25, -0.25, -0.55, -0.75, -0.95})
            for (double b : {0.0, 0.25, -0.25, -0.55, -0.75, -0.95}) w.push_back({a, b});
        for (double tau : {0.05, 0.25, 0.45})
            for (double nu : {0.55, 0.75, 0.95})
                for (const auto& c : {ManufacturedCase::case_one(), ManufacturedCase::case_two()}) {
                    const auto pr = assembly_weight_pairs(diffusion_setup(tau, nu), c);
                    w.insert(w.end(), pr.begin(), pr.end());
                }
        return quadrature_exactness_deviation(exactness_orders(), w, seed + 6);
    });
    return report;
}

}  // namespace fpg
