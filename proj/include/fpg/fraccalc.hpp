#pragma once

// Riemann-Liouville fractional derivatives on the reference interval (-1,1):
// closed forms for Legendre polynomials, polyfractonomials and powers, plus a
// brute-force oracle that discretizes the defining integrals directly.

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "fpg/errors.hpp"
#include "fpg/quadrature.hpp"
#include "fpg/specfun.hpp"

namespace fpg {

/// Which terminal the operator integrates from: Left is -1 (or a), Right is +1 (or b).
enum class Side { Left, Right };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

/// Temporal basis family: trial functions vanish at t=0, test functions at t=T.
enum class BasisKind { Trial, Test };

/// A half-order in (0,1).
class FracOrder {
public:
    explicit FracOrder(double value) : value_(value) {
        if (!(value > 0.0 && value < 1.0)) {
            std::ostringstream os;
            os << "fractional half-order must lie in (0,1), got " << value;
            throw DomainError(os.str());
        }
    }

    double value() const noexcept { return value_; }

private:
    double value_;
};

struct SeriesOptions {
    double tol = 1e-13;  // relative truncation threshold
    int max_terms = 200;
};

/// Gamma(n+1) / Gamma(n+1-sigma): the scale in the Legendre derivative formula.
inline double legendre_frac_scale(int n, double sigma) { return gamma_ratio(n + 1.0, n + 1.0 - sigma); }

/// Legendre fractional derivative with the singular endpoint factor removed:
/// Left returns scale * P_n^{sigma,-sigma}(x), Right returns scale * P_n^{-sigma,sigma}(x).
inline double frac_deriv_legendre_reduced(int n, double sigma, Side side, double x) {
    const JacobiParams params = side == Side::Left ? JacobiParams{sigma, -sigma} : JacobiParams{-sigma, sigma};
    return legendre_frac_scale(n, sigma) * jacobi_p(n, params, x);
}

/// Riemann-Liouville derivative of order sigma of the Legendre polynomial P_n.
inline double frac_deriv_legendre(int n, FracOrder sigma, Side side, double x) {
    if (n < 0) throw DomainError("Legendre degree must be nonnegative");
    const double s = sigma.value();
    const double dist = side == Side::Left ? 1.0 + x : 1.0 - x;
    if (!(dist > 1e-14)) {
        std::ostringstream os;
        os << "fractional derivative is singular at the terminal (x=" << x << ")";
        throw DomainError(os.str());
    }
    if (!(std::abs(x) < 1.0)) throw DomainError("point outside (-1,1)");
    return std::pow(dist, -s) * frac_deriv_legendre_reduced(n, s, side, x);
}

/// Order-tau derivative of the n-th temporal polyfractonomial on (-1,1).
///
/// Trial: left derivative of (1+eta)^tau P_{n-1}^{-tau,tau}; Test: right
/// derivative of (1-eta)^tau P_{n-1}^{tau,-tau}. Both equal
/// Gamma(n+tau)/Gamma(n) P_{n-1}(eta).
inline double frac_deriv_temporal_basis(int n, FracOrder tau, BasisKind /*kind*/, double eta) {
    if (n < 1) throw DomainError("temporal basis index starts at 1");
    return gamma_ratio(n + tau.value(), n) * legendre_p(n - 1, eta);
}

namespace detail {

inline void check_series_order(double sigma) {
    if (!(sigma >= 0.0 && sigma < 2.0) || sigma == 1.0) {
        std::ostringstream os;
        os << "derivative order must lie in [0,2) excluding 1, got " << sigma;
        throw DomainError(os.str());
    }
}

// Accumulates terms until two consecutive ones fall below tol * |sum|.
class SeriesSum {
public:
    explicit SeriesSum(const SeriesOptions& opts) : opts_(opts) {}

    // Returns true once converged.
    bool add(double term) {
        sum_ += term;
        ++count_;
        const bool small = std::abs(term) <= opts_.tol * std::abs(sum_) || term == 0.0;
        quiet_ = small ? quiet_ + 1 : 0;
        return quiet_ >= 2;
    }

    bool exhausted() const { return count_ >= opts_.max_terms; }
    double value() const { return sum_; }

private:
    SeriesOptions opts_;
    double sum_ = 0.0;
    int count_ = 0;
    int quiet_ = 0;
};

[[noreturn]] inline void throw_series_failure(const char* what, double p, double sigma, double x) {
    std::ostringstream os;
    os << what << " did not converge (p=" << p << ", sigma=" << sigma << ", x=" << x << ")";
    throw ConvergenceError(os.str());
}

// Right derivative of (1+x)^p expanded about the right terminal in s = 1-x:
// (1+x)^p = sum_k binom(p,k) 2^{p-k} (-s)^k, each power differentiated exactly.
inline double right_power_about_right(double p, double sigma, double x, const SeriesOptions& opts) {
    const double s = 1.0 - x;
    double term = std::pow(2.0, p) * std::pow(s, -sigma) / gamma_fn(1.0 - sigma);
    SeriesSum sum(opts);
    for (int k = 0;; ++k) {
        if (sum.add(term)) return sum.value();
        if (sum.exhausted()) throw_series_failure("right-terminal binomial series", p, sigma, x);
        term *= -(p - k) * (0.5 * s) / (k + 1.0 - sigma);
    }
}

// Right derivative of (1+x)^p expanded about the left end in h = 1+x.
//
// With n = ceil(sigma), mu = n - sigma, c = p + mu the right fractional
// integral of order mu is
//   Gamma(-c)/Gamma(-p) h^c + 1/Gamma(mu) sum_j binom(mu-1,j) (-1)^j 2^{c-j} h^j / (c-j),
// and the derivative follows by n termwise differentiations. When c is an
// integer N the h^c and h^N terms merge into h^N (K - beta log h).
inline double right_power_about_left(double p, double sigma, double x, const SeriesOptions& opts) {
    const int n = sigma < 1.0 ? 1 : 2;
    const double mu = n - sigma;
    const double c = p + mu;
    const double h = 1.0 + x;
    const long long N = std::llround(c);
    const bool log_case = std::abs(c - static_cast<double>(N)) < 1e-9;
    const double pow2c = std::pow(2.0, c);
    auto falling = [n](double v) { return n == 1 ? v : v * (v - 1.0); };

    double special = 0.0;
    if (log_case) {
        // beta = binom(mu-1,N) (-1)^N / Gamma(mu)
        double beta = 1.0 / gamma_fn(mu);
        for (long long i = 0; i < N; ++i) beta *= (i + 1.0 - mu) / (i + 1.0);
        double harmonic = 0.0;
        for (long long k = 1; k <= N; ++k) harmonic += 1.0 / static_cast<double>(k);
        const double g1_prime = -beta * (-digamma(1.0) - harmonic + digamma(mu - static_cast<double>(N)));
        const double K = g1_prime + beta * std::numbers::ln2;
        double log_shift = 0.0;
        for (int k = 0; k < n; ++k) log_shift += 1.0 / static_cast<double>(N - k);
        special = falling(static_cast<double>(N)) * std::pow(h, static_cast<double>(N - n)) *
                  (K - beta * (std::log(h) + log_shift));
    } else if (!(p >= 0.0 && p == std::floor(p))) {
        special = gamma_fn(-c) / gamma_fn(-p) * falling(c) * std::pow(h, p - sigma);
    }

    // b_j = binom(mu-1,j) (-1)^j 2^{-j} h^{j-n}, starting at j = n
    double b = 1.0 / gamma_fn(mu);
    for (int i = 0; i < n; ++i) b *= (i + 1.0 - mu) / (i + 1.0) * 0.5;
    SeriesSum sum(opts);
    sum.add(special);
    for (int j = n;; ++j) {
        const double term = (log_case && j == N) ? 0.0 : pow2c * b * falling(static_cast<double>(j)) / (c - j);
        if (sum.add(term) && j > N) break;
        if (sum.exhausted()) throw_series_failure("left-end series", p, sigma, x);
        b *= (j + 1.0 - mu) / (j + 1.0) * (0.5 * h);
    }
    return (n == 1 ? -1.0 : 1.0) * sum.value();
}

}  // namespace detail

/// Order-sigma Riemann-Liouville derivative of (1+x)^p on (-1,1), sigma in [0,2) \ {1}.
///
/// Left: Gamma(p+1)/Gamma(p+1-sigma) (1+x)^{p-sigma}. Right: binomial series
/// about whichever end is closer, so the geometric ratio never exceeds 1/2.
inline double frac_deriv_power(double p, double sigma, Side side, double x, const SeriesOptions& opts = {}) {
    detail::check_series_order(sigma);
    if (!(p > -1.0)) throw DomainError("power exponent must exceed -1");
    if (!(x > -1.0 && x < 1.0)) throw DomainError("point must be interior to (-1,1)");
    if (sigma == 0.0) return std::pow(1.0 + x, p);
    if (side == Side::Left) {
        const double denom_arg = p + 1.0 - sigma;
        if (detail::is_nonpositive_integer(denom_arg)) return 0.0;
        return gamma_fn(p + 1.0) / gamma_fn(denom_arg) * std::pow(1.0 + x, p - sigma);
    }
    const int n = sigma < 1.0 ? 1 : 2;
    const double c = p + n - sigma;
    const double gap = std::abs(c - std::round(c));
    const bool near_log = gap >= 1e-9 && gap < 1e-3;
    if (x >= 0.0 || near_log) return detail::right_power_about_right(p, sigma, x, opts);
    return detail::right_power_about_left(p, sigma, x, opts);
}

/// Which terminal a power series is expanded about: LeftEnd uses powers of
/// (1+x), RightEnd powers of (1-x).
enum class Anchor { LeftEnd, RightEnd };

struct SeriesTerm {
    double exponent;
    double coefficient;
};

struct PowerSeries {
    Anchor anchor = Anchor::LeftEnd;
    std::vector<SeriesTerm> terms;

    double value(double x) const {
        const double d = anchor == Anchor::LeftEnd ? 1.0 + x : 1.0 - x;
        double sum = 0.0;
        for (const auto& t : terms) sum += t.coefficient * std::pow(d, t.exponent);
        return sum;
    }
};

/// Termwise fractional derivative of a generalized power series.
///
/// Terms anchored at the operator's own terminal use the exact power rule;
/// terms anchored at the opposite end go through frac_deriv_power.
inline double frac_deriv_taylor(const PowerSeries& series, double sigma, Side side, double x,
                                const SeriesOptions& opts = {}) {
    detail::check_series_order(sigma);
    if (!(x > -1.0 && x < 1.0)) throw DomainError("point must be interior to (-1,1)");
    const bool own_terminal = (series.anchor == Anchor::LeftEnd) == (side == Side::Left);
    const double d = series.anchor == Anchor::LeftEnd ? 1.0 + x : 1.0 - x;
    detail::SeriesSum sum({opts.tol, static_cast<int>(series.terms.size()) + 2});
    for (const auto& t : series.terms) {
        if (!(t.exponent > -1.0)) throw DomainError("series exponent must exceed -1");
        double term = 0.0;
        if (t.coefficient == 0.0) {
            term = 0.0;
        } else if (own_terminal) {
            const double denom_arg = t.exponent + 1.0 - sigma;
            term = detail::is_nonpositive_integer(denom_arg)
                       ? 0.0
                       : t.coefficient * gamma_fn(t.exponent + 1.0) / gamma_fn(denom_arg) * std::pow(d, t.exponent - sigma);
        } else {
            // mirror so the expansion variable becomes (1+y)
            const double y = series.anchor == Anchor::LeftEnd ? x : -x;
            term = t.coefficient * frac_deriv_power(t.exponent, sigma, Side::Right, y, opts);
        }
        if (sum.add(term)) break;
    }
    return sum.value();
}

struct OracleOptions {
    double a = -1.0;                 // interval of definition
    double b = 1.0;
    double step = 0.0;               // outer finite-difference step; 0 picks one from the distance to the ends
    double terminal_exponent = 0.0;  // g behaves like dist^e at the operator's terminal
    int nodes = 40;
};

struct OracleResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool flagged = false;  // estimate above 1e-6
};

/// Brute-force Riemann-Liouville derivative of g straight from the definition.
///
/// The fractional integral of order ceil(sigma)-sigma is computed by a
/// Gauss-Jacobi rule that absorbs the kernel singularity (and the declared
/// terminal behaviour of g); the integer derivative uses central differences
/// with two Richardson levels.
inline OracleResult rl_oracle(const std::function<double(double)>& g, double sigma, Side side, double x,
                              const OracleOptions& opts = {}) {
    if (!(sigma > 0.0 && sigma < 2.0) || sigma == 1.0) throw DomainError("oracle order must lie in (0,2) excluding 1");
    if (!(x > opts.a && x < opts.b)) throw DomainError("oracle point must be interior");
    const int n = sigma < 1.0 ? 1 : 2;
    const double mu = n - sigma;
    const double e = opts.terminal_exponent;
    const auto rule = cached_gauss_jacobi(opts.nodes, mu - 1.0, e);
    const double inv_gamma_mu = 1.0 / gamma_fn(mu);

    auto frac_integral = [&](double y) {
        const double half = 0.5 * (side == Side::Left ? y - opts.a : opts.b - y);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule->size(); ++i) {
            const double u = rule->nodes[i];
            const double s = side == Side::Left ? opts.a + half * (1.0 + u) : opts.b - half * (1.0 + u);
            const double v = g(s);
            if (!std::isfinite(v)) throw EvaluationError("oracle integrand is not finite");
            acc += rule->weights[i] * v / std::pow(1.0 + u, e);
        }
        return inv_gamma_mu * std::pow(half, mu) * acc;
    };

    const double dist = std::min(x - opts.a, opts.b - x);
    const double h0 = opts.step > 0.0 ? opts.step : (n == 1 ? 5e-3 : 2e-2) * std::min(dist, 1.0);
    const double f0 = n == 2 ? frac_integral(x) : 0.0;
    auto difference = [&](double h) {
        const double fp = frac_integral(x + h);
        const double fm = frac_integral(x - h);
        return n == 1 ? (fp - fm) / (2.0 * h) : (fp - 2.0 * f0 + fm) / (h * h);
    };
    const double d0 = difference(h0);
    const double d1 = difference(0.5 * h0);
    const double d2 = difference(0.25 * h0);
    const double r10 = (4.0 * d1 - d0) / 3.0;
    const double r11 = (4.0 * d2 - d1) / 3.0;
    const double r2 = (16.0 * r11 - r10) / 15.0;
    // right derivatives carry (-d/dx)^n
    const double sign = (side == Side::Right && n == 1) ? -1.0 : 1.0;

    OracleResult out;
    out.value = sign * r2;
    out.error_estimate = std::abs(r2 - r11);
    out.flagged = out.error_estimate > 1e-6;
    return out;
}

}  // namespace fpg
