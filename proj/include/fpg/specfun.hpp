#pragma once

// Scalar special functions: Jacobi and Legendre polynomials, gamma and
// digamma. Everything here is pure and reentrant.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fpg/errors.hpp"

namespace fpg {

/// Exponents of the Jacobi weight (1-x)^alpha (1+x)^beta.
struct JacobiParams {
    double alpha = 0.0;
    double beta = 0.0;

    void validate() const {
        if (!(alpha > -1.0) || !(beta > -1.0)) {
            std::ostringstream os;
            os << "Jacobi parameters must exceed -1 (alpha=" << alpha << ", beta=" << beta << ")";
            throw DomainError(os.str());
        }
    }
};

namespace detail {

inline double clamp_reference_point(double x) {
    constexpr double slack = 1e-12;
    if (!(std::abs(x) <= 1.0 + slack)) {
        std::ostringstream os;
        os << "point " << x << " outside [-1,1]";
        throw DomainError(os.str());
    }
    return std::clamp(x, -1.0, 1.0);
}

// One step of the three-term recurrence: returns P_{k+1} given P_k, P_{k-1}.
inline double jacobi_step(int k, double a, double b, double x, double pk, double pkm1) {
    const double s = 2.0 * k + a + b;
    const double c1 = 2.0 * (k + 1) * (k + a + b + 1) * s;
    const double c2 = (s + 1) * ((s + 2) * s * x + a * a - b * b);
    const double c3 = 2.0 * (k + a) * (k + b) * (s + 2);
    return (c2 * pk - c3 * pkm1) / c1;
}

}  // namespace detail

/// P_0 .. P_n of the Jacobi family at x, by forward recurrence.
inline std::vector<double> jacobi_p_all(int n, JacobiParams params, double x) {
    if (n < 0) throw DomainError("Jacobi degree must be nonnegative");
    params.validate();
    x = detail::clamp_reference_point(x);
    const double a = params.alpha;
    const double b = params.beta;
    std::vector<double> p(static_cast<std::size_t>(n) + 1);
    p[0] = 1.0;
    if (n >= 1) p[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for (int k = 1; k < n; ++k) p[k + 1] = detail::jacobi_step(k, a, b, x, p[k], p[k - 1]);
    return p;
}

/// Jacobi polynomial P_n^{alpha,beta}(x).
inline double jacobi_p(int n, JacobiParams params, double x) {
    if (n < 0) throw DomainError("Jacobi degree must be nonnegative");
    params.validate();
    x = detail::clamp_reference_point(x);
    const double a = params.alpha;
    const double b = params.beta;
    if (n == 0) return 1.0;
    double pkm1 = 1.0;
    double pk = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for (int k = 1; k < n; ++k) {
        const double next = detail::jacobi_step(k, a, b, x, pk, pkm1);
        pkm1 = pk;
        pk = next;
    }
    return pk;
}

/// d/dx P_n^{alpha,beta}(x) = (n+alpha+beta+1)/2 P_{n-1}^{alpha+1,beta+1}(x).
inline double jacobi_p_derivative(int n, JacobiParams params, double x) {
    if (n == 0) return 0.0;
    return 0.5 * (n + params.alpha + params.beta + 1.0) *
           jacobi_p(n - 1, {params.alpha + 1.0, params.beta + 1.0}, x);
}

inline double legendre_p(int n, double x) { return jacobi_p(n, {0.0, 0.0}, x); }

inline std::vector<double> legendre_p_all(int n, double x) { return jacobi_p_all(n, {0.0, 0.0}, x); }

namespace detail {

// Rational Lanczos approximation, g = 6.0246800407767296, thirteen terms.
// Gamma(x) = sum(x) (x+g-1/2)^(x-1/2) / e^(x+g-1/2), relative error near 1e-15.
inline constexpr double lanczos_g = 6.024680040776729583740234375;
inline constexpr std::array<double, 13> lanczos_num = {
    23531376880.410759688572007674451636754734846804940, 42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843, 17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708, 1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801, 31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768, 186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024, 210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408};
// coefficients of x (x+1) ... (x+11)
inline constexpr std::array<double, 13> lanczos_den = {
    0.0,       39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0, 13339535.0,
    2637558.0, 357423.0,   32670.0,     1925.0,      66.0,        1.0};

inline double lanczos_sum(double x) {
    double num = 0.0;
    double den = 0.0;
    if (x < 5.0) {
        for (int i = 12; i >= 0; --i) {
            num = num * x + lanczos_num[i];
            den = den * x + lanczos_den[i];
        }
    } else {
        for (int i = 0; i < 13; ++i) {
            num = num / x + lanczos_num[i];
            den = den / x + lanczos_den[i];
        }
    }
    return num / den;
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace detail

/// Euler gamma function. Lanczos approximation for x >= 1/2, reflection below.
inline double gamma_fn(double x) {
    if (std::isnan(x)) throw DomainError("gamma of NaN");
    if (detail::is_nonpositive_integer(x)) {
        std::ostringstream os;
        os << "gamma pole at " << x;
        throw PoleError(os.str());
    }
    if (x > 171.6) throw OverflowError("gamma overflows for x > 171.6");
    if (x == std::floor(x) && x <= 30.0) {
        double f = 1.0;  // exact below 23!, correctly rounded products above
        for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
        return f;
    }
    if (x < 0.5) {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        const double s = std::sin(std::numbers::pi * x);
        const double g = gamma_fn(1.0 - x);
        const double r = std::numbers::pi / (s * g);
        if (!std::isfinite(r)) throw OverflowError("gamma overflows near a pole");
        return r;
    }
    const double gmh = detail::lanczos_g - 0.5;
    const double y = x + gmh;
    // rounding error committed in forming y, folded back in to first order
    const double dy = x > gmh ? (y - x) - gmh : (y - gmh) - x;
    double r = detail::lanczos_sum(x) / std::exp(y);
    r += dy * detail::lanczos_g / y * r;
    // split the power so that y^(x-1/2) does not overflow before e^-y is applied
    const double half_power = std::pow(y, 0.5 * x - 0.25);
    return r * half_power * half_power;
}

/// Gamma(a) / Gamma(b), evaluated through logs when either factor is large.
inline double gamma_ratio(double a, double b) {
    if (a < 150.0 && b < 150.0) return gamma_fn(a) / gamma_fn(b);
    if (a > 0.0 && b > 0.0) return std::exp(std::lgamma(a) - std::lgamma(b));
    throw OverflowError("gamma ratio out of range");
}

/// Digamma psi(x) = Gamma'(x)/Gamma(x).
inline double digamma(double x) {
    if (detail::is_nonpositive_integer(x)) throw PoleError("digamma pole");
    if (x < 0.5) return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv2 = 1.0 / (x * x);
    // Bernoulli tail: B2/2, B4/4, ..., B12/12
    const double tail =
        inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * 691.0 / 32760)))));
    return acc + std::log(x) - 0.5 / x - tail;
}

}  // namespace fpg
