#pragma once

// Manufactured solutions and the forcing obtained by applying the strong
// operator to them analytically.
//
// Case I:  u = t^p1 [(1+x)^p2 - eps (1+x)^p3], eps = 2^(p2-p3)
// Case II: u = t^p1 sin(n pi (1+x))
//
// On a general interval x is replaced by the reference coordinate xi, and
// for d > 1 the spatial factor is repeated in every direction.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fpg/assembly.hpp"
#include "fpg/errors.hpp"
#include "fpg/fraccalc.hpp"
#include "fpg/problem.hpp"
#include "fpg/specfun.hpp"

namespace fpg {

enum class CaseKind { CaseI, CaseII };

struct ManufacturedCase {
    CaseKind kind = CaseKind::CaseI;
    double p1 = 5.05;
    double p2 = 5.75;
    double p3 = 5.2;
    int n_freq = 1;

    double eps() const { return std::pow(2.0, p2 - p3); }

    static ManufacturedCase case_one() { return {}; }
    static ManufacturedCase case_two(int n = 1) {
        ManufacturedCase c;
        c.kind = CaseKind::CaseII;
        c.n_freq = n;
        return c;
    }

    void validate() const {
        if (!(p1 > 0.0)) throw ValidationError("case.p1", "temporal exponent must be positive");
        if (kind == CaseKind::CaseI && !(p2 > 1.0 && p3 > 1.0))
            throw ValidationError("case.p2", "spatial exponents must exceed 1");
        if (kind == CaseKind::CaseII && n_freq < 1) throw ValidationError("case.n_freq", "frequency must be positive");
    }
};

namespace detail {

inline double sine_arg(const ManufacturedCase& c) { return c.n_freq * std::numbers::pi; }

// Coefficients of sin(w h) = sum_k (-1)^k w^(2k+1) h^(2k+1) / (2k+1)!, truncated once negligible.
inline std::vector<SeriesTerm> sine_series_terms(double w, double sign) {
    std::vector<SeriesTerm> terms;
    double c = w;
    for (int k = 0; k < 120; ++k) {
        const double e = 2.0 * k + 1.0;
        terms.push_back({e, sign * c});
        c *= -w * w / ((e + 1.0) * (e + 2.0));
        // h <= 2 on the reference interval
        if (std::abs(c) * std::pow(2.0, e + 2.0) < 1e-19 && k > 2) break;
    }
    return terms;
}

// sin(n pi (1+xi)) about xi = -1, and about xi = +1 via sin(n pi (1+xi)) = -sin(n pi (1-xi)).
inline PowerSeries sine_series(const ManufacturedCase& c, Anchor anchor) {
    return {anchor, sine_series_terms(sine_arg(c), anchor == Anchor::LeftEnd ? 1.0 : -1.0)};
}

// Right derivative of (1+x)^p2 - eps (1+x)^p3 on the reference interval. Near
// the right end the leading s^(-sigma) terms cancel exactly, so the combined
// binomial series starts at k = 1.
inline double case_one_right(double p2, double p3, double sigma, double xi, const SeriesOptions& opts) {
    const double eps = std::pow(2.0, p2 - p3);
    if (xi < 0.0) return frac_deriv_power(p2, sigma, Side::Right, xi, opts) - eps * frac_deriv_power(p3, sigma, Side::Right, xi, opts);
    const double s = 1.0 - xi;
    const double t0 = std::pow(2.0, p2) * std::pow(s, -sigma) / gamma_fn(1.0 - sigma);
    double a = 1.0, b = 1.0;
    SeriesSum sum(opts);
    for (int k = 0;; ++k) {
        a *= -(p2 - k) * (0.5 * s) / (k + 1.0 - sigma);
        b *= -(p3 - k) * (0.5 * s) / (k + 1.0 - sigma);
        if (sum.add(t0 * (a - b))) return sum.value();
        if (sum.exhausted()) throw_series_failure("combined binomial series", p2, sigma, xi);
    }
}

}  // namespace detail

/// Temporal factor t^p1 or its order-sigma left Caputo/RL derivative (they agree, u(0) = 0).
inline double case_time(const ManufacturedCase& c, double sigma, double t) {
    if (sigma == 0.0) return std::pow(t, c.p1);
    return gamma_ratio(c.p1 + 1.0, c.p1 + 1.0 - sigma) * std::pow(t, c.p1 - sigma);
}

/// Spatial factor on interval iv, or its order-sigma derivative (sigma in [0,2), sigma != 1).
inline double case_space(const ManufacturedCase& c, double sigma, Side side, const Interval& iv, double x,
                         const SeriesOptions& opts = {}) {
    const double xi = detail::reference_space(iv, x);
    if (sigma == 0.0) {
        if (c.kind == CaseKind::CaseI) return std::pow(1.0 + xi, c.p2) - c.eps() * std::pow(1.0 + xi, c.p3);
        return std::sin(detail::sine_arg(c) * (1.0 + xi));
    }
    if (!(xi > -1.0 && xi < 1.0)) throw DomainError("fractional derivative needs an interior point");
    const double scale = std::pow(iv.half_length(), -sigma);
    if (c.kind == CaseKind::CaseI) {
        if (side == Side::Left)
            return scale * (frac_deriv_power(c.p2, sigma, Side::Left, xi, opts) -
                            c.eps() * frac_deriv_power(c.p3, sigma, Side::Left, xi, opts));
        return scale * detail::case_one_right(c.p2, c.p3, sigma, xi, opts);
    }
    // sine series anchored at the operator's own terminal
    const Anchor anchor = side == Side::Left ? Anchor::LeftEnd : Anchor::RightEnd;
    return scale * frac_deriv_taylor(detail::sine_series(c, anchor), sigma, side, xi, opts);
}

/// u^ext(t, x) for the tensorized case.
inline double exact_solution(const ManufacturedCase& c, const ProblemSpec& spec, double t, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.d) throw ShapeError("point must have d spatial coordinates");
    detail::reference_time(spec, t);
    double v = case_time(c, 0.0, t);
    for (int j = 0; j < spec.d; ++j) v *= case_space(c, 0.0, Side::Left, spec.intervals[j], x[j]);
    return v;
}

/// f = D_t^{2tau} u + sum_i (c_l D_L^{2mu} + c_r D_R^{2mu} - kappa_l D_L^{2nu} - kappa_r D_R^{2nu}) u + gamma u.
inline double forcing_strong(const ManufacturedCase& c, const ProblemSpec& spec, double t, std::span<const double> x,
                             const SeriesOptions& opts = {}) {
    if (static_cast<int>(x.size()) != spec.d) throw ShapeError("point must have d spatial coordinates");
    std::vector<double> val(spec.d);
    double space_prod = 1.0;
    for (int j = 0; j < spec.d; ++j) {
        val[j] = case_space(c, 0.0, Side::Left, spec.intervals[j], x[j]);
        space_prod *= val[j];
    }
    const double ut = case_time(c, 0.0, t);
    double f = case_time(c, 2.0 * spec.tau, t) * space_prod + spec.gamma_coeff * ut * space_prod;
    for (int i = 0; i < spec.d; ++i) {
        const auto& iv = spec.intervals[i];
        double op = 0.0;
        if (spec.c_left[i] != 0.0) op += spec.c_left[i] * case_space(c, 2.0 * spec.mu[i], Side::Left, iv, x[i], opts);
        if (spec.c_right[i] != 0.0) op += spec.c_right[i] * case_space(c, 2.0 * spec.mu[i], Side::Right, iv, x[i], opts);
        if (spec.kappa_left[i] != 0.0) op -= spec.kappa_left[i] * case_space(c, 2.0 * spec.nu[i], Side::Left, iv, x[i], opts);
        if (spec.kappa_right[i] != 0.0) op -= spec.kappa_right[i] * case_space(c, 2.0 * spec.nu[i], Side::Right, iv, x[i], opts);
        double others = 1.0;
        for (int j = 0; j < spec.d; ++j)
            if (j != i) others *= val[j];
        f += ut * op * others;
    }
    return f;
}

namespace detail {

// A spatial factor written as a sum of pieces with known endpoint powers.
using PieceList = std::vector<std::pair<double, SpaceFactor>>;

inline PieceList value_pieces(const ManufacturedCase& c, const Interval& iv) {
    if (c.kind == CaseKind::CaseI) {
        auto power = [iv](double p) {
            return SpaceFactor{[iv, p](double x) { return std::pow(1.0 + iv.to_reference(x), p); }, 0.0, p};
        };
        return {{1.0, power(c.p2)}, {-c.eps(), power(c.p3)}};
    }
    return {{1.0, SpaceFactor{[c, iv](double x) { return case_space(c, 0.0, Side::Left, iv, x); }, 0.0, 0.0}}};
}

inline PieceList derivative_pieces(const ManufacturedCase& c, double sigma, Side side, const Interval& iv) {
    const double scale = std::pow(iv.half_length(), -sigma);
    if (c.kind == CaseKind::CaseI && side == Side::Left) {
        // exact power rule: each piece is a pure power of (1+xi)
        auto power = [iv](double p, double sg) {
            return SpaceFactor{[iv, p, sg](double x) { return std::pow(1.0 + iv.to_reference(x), p - sg); }, 0.0, p - sg};
        };
        return {{scale * gamma_ratio(c.p2 + 1.0, c.p2 + 1.0 - sigma), power(c.p2, sigma)},
                {-c.eps() * scale * gamma_ratio(c.p3 + 1.0, c.p3 + 1.0 - sigma), power(c.p3, sigma)}};
    }
    // the spatial factor vanishes linearly at the operator's terminal, so the
    // derivative behaves like dist^(1-sigma) there
    SpaceFactor sf{[c, sigma, side, iv](double x) { return case_space(c, sigma, side, iv, x); }, 0.0, 0.0};
    if (side == Side::Right)
        sf.exponent_right = 1.0 - sigma;
    else
        sf.exponent_left = 1.0 - sigma;
    return {{1.0, sf}};
}

inline void append_products(const std::vector<PieceList>& dims, double coefficient, const TimeFactor& tf,
                            SeparableForcing& out) {
    std::vector<std::size_t> pick(dims.size(), 0);
    while (true) {
        SeparableTerm term{coefficient, tf, {}};
        for (std::size_t j = 0; j < dims.size(); ++j) {
            term.coefficient *= dims[j][pick[j]].first;
            term.space.push_back(dims[j][pick[j]].second);
        }
        if (term.coefficient != 0.0) out.terms.push_back(std::move(term));
        std::size_t j = 0;
        for (; j < dims.size(); ++j) {
            if (++pick[j] < dims[j].size()) break;
            pick[j] = 0;
        }
        if (j == dims.size()) return;
    }
}

}  // namespace detail

/// The same forcing as forcing_strong in separable form, each factor tagged
/// with its endpoint powers for the matched-weight load vector.
inline SeparableForcing forcing_terms(const ManufacturedCase& c, const ProblemSpec& spec) {
    c.validate();
    spec.validate();
    SeparableForcing out;
    const TimeFactor ut{[c](double t) { return case_time(c, 0.0, t); }, c.p1};
    const double tau2 = 2.0 * spec.tau;
    const TimeFactor dt{[c, tau2](double t) { return case_time(c, tau2, t); }, c.p1 - tau2};

    std::vector<detail::PieceList> values;
    for (int j = 0; j < spec.d; ++j) values.push_back(detail::value_pieces(c, spec.intervals[j]));
    detail::append_products(values, 1.0, dt, out);
    if (spec.gamma_coeff != 0.0) detail::append_products(values, spec.gamma_coeff, ut, out);

    for (int i = 0; i < spec.d; ++i) {
        const auto& iv = spec.intervals[i];
        const std::pair<double, std::pair<double, Side>> ops[] = {
            {spec.c_left[i], {2.0 * spec.mu[i], Side::Left}},
            {spec.c_right[i], {2.0 * spec.mu[i], Side::Right}},
            {-spec.kappa_left[i], {2.0 * spec.nu[i], Side::Left}},
            {-spec.kappa_right[i], {2.0 * spec.nu[i], Side::Right}},
        };
        for (const auto& [coef, order] : ops) {
            if (coef == 0.0) continue;
            auto dims = values;
            dims[i] = detail::derivative_pieces(c, order.first, order.second, iv);
            detail::append_products(dims, coef, ut, out);
        }
    }
    return out;
}

/// Case I or II fractional diffusion setup on (0,T) x (-1,1) with kappa_l = kappa_r = kappa.
inline ProblemSpec diffusion_setup(double tau, double nu, double kappa = 0.2, double T = 2.0) {
    return ProblemSpec::diffusion_1d(tau, nu, kappa, T);
}

}  // namespace fpg
