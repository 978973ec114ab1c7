#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fpg/errors.hpp"

namespace fpg {

struct Interval {
    double a = -1.0;
    double b = 1.0;

    double half_length() const { return 0.5 * (b - a); }
    double to_reference(double x) const { return 2.0 * (x - a) / (b - a) - 1.0; }
    double from_reference(double xi) const { return a + half_length() * (xi + 1.0); }
};

using ForcingFn = std::function<double(double t, std::span<const double> x)>;

/// Constant-coefficient space-time fractional problem on (0,T) x prod (a_i,b_i)
/// with homogeneous initial and boundary data.
///
/// All orders are stored as half-orders: the PDE carries 2*tau in time,
/// 2*mu_i for advection and 2*nu_j for dispersion.
struct ProblemSpec {
    int d = 1;
    double T = 1.0;
    std::vector<Interval> intervals;
    double tau = 0.25;
    std::vector<double> mu;
    std::vector<double> nu;
    std::vector<double> c_left;
    std::vector<double> c_right;
    std::vector<double> kappa_left;
    std::vector<double> kappa_right;
    double gamma_coeff = 0.0;
    ForcingFn forcing;

    void validate() const {
        if (d < 1) throw ValidationError("problem.d", "spatial dimension must be positive");
        if (!(T > 0.0)) throw ValidationError("problem.T", "final time must be positive");
        auto check_len = [this](const std::vector<double>& v, const char* name) {
            if (static_cast<int>(v.size()) != d)
                throw ValidationError(name, "expected " + std::to_string(d) + " entries");
        };
        if (static_cast<int>(intervals.size()) != d)
            throw ValidationError("problem.intervals", "expected " + std::to_string(d) + " intervals");
        for (const auto& iv : intervals)
            if (!(iv.a < iv.b)) throw ValidationError("problem.intervals", "each interval needs a < b");
        check_len(mu, "problem.mu");
        check_len(nu, "problem.nu");
        check_len(c_left, "problem.c_left");
        check_len(c_right, "problem.c_right");
        check_len(kappa_left, "problem.kappa_left");
        check_len(kappa_right, "problem.kappa_right");

        if (!(tau > 0.0 && tau < 1.0))
            throw ValidationError("problem.tau", "temporal order 2*tau must lie in (0,2)");
        if (std::abs(2.0 * tau - 1.0) < 1e-12)
            throw ValidationError("problem.tau", "temporal order 2*tau = 1 is excluded (2 tau != 1)");
        for (double m : mu)
            if (!(m > 0.0 && m < 0.5)) throw ValidationError("problem.mu", "advection order 2*mu must lie in (0,1)");
        for (double n : nu)
            if (!(n > 0.5 && n < 1.0)) throw ValidationError("problem.nu", "dispersion order 2*nu must lie in (1,2)");
        auto all_finite = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        };
        if (!all_finite(c_left) || !all_finite(c_right) || !all_finite(kappa_left) || !all_finite(kappa_right) ||
            !std::isfinite(gamma_coeff))
            throw ValidationError("problem", "coefficients must be finite");
    }

    /// Pure (1+1)-D fractional diffusion on (-1,1) with kappa_l = kappa_r = kappa.
    static ProblemSpec diffusion_1d(double tau, double nu, double kappa, double T) {
        ProblemSpec p;
        p.d = 1;
        p.T = T;
        p.intervals = {Interval{-1.0, 1.0}};
        p.tau = tau;
        p.mu = {0.25};
        p.nu = {nu};
        p.c_left = {0.0};
        p.c_right = {0.0};
        p.kappa_left = {kappa};
        p.kappa_right = {kappa};
        return p;
    }
};

/// Expansion orders: n_time temporal modes and m_space[j] modes per direction.
struct Resolution {
    int n_time = 1;
    std::vector<int> m_space;
    std::optional<int> quad_order;

    void validate(const ProblemSpec& spec) const {
        if (n_time < 1) throw ValidationError("resolution.n_time", "must be at least 1");
        if (static_cast<int>(m_space.size()) != spec.d)
            throw ValidationError("resolution.m_space", "expected one mode count per spatial dimension");
        for (int m : m_space)
            if (m < 1) throw ValidationError("resolution.m_space", "must be at least 1");
        if (quad_order && *quad_order < 1) throw ValidationError("resolution.quad_order", "must be positive");
    }

    int max_order() const {
        int m = n_time;
        for (int v : m_space) m = std::max(m, v);
        return m;
    }

    /// Default node count: largest expansion order plus 10.
    int effective_quad_order() const { return quad_order.value_or(max_order() + 10); }

    std::size_t spatial_size() const {
        std::size_t s = 1;
        for (int v : m_space) s *= static_cast<std::size_t>(v);
        return s;
    }

    std::size_t total_size() const { return static_cast<std::size_t>(n_time) * spatial_size(); }
};

}  // namespace fpg
