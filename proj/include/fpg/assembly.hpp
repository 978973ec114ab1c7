#pragma once

// Trial/test bases and the one-dimensional matrices of the space-time
// Petrov-Galerkin form. Matrices are indexed [test][trial], modes from 0.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "fpg/errors.hpp"
#include "fpg/fraccalc.hpp"
#include "fpg/problem.hpp"
#include "fpg/quadrature.hpp"
#include "fpg/specfun.hpp"

namespace fpg {

// ---------------------------------------------------------------- bases

/// phi_m = P_{m+1} - P_{m-1}, m >= 1.
inline double spatial_mode(int m, double xi) {
    if (m < 1) throw DomainError("spatial mode index starts at 1");
    return legendre_p(m + 1, xi) - legendre_p(m - 1, xi);
}

/// phi_m / (1 - xi^2) = -(2m+1)/(2m) P_{m-1}^{1,1}(xi); no cancellation near the ends.
inline double spatial_mode_reduced(int m, double xi) {
    if (m < 1) throw DomainError("spatial mode index starts at 1");
    return -(2.0 * m + 1.0) / (2.0 * m) * jacobi_p(m - 1, {1.0, 1.0}, xi);
}

/// Order-sigma derivative of phi_m with the factor (1+xi)^{-sigma} (Left) or
/// (1-xi)^{-sigma} (Right) removed.
inline double spatial_mode_frac_reduced(int m, double sigma, Side side, double xi) {
    return frac_deriv_legendre_reduced(m + 1, sigma, side, xi) - frac_deriv_legendre_reduced(m - 1, sigma, side, xi);
}

/// Temporal trial factor (1+eta)^tau P_{n-1}^{-tau,tau}(eta), n >= 1.
inline double temporal_trial(int n, double tau, double eta) {
    if (n < 1) throw DomainError("temporal mode index starts at 1");
    return std::pow(1.0 + eta, tau) * jacobi_p(n - 1, {-tau, tau}, eta);
}

/// Temporal test factor (1-eta)^tau P_{k-1}^{tau,-tau}(eta), k >= 1.
inline double temporal_test(int k, double tau, double eta) {
    if (k < 1) throw DomainError("temporal mode index starts at 1");
    return std::pow(1.0 - eta, tau) * jacobi_p(k - 1, {tau, -tau}, eta);
}

namespace detail {

inline double reference_time(const ProblemSpec& spec, double t) {
    constexpr double slack = 1e-12;
    if (!(t >= -slack * spec.T && t <= spec.T * (1.0 + slack))) {
        std::ostringstream os;
        os << "time " << t << " outside [0," << spec.T << "]";
        throw DomainError(os.str());
    }
    return std::clamp(2.0 * t / spec.T - 1.0, -1.0, 1.0);
}

inline double reference_space(const Interval& iv, double x) {
    const double slack = 1e-12 * (iv.b - iv.a);
    if (!(x >= iv.a - slack && x <= iv.b + slack)) {
        std::ostringstream os;
        os << "point " << x << " outside [" << iv.a << "," << iv.b << "]";
        throw DomainError(os.str());
    }
    return std::clamp(iv.to_reference(x), -1.0, 1.0);
}

inline double spatial_product(const ProblemSpec& spec, std::span<const int> m, std::span<const double> x) {
    if (static_cast<int>(m.size()) != spec.d || static_cast<int>(x.size()) != spec.d)
        throw ShapeError("spatial index and point must have d entries");
    double prod = 1.0;
    for (int j = 0; j < spec.d; ++j) prod *= spatial_mode(m[j], reference_space(spec.intervals[j], x[j]));
    return prod;
}

}  // namespace detail

/// Trial basis function (n, m) at (t, x); indices start at 1.
inline double eval_trial_basis(const ProblemSpec& spec, int n, std::span<const int> m, double t,
                               std::span<const double> x) {
    return temporal_trial(n, spec.tau, detail::reference_time(spec, t)) * detail::spatial_product(spec, m, x);
}

/// Test basis function (k, r) at (t, x); indices start at 1.
inline double eval_test_basis(const ProblemSpec& spec, int k, std::span<const int> r, double t,
                              std::span<const double> x) {
    return temporal_test(k, spec.tau, detail::reference_time(spec, t)) * detail::spatial_product(spec, r, x);
}

// ------------------------------------------------------------- matrices

struct TemporalMatrices {
    Eigen::MatrixXd stiffness;  // (D^tau psi_n, D_R^tau Psi_k)
    Eigen::MatrixXd mass;       // (psi_n, Psi_k)
    double drift = 0.0;         // max relative change when the quadrature order is doubled
};

struct SpatialMatrices {
    Eigen::MatrixXd stiff_left;   // (D_L^sigma phi_m, D_R^sigma phi_r)
    Eigen::MatrixXd stiff_right;  // (D_R^sigma phi_m, D_L^sigma phi_r)
    Eigen::MatrixXd mass;
    double drift = 0.0;
};

/// Doubling the quadrature order must not move any entry by more than this, relative to the largest entry.
inline constexpr double quadrature_drift_tolerance = 1e-11;

namespace detail {

inline double relative_drift(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline void check_drift(double drift, const char* what) {
    if (drift > quadrature_drift_tolerance) {
        std::ostringstream os;
        os << what << " under-resolved: doubling the quadrature order moves entries by " << drift;
        throw ConvergenceError(os.str());
    }
}

inline double temporal_scale(int n, double tau) { return gamma_ratio(n + tau, n); }

inline Eigen::MatrixXd temporal_stiffness_at(double tau, int n_time, double T, int q) {
    const auto& rule = *cached_gauss_jacobi(q, 0.0, 0.0);
    Eigen::MatrixXd leg(rule.size(), n_time);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const auto p = legendre_p_all(n_time - 1, rule.nodes[i]);
        for (int n = 1; n <= n_time; ++n) leg(i, n - 1) = temporal_scale(n, tau) * p[n - 1];
    }
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
    const double factor = std::pow(2.0 / T, 2.0 * tau) * (T / 2.0);
    return factor * leg.transpose() * w.asDiagonal() * leg;
}

inline Eigen::MatrixXd temporal_mass_at(double tau, int n_time, double T, int q) {
    const auto& rule = *cached_gauss_jacobi(q, tau, tau);
    Eigen::MatrixXd trial(rule.size(), n_time), test(rule.size(), n_time);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const auto pu = jacobi_p_all(n_time - 1, {-tau, tau}, rule.nodes[i]);
        const auto pv = jacobi_p_all(n_time - 1, {tau, -tau}, rule.nodes[i]);
        for (int n = 0; n < n_time; ++n) {
            trial(i, n) = pu[n];
            test(i, n) = pv[n];
        }
    }
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
    return (T / 2.0) * test.transpose() * w.asDiagonal() * trial;
}

// S[r][m] = J^{1-2 sigma} int (1-xi)^{-sigma}(1+xi)^{-sigma} Lred_m Rred_r  (and mirrored)
inline void spatial_stiffness_at(double sigma, int m_count, double J, int q, Eigen::MatrixXd& left,
                                 Eigen::MatrixXd& right) {
    const auto& rule = *cached_gauss_jacobi(q, -sigma, -sigma);
    Eigen::MatrixXd lred(rule.size(), m_count), rred(rule.size(), m_count);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        for (int m = 1; m <= m_count; ++m) {
            lred(i, m - 1) = spatial_mode_frac_reduced(m, sigma, Side::Left, rule.nodes[i]);
            rred(i, m - 1) = spatial_mode_frac_reduced(m, sigma, Side::Right, rule.nodes[i]);
        }
    }
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
    const double factor = std::pow(J, 1.0 - 2.0 * sigma);
    left = factor * rred.transpose() * w.asDiagonal() * lred;
    right = factor * lred.transpose() * w.asDiagonal() * rred;
}

}  // namespace detail

/// Temporal stiffness and mass. The stiffness integrand is a product of scaled
/// Legendre polynomials (Gauss-Legendre); the mass carries (1-eta^2)^tau
/// (Gauss-Jacobi with alpha = beta = tau).
inline TemporalMatrices temporal_matrices(FracOrder tau, int n_time, double T, int quad_order) {
    if (n_time < 1) throw DomainError("need at least one temporal mode");
    if (!(T > 0.0)) throw DomainError("final time must be positive");
    if (std::abs(2.0 * tau.value() - 1.0) < 1e-12) throw DomainError("temporal order 2 tau = 1 is excluded");
    const int q = std::max(quad_order, n_time + 1);
    TemporalMatrices out;
    out.stiffness = detail::temporal_stiffness_at(tau.value(), n_time, T, q);
    out.mass = detail::temporal_mass_at(tau.value(), n_time, T, q);
    out.drift = std::max(detail::relative_drift(out.stiffness, detail::temporal_stiffness_at(tau.value(), n_time, T, 2 * q)),
                         detail::relative_drift(out.mass, detail::temporal_mass_at(tau.value(), n_time, T, 2 * q)));
    detail::check_drift(out.drift, "temporal matrices");
    return out;
}

/// Closed-form spatial mass: J int phi_m phi_r, from int P_i P_j = 2/(2i+1) delta_ij.
inline Eigen::MatrixXd spatial_mass(int m_count, double J) {
    auto norm = [](int i) { return 2.0 / (2.0 * i + 1.0); };
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m_count, m_count);
    for (int m = 1; m <= m_count; ++m) {
        M(m - 1, m - 1) = J * (norm(m + 1) + norm(m - 1));
        if (m + 2 <= m_count) {
            M(m - 1, m + 1) = -J * norm(m + 1);
            M(m + 1, m - 1) = -J * norm(m + 1);
        }
    }
    return M;
}

/// Spatial stiffness pairs for half-order sigma on (a,b), plus the mass matrix.
inline SpatialMatrices spatial_matrices(FracOrder sigma, int m_count, const Interval& interval, int quad_order) {
    if (m_count < 1) throw DomainError("need at least one spatial mode");
    if (!(interval.a < interval.b)) throw DomainError("interval needs a < b");
    const double J = interval.half_length();
    const int q = std::max(quad_order, m_count + 2);
    SpatialMatrices out;
    detail::spatial_stiffness_at(sigma.value(), m_count, J, q, out.stiff_left, out.stiff_right);
    Eigen::MatrixXd l2, r2;
    detail::spatial_stiffness_at(sigma.value(), m_count, J, 2 * q, l2, r2);
    out.drift = std::max(detail::relative_drift(out.stiff_left, l2), detail::relative_drift(out.stiff_right, r2));
    detail::check_drift(out.drift, "spatial stiffness");
    out.mass = spatial_mass(m_count, J);
    return out;
}

/// All one-dimensional blocks of the global operator.
struct OperatorMatrices {
    struct Spatial {
        Eigen::MatrixXd mass;
        Eigen::MatrixXd mu_left, mu_right;
        Eigen::MatrixXd nu_left, nu_right;
    };
    TemporalMatrices temporal;
    std::vector<Spatial> spatial;
};

inline OperatorMatrices build_operator_matrices(const ProblemSpec& spec, const Resolution& res) {
    spec.validate();
    res.validate(spec);
    const int q = res.effective_quad_order();
    OperatorMatrices ops;
    ops.temporal = temporal_matrices(FracOrder(spec.tau), res.n_time, spec.T, q);
    for (int j = 0; j < spec.d; ++j) {
        const auto adv = spatial_matrices(FracOrder(spec.mu[j]), res.m_space[j], spec.intervals[j], q);
        const auto disp = spatial_matrices(FracOrder(spec.nu[j]), res.m_space[j], spec.intervals[j], q);
        ops.spatial.push_back({adv.mass, adv.stiff_left, adv.stiff_right, disp.stiff_left, disp.stiff_right});
    }
    return ops;
}

// ------------------------------------------------------------ Gram matrices

/// Gram matrices of the trial and test spaces in the energy norm, one factor at a time.
struct TemporalGrams {
    Eigen::MatrixXd trial_mass;  // (psi_n, psi_m)
    Eigen::MatrixXd test_mass;   // (Psi_k, Psi_l)
    Eigen::MatrixXd deriv;       // (D^tau psi_n, D^tau psi_m), identical for the test family
};

inline TemporalGrams temporal_grams(double tau, int n_time, double T, int q) {
    TemporalGrams g;
    const auto& ru = *cached_gauss_jacobi(q, 0.0, 2.0 * tau);
    const auto& rv = *cached_gauss_jacobi(q, 2.0 * tau, 0.0);
    Eigen::MatrixXd pu(ru.size(), n_time), pv(rv.size(), n_time);
    for (std::size_t i = 0; i < ru.size(); ++i) {
        const auto a = jacobi_p_all(n_time - 1, {-tau, tau}, ru.nodes[i]);
        const auto b = jacobi_p_all(n_time - 1, {tau, -tau}, rv.nodes[i]);
        for (int n = 0; n < n_time; ++n) {
            pu(i, n) = a[n];
            pv(i, n) = b[n];
        }
    }
    const Eigen::VectorXd wu = Eigen::Map<const Eigen::VectorXd>(ru.weights.data(), ru.size());
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(rv.weights.data(), rv.size());
    g.trial_mass = (T / 2.0) * pu.transpose() * wu.asDiagonal() * pu;
    g.test_mass = (T / 2.0) * pv.transpose() * wv.asDiagonal() * pv;
    g.deriv = Eigen::MatrixXd::Zero(n_time, n_time);
    const double factor = std::pow(2.0 / T, 2.0 * tau) * (T / 2.0);
    for (int n = 1; n <= n_time; ++n) {
        const double c = detail::temporal_scale(n, tau);
        g.deriv(n - 1, n - 1) = factor * c * c * 2.0 / (2.0 * n - 1.0);
    }
    return g;
}

struct SpatialGrams {
    Eigen::MatrixXd left;   // (D_L^nu phi_m, D_L^nu phi_r)
    Eigen::MatrixXd right;  // (D_R^nu phi_m, D_R^nu phi_r)
};

inline SpatialGrams spatial_grams(double nu, int m_count, const Interval& iv, int q) {
    // (1+xi)^{-2nu} = (1+xi)^{2-2nu} / (1+xi)^2, and the reduced derivative of
    // phi_m carries a factor (1+xi) at the left end because phi_m vanishes there.
    const auto& rl = *cached_gauss_jacobi(q, 0.0, 2.0 - 2.0 * nu);
    const auto& rr = *cached_gauss_jacobi(q, 2.0 - 2.0 * nu, 0.0);
    Eigen::MatrixXd L(rl.size(), m_count), R(rr.size(), m_count);
    for (std::size_t i = 0; i < rl.size(); ++i) {
        const double xl = rl.nodes[i];
        const double xr = rr.nodes[i];
        for (int m = 1; m <= m_count; ++m) {
            L(i, m - 1) = spatial_mode_frac_reduced(m, nu, Side::Left, xl) / (1.0 + xl);
            R(i, m - 1) = spatial_mode_frac_reduced(m, nu, Side::Right, xr) / (1.0 - xr);
        }
    }
    const Eigen::VectorXd wl = Eigen::Map<const Eigen::VectorXd>(rl.weights.data(), rl.size());
    const Eigen::VectorXd wr = Eigen::Map<const Eigen::VectorXd>(rr.weights.data(), rr.size());
    const double factor = std::pow(iv.half_length(), 1.0 - 2.0 * nu);
    return {factor * L.transpose() * wl.asDiagonal() * L, factor * R.transpose() * wr.asDiagonal() * R};
}

// ---------------------------------------------------------------- loads

namespace detail {

// Contract one axis of a row-major tensor: (.., q_k, ..) -> (.., n_k, ..) with B (n_k x q_k).
inline std::vector<double> mode_product(const std::vector<double>& data, std::vector<int>& shape, int axis,
                                        const Eigen::MatrixXd& B) {
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
    const int qk = shape[axis];
    const int nk = static_cast<int>(B.rows());
    std::vector<double> out(outer * nk * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
        for (int r = 0; r < nk; ++r)
            for (int s = 0; s < qk; ++s) {
                const double b = B(r, s);
                if (b == 0.0) continue;
                const double* src = &data[(o * qk + s) * inner];
                double* dst = &out[(o * nk + r) * inner];
                for (std::size_t i = 0; i < inner; ++i) dst[i] += b * src[i];
            }
    shape[axis] = nk;
    return out;
}

}  // namespace detail

/// F[k,r] = (f, test_(k,r)) by tensor quadrature: Gauss-Jacobi(tau,0) in time,
/// Gauss-Legendre in space; k slowest, then r_1 .. r_d.
inline Eigen::VectorXd load_vector(const ProblemSpec& spec, const Resolution& res, const ForcingFn& f) {
    spec.validate();
    res.validate(spec);
    if (!f) throw ValidationError("problem.forcing", "no forcing function supplied");
    const int q = res.effective_quad_order();
    const double tau = spec.tau;
    const auto& rt = *cached_gauss_jacobi(q, tau, 0.0);
    const auto& rx = *cached_gauss_jacobi(q, 0.0, 0.0);

    std::vector<int> shape(spec.d + 1, q);
    std::size_t total = 1;
    for (int s : shape) total *= s;
    std::vector<double> grid(total);
    std::vector<int> idx(spec.d + 1, 0);
    std::vector<double> x(spec.d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = spec.d; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % q);
            rem /= q;
        }
        const double t = 0.5 * spec.T * (rt.nodes[idx[0]] + 1.0);
        for (int j = 0; j < spec.d; ++j) x[j] = spec.intervals[j].from_reference(rx.nodes[idx[j + 1]]);
        const double v = f(t, x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "forcing is not finite at t=" << t;
            for (int j = 0; j < spec.d; ++j) os << ", x" << j + 1 << "=" << x[j];
            throw EvaluationError(os.str());
        }
        grid[flat] = v;
    }

    Eigen::MatrixXd Bt(res.n_time, q);
    for (int i = 0; i < q; ++i) {
        const auto p = jacobi_p_all(res.n_time - 1, {tau, -tau}, rt.nodes[i]);
        for (int k = 0; k < res.n_time; ++k) Bt(k, i) = 0.5 * spec.T * rt.weights[i] * p[k];
    }
    grid = detail::mode_product(grid, shape, 0, Bt);
    for (int j = 0; j < spec.d; ++j) {
        const int mj = res.m_space[j];
        const double J = spec.intervals[j].half_length();
        Eigen::MatrixXd Bx(mj, q);
        for (int i = 0; i < q; ++i)
            for (int r = 1; r <= mj; ++r) Bx(r - 1, i) = J * rx.weights[i] * spatial_mode(r, rx.nodes[i]);
        grid = detail::mode_product(grid, shape, j + 1, Bx);
    }
    return Eigen::Map<Eigen::VectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size()));
}

/// One factor of a separable forcing term, with its endpoint behaviour declared
/// so the quadrature weight can absorb it.
struct TimeFactor {
    std::function<double(double)> value;  // of t in (0,T]
    double exponent_at_zero = 0.0;        // value ~ t^exponent near t = 0
};

struct SpaceFactor {
    std::function<double(double)> value;  // of x in (a,b)
    double exponent_right = 0.0;          // value ~ (b-x)^exponent_right near b
    double exponent_left = 0.0;           // value ~ (x-a)^exponent_left near a
};

struct SeparableTerm {
    double coefficient = 1.0;
    TimeFactor time;
    std::vector<SpaceFactor> space;
};

/// f(t,x) = sum_terms coefficient * T(t) * prod_j X_j(x_j).
struct SeparableForcing {
    std::vector<SeparableTerm> terms;

    double operator()(double t, std::span<const double> x) const {
        double sum = 0.0;
        for (const auto& term : terms) {
            double v = term.coefficient * term.time.value(t);
            for (std::size_t j = 0; j < term.space.size(); ++j) v *= term.space[j].value(x[j]);
            sum += v;
        }
        return sum;
    }
};

namespace detail {

inline void require_finite(double v, const char* what, double at) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << what << " is not finite at " << at;
        throw EvaluationError(os.str());
    }
}

inline Eigen::VectorXd separable_time_load(const TimeFactor& tf, double tau, int n_time, double T, int q) {
    // (f, Psi_k) = (T/2) int (1-eta)^tau (1+eta)^b [tf / (1+eta)^b] P_{k-1}^{tau,-tau}
    const double b = tf.exponent_at_zero;
    const auto& rule = *cached_gauss_jacobi(q, tau, b);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_time);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double eta = rule.nodes[i];
        const double t = 0.5 * T * (eta + 1.0);
        const double v = tf.value(t) / std::pow(1.0 + eta, b);
        require_finite(v, "time factor", t);
        const auto p = jacobi_p_all(n_time - 1, {tau, -tau}, eta);
        for (int k = 0; k < n_time; ++k) out[k] += 0.5 * T * rule.weights[i] * v * p[k];
    }
    return out;
}

inline Eigen::VectorXd separable_space_load(const SpaceFactor& sf, const Interval& iv, int m_count, int q) {
    // phi_r = (1-xi^2) * reduced; absorb (1-xi)^{1+a} (1+xi)^{1+b} into the weight
    const double a = sf.exponent_right;
    const double b = sf.exponent_left;
    const auto& rule = *cached_gauss_jacobi(q, 1.0 + a, 1.0 + b);
    const double J = iv.half_length();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m_count);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double xi = rule.nodes[i];
        const double x = iv.from_reference(xi);
        const double v = sf.value(x) / (std::pow(1.0 - xi, a) * std::pow(1.0 + xi, b));
        require_finite(v, "space factor", x);
        for (int r = 1; r <= m_count; ++r) out[r - 1] += J * rule.weights[i] * v * spatial_mode_reduced(r, xi);
    }
    return out;
}

}  // namespace detail

/// Load vector of a separable forcing. Each factor is integrated against a
/// Gauss-Jacobi weight matching its declared endpoint powers, which keeps
/// spectral accuracy when the forcing is singular at t = 0 or at x = a, b.
inline Eigen::VectorXd load_vector(const ProblemSpec& spec, const Resolution& res, const SeparableForcing& f) {
    spec.validate();
    res.validate(spec);
    const int q = res.effective_quad_order();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(res.total_size()));
    for (const auto& term : f.terms) {
        if (static_cast<int>(term.space.size()) != spec.d) throw ShapeError("separable term needs d space factors");
        Eigen::VectorXd acc = term.coefficient * detail::separable_time_load(term.time, spec.tau, res.n_time, spec.T, q);
        for (int j = 0; j < spec.d; ++j) {
            const Eigen::VectorXd s = detail::separable_space_load(term.space[j], spec.intervals[j], res.m_space[j], q);
            Eigen::VectorXd next(acc.size() * s.size());
            for (Eigen::Index u = 0; u < acc.size(); ++u) next.segment(u * s.size(), s.size()) = acc[u] * s;
            acc = std::move(next);
        }
        out += acc;
    }
    return out;
}

}  // namespace fpg
