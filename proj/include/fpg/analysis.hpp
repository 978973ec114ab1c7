#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fpg/assembly.hpp"
#include "fpg/errors.hpp"
#include "fpg/manufactured.hpp"
#include "fpg/problem.hpp"
#include "fpg/solver.hpp"

namespace fpg {

namespace detail {

// Values of sum_{n,m} C[n][m] A(t_i, n) B(x_j, m) against an exact separable
// field a(t_i) b(x_j), integrated with weights wt (x) wx.
struct GridNorm {
    double error2 = 0.0;
    double exact2 = 0.0;
};

inline GridNorm grid_norm(const Eigen::MatrixXd& C, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& wt,
                          const Eigen::VectorXd& wx) {
    const Eigen::MatrixXd approx = A * C * B.transpose();
    const Eigen::MatrixXd exact = a * b.transpose();
    GridNorm out;
    for (Eigen::Index i = 0; i < approx.rows(); ++i)
        for (Eigen::Index j = 0; j < approx.cols(); ++j) {
            const double e = approx(i, j) - exact(i, j);
            out.error2 += wt[i] * wx[j] * e * e;
            out.exact2 += wt[i] * wx[j] * exact(i, j) * exact(i, j);
        }
    return out;
}

inline Eigen::VectorXd weights_of(const QuadratureRule& r) {
    return Eigen::Map<const Eigen::VectorXd>(r.weights.data(), static_cast<Eigen::Index>(r.size()));
}

inline Eigen::MatrixXd coefficient_matrix(const SpectralSolution& sol) {
    const int N = sol.res.n_time;
    const int M = sol.res.m_space[0];
    Eigen::MatrixXd C(N, M);
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m) C(n, m) = sol.coeffs[static_cast<Eigen::Index>(n) * M + m];
    return C;
}

// Rows: nodes; columns: temporal trial modes divided by (1+eta)^tau.
inline Eigen::MatrixXd temporal_table(const QuadratureRule& r, int N, double tau) {
    Eigen::MatrixXd A(r.size(), N);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto p = jacobi_p_all(N - 1, {-tau, tau}, r.nodes[i]);
        for (int n = 0; n < N; ++n) A(i, n) = p[n];
    }
    return A;
}

inline Eigen::MatrixXd spatial_table(const QuadratureRule& r, int M) {
    Eigen::MatrixXd B(r.size(), M);
    for (std::size_t i = 0; i < r.size(); ++i)
        for (int m = 1; m <= M; ++m) B(i, m - 1) = spatial_mode(m, r.nodes[i]);
    return B;
}

inline int error_quad_order(const Resolution& res, std::optional<int> quad_order) {
    return std::max(quad_order.value_or(0), res.max_order() + 10);
}

inline double relative(double error2, double exact2) {
    if (!(std::sqrt(exact2) >= 1e-300)) throw DomainError("exact solution has zero norm");
    return std::sqrt(error2 / exact2);
}

}  // namespace detail

/// Relative L2(Omega) error against the manufactured solution. Time uses
/// Gauss-Jacobi(0, 2 tau), which absorbs the (1+eta)^{2 tau} of the squared
/// trial functions; space uses Gauss-Legendre.
inline double l2_rel_error(const SpectralSolution& sol, const ManufacturedCase& c,
                           std::optional<int> quad_order = std::nullopt) {
    const auto& spec = sol.spec;
    const int q = detail::error_quad_order(sol.res, quad_order);
    const double tau = spec.tau;
    const auto& rt = *cached_gauss_jacobi(q, 0.0, 2.0 * tau);
    const auto& rx = *cached_gauss_jacobi(q, 0.0, 0.0);
    const Eigen::VectorXd wt = detail::weights_of(rt);
    const Eigen::VectorXd wx = detail::weights_of(rx);

    Eigen::VectorXd a(q);
    for (int i = 0; i < q; ++i) {
        const double eta = rt.nodes[i];
        a[i] = case_time(c, 0.0, 0.5 * spec.T * (eta + 1.0)) / std::pow(1.0 + eta, tau);
    }
    const Eigen::MatrixXd A = detail::temporal_table(rt, sol.res.n_time, tau);

    if (spec.d == 1) {
        const auto& iv = spec.intervals[0];
        Eigen::VectorXd b(q);
        for (int j = 0; j < q; ++j) b[j] = case_space(c, 0.0, Side::Left, iv, iv.from_reference(rx.nodes[j]));
        const auto g = detail::grid_norm(detail::coefficient_matrix(sol), A, detail::spatial_table(rx, sol.res.m_space[0]),
                                         a, b, wt, wx);
        return detail::relative(g.error2, g.exact2);
    }

    // general d: walk the spatial tensor grid, contracting coefficients per point
    std::vector<Eigen::MatrixXd> B;
    std::vector<Eigen::VectorXd> b(spec.d, Eigen::VectorXd(q));
    for (int j = 0; j < spec.d; ++j) {
        B.push_back(detail::spatial_table(rx, sol.res.m_space[j]));
        for (int k = 0; k < q; ++k) b[j][k] = case_space(c, 0.0, Side::Left, spec.intervals[j], spec.intervals[j].from_reference(rx.nodes[k]));
    }
    std::size_t points = 1;
    for (int j = 0; j < spec.d; ++j) points *= q;
    double err2 = 0.0, ex2 = 0.0;
    std::vector<int> idx(spec.d, 0);
    TrialValues v;
    v.space.resize(spec.d);
    for (std::size_t flat = 0; flat < points; ++flat) {
        std::size_t rem = flat;
        double wsp = 1.0, bsp = 1.0;
        for (int j = spec.d - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(rem % q);
            rem /= q;
            wsp *= wx[idx[j]];
            bsp *= b[j][idx[j]];
            const Eigen::VectorXd row = B[j].row(idx[j]).transpose();
            v.space[j].assign(row.data(), row.data() + row.size());
        }
        for (int i = 0; i < q; ++i) {
            const Eigen::VectorXd trow = A.row(i).transpose();
            v.time.assign(trow.data(), trow.data() + trow.size());
            const double ex = a[i] * bsp;
            const double e = contract(sol, v) - ex;
            err2 += wt[i] * wsp * e * e;
            ex2 += wt[i] * wsp * ex * ex;
        }
    }
    return detail::relative(err2, ex2);
}

/// Relative error in the energy norm
/// {||e||^2 + ||D_t^tau e||^2 + ||D_L^nu e||^2 + ||D_R^nu e||^2}^(1/2), d = 1.
inline double energy_error(const SpectralSolution& sol, const ManufacturedCase& c,
                           std::optional<int> quad_order = std::nullopt) {
    const auto& spec = sol.spec;
    if (spec.d != 1) throw ShapeError("energy norm is defined for d = 1");
    const int q = detail::error_quad_order(sol.res, quad_order);
    const double tau = spec.tau;
    const double nu = spec.nu[0];
    const double T = spec.T;
    const auto& iv = spec.intervals[0];
    const double J = iv.half_length();
    const int N = sol.res.n_time;
    const int M = sol.res.m_space[0];
    const Eigen::MatrixXd C = detail::coefficient_matrix(sol);

    const auto& rt = *cached_gauss_jacobi(q, 0.0, 2.0 * tau);
    const auto& rg = *cached_gauss_jacobi(q, 0.0, 0.0);
    const auto& rl = *cached_gauss_jacobi(q, 0.0, 2.0 - 2.0 * nu);
    const auto& rr = *cached_gauss_jacobi(q, 2.0 - 2.0 * nu, 0.0);

    // time tables: trial modes over (1+eta)^tau on rt, and D^tau modes on rg
    const Eigen::MatrixXd At = detail::temporal_table(rt, N, tau);
    Eigen::VectorXd at(q), dt(q);
    Eigen::MatrixXd Ad(q, N);
    for (int i = 0; i < q; ++i) {
        at[i] = case_time(c, 0.0, 0.5 * T * (rt.nodes[i] + 1.0)) / std::pow(1.0 + rt.nodes[i], tau);
        dt[i] = case_time(c, tau, 0.5 * T * (rg.nodes[i] + 1.0));
        const auto p = legendre_p_all(N - 1, rg.nodes[i]);
        for (int n = 1; n <= N; ++n) Ad(i, n - 1) = std::pow(2.0 / T, tau) * gamma_ratio(n + tau, n) * p[n - 1];
    }

    // space tables
    const Eigen::MatrixXd Bg = detail::spatial_table(rg, M);
    Eigen::VectorXd bg(q), bl(q), br(q);
    Eigen::MatrixXd Bl(q, M), Br(q, M);
    const double dscale = std::pow(J, -nu);
    for (int j = 0; j < q; ++j) {
        const double xl = rl.nodes[j];
        const double xr = rr.nodes[j];
        bg[j] = case_space(c, 0.0, Side::Left, iv, iv.from_reference(rg.nodes[j]));
        // divide by (1+xi)^{1-nu}; squared this is the (1+xi)^{2-2nu} of the rule
        bl[j] = case_space(c, nu, Side::Left, iv, iv.from_reference(xl)) / std::pow(1.0 + xl, 1.0 - nu);
        br[j] = case_space(c, nu, Side::Right, iv, iv.from_reference(xr)) / std::pow(1.0 - xr, 1.0 - nu);
        for (int m = 1; m <= M; ++m) {
            Bl(j, m - 1) = dscale * spatial_mode_frac_reduced(m, nu, Side::Left, xl) / (1.0 + xl);
            Br(j, m - 1) = dscale * spatial_mode_frac_reduced(m, nu, Side::Right, xr) / (1.0 - xr);
        }
    }

    const Eigen::VectorXd wt = detail::weights_of(rt), wg = detail::weights_of(rg);
    const Eigen::VectorXd wl = detail::weights_of(rl), wr = detail::weights_of(rr);
    const auto l2 = detail::grid_norm(C, At, Bg, at, bg, wt, wg);
    const auto dtime = detail::grid_norm(C, Ad, Bg, dt, bg, wg, wg);
    const auto dleft = detail::grid_norm(C, At, Bl, at, bl, wt, wl);
    const auto dright = detail::grid_norm(C, At, Br, at, br, wt, wr);
    // common measure factor T/2 * J cancels in the ratio
    return detail::relative(l2.error2 + dtime.error2 + dleft.error2 + dright.error2,
                            l2.exact2 + dtime.exact2 + dleft.exact2 + dright.exact2);
}

/// Negative least-squares slope of log(error) against log(order) over the last
/// `window` points; window 0 uses every point.
inline double observed_rate(const std::vector<double>& orders, const std::vector<double>& errors, int window = 3) {
    if (orders.size() != errors.size()) throw ShapeError("orders and errors differ in length");
    if (orders.size() < 2) throw DomainError("rate fit needs at least two points");
    for (double e : errors)
        if (!(e > 0.0)) throw DomainError("rate fit needs positive errors");
    const std::size_t n = orders.size();
    const std::size_t w = window <= 0 ? n : std::min<std::size_t>(static_cast<std::size_t>(window), n);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = n - w; i < n; ++i) {
        const double x = std::log(orders[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = w * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) throw DomainError("rate fit needs distinct orders");
    return -(w * sxy - sx * sy) / denom;
}

enum class SweepAxis { Temporal, Spatial };

struct SweepFailure {
    int order;
    std::string message;
};

struct ConvergenceRecord {
    SweepAxis axis = SweepAxis::Temporal;
    std::vector<int> orders_swept;
    std::vector<double> l2_errors;
    std::vector<double> energy_errors;
    std::vector<double> wall_time_ms;
    std::vector<double> residuals;
    double observed_rate_l2 = std::numeric_limits<double>::quiet_NaN();
    double observed_rate_energy = std::numeric_limits<double>::quiet_NaN();
    bool rate_defined = false;
    std::vector<SweepFailure> failures;

    std::vector<double> orders_as_double() const { return {orders_swept.begin(), orders_swept.end()}; }
};

struct SweepOptions {
    std::optional<int> quad_order;
    int rate_window = 3;
    bool energy = true;  // d = 1 only
};

/// Solves the manufactured problem at each order and records both errors.
/// A failing sweep point is recorded and skipped.
inline ConvergenceRecord convergence_sweep(const ProblemSpec& spec, const ManufacturedCase& c, SweepAxis axis,
                                           const std::vector<int>& orders, int fixed_other_order,
                                           const SweepOptions& opts = {}) {
    if (orders.empty()) throw ValidationError("sweep.orders", "order list is empty");
    ConvergenceRecord rec;
    rec.axis = axis;
    const SeparableForcing forcing = forcing_terms(c, spec);
    for (int order : orders) {
        Resolution res;
        res.n_time = axis == SweepAxis::Temporal ? order : fixed_other_order;
        res.m_space.assign(spec.d, axis == SweepAxis::Spatial ? order : fixed_other_order);
        res.quad_order = opts.quad_order;
        const auto start = std::chrono::steady_clock::now();
        try {
            const SpectralSolution sol = solve_problem(spec, res, forcing);
            const double l2 = l2_rel_error(sol, c, opts.quad_order);
            const double en = opts.energy && spec.d == 1 ? energy_error(sol, c, opts.quad_order)
                                                         : std::numeric_limits<double>::quiet_NaN();
            const auto stop = std::chrono::steady_clock::now();
            rec.orders_swept.push_back(order);
            rec.l2_errors.push_back(l2);
            rec.energy_errors.push_back(en);
            rec.residuals.push_back(sol.residual);
            rec.wall_time_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        } catch (const Error& e) {
            rec.failures.push_back({order, e.what()});
        }
    }
    if (rec.orders_swept.size() >= 2) {
        const auto x = rec.orders_as_double();
        rec.observed_rate_l2 = observed_rate(x, rec.l2_errors, opts.rate_window);
        if (opts.energy && spec.d == 1) rec.observed_rate_energy = observed_rate(x, rec.energy_errors, opts.rate_window);
        rec.rate_defined = true;
    }
    return rec;
}

/// Gram matrices of the trial and test spaces in the energy norm.
struct EnergyGrams {
    Eigen::MatrixXd trial;
    Eigen::MatrixXd test;
};

inline EnergyGrams energy_grams(const ProblemSpec& spec, const Resolution& res) {
    const int q = res.effective_quad_order() + 10;
    const TemporalGrams tg = temporal_grams(spec.tau, res.n_time, spec.T, q);
    std::vector<Eigen::MatrixXd> mass, deriv;
    for (int j = 0; j < spec.d; ++j) {
        mass.push_back(spatial_mass(res.m_space[j], spec.intervals[j].half_length()));
        const auto sg = spatial_grams(spec.nu[j], res.m_space[j], spec.intervals[j], q);
        deriv.push_back(sg.left + sg.right);
    }
    auto assemble = [&](const Eigen::MatrixXd& tmass) {
        std::vector<const Eigen::MatrixXd*> f(spec.d + 1);
        f[0] = &tmass;
        for (int j = 0; j < spec.d; ++j) f[j + 1] = &mass[j];
        Eigen::MatrixXd G = kron_all(f);
        f[0] = &tg.deriv;
        G += kron_all(f);
        f[0] = &tmass;
        for (int j = 0; j < spec.d; ++j) {
            for (int i = 0; i < spec.d; ++i) f[i + 1] = i == j ? &deriv[j] : &mass[i];
            G += kron_all(f);
        }
        return G;
    };
    return {assemble(tg.trial_mass), assemble(tg.test_mass)};
}

/// beta_N = smallest singular value of G_V^{-1/2} A G_U^{-1/2}.
inline double discrete_inf_sup(const ProblemSpec& spec, const Resolution& res) {
    const OperatorMatrices ops = build_operator_matrices(spec, res);
    const Eigen::MatrixXd A = assemble_lhs(spec, ops);
    const EnergyGrams g = energy_grams(spec, res);
    Eigen::LLT<Eigen::MatrixXd> lu(g.trial), lv(g.test);
    if (lu.info() != Eigen::Success || lv.info() != Eigen::Success)
        throw SingularMatrixError("energy Gram matrix is not positive definite", 0.0);
    // L_V^{-1} A L_U^{-T} has the same singular values as G_V^{-1/2} A G_U^{-1/2}
    const Eigen::MatrixXd left = lv.matrixL().solve(A);
    const Eigen::MatrixXd scaled = lu.matrixL().solve(left.transpose()).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    return svd.singularValues().minCoeff();
}

}  // namespace fpg
