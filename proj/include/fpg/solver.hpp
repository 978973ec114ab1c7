#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <iostream>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "fpg/assembly.hpp"
#include "fpg/errors.hpp"
#include "fpg/problem.hpp"

namespace fpg {

struct GlobalSystem {
    Eigen::MatrixXd lhs;
    Eigen::VectorXd rhs;
};

struct SpectralSolution {
    Eigen::VectorXd coeffs;  // time index slowest, then m_1 .. m_d
    ProblemSpec spec;
    Resolution res;
    double residual = 0.0;   // ||lhs x - rhs|| / ||rhs||

    /// Coefficient of trial function (n, m); indices start at 1.
    double coeff(int n, std::span<const int> m) const {
        std::size_t flat = static_cast<std::size_t>(n - 1);
        for (int j = 0; j < spec.d; ++j) flat = flat * res.m_space[j] + (m[j] - 1);
        return coeffs[static_cast<Eigen::Index>(flat)];
    }
};

/// Kronecker product of a list of matrices, first factor slowest.
inline Eigen::MatrixXd kron_all(const std::vector<const Eigen::MatrixXd*>& factors) {
    Eigen::MatrixXd acc = *factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) {
        Eigen::MatrixXd next = Eigen::kroneckerProduct(acc, *factors[i]);
        acc = std::move(next);
    }
    return acc;
}

/// Spatial operator a_j(phi_m, phi_r) for one direction: advection minus dispersion.
inline Eigen::MatrixXd spatial_operator(const ProblemSpec& spec, const OperatorMatrices::Spatial& s, int j) {
    return spec.c_left[j] * s.mu_left + spec.c_right[j] * s.mu_right - spec.kappa_left[j] * s.nu_left -
           spec.kappa_right[j] * s.nu_right;
}

/// lhs = S_t (x) M.. + sum_i M_t (x) .. (c S^mu) .. - sum_j M_t (x) .. (kappa S^nu) .. + gamma M_t (x) M..
inline Eigen::MatrixXd assemble_lhs(const ProblemSpec& spec, const OperatorMatrices& ops) {
    if (static_cast<int>(ops.spatial.size()) != spec.d) throw ShapeError("operator matrices do not match d");
    std::vector<const Eigen::MatrixXd*> f(spec.d + 1);
    f[0] = &ops.temporal.stiffness;
    for (int j = 0; j < spec.d; ++j) f[j + 1] = &ops.spatial[j].mass;
    Eigen::MatrixXd lhs = kron_all(f);

    f[0] = &ops.temporal.mass;
    for (int j = 0; j < spec.d; ++j) {
        const Eigen::MatrixXd A = spatial_operator(spec, ops.spatial[j], j);
        for (int i = 0; i < spec.d; ++i) f[i + 1] = i == j ? &A : &ops.spatial[i].mass;
        lhs += kron_all(f);
    }
    if (spec.gamma_coeff != 0.0) {
        for (int i = 0; i < spec.d; ++i) f[i + 1] = &ops.spatial[i].mass;
        lhs += spec.gamma_coeff * kron_all(f);
    }
    return lhs;
}

inline GlobalSystem assemble_global(const ProblemSpec& spec, const Resolution& res, const OperatorMatrices& ops,
                                    const Eigen::VectorXd& load) {
    const auto n = static_cast<Eigen::Index>(res.total_size());
    if (ops.temporal.stiffness.rows() != res.n_time) throw ShapeError("temporal matrices do not match n_time");
    for (int j = 0; j < spec.d; ++j)
        if (ops.spatial.size() != static_cast<std::size_t>(spec.d) || ops.spatial[j].mass.rows() != res.m_space[j])
            throw ShapeError("spatial matrices do not match m_space");
    if (load.size() != n) {
        std::ostringstream os;
        os << "load vector has length " << load.size() << ", expected " << n;
        throw ShapeError(os.str());
    }
    return {assemble_lhs(spec, ops), load};
}

inline constexpr double pivot_tolerance = 1e-14;
inline constexpr double residual_tolerance = 1e-10;

/// Dense partial-pivot LU solve. Throws SingularMatrixError when the smallest
/// pivot falls below 1e-14 of the largest.
inline Eigen::VectorXd solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double* residual = nullptr) {
    if (A.rows() != A.cols() || A.rows() != b.size()) throw ShapeError("system is not square or rhs mismatched");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    const double pmax = diag.maxCoeff();
    const double pmin = diag.minCoeff();
    if (!(pmax > 0.0) || pmin < pivot_tolerance * pmax) {
        std::ostringstream os;
        os << "matrix is numerically singular (pivot ratio " << (pmax > 0.0 ? pmin / pmax : 0.0) << ")";
        const double rc = lu.rcond();  // NaN for an exactly singular factor
        throw SingularMatrixError(os.str(), rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
    }
    Eigen::VectorXd x = lu.solve(b);
    if (residual) {
        const double bn = b.norm();
        *residual = (A * x - b).norm() / (bn > 0.0 ? bn : 1.0);
    }
    return x;
}

inline SpectralSolution solve_direct(const GlobalSystem& sys, const ProblemSpec& spec, const Resolution& res) {
    SpectralSolution sol{Eigen::VectorXd(), spec, res, 0.0};
    sol.coeffs = solve_dense(sys.lhs, sys.rhs, &sol.residual);
    if (sol.residual > residual_tolerance) {
        // one step of iterative refinement usually recovers the last digits
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.lhs);
        sol.coeffs += lu.solve(sys.rhs - sys.lhs * sol.coeffs);
        const double bn = sys.rhs.norm();
        sol.residual = (sys.lhs * sol.coeffs - sys.rhs).norm() / (bn > 0.0 ? bn : 1.0);
    }
    if (!sol.coeffs.allFinite()) throw SingularMatrixError("solution has non-finite entries", 0.0);
    return sol;
}

/// Solves S_t U M_x^T + M_t U A^T = F for the N x M coefficient matrix U.
///
/// Diagonalizes M_x^{-1} A = V diag(lambda) V^{-1}; each eigenvalue leaves an
/// N x N system (S_t + lambda M_t) w = g. Falls back to the dense Kronecker
/// solve if the transform is ill-conditioned.
inline Eigen::MatrixXd solve_sylvester_1d(const Eigen::MatrixXd& S_t, const Eigen::MatrixXd& M_t,
                                          const Eigen::MatrixXd& A, const Eigen::MatrixXd& M_x,
                                          const Eigen::MatrixXd& F, bool* used_fallback = nullptr) {
    const auto N = S_t.rows();
    const auto M = M_x.rows();
    if (S_t.cols() != N || M_t.rows() != N || M_t.cols() != N || A.rows() != M || A.cols() != M || M_x.cols() != M ||
        F.rows() != N || F.cols() != M)
        throw ShapeError("Sylvester operands have inconsistent shapes");

    auto dense = [&]() {
        const Eigen::MatrixXd K = Eigen::kroneckerProduct(S_t, M_x).eval() + Eigen::kroneckerProduct(M_t, A).eval();
        Eigen::VectorXd f(N * M);
        for (Eigen::Index i = 0; i < N; ++i) f.segment(i * M, M) = F.row(i).transpose();
        const Eigen::VectorXd x = solve_dense(K, f);
        Eigen::MatrixXd U(N, M);
        for (Eigen::Index i = 0; i < N; ++i) U.row(i) = x.segment(i * M, M).transpose();
        return U;
    };
    if (used_fallback) *used_fallback = false;

    using CMat = Eigen::MatrixXcd;
    // U M_x^T + ... : transpose to G = F^T, solve M_x U^T S_t^T + A U^T M_t^T = F^T
    // With Y = U^T: M_x Y S_t^T + A Y M_t^T = F^T. Let B = M_x^{-1} A = V L V^{-1}, Y = V Z:
    // Z S_t^T + L Z M_t^T = V^{-1} M_x^{-1} F^T, row by row.
    Eigen::EigenSolver<Eigen::MatrixXd> es(M_x.partialPivLu().solve(A));
    bool ok = es.info() == Eigen::Success;
    Eigen::MatrixXd U;
    if (ok) {
        const CMat V = es.eigenvectors();
        const Eigen::VectorXcd lambda = es.eigenvalues();
        Eigen::PartialPivLU<CMat> vlu(V);
        ok = vlu.rcond() > 1e-12;
        if (ok) {
            const CMat rhs = vlu.solve(M_x.partialPivLu().solve(F.transpose()).cast<std::complex<double>>());
            CMat Z(M, N);
            const CMat St = S_t.cast<std::complex<double>>();
            const CMat Mt = M_t.cast<std::complex<double>>();
            for (Eigen::Index r = 0; r < M; ++r) {
                const CMat K = St + lambda[r] * Mt;  // (S_t + lambda M_t) z_r^T = rhs_r^T
                Eigen::PartialPivLU<CMat> klu(K);
                Z.row(r) = klu.solve(rhs.row(r).transpose()).transpose();
            }
            U = (V * Z).real().transpose();
            const double fn = F.norm();
            const double res = (S_t * U * M_x.transpose() + M_t * U * A.transpose() - F).norm() / (fn > 0.0 ? fn : 1.0);
            ok = U.allFinite() && res <= residual_tolerance;
        }
    }
    if (!ok) {
        std::cerr << "warning: Sylvester transform failed, falling back to the dense solve\n";
        if (used_fallback) *used_fallback = true;
        return dense();
    }
    return U;
}

/// Solves a d = 1 system through the Sylvester path.
inline SpectralSolution solve_sylvester(const ProblemSpec& spec, const Resolution& res, const OperatorMatrices& ops,
                                        const Eigen::VectorXd& load) {
    if (spec.d != 1) throw ShapeError("Sylvester path needs d = 1");
    const int N = res.n_time;
    const int M = res.m_space[0];
    if (load.size() != static_cast<Eigen::Index>(N) * M) throw ShapeError("load vector length mismatch");
    Eigen::MatrixXd A = spatial_operator(spec, ops.spatial[0], 0);
    if (spec.gamma_coeff != 0.0) A += spec.gamma_coeff * ops.spatial[0].mass;
    Eigen::MatrixXd F(N, M);
    for (int i = 0; i < N; ++i) F.row(i) = load.segment(static_cast<Eigen::Index>(i) * M, M).transpose();
    const Eigen::MatrixXd U = solve_sylvester_1d(ops.temporal.stiffness, ops.temporal.mass, A, ops.spatial[0].mass, F);
    SpectralSolution sol{Eigen::VectorXd(N * M), spec, res, 0.0};
    for (int i = 0; i < N; ++i) sol.coeffs.segment(static_cast<Eigen::Index>(i) * M, M) = U.row(i).transpose();
    const Eigen::MatrixXd lhs = assemble_lhs(spec, ops);
    const double bn = load.norm();
    sol.residual = (lhs * sol.coeffs - load).norm() / (bn > 0.0 ? bn : 1.0);
    return sol;
}

/// Full pipeline for a separable or pointwise forcing: matrices, load, dense solve.
template <class Forcing>
SpectralSolution solve_problem(const ProblemSpec& spec, const Resolution& res, const Forcing& forcing) {
    const OperatorMatrices ops = build_operator_matrices(spec, res);
    const Eigen::VectorXd load = load_vector(spec, res, forcing);
    return solve_direct(assemble_global(spec, res, ops, load), spec, res);
}

/// Per-direction mode values of the trial space at one point.
struct TrialValues {
    std::vector<double> time;                // psi_n(t), n = 1..N
    std::vector<std::vector<double>> space;  // phi_m(x_j), m = 1..M_j
};

inline double contract(const SpectralSolution& sol, const TrialValues& v) {
    const int d = sol.spec.d;
    const auto& res = sol.res;
    // contract spatial directions from the fastest index inwards
    std::vector<double> cur(sol.coeffs.data(), sol.coeffs.data() + sol.coeffs.size());
    for (int j = d - 1; j >= 0; --j) {
        const int mj = res.m_space[j];
        std::vector<double> next(cur.size() / mj, 0.0);
        for (std::size_t o = 0; o < next.size(); ++o)
            for (int m = 0; m < mj; ++m) next[o] += cur[o * mj + m] * v.space[j][m];
        cur = std::move(next);
    }
    double sum = 0.0;
    for (int n = 0; n < res.n_time; ++n) sum += cur[n] * v.time[n];
    return sum;
}

/// u_N(t, x) = sum of coefficients times trial basis functions.
inline double evaluate(const SpectralSolution& sol, double t, std::span<const double> x) {
    const auto& spec = sol.spec;
    if (static_cast<int>(x.size()) != spec.d) throw ShapeError("point must have d spatial coordinates");
    const double eta = detail::reference_time(spec, t);
    TrialValues v;
    const double lift = std::pow(1.0 + eta, spec.tau);
    const auto p = jacobi_p_all(sol.res.n_time - 1, {-spec.tau, spec.tau}, eta);
    for (int n = 0; n < sol.res.n_time; ++n) v.time.push_back(lift * p[n]);
    for (int j = 0; j < spec.d; ++j) {
        const double xi = detail::reference_space(spec.intervals[j], x[j]);
        const auto l = legendre_p_all(sol.res.m_space[j] + 1, xi);
        std::vector<double> s(sol.res.m_space[j]);
        for (int m = 1; m <= sol.res.m_space[j]; ++m) s[m - 1] = l[m + 1] - l[m - 1];
        v.space.push_back(std::move(s));
    }
    return contract(sol, v);
}

}  // namespace fpg
