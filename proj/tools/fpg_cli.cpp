// fpg_cli: solve, sweep, verify and inf-sup runs driven by a config file.
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "fpg/fpg.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_numerical = 2;

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::string short_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// Writes through a sibling temporary so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path() && !fs::exists(target.parent_path()))
        throw fpg::ValidationError("output.path", "directory does not exist: " + target.parent_path().string());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw fpg::ValidationError("output.path", "cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw fpg::ValidationError("output.path", "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw fpg::ValidationError("output.path", "cannot replace " + path + ": " + ec.message());
    }
}

// Tail rate over the window of points ending at row i.
double tail_rate(const std::vector<double>& orders, const std::vector<double>& errors, std::size_t i, int window) {
    const std::size_t count = i + 1;
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t w = window == 0 ? count : std::min<std::size_t>(count, static_cast<std::size_t>(window));
    if (w < 2) return std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> x(orders.begin() + (count - w), orders.begin() + count);
    const std::vector<double> e(errors.begin() + (count - w), errors.begin() + count);
    if (std::any_of(e.begin(), e.end(), [](double v) { return !(v > 0.0) || !std::isfinite(v); }))
        return std::numeric_limits<double>::quiet_NaN();
    return fpg::observed_rate(x, e, 0);
}

std::string run_sweep(const fpg::RunConfig& cfg) {
    const auto& sw = *cfg.sweep;
    fpg::SweepOptions opts;
    opts.quad_order = cfg.quad_order;
    opts.rate_window = cfg.rate_window;
    opts.energy = cfg.problem.d == 1;
    const auto rec = fpg::convergence_sweep(cfg.problem, *cfg.manufactured, sw.axis, sw.orders, sw.fixed_order, opts);
    if (!rec.failures.empty()) {
        std::ostringstream os;
        for (const auto& f : rec.failures) os << "sweep point order " << f.order << " failed: " << f.message << "\n";
        throw NumericalFailure(os.str());
    }
    const auto x = rec.orders_as_double();
    std::ostringstream csv, table;
    csv << "order,l2_error,energy_error,rate_l2_tail,rate_energy_tail,wall_time_ms\n";
    table << (sw.axis == fpg::SweepAxis::Temporal ? "  N" : "  M") << "  l2_error    energy_err  rate_l2  rate_en  ms\n";
    for (std::size_t i = 0; i < rec.orders_swept.size(); ++i) {
        const double rl = tail_rate(x, rec.l2_errors, i, cfg.rate_window);
        const double re = tail_rate(x, rec.energy_errors, i, cfg.rate_window);
        csv << rec.orders_swept[i] << ',' << sci(rec.l2_errors[i]) << ',' << sci(rec.energy_errors[i]) << ',' << sci(rl)
            << ',' << sci(re) << ',' << sci(rec.wall_time_ms[i]) << '\n';
        char line[160];
        std::snprintf(line, sizeof line, "%3d  %.3e   %.3e   %6.2f   %6.2f   %.1f\n", rec.orders_swept[i],
                      rec.l2_errors[i], rec.energy_errors[i], rl, re, rec.wall_time_ms[i]);
        table << line;
    }
    std::printf("%s", table.str().c_str());
    if (rec.rate_defined)
        std::printf("fitted rate (window %d): l2 %.2f, energy %.2f\n", cfg.rate_window, rec.observed_rate_l2,
                    rec.observed_rate_energy);
    else
        std::printf("fitted rate undefined (fewer than two points)\n");
    return csv.str();
}

std::string run_solve(const fpg::RunConfig& cfg) {
    fpg::Resolution res = cfg.resolution;
    if (cfg.quad_order) res.quad_order = cfg.quad_order;
    const auto start = std::chrono::steady_clock::now();
    const auto forcing = fpg::forcing_terms(*cfg.manufactured, cfg.problem);
    const auto sol = fpg::solve_problem(cfg.problem, res, forcing);
    const double l2 = fpg::l2_rel_error(sol, *cfg.manufactured, cfg.quad_order);
    const double en = cfg.problem.d == 1 ? fpg::energy_error(sol, *cfg.manufactured, cfg.quad_order)
                                         : std::numeric_limits<double>::quiet_NaN();
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::string m;
    for (std::size_t j = 0; j < res.m_space.size(); ++j) m += (j ? "x" : "") + std::to_string(res.m_space[j]);
    std::printf("N = %d, M = %s: l2 %.3e, energy %.3e, residual %.1e, %.1f ms\n", res.n_time, m.c_str(), l2, en,
                sol.residual, ms);
    std::ostringstream csv;
    csv << "n_time,m_space,l2_error,energy_error,residual,wall_time_ms\n"
        << res.n_time << ',' << m << ',' << sci(l2) << ',' << sci(en) << ',' << sci(sol.residual) << ',' << sci(ms)
        << '\n';
    return csv.str();
}

std::string run_verify(const fpg::RunConfig& cfg, bool& all_pass) {
    const auto report = fpg::verify_suite(cfg.seed, cfg.tolerance_scale);
    std::ostringstream csv;
    csv << "check,max_dev,tol,pass\n";
    for (const auto& c : report.checks) {
        std::printf("%-22s %-5s dev %s  tol %s%s%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    short_sci(c.max_dev).c_str(), short_sci(c.tol).c_str(), c.error.empty() ? "" : "  ",
                    c.error.c_str());
        csv << c.name << ',' << sci(c.max_dev) << ',' << sci(c.tol) << ',' << (c.pass ? 1 : 0) << '\n';
    }
    all_pass = report.all_pass();
    return csv.str();
}

std::string run_infsup(const fpg::RunConfig& cfg) {
    std::ostringstream csv;
    csv << "order,beta\n";
    std::printf("  N  beta\n");
    for (int n : cfg.infsup_orders) {
        fpg::Resolution res;
        res.n_time = n;
        res.m_space.assign(cfg.problem.d, n);
        res.quad_order = cfg.quad_order;
        const double beta = fpg::discrete_inf_sup(cfg.problem, res);
        std::printf("%3d  %.6f\n", n, beta);
        csv << n << ',' << sci(beta) << '\n';
    }
    return csv.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Petrov-Galerkin spectral solver for space-time fractional PDEs"};
    app.require_subcommand(1);
    std::string config_path, out_path;
    int quad_order = 0;
    long long seed = -1;
    std::vector<std::pair<fpg::RunMode, CLI::App*>> subs;
    for (auto mode : {fpg::RunMode::Solve, fpg::RunMode::Sweep, fpg::RunMode::Verify, fpg::RunMode::InfSup}) {
        static const char* help[] = {"single solve with error report", "convergence sweep to CSV",
                                     "built-in verification suite", "discrete inf-sup constants"};
        CLI::App* sub = app.add_subcommand(fpg::mode_name(mode), help[static_cast<int>(mode)]);
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--out", out_path, "CSV output path (overrides output.path)");
        sub->add_option("--quad-order", quad_order, "quadrature node count override")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "seed for randomized checks")->check(CLI::NonNegativeNumber);
        subs.emplace_back(mode, sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    fpg::RunMode mode = fpg::RunMode::Solve;
    for (const auto& [m, sub] : subs)
        if (sub->parsed()) mode = m;

    try {
        fpg::RunConfig cfg = fpg::load_config(config_path);
        if (cfg.mode && *cfg.mode != mode)
            throw fpg::ValidationError("mode", std::string("config is for '") + fpg::mode_name(*cfg.mode) +
                                                   "' but the command is '" + fpg::mode_name(mode) + "'");
        if (quad_order > 0) cfg.quad_order = quad_order;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (!out_path.empty()) cfg.output_path = out_path;
        cfg.validate(mode);

        std::string csv;
        bool verified = true;
        switch (mode) {
            case fpg::RunMode::Solve: csv = run_solve(cfg); break;
            case fpg::RunMode::Sweep: csv = run_sweep(cfg); break;
            case fpg::RunMode::Verify: csv = run_verify(cfg, verified); break;
            case fpg::RunMode::InfSup: csv = run_infsup(cfg); break;
        }
        if (!cfg.output_path.empty()) {
            write_atomic(cfg.output_path, csv);
            std::printf("wrote %s\n", cfg.output_path.c_str());
        }
        if (!verified) {
            std::fprintf(stderr, "verification failed\n");
            return exit_numerical;
        }
        return exit_ok;
    } catch (const fpg::ValidationError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return exit_invalid;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "%s", e.what());
        return exit_numerical;
    } catch (const fpg::Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numerical;
    }
}
