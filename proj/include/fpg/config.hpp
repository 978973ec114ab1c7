#pragma once

// Run configuration: flat `key = value` lines with dotted section keys.
// `#` starts a comment; lists are comma separated. Schema in the README.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fpg/analysis.hpp"
#include "fpg/errors.hpp"
#include "fpg/manufactured.hpp"
#include "fpg/problem.hpp"

namespace fpg {

enum class RunMode { Solve, Sweep, Verify, InfSup };

inline std::optional<RunMode> parse_mode(const std::string& s) {
    if (s == "solve") return RunMode::Solve;
    if (s == "sweep") return RunMode::Sweep;
    if (s == "verify") return RunMode::Verify;
    if (s == "infsup") return RunMode::InfSup;
    return std::nullopt;
}

inline const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::Solve: return "solve";
        case RunMode::Sweep: return "sweep";
        case RunMode::Verify: return "verify";
        case RunMode::InfSup: return "infsup";
    }
    return "?";
}

struct SweepConfig {
    SweepAxis axis = SweepAxis::Temporal;
    std::vector<int> orders;
    int fixed_order = 19;
};

struct RunConfig {
    std::optional<RunMode> mode;
    ProblemSpec problem;
    std::optional<ManufacturedCase> manufactured;
    std::optional<SweepConfig> sweep;
    Resolution resolution;             // solve mode
    std::vector<int> infsup_orders;    // infsup mode; N = M at each
    std::optional<int> quad_order;
    std::string output_path;
    std::uint64_t seed = 1;
    double tolerance_scale = 1.0;
    int rate_window = 3;

    /// Mode-specific required fields and cross-field constraints.
    void validate(RunMode m) const {
        if (m == RunMode::Verify) return;
        problem.validate();
        if (manufactured) manufactured->validate();
        if (quad_order && *quad_order < 1) throw ValidationError("resolution.quad_order", "must be positive");
        auto increasing = [](const std::vector<int>& v, const char* field) {
            if (v.empty()) throw ValidationError(field, "order list is empty");
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i] < 1) throw ValidationError(field, "orders must be positive");
                if (i > 0 && v[i] <= v[i - 1]) throw ValidationError(field, "orders must be strictly increasing");
            }
        };
        if (m == RunMode::Sweep) {
            if (!manufactured) throw ValidationError("case.kind", "sweep mode needs a manufactured case");
            if (!sweep) throw ValidationError("sweep.orders", "sweep mode needs a sweep section");
            increasing(sweep->orders, "sweep.orders");
            if (sweep->fixed_order < 1) throw ValidationError("sweep.fixed_order", "must be positive");
            if (rate_window < 0) throw ValidationError("sweep.rate_window", "must be nonnegative");
        }
        if (m == RunMode::Solve) {
            if (!manufactured) throw ValidationError("case.kind", "solve mode needs a manufactured case");
            resolution.validate(problem);
        }
        if (m == RunMode::InfSup) increasing(infsup_orders, "infsup.orders");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

inline double parse_double(const std::string& field, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ValidationError(field, "expected a finite number, got '" + text + "'");
    return v;
}

inline long long parse_integer(const std::string& field, const std::string& text) {
    long long v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ValidationError(field, "expected an integer, got '" + text + "'");
    return v;
}

inline std::vector<double> parse_doubles(const std::string& field, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(field, item));
    return out;
}

inline std::vector<int> parse_ints(const std::string& field, const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split(text, ',')) {
        const long long v = parse_integer(field, item);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw ValidationError(field, "integer out of range");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// Broadcast a single value to d entries.
inline std::vector<double> per_dimension(const std::string& field, const std::vector<double>& v, int d) {
    if (static_cast<int>(v.size()) == d) return v;
    if (v.size() == 1) return std::vector<double>(d, v[0]);
    throw ValidationError(field, "expected 1 or " + std::to_string(d) + " values");
}

}  // namespace detail

/// Parses configuration text. Unknown keys are rejected with their path.
inline RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(lineno), "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ValidationError("line " + std::to_string(lineno), "empty key");
        if (value.empty()) throw ValidationError(key, "empty value");
        if (!kv.emplace(key, value).second) throw ValidationError(key, "key given twice");
    }

    static const std::set<std::string> known = {
        "mode",          "seed",           "output.path",       "problem.d",         "problem.T",
        "problem.tau",   "problem.mu",     "problem.nu",        "problem.c_left",    "problem.c_right",
        "problem.kappa_left", "problem.kappa_right", "problem.gamma", "problem.a",     "problem.b",
        "case.kind",     "case.p1",        "case.p2",           "case.p3",           "case.n_freq",
        "sweep.axis",    "sweep.orders",   "sweep.fixed_order", "sweep.rate_window", "resolution.n_time",
        "resolution.m_space", "resolution.quad_order", "infsup.orders", "verify.tolerance_scale"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) throw ValidationError(k, "unknown key");

    auto get = [&kv](const std::string& k) -> std::optional<std::string> {
        if (auto it = kv.find(k); it != kv.end()) return it->second;
        return std::nullopt;
    };

    RunConfig cfg;
    if (auto m = get("mode")) {
        cfg.mode = parse_mode(*m);
        if (!cfg.mode) throw ValidationError("mode", "expected solve, sweep, verify or infsup");
    }
    if (auto s = get("seed")) {
        const long long v = detail::parse_integer("seed", *s);
        if (v < 0) throw ValidationError("seed", "must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(v);
    }
    if (auto p = get("output.path")) cfg.output_path = *p;

    ProblemSpec& p = cfg.problem;
    if (auto v = get("problem.d")) p.d = static_cast<int>(detail::parse_integer("problem.d", *v));
    if (p.d < 1 || p.d > 3) throw ValidationError("problem.d", "supported dimensions are 1 to 3");
    const int d = p.d;
    auto doubles = [&](const std::string& key, double fallback) {
        if (auto v = get(key)) return detail::per_dimension(key, detail::parse_doubles(key, *v), d);
        return std::vector<double>(d, fallback);
    };
    if (auto v = get("problem.T")) p.T = detail::parse_double("problem.T", *v);
    if (auto v = get("problem.tau")) p.tau = detail::parse_double("problem.tau", *v);
    p.mu = doubles("problem.mu", 0.25);
    p.nu = doubles("problem.nu", 0.75);
    p.c_left = doubles("problem.c_left", 0.0);
    p.c_right = doubles("problem.c_right", 0.0);
    p.kappa_left = doubles("problem.kappa_left", 0.0);
    p.kappa_right = doubles("problem.kappa_right", 0.0);
    if (auto v = get("problem.gamma")) p.gamma_coeff = detail::parse_double("problem.gamma", *v);
    const auto a = doubles("problem.a", -1.0);
    const auto b = doubles("problem.b", 1.0);
    p.intervals.clear();
    for (int j = 0; j < d; ++j) p.intervals.push_back({a[j], b[j]});

    if (auto k = get("case.kind")) {
        ManufacturedCase c;
        if (*k == "I")
            c.kind = CaseKind::CaseI;
        else if (*k == "II")
            c.kind = CaseKind::CaseII;
        else
            throw ValidationError("case.kind", "expected I or II");
        if (auto v = get("case.p1")) c.p1 = detail::parse_double("case.p1", *v);
        if (auto v = get("case.p2")) c.p2 = detail::parse_double("case.p2", *v);
        if (auto v = get("case.p3")) c.p3 = detail::parse_double("case.p3", *v);
        if (auto v = get("case.n_freq")) c.n_freq = static_cast<int>(detail::parse_integer("case.n_freq", *v));
        cfg.manufactured = c;
    } else {
        for (const char* key : {"case.p1", "case.p2", "case.p3", "case.n_freq"})
            if (get(key)) throw ValidationError(key, "given without case.kind");
    }

    if (auto ax = get("sweep.axis")) {
        SweepConfig s;
        if (*ax == "temporal")
            s.axis = SweepAxis::Temporal;
        else if (*ax == "spatial")
            s.axis = SweepAxis::Spatial;
        else
            throw ValidationError("sweep.axis", "expected temporal or spatial");
        if (auto v = get("sweep.orders")) s.orders = detail::parse_ints("sweep.orders", *v);
        if (auto v = get("sweep.fixed_order"))
            s.fixed_order = static_cast<int>(detail::parse_integer("sweep.fixed_order", *v));
        cfg.sweep = s;
    } else if (get("sweep.orders") || get("sweep.fixed_order")) {
        throw ValidationError("sweep.axis", "sweep keys given without an axis");
    }
    if (auto v = get("sweep.rate_window"))
        cfg.rate_window = static_cast<int>(detail::parse_integer("sweep.rate_window", *v));

    if (auto v = get("resolution.n_time"))
        cfg.resolution.n_time = static_cast<int>(detail::parse_integer("resolution.n_time", *v));
    if (auto v = get("resolution.m_space")) {
        const auto ms = detail::parse_ints("resolution.m_space", *v);
        cfg.resolution.m_space = ms.size() == 1 ? std::vector<int>(d, ms[0]) : ms;
    } else {
        cfg.resolution.m_space.assign(d, 1);
    }
    if (auto v = get("resolution.quad_order"))
        cfg.quad_order = static_cast<int>(detail::parse_integer("resolution.quad_order", *v));
    if (auto v = get("infsup.orders")) cfg.infsup_orders = detail::parse_ints("infsup.orders", *v);
    if (auto v = get("verify.tolerance_scale")) {
        cfg.tolerance_scale = detail::parse_double("verify.tolerance_scale", *v);
        if (!(cfg.tolerance_scale > 0.0)) throw ValidationError("verify.tolerance_scale", "must be positive");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config", "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

}  // namespace fpg
