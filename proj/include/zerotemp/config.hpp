#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "hierarchy.hpp"

namespace zerotemp {

// Defaults reproduce configs/acceptance.conf.
struct SweepConfig {
    HierarchyParams hierarchy = acceptance_hierarchy();
    int memory = 0;  // 0 selects min(ell_1 + 2, memory_cap)
    int memory_cap = 1024;
    std::vector<double> betas;
    double beta_min = 1.0;
    double beta_max = 1e20;
    int beta_count = 48;
    bool include_coupled = true;
    double coupling = 3.0;
    double low = 0.45;
    double high = 0.55;
    std::string output;
    std::size_t budget_states = 2'000'000;
    std::uint64_t budget_oracle_symbols = 50'000'000;
    int jobs = 1;

    static HierarchyParams acceptance_hierarchy() {
        HierarchyParams p;
        p.N = {4, 3};
        p.r = {2, 2};
        return p;
    }

    void validate() const {
        hierarchy.validate();
        if (memory < 0 || memory_cap < 1) fail(ErrorKind::InvalidInput, "memory must be positive");
        if (beta_count < 0) fail(ErrorKind::InvalidInput, "beta_count must be nonnegative");
        if (beta_count > 0 && !(0 < beta_min && beta_min < beta_max))
            fail(ErrorKind::InvalidInput, "log-spaced grid needs 0 < beta_min < beta_max");
        for (std::size_t i = 0; i < betas.size(); ++i) {
            if (!(betas[i] >= 0)) fail(ErrorKind::InvalidInput, "betas must be nonnegative");
            if (i > 0 && !(betas[i] > betas[i - 1])) fail(ErrorKind::InvalidInput, "betas must be strictly increasing");
        }
        if (!(0 < low && low < high && high < 1)) fail(ErrorKind::InvalidInput, "thresholds need 0 < low < high < 1");
        if (!(coupling > 0)) fail(ErrorKind::InvalidInput, "coupling must be positive");
        if (budget_states == 0 || budget_oracle_symbols == 0) fail(ErrorKind::InvalidInput, "budgets must be positive");
        if (jobs < 1) fail(ErrorKind::InvalidInput, "jobs must be at least 1");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::InvalidInput, "key '" + key + "' expects a number, got '" + v + "'");
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::InvalidInput, "key '" + key + "' expects an integer, got '" + v + "'");
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(ErrorKind::InvalidInput, "key '" + key + "' expects true or false, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F&& item) {
    std::vector<T> out;
    std::stringstream ss(v);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(item(trim(cell)));
    return out;
}

}  // namespace detail

// Line-based "key = value" text; '#' starts a comment. Unknown keys are errors.
inline SweepConfig parse_config(const std::string& text) {
    SweepConfig cfg;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    bool depth_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto val = detail::trim(line.substr(eq + 1));
        auto ints = [&] { return detail::to_list<std::int64_t>(val, [&](const std::string& s) { return detail::to_int(key, s); }); };
        auto& h = cfg.hierarchy;
        if (key == "variant") {
            if (val == "main")
                h.variant = Variant::Main;
            else if (val == "modified")
                h.variant = Variant::Modified;
            else
                fail(ErrorKind::InvalidInput, "variant must be main or modified");
        } else if (key == "depth") {
            h.depth = static_cast<int>(detail::to_int(key, val));
            depth_set = true;
        } else if (key == "N") {
            h.N = ints();
        } else if (key == "r") {
            h.r.clear();
            for (auto x : ints()) h.r.push_back(static_cast<int>(x));
        } else if (key == "long_exp") {
            h.long_exp = ints();
        } else if (key == "short_exp") {
            h.short_exp = ints();
        } else if (key == "budget_symbols") {
            h.budget_symbols = static_cast<std::uint64_t>(detail::to_int(key, val));
        } else if (key == "memory") {
            cfg.memory = static_cast<int>(detail::to_int(key, val));
        } else if (key == "memory_cap") {
            cfg.memory_cap = static_cast<int>(detail::to_int(key, val));
        } else if (key == "betas") {
            cfg.betas = detail::to_list<double>(val, [&](const std::string& s) { return detail::to_double(key, s); });
        } else if (key == "beta_min") {
            cfg.beta_min = detail::to_double(key, val);
        } else if (key == "beta_max") {
            cfg.beta_max = detail::to_double(key, val);
        } else if (key == "beta_count") {
            cfg.beta_count = static_cast<int>(detail::to_int(key, val));
        } else if (key == "coupled") {
            cfg.include_coupled = detail::to_bool(key, val);
        } else if (key == "coupling") {
            cfg.coupling = detail::to_double(key, val);
        } else if (key == "low") {
            cfg.low = detail::to_double(key, val);
        } else if (key == "high") {
            cfg.high = detail::to_double(key, val);
        } else if (key == "output") {
            cfg.output = val;
        } else if (key == "budget_states") {
            cfg.budget_states = static_cast<std::size_t>(detail::to_int(key, val));
        } else if (key == "budget_oracle_symbols") {
            cfg.budget_oracle_symbols = static_cast<std::uint64_t>(detail::to_int(key, val));
        } else if (key == "jobs") {
            cfg.jobs = static_cast<int>(detail::to_int(key, val));
        } else {
            fail(ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (!depth_set) cfg.hierarchy.depth = static_cast<int>(cfg.hierarchy.N.size());
    cfg.validate();
    return cfg;
}

inline SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace zerotemp
