#ifndef BSHEAT_CONFIG_HPP
#define BSHEAT_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bsheat/errors.hpp"
#include "bsheat/grid.hpp"
#include "bsheat/nonlinearity.hpp"
#include "bsheat/oracle.hpp"
#include "bsheat/picard.hpp"
#include "bsheat/transform.hpp"

// JSON run configuration. The schema is strict: unknown keys anywhere are
// rejected, and parsing collects every violation it can find rather than
// stopping at the first, so one round trip fixes a config.

namespace bsheat {

enum class Task { Solve, ContractionScan, LipschitzCheck, OracleCompare, KernelSelftest };

inline const char* task_name(Task t) {
    switch (t) {
        case Task::Solve: return "solve";
        case Task::ContractionScan: return "contraction_scan";
        case Task::LipschitzCheck: return "lipschitz_check";
        case Task::OracleCompare: return "oracle_compare";
        case Task::KernelSelftest: return "kernel_selftest";
    }
    return "?";
}

struct RunConfig {
    HeatProblem problem;
    std::optional<ModelSpec> model;
    std::optional<Payoff> payoff;
    Grid grid;
    PicardConfig picard;
    FDConfig fd;
    std::vector<Task> tasks = {Task::Solve};
    int trials = 50;
    int pairs = 20;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    std::string canonical_json;
    std::string config_hash;
};

inline std::string fnv1a64_hex(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace cfgdetail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed,
                       std::vector<std::string>& errs) {
    if (!j.is_object()) {
        errs.push_back(where + ": expected an object");
        return;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) errs.push_back(where + ": unknown key \"" + it.key() + "\"");
    }
}

inline std::optional<double> get_num(const json& j, const std::string& where,
                                     const char* key, std::vector<std::string>& errs) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_number()) {
        errs.push_back(where + "." + key + ": expected a number");
        return std::nullopt;
    }
    return v.get<double>();
}

inline std::optional<int> get_int(const json& j, const std::string& where, const char* key,
                                  std::vector<std::string>& errs) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
        errs.push_back(where + "." + key + ": expected an integer");
        return std::nullopt;
    }
    return v.get<int>();
}

inline std::optional<std::string> get_str(const json& j, const std::string& where,
                                          const char* key, std::vector<std::string>& errs) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_string()) {
        errs.push_back(where + "." + key + ": expected a string");
        return std::nullopt;
    }
    return v.get<std::string>();
}

inline std::optional<std::vector<std::pair<double, double>>> get_pairs(
    const json& j, const std::string& where, const char* key,
    std::vector<std::string>& errs) {
    if (!j.is_object() || !j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (!v.is_array()) {
        errs.push_back(where + "." + key + ": expected an array of [x, y] pairs");
        return std::nullopt;
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& e : v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            errs.push_back(where + "." + key + ": entries must be [number, number]");
            return std::nullopt;
        }
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

inline std::optional<Nonlinearity> parse_nonlinearity(const json& j, const std::string& where,
                                                      std::vector<std::string>& errs,
                                                      bool& radius_requested) {
    check_keys(j, where, {"kind", "slope", "amplitude", "exponent", "radius", "points"}, errs);
    const auto kind = get_str(j, where, "kind", errs);
    if (!kind) {
        errs.push_back(where + ": missing \"kind\"");
        return std::nullopt;
    }
    try {
        if (*kind == "zero") return Nonlinearity::zero();
        if (*kind == "linear") {
            const auto s = get_num(j, where, "slope", errs);
            if (!s) {
                errs.push_back(where + ": linear kind needs \"slope\"");
                return std::nullopt;
            }
            return Nonlinearity::linear(*s);
        }
        if (*kind == "satsin") {
            const auto a = get_num(j, where, "amplitude", errs);
            if (!a) {
                errs.push_back(where + ": satsin kind needs \"amplitude\"");
                return std::nullopt;
            }
            return Nonlinearity::sat_sin(*a);
        }
        if (*kind == "clamped_power") {
            const auto q = get_num(j, where, "exponent", errs);
            if (!q) {
                errs.push_back(where + ": clamped_power kind needs \"exponent\"");
                return std::nullopt;
            }
            const auto r = get_num(j, where, "radius", errs);
            radius_requested = r.has_value() && *r > 0.0;
            // Radius is finalized against the data scale after the grid is
            // known; 1.0 is a placeholder with the right exponent.
            return Nonlinearity::clamped_power(*q, radius_requested ? *r : 1.0);
        }
        if (*kind == "table") {
            const auto pts = get_pairs(j, where, "points", errs);
            if (!pts) {
                errs.push_back(where + ": table kind needs \"points\"");
                return std::nullopt;
            }
            return Nonlinearity::table(*pts);
        }
        errs.push_back(where + ": unknown kind \"" + *kind +
                       "\" (known: zero, linear, satsin, clamped_power, table)");
    } catch (const DomainError& e) {
        errs.push_back(where + ": " + e.what());
    }
    return std::nullopt;
}

} // namespace cfgdetail

inline RunConfig parse_config(const nlohmann::json& j) {
    using cfgdetail::check_keys;
    using cfgdetail::get_int;
    using cfgdetail::get_num;
    using cfgdetail::get_pairs;
    using cfgdetail::get_str;
    using nlohmann::json;

    std::vector<std::string> errs;
    RunConfig rc;

    check_keys(j, "config",
               {"problem", "grid", "picard", "fd", "tasks", "trials", "pairs", "seed",
                "output_dir"},
               errs);

    // ---- grid ----------------------------------------------------------
    std::optional<double> horizon;
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "grid", {"x_min", "x_max", "n_x", "t_horizon", "n_t", "tail_epsilon"},
                   errs);
        if (auto v = get_num(g, "grid", "x_min", errs)) rc.grid.x_min = *v;
        if (auto v = get_num(g, "grid", "x_max", errs)) rc.grid.x_max = *v;
        if (auto v = get_int(g, "grid", "n_x", errs)) rc.grid.n_x = *v;
        if (auto v = get_num(g, "grid", "t_horizon", errs)) horizon = *v;
        if (auto v = get_int(g, "grid", "n_t", errs)) rc.grid.n_t = *v;
        if (auto v = get_num(g, "grid", "tail_epsilon", errs)) rc.grid.tail_epsilon = *v;
    } else {
        errs.push_back("config: missing \"grid\"");
    }

    // ---- problem -------------------------------------------------------
    Nonlinearity nl = Nonlinearity::zero();
    bool radius_requested = true;
    double p = 2.0;
    if (!j.contains("problem")) {
        errs.push_back("config: missing \"problem\"");
    } else {
        const auto& pj = j.at("problem");
        check_keys(pj, "problem", {"type", "p", "model", "payoff", "heat", "nonlinearity"},
                   errs);
        if (auto v = get_num(pj, "problem", "p", errs)) p = *v;
        if (!(p >= 1.0)) errs.push_back("problem.p: p must be >= 1");

        if (pj.contains("nonlinearity")) {
            if (auto n = cfgdetail::parse_nonlinearity(pj.at("nonlinearity"),
                                                       "problem.nonlinearity", errs,
                                                       radius_requested))
                nl = *n;
        }

        const auto type = get_str(pj, "problem", "type", errs);
        if (!type) {
            errs.push_back("problem: missing \"type\" (\"heat\" or \"model\")");
        } else if (*type == "model") {
            if (!pj.contains("model")) {
                errs.push_back("problem: type \"model\" needs a \"model\" object");
            } else {
                const auto& mj = pj.at("model");
                check_keys(mj, "problem.model", {"A", "B", "C", "D", "form", "maturity"},
                           errs);
                ModelSpec m;
                if (auto v = get_num(mj, "problem.model", "A", errs)) m.A = *v;
                else errs.push_back("problem.model: missing \"A\"");
                if (auto v = get_num(mj, "problem.model", "B", errs)) m.B = *v;
                if (auto v = get_num(mj, "problem.model", "C", errs)) m.C = *v;
                if (auto v = get_num(mj, "problem.model", "D", errs)) m.D = *v;
                if (auto v = get_num(mj, "problem.model", "maturity", errs)) m.maturity = *v;
                else errs.push_back("problem.model: missing \"maturity\"");
                if (auto v = get_str(mj, "problem.model", "form", errs)) {
                    if (*v == "source") m.form = ModelSpec::Form::Source;
                    else if (*v == "flux") m.form = ModelSpec::Form::Flux;
                    else errs.push_back("problem.model.form: must be \"source\" or \"flux\"");
                }
                rc.model = m;
            }
            if (!pj.contains("payoff")) {
                errs.push_back("problem: type \"model\" needs a \"payoff\" object");
            } else {
                const auto& yj = pj.at("payoff");
                check_keys(yj, "problem.payoff", {"kind", "strike", "strike2", "table"}, errs);
                const auto kind = get_str(yj, "problem.payoff", "kind", errs);
                try {
                    if (!kind) errs.push_back("problem.payoff: missing \"kind\"");
                    else if (*kind == "call" || *kind == "put") {
                        const auto k = get_num(yj, "problem.payoff", "strike", errs);
                        if (!k) errs.push_back("problem.payoff: missing \"strike\"");
                        else rc.payoff = (*kind == "call") ? Payoff::call(*k) : Payoff::put(*k);
                    } else if (*kind == "call_spread") {
                        const auto k1 = get_num(yj, "problem.payoff", "strike", errs);
                        const auto k2 = get_num(yj, "problem.payoff", "strike2", errs);
                        if (!k1 || !k2)
                            errs.push_back("problem.payoff: call_spread needs strike and strike2");
                        else rc.payoff = Payoff::call_spread(*k1, *k2);
                    } else if (*kind == "table") {
                        const auto pts = get_pairs(yj, "problem.payoff", "table", errs);
                        if (!pts) errs.push_back("problem.payoff: table kind needs \"table\"");
                        else rc.payoff = Payoff::table(*pts);
                    } else {
                        errs.push_back("problem.payoff.kind: unknown kind \"" + *kind + "\"");
                    }
                } catch (const DomainError& e) {
                    errs.push_back(std::string("problem.payoff: ") + e.what());
                }
            }
            if (rc.model && rc.payoff) {
                try {
                    rc.problem = reduce_to_heat(*rc.model, *rc.payoff, nl, p);
                    if (!horizon) horizon = rc.problem.reduction.heat_horizon;
                } catch (const DomainError& e) {
                    errs.push_back(std::string("problem.model: ") + e.what());
                }
            }
        } else if (*type == "heat") {
            if (!pj.contains("heat")) {
                errs.push_back("problem: type \"heat\" needs a \"heat\" object");
            } else {
                const auto& hj = pj.at("heat");
                check_keys(hj, "problem.heat",
                           {"drift", "reaction", "nl_coeff", "placement", "initial"}, errs);
                rc.problem.drift = get_num(hj, "problem.heat", "drift", errs).value_or(0.0);
                rc.problem.reaction =
                    get_num(hj, "problem.heat", "reaction", errs).value_or(0.0);
                rc.problem.nl_coeff =
                    get_num(hj, "problem.heat", "nl_coeff", errs).value_or(0.0);
                if (auto v = get_str(hj, "problem.heat", "placement", errs)) {
                    if (*v == "source") rc.problem.placement = HeatProblem::Placement::Source;
                    else if (*v == "flux") rc.problem.placement = HeatProblem::Placement::Flux;
                    else
                        errs.push_back(
                            "problem.heat.placement: must be \"source\" or \"flux\"");
                }
                if (!hj.contains("initial")) {
                    errs.push_back("problem.heat: missing \"initial\"");
                } else {
                    const auto& ij = hj.at("initial");
                    check_keys(ij, "problem.heat.initial",
                               {"kind", "center", "sigma", "amplitude", "points"}, errs);
                    const auto kind = get_str(ij, "problem.heat.initial", "kind", errs);
                    if (!kind) {
                        errs.push_back("problem.heat.initial: missing \"kind\"");
                    } else if (*kind == "zero") {
                        rc.problem.data = [](double) { return 0.0; };
                    } else if (*kind == "gaussian") {
                        const double c =
                            get_num(ij, "problem.heat.initial", "center", errs).value_or(0.0);
                        const double s =
                            get_num(ij, "problem.heat.initial", "sigma", errs).value_or(1.0);
                        const double a =
                            get_num(ij, "problem.heat.initial", "amplitude", errs).value_or(1.0);
                        if (!(s > 0.0)) {
                            errs.push_back("problem.heat.initial.sigma: must be > 0");
                        } else {
                            rc.problem.data = [c, s, a](double x) {
                                const double z = (x - c) / s;
                                return a * std::exp(-0.5 * z * z);
                            };
                        }
                    } else if (*kind == "table") {
                        const auto pts = get_pairs(ij, "problem.heat.initial", "points", errs);
                        if (!pts || pts->size() < 2) {
                            errs.push_back("problem.heat.initial: table kind needs >= 2 points");
                        } else {
                            bool increasing = true;
                            for (std::size_t i = 1; i < pts->size(); ++i)
                                if (!((*pts)[i].first > (*pts)[i - 1].first)) increasing = false;
                            if (!increasing) {
                                errs.push_back(
                                    "problem.heat.initial.points: x values must be strictly "
                                    "increasing");
                            } else {
                                auto table = *pts;
                                rc.problem.data = [table](double x) {
                                    if (x <= table.front().first || x >= table.back().first)
                                        return 0.0;
                                    std::size_t i = 1;
                                    while (table[i].first < x) ++i;
                                    const double t = (x - table[i - 1].first) /
                                                     (table[i].first - table[i - 1].first);
                                    return table[i - 1].second +
                                           t * (table[i].second - table[i - 1].second);
                                };
                            }
                        }
                    } else {
                        errs.push_back("problem.heat.initial.kind: unknown kind \"" + *kind +
                                       "\"");
                    }
                }
                rc.problem.nl = nl;
                rc.problem.p = p;
            }
        } else {
            errs.push_back("problem.type: must be \"heat\" or \"model\"");
        }
    }
    if (horizon) rc.grid.t_horizon = *horizon;

    // ---- picard / fd ----------------------------------------------------
    if (j.contains("picard")) {
        const auto& pj = j.at("picard");
        check_keys(pj, "picard", {"tol", "max_iter", "safety", "c_env"}, errs);
        if (auto v = get_num(pj, "picard", "tol", errs)) rc.picard.tol = *v;
        if (auto v = get_int(pj, "picard", "max_iter", errs)) rc.picard.max_iter = *v;
        if (auto v = get_num(pj, "picard", "safety", errs)) rc.picard.safety = *v;
        if (auto v = get_num(pj, "picard", "c_env", errs)) rc.picard.c_env = *v;
    }
    if (j.contains("fd")) {
        const auto& fj = j.at("fd");
        check_keys(fj, "fd", {"theta", "inner_tol", "max_inner"}, errs);
        if (auto v = get_num(fj, "fd", "theta", errs)) rc.fd.theta = *v;
        if (auto v = get_num(fj, "fd", "inner_tol", errs)) rc.fd.inner_tol = *v;
        if (auto v = get_int(fj, "fd", "max_inner", errs)) rc.fd.max_inner = *v;
    }

    // ---- tasks and scalars ----------------------------------------------
    if (j.contains("tasks")) {
        if (!j.at("tasks").is_array()) {
            errs.push_back("tasks: expected an array of task names");
        } else {
            rc.tasks.clear();
            for (const auto& t : j.at("tasks")) {
                if (!t.is_string()) {
                    errs.push_back("tasks: entries must be strings");
                    continue;
                }
                const std::string s = t.get<std::string>();
                if (s == "solve") rc.tasks.push_back(Task::Solve);
                else if (s == "contraction_scan") rc.tasks.push_back(Task::ContractionScan);
                else if (s == "lipschitz_check") rc.tasks.push_back(Task::LipschitzCheck);
                else if (s == "oracle_compare") rc.tasks.push_back(Task::OracleCompare);
                else if (s == "kernel_selftest") rc.tasks.push_back(Task::KernelSelftest);
                else
                    errs.push_back("tasks: unknown task \"" + s +
                                   "\" (known: solve, contraction_scan, lipschitz_check, "
                                   "oracle_compare, kernel_selftest)");
            }
            if (rc.tasks.empty()) errs.push_back("tasks: at least one task required");
        }
    }
    if (auto v = get_int(j, "config", "trials", errs)) rc.trials = *v;
    if (auto v = get_int(j, "config", "pairs", errs)) rc.pairs = *v;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            errs.push_back("seed: expected a non-negative integer");
        else
            rc.seed = j.at("seed").get<std::uint64_t>();
    }
    if (auto v = get_str(j, "config", "output_dir", errs)) rc.output_dir = *v;
    rc.picard.seed = rc.seed;
    if (rc.trials < 1) errs.push_back("trials: must be >= 1");
    if (rc.pairs < 1) errs.push_back("pairs: must be >= 1");

    // ---- cross-checks that need assembled objects -------------------------
    if (errs.empty()) {
        try {
            rc.grid.validate();
        } catch (const DomainError& e) {
            errs.push_back(std::string("grid: ") + e.what());
        }
        try {
            rc.picard.validate();
            rc.fd.validate();
        } catch (const DomainError& e) {
            errs.push_back(e.what());
        }
        // Clamp radius defaults to four times the data sup on the grid.
        if (errs.empty() && !radius_requested &&
            rc.problem.nl.kind() == Nonlinearity::Kind::ClampedPower && rc.problem.data) {
            double peak = 0.0;
            for (int jx = 0; jx < rc.grid.n_x; ++jx)
                peak = std::max(peak, std::abs(rc.problem.data(rc.grid.x(jx)) *
                                               edge_taper(rc.grid.x(jx), rc.grid)));
            const double q = rc.problem.nl.certified_lipschitz(); // placeholder R=1: L = q
            rc.problem.nl = Nonlinearity::clamped_power(q, peak > 0.0 ? 4.0 * peak : 1.0);
        }
        if (errs.empty()) {
            try {
                rc.problem.validate();
            } catch (const DomainError& e) {
                errs.push_back(std::string("problem: ") + e.what());
            }
        }
        // Data must be representable on the window (payoff tables that stop
        // short of the grid edges are truncation errors, caught here).
        if (errs.empty()) {
            try {
                sample_damped_data(rc.problem, rc.grid);
            } catch (const DomainError& e) {
                errs.push_back(std::string("problem data on grid: ") + e.what());
            }
        }
    }

    if (!errs.empty()) throw ConfigError(errs);

    rc.canonical_json = j.dump();
    rc.config_hash = fnv1a64_hex(rc.canonical_json);
    return rc;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    return parse_config(j);
}

} // namespace bsheat

#endif
