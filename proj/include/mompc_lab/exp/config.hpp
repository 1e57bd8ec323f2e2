#pragma once

// Experiment configuration: a JSON file with a strict schema.  Unknown keys
// are errors so a typo cannot silently fall back to a default.  Every kind
// has full-size defaults matching the headline studies and reduced defaults
// for CI; an explicit config value always wins over either.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/exp/io.hpp"
#include "mompc_lab/nlp/problem.hpp"
#include "mompc_lab/scalarize/scalarize.hpp"

namespace mompc_lab::exp {

enum class Kind { dm_eval, mompc_run, ws_sweep, terminal_check, pareto_sample };

inline Kind kind_from_string(const std::string& s) {
    if (s == "dm-eval") return Kind::dm_eval;
    if (s == "mompc-run") return Kind::mompc_run;
    if (s == "ws-sweep") return Kind::ws_sweep;
    if (s == "terminal-check") return Kind::terminal_check;
    if (s == "pareto-sample") return Kind::pareto_sample;
    throw InvalidInput("unknown experiment kind: " + s);
}

inline const char* to_string(Kind k) {
    switch (k) {
        case Kind::dm_eval: return "dm-eval";
        case Kind::mompc_run: return "mompc-run";
        case Kind::ws_sweep: return "ws-sweep";
        case Kind::terminal_check: return "terminal-check";
        case Kind::pareto_sample: return "pareto-sample";
    }
    return "?";
}

enum class Example { ellipsoid_1, nonconvex_sub, room_climate };

inline Example example_from_string(const std::string& s) {
    if (s == "ellipsoid-1") return Example::ellipsoid_1;
    if (s == "nonconvex-sub") return Example::nonconvex_sub;
    if (s == "room-climate") return Example::room_climate;
    throw InvalidInput("unknown example: " + s);
}

inline const char* to_string(Example e) {
    switch (e) {
        case Example::ellipsoid_1: return "ellipsoid-1";
        case Example::nonconvex_sub: return "nonconvex-sub";
        case Example::room_climate: return "room-climate";
    }
    return "?";
}

struct ExperimentConfig {
    Kind kind = Kind::dm_eval;
    Example example = Example::ellipsoid_1;
    std::string out_dir = "results";
    unsigned seed = 0;
    bool reduced = false;
    nlp::SolverConfig solver;

    // dm-eval and pareto-sample
    std::vector<std::string> methods;  // empty = kind-specific default set
    int front_samples = 0;             // 0 = size default (full/reduced)
    int pref_grid = 0;                 // simplex grid subdivisions, 0 = default
    double delta = 0.0;                // IM basis regularization for dm-eval

    // mompc-run and ws-sweep
    std::vector<std::string> cases;  // e.g. "a1"; empty = all eight / sweep default
    int horizon = 120;
    int k_max = 2000;
    double stop_threshold = 1e-2;
    double run_delta = 1e-3;    // IM regularization inside the closed loop
    bool chim_diagnostic = false;  // log first-iteration payoff normals (delta = 0)

    // ws-sweep
    int weight_grid = 0;       // subdivisions, 0 = default (73 full, 16 reduced)
    double cube_edge = 5e-3;   // normalized-space averaging cube

    // terminal-check
    int density_factor = 1;    // multiplies the sampled direction count
    int tau_grid = 0;          // pareto-sample room ray grid, 0 = default

    std::string config_text;   // verbatim file contents, hashed into metadata

    int dm_front_default() const { return reduced ? 800 : 3500; }
    int dm_grid_default() const { return reduced ? 39 : 82; }
    int sweep_grid_default() const { return reduced ? 16 : 73; }
    int tau_grid_default() const { return reduced ? 8 : 20; }
};

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw InvalidInput("config: unknown key '" + key + "' in " + where);
}

inline void parse_solver(const json& j, nlp::SolverConfig& cfg) {
    check_keys(j,
               {"tol_kkt", "tol_feas", "max_outer", "max_inner", "fd_step",
                "penalty_init", "penalty_growth", "penalty_max", "lbfgs_memory",
                "multistart"},
               "solver");
    if (j.contains("tol_kkt")) cfg.tol_kkt = j["tol_kkt"].get<double>();
    if (j.contains("tol_feas")) cfg.tol_feas = j["tol_feas"].get<double>();
    if (j.contains("max_outer")) cfg.max_outer = j["max_outer"].get<int>();
    if (j.contains("max_inner")) cfg.max_inner = j["max_inner"].get<int>();
    if (j.contains("fd_step")) cfg.fd_step = j["fd_step"].get<double>();
    if (j.contains("penalty_init")) cfg.penalty_init = j["penalty_init"].get<double>();
    if (j.contains("penalty_growth"))
        cfg.penalty_growth = j["penalty_growth"].get<double>();
    if (j.contains("penalty_max")) cfg.penalty_max = j["penalty_max"].get<double>();
    if (j.contains("lbfgs_memory")) cfg.lbfgs_memory = j["lbfgs_memory"].get<int>();
    if (j.contains("multistart")) cfg.multistart = j["multistart"].get<int>();
}

}  // namespace detail

// Parses and validates a config document.  kind must match the CLI verb; the
// reduced flag and seed may be overridden by the caller afterwards.
inline ExperimentConfig parse_config(const std::string& text, Kind cli_kind) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidInput("config: top level must be an object");

    detail::check_keys(
        j,
        {"kind", "example", "out_dir", "seed", "reduced", "solver", "methods",
         "front_samples", "pref_grid", "delta", "cases", "horizon", "k_max",
         "stop_threshold", "run_delta", "chim_diagnostic", "weight_grid",
         "cube_edge", "density_factor", "tau_grid"},
        "top level");

    ExperimentConfig cfg;
    cfg.config_text = text;
    if (j.contains("kind")) cfg.kind = kind_from_string(j["kind"].get<std::string>());
    else cfg.kind = cli_kind;
    if (cfg.kind != cli_kind)
        throw InvalidInput(std::string("config: kind '") + to_string(cfg.kind) +
                           "' does not match the command '" + to_string(cli_kind) + "'");
    if (j.contains("example"))
        cfg.example = example_from_string(j["example"].get<std::string>());
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
    if (j.contains("reduced")) cfg.reduced = j["reduced"].get<bool>();
    if (j.contains("solver")) detail::parse_solver(j["solver"], cfg.solver);
    if (j.contains("methods"))
        cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("front_samples")) cfg.front_samples = j["front_samples"].get<int>();
    if (j.contains("pref_grid")) cfg.pref_grid = j["pref_grid"].get<int>();
    if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
    if (j.contains("cases")) cfg.cases = j["cases"].get<std::vector<std::string>>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
    if (j.contains("k_max")) cfg.k_max = j["k_max"].get<int>();
    if (j.contains("stop_threshold"))
        cfg.stop_threshold = j["stop_threshold"].get<double>();
    if (j.contains("run_delta")) cfg.run_delta = j["run_delta"].get<double>();
    if (j.contains("chim_diagnostic"))
        cfg.chim_diagnostic = j["chim_diagnostic"].get<bool>();
    if (j.contains("weight_grid")) cfg.weight_grid = j["weight_grid"].get<int>();
    if (j.contains("cube_edge")) cfg.cube_edge = j["cube_edge"].get<double>();
    if (j.contains("density_factor"))
        cfg.density_factor = j["density_factor"].get<int>();
    if (j.contains("tau_grid")) cfg.tau_grid = j["tau_grid"].get<int>();

    if (cfg.front_samples < 0 || cfg.pref_grid < 0 || cfg.weight_grid < 0 ||
        cfg.horizon < 1 || cfg.k_max < 1 || cfg.density_factor < 1 ||
        cfg.tau_grid < 0)
        throw InvalidInput("config: grid and horizon sizes must be positive");
    if (cfg.delta < 0.0 || cfg.run_delta < 0.0)
        throw InvalidInput("config: delta must be nonnegative");
    if (cfg.cube_edge <= 0.0) throw InvalidInput("config: cube_edge must be positive");
    return cfg;
}

// Case id like "a1" .. "b4".
inline std::pair<char, int> parse_case_id(const std::string& s) {
    if (s.size() != 2 || (s[0] != 'a' && s[0] != 'b') || s[1] < '1' || s[1] > '4')
        throw InvalidInput("config: bad case id '" + s + "' (expect a1..b4)");
    return {s[0], s[1] - '0'};
}

// Shared metadata header: identifies run provenance without timestamps.
inline MetaBlock base_meta(const ExperimentConfig& cfg) {
    MetaBlock meta;
    meta.push_back({"kind", to_string(cfg.kind)});
    meta.push_back({"example", to_string(cfg.example)});
    meta.push_back({"config_hash", hash_hex(cfg.config_text)});
    meta.push_back({"seed", std::to_string(cfg.seed)});
    meta.push_back({"reduced", cfg.reduced ? "true" : "false"});
    meta.push_back({"solver_tol_kkt", fmt(cfg.solver.tol_kkt)});
    meta.push_back({"solver_tol_feas", fmt(cfg.solver.tol_feas)});
    return meta;
}

}  // namespace mompc_lab::exp
