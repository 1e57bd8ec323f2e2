#pragma once

// Receding-horizon loop with decision making at controller frequency.  Each
// step solves the individual minima with an unbounded descent cone, derives
// the pay-off quantities, then solves the decision-making scalarization under
// the component-wise descent bound carried from the previous step.  The bound
// for the next step is the objective vector of the accepted solution; the
// first input is applied and the state advances nominally along the solved
// trajectory.

#include <chrono>
#include <string>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/core/moo.hpp"
#include "mompc_lab/mpc/transcribe.hpp"
#include "mompc_lab/nlp/solver.hpp"
#include "mompc_lab/scalarize/scalarize.hpp"

namespace mompc_lab::mpc {

struct MompcConfig {
    scalarize::DmMethod method = scalarize::DmMethod::ps_normal;
    Vec beta_pref;  // empty = simplex centre
    double delta = 1e-3;  // IM basis regularization
    scalarize::Formulation im_form = scalarize::Formulation::weighted_sum;
    int horizon = 120;
    double stop_threshold = 1e-2;  // stop when every objective drops below this
    int k_max = 2000;
    nlp::SolverConfig solver;
    double descent_slack = 1e-9;      // constraint-side slack inside the NLP
    double descent_check_tol = 1e-8;  // trace invariant tolerance
    bool descent_enabled = true;      // false: fixed-weight comparison mode
    bool candidate_check = true;      // evaluate the shifted candidate each step
    bool emit_timing = false;         // keep traces byte-reproducible by default
};

struct StepRecord {
    int k = 0;
    Vec w;           // state the step departed from
    Vec v;           // applied input
    Mat phi;         // pay-off matrix (zero-sized when degenerate shortcut hit)
    Vec j_star;      // accepted objective vector
    Vec j_dc;        // active descent bound (+inf sentinel at k = 0)
    Vec stage_cost;  // per-objective running cost of the applied pair
    bool descent_ok = true;
    bool payoff_degenerate = false;
    bool mixed_sign_warning = false;
    double candidate_gap = 0.0;  // max_i (J_cand_i - J_DC_i); meaningful for k >= 1
    double candidate_eq_violation = 0.0;
    double candidate_box_violation = 0.0;
    double candidate_terminal_violation = 0.0;
    std::vector<std::string> im_status;
    std::string dm_status;
    int im_iterations = 0;
    int dm_iterations = 0;
    double wall_ms = 0.0;
};

struct ClosedLoopTrace {
    std::vector<StepRecord> steps;
    bool converged = false;
    bool aborted = false;
    std::string abort_reason;
    Vec w_final;
    int steps_to_convergence = -1;
    int descent_violations = 0;
};

struct StepResult {
    Vec v_apply;
    Vec w_next;
    Vec j_star;
    Mat phi;
    Vec x_star;
    std::vector<Vec> im_minimizers;  // per-objective trajectories, for warm starts
    std::vector<nlp::SolveReport> im_reports;
    nlp::SolveReport dm_report;
    bool payoff_degenerate = false;
    bool mixed_sign_warning = false;
    bool descent_ok = true;
};

namespace detail {

inline Vec centre_preference(int n_obj) {
    return Vec::Constant(n_obj, 1.0 / double(n_obj));
}

// All individual minima coincide: the feasible image has a single
// nondominated point, every scalarization returns it, and the pay-off
// normalization is undefined.  The first individual minimizer stands in for
// the decision solve.
inline bool payoff_degenerate(const Mat& phi) {
    const Vec spread = phi.rowwise().maxCoeff() - phi.rowwise().minCoeff();
    const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    return spread.maxCoeff() <= 1e-10 * scale;
}

// Pay-off column best aligned with the decision solve, in normalized image
// space: smallest weighted value for a weighted sum, smallest distance to the
// shooting ray otherwise.  Used as a cold-start for the decision NLP.
inline int closest_column(const PayoffSummary& summary,
                          const scalarize::ScalarizationParam& prm) {
    int best = 0;
    double best_val = nlp::kInf;
    const bool ws = prm.form == scalarize::Formulation::weighted_sum;
    const Vec dir_n = ws ? Vec() : Vec(summary.scale.asDiagonal() * prm.shoot_dir);
    for (int i = 0; i < summary.phi.cols(); ++i) {
        double val;
        if (ws) {
            val = prm.ws_weight.dot(summary.phi.col(i));
        } else {
            const Vec rel = summary.normalize(summary.phi.col(i)) -
                            summary.normalize(prm.shoot_origin);
            const double denom = dir_n.squaredNorm();
            const Vec residual = rel - (denom > 0.0 ? rel.dot(dir_n) / denom : 0.0) * dir_n;
            val = residual.squaredNorm();
        }
        if (val < best_val) {
            best_val = val;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

inline StepResult mompc_step(const DiscreteDynamics& dyn, const StageCosts& costs,
                             const TerminalIngredients& term, const Vec& w,
                             const MompcConfig& cfg, const DescentBound& bound,
                             const std::vector<Vec>& im_warm = {},
                             const Vec& dm_warm = Vec()) {
    const Transcription t = transcribe(dyn, costs, term, w, cfg.horizon);
    StepResult res;

    scalarize::ImResult im =
        scalarize::compute_individual_minima(t.mo, cfg.im_form, cfg.delta, cfg.solver, im_warm);
    for (int i = 0; i < t.mo.n_obj; ++i) {
        if (im.reports[std::size_t(i)].status == nlp::SolveStatus::infeasible)
            throw InfeasibleProblem("mompc_step: IM-" + std::to_string(i + 1) +
                                    " solve infeasible");
    }
    res.phi = im.phi;
    res.im_minimizers = std::move(im.minimizers);
    res.im_reports = std::move(im.reports);

    const DescentBound active_bound =
        cfg.descent_enabled ? bound : DescentBound::unbounded(t.mo.n_obj);

    if (detail::payoff_degenerate(res.phi)) {
        res.payoff_degenerate = true;
        res.x_star = res.im_minimizers[0];
        res.j_star = res.phi.col(0);
        res.dm_report = res.im_reports[0];
        res.descent_ok = descent_admissible(res.j_star, active_bound, cfg.descent_check_tol);
    } else {
        const PayoffSummary summary = payoff_summary(res.phi);
        const Vec beta = cfg.beta_pref.size() ? cfg.beta_pref
                                              : detail::centre_preference(t.mo.n_obj);
        scalarize::BuildOptions opts;
        opts.descent_slack = cfg.descent_slack;
        Vec warm = dm_warm;
        if (warm.size() == 0)
            warm = res.im_minimizers[std::size_t(
                detail::closest_column(summary, scalarize::dm_param(cfg.method, summary, beta)
                                                    .param))];
        scalarize::DmResult dm = scalarize::solve_dm(t.mo, cfg.method, summary, beta,
                                                     active_bound, cfg.solver, warm,
                                                     cfg.descent_check_tol, opts);
        if (dm.report.status == nlp::SolveStatus::infeasible)
            throw InfeasibleProblem("mompc_step: DM solve infeasible");
        res.x_star = dm.x;
        res.j_star = dm.j;
        res.dm_report = std::move(dm.report);
        res.mixed_sign_warning = dm.mixed_sign_warning;
        res.descent_ok = dm.descent_ok;
    }

    res.v_apply = t.layout.input(res.x_star, 0);
    res.w_next = t.layout.state(res.x_star, 1);
    return res;
}

inline ClosedLoopTrace run_closed_loop(const DiscreteDynamics& dyn, const StageCosts& costs,
                                       const TerminalIngredients& term, const Vec& x0,
                                       const MompcConfig& cfg) {
    dyn.validate();
    costs.validate();
    if (x0.size() != dyn.n_w) throw InvalidInput("run_closed_loop: bad initial state");

    ClosedLoopTrace trace;
    Vec w = x0;
    trace.w_final = w;
    DescentBound bound = DescentBound::unbounded(costs.n_obj());
    Vec x_prev;                // previous decision trajectory
    std::vector<Vec> im_prev;  // previous individual minimizers

    for (int k = 0; k < cfg.k_max; ++k) {
        StepRecord rec;
        rec.k = k;
        rec.w = w;
        rec.j_dc = bound.finite() ? bound.values()
                                  : Vec::Constant(costs.n_obj(), nlp::kInf);
        const auto t_start = std::chrono::steady_clock::now();

        Transcription t;
        try {
            t = transcribe(dyn, costs, term, w, cfg.horizon);
        } catch (const Error& e) {
            trace.aborted = true;
            trace.abort_reason = e.what();
            break;
        }

        std::vector<Vec> im_warm;
        Vec dm_warm;
        if (x_prev.size()) {
            const Vec cand = shift_candidate(x_prev, t.layout, dyn, term);
            dm_warm = cand;
            if (cfg.candidate_check) {
                const CandidateCheck cc = evaluate_candidate(t, cand);
                rec.candidate_eq_violation = cc.eq_violation;
                rec.candidate_box_violation = cc.box_violation;
                rec.candidate_terminal_violation = cc.terminal_violation;
                if (bound.finite())
                    rec.candidate_gap = (cc.j - bound.values()).maxCoeff();
            }
            im_warm.reserve(im_prev.size());
            for (const Vec& zi : im_prev)
                im_warm.push_back(shift_candidate(zi, t.layout, dyn, term));
        }

        StepResult sr;
        try {
            sr = mompc_step(dyn, costs, term, w, cfg, bound, im_warm, dm_warm);
        } catch (const Error& e) {
            trace.aborted = true;
            trace.abort_reason = e.what();
            break;
        }

        rec.v = sr.v_apply;
        rec.phi = sr.phi;
        rec.j_star = sr.j_star;
        rec.payoff_degenerate = sr.payoff_degenerate;
        rec.mixed_sign_warning = sr.mixed_sign_warning;
        rec.descent_ok = sr.descent_ok;
        if (!sr.descent_ok) ++trace.descent_violations;
        rec.stage_cost = Vec(costs.n_obj());
        for (int i = 0; i < costs.n_obj(); ++i)
            rec.stage_cost[i] = costs.stage_cost(i, w, sr.v_apply);
        rec.im_status.reserve(sr.im_reports.size());
        for (const auto& r : sr.im_reports) {
            rec.im_status.emplace_back(nlp::to_string(r.status));
            rec.im_iterations += r.iterations;
        }
        rec.dm_status = nlp::to_string(sr.dm_report.status);
        rec.dm_iterations = sr.dm_report.iterations;
        if (cfg.emit_timing) {
            const auto t_end = std::chrono::steady_clock::now();
            rec.wall_ms =
                std::chrono::duration<double, std::milli>(t_end - t_start).count();
        }
        trace.steps.push_back(std::move(rec));

        // Carry state, bound, and warm starts to the next step.
        w = sr.w_next;
        trace.w_final = w;
        if (cfg.descent_enabled) bound = DescentBound::at(sr.j_star);
        x_prev = sr.x_star;
        im_prev = std::move(sr.im_minimizers);

        if ((sr.j_star.array() < cfg.stop_threshold).all()) {
            trace.converged = true;
            trace.steps_to_convergence = k;
            break;
        }
    }
    return trace;
}

// Fixed-weight comparison loop: one weighted-sum solve per step, descent
// bound kept at infinity, same nominal propagation and stopping rule.
inline ClosedLoopTrace run_ws_fixed_loop(const DiscreteDynamics& dyn, const StageCosts& costs,
                                         const TerminalIngredients& term, const Vec& x0,
                                         const Vec& weight, const MompcConfig& cfg) {
    dyn.validate();
    costs.validate();
    if (x0.size() != dyn.n_w) throw InvalidInput("run_ws_fixed_loop: bad initial state");
    if (weight.size() != costs.n_obj() || (weight.array() < 0.0).any() ||
        weight.maxCoeff() <= 0.0)
        throw InvalidInput("run_ws_fixed_loop: weight must be nonnegative and nonzero");

    ClosedLoopTrace trace;
    Vec w = x0;
    trace.w_final = w;
    Vec x_prev;

    scalarize::ScalarizationParam prm;
    prm.form = scalarize::Formulation::weighted_sum;
    prm.ws_weight = weight;

    for (int k = 0; k < cfg.k_max; ++k) {
        StepRecord rec;
        rec.k = k;
        rec.w = w;
        rec.j_dc = Vec::Constant(costs.n_obj(), nlp::kInf);
        const auto t_start = std::chrono::steady_clock::now();

        Transcription t;
        scalarize::ScalarizedNlp sn;
        try {
            t = transcribe(dyn, costs, term, w, cfg.horizon);
            if (x_prev.size())
                t.mo.initial_guess = shift_candidate(x_prev, t.layout, dyn, term);
            sn = scalarize::build_scalarized(t.mo, prm,
                                             DescentBound::unbounded(costs.n_obj()));
        } catch (const Error& e) {
            trace.aborted = true;
            trace.abort_reason = e.what();
            break;
        }

        const nlp::SolveReport rep = nlp::solve(sn.nlp, cfg.solver);
        if (rep.status == nlp::SolveStatus::infeasible) {
            trace.aborted = true;
            trace.abort_reason = "run_ws_fixed_loop: step " + std::to_string(k) +
                                 " solve infeasible";
            break;
        }
        const Vec x_star = rep.x.head(t.mo.dim);
        rec.j_star = t.mo.objectives(x_star);
        rec.v = t.layout.input(x_star, 0);
        rec.stage_cost = Vec(costs.n_obj());
        for (int i = 0; i < costs.n_obj(); ++i)
            rec.stage_cost[i] = costs.stage_cost(i, w, rec.v);
        rec.dm_status = nlp::to_string(rep.status);
        rec.dm_iterations = rep.iterations;
        if (cfg.emit_timing) {
            const auto t_end = std::chrono::steady_clock::now();
            rec.wall_ms =
                std::chrono::duration<double, std::milli>(t_end - t_start).count();
        }

        w = t.layout.state(x_star, 1);
        trace.w_final = w;
        x_prev = x_star;
        const bool done = (rec.j_star.array() < cfg.stop_threshold).all();
        trace.steps.push_back(std::move(rec));
        if (done) {
            trace.converged = true;
            trace.steps_to_convergence = k;
            break;
        }
    }
    return trace;
}

}  // namespace mompc_lab::mpc
