#pragma once

// Optimal steady state of the room under a held disturbance: the cheapest
// state/input pair that is a fixed point of the discretized three-state
// dynamics inside tightened comfort boxes.

#include <utility>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/nlp/fd.hpp"
#include "mompc_lab/nlp/problem.hpp"
#include "mompc_lab/nlp/solver.hpp"
#include "mompc_lab/room/model.hpp"

namespace mompc_lab::room {

struct OssResult {
    Vec x_ss;  // three states, scaled
    Vec u_ss;  // five inputs, scaled
    double money = 0.0;
    double residual = 0.0;  // fixed-point defect, max norm
    nlp::SolveReport report;
};

inline nlp::SolverConfig default_oss_config() {
    nlp::SolverConfig cfg;
    cfg.tol_kkt = 1e-9;
    cfg.tol_feas = 1e-10;
    cfg.multistart = 8;
    cfg.seed = 1234;
    return cfg;
}

// Decision vector z = (x, u); the equality block pins x = f(x, u).
inline OssResult solve_oss(const RoomParams& p, const Vec& d,
                           const RoomDiscretization& disc = {},
                           const nlp::SolverConfig& cfg = default_oss_config()) {
    const mpc::DiscreteDynamics dyn = make_full_dynamics(p, d, disc);

    nlp::NlpProblem prob;
    prob.dim = 8;
    prob.lb = Vec(8);
    prob.ub = Vec(8);
    prob.lb << oss_state_lb(p), oss_input_lb(p);
    prob.ub << oss_state_ub(p), oss_input_ub(p);

    prob.objective = [p](const Vec& z) { return money_rate(z.tail(5), p); };
    prob.gradient = [p, step = cfg.fd_step](const Vec& z) {
        Vec g = Vec::Zero(8);
        g.tail(5) = nlp::fd_gradient([&p](const Vec& u) { return money_rate(u, p); },
                                     Vec(z.tail(5)), step);
        return g;
    };

    prob.n_eq = 3;
    prob.eq = [&dyn](const Vec& z) -> Vec {
        return dyn.step(z.head(3), z.tail(5)) - z.head(3);
    };
    prob.eq_jacobian = [&dyn](const Vec& z) {
        const mpc::StepLinearization lin = mpc::linearize_dynamics(dyn, z.head(3), z.tail(5));
        Mat j(3, 8);
        j.leftCols(3) = lin.a - Mat::Identity(3, 3);
        j.rightCols(5) = lin.b;
        return SpMat(j.sparseView());
    };

    prob.initial_guess = 0.5 * (prob.lb + prob.ub);

    const nlp::SolveReport rep = nlp::solve(prob, cfg);
    if (rep.status == nlp::SolveStatus::infeasible)
        throw InfeasibleProblem("solve_oss: no feasible steady pair found");

    OssResult res;
    res.x_ss = rep.x.head(3);
    res.u_ss = rep.x.tail(5);
    res.money = money_rate(res.u_ss, p);
    res.residual = (dyn.step(res.x_ss, res.u_ss) - res.x_ss).cwiseAbs().maxCoeff();
    res.report = rep;
    if (res.residual > 1e-8)
        throw NumericalError("solve_oss: fixed-point residual above 1e-8");
    return res;
}

}  // namespace mompc_lab::room
