#pragma once

// Multiple-shooting transcription of the finite-horizon multi-objective
// optimal control problem.  The decision vector stacks all shooting states
// first, then all inputs: z = [w_0 .. w_N, v_0 .. v_{N-1}].  Equalities pin
// w_0 to the measured state and close the shooting defects; one inequality
// keeps w_N inside the terminal level set; objective i accumulates its stage
// costs plus the common terminal cost.

#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/mpc/discretize.hpp"
#include "mompc_lab/mpc/terminal.hpp"
#include "mompc_lab/scalarize/mo_problem.hpp"

namespace mompc_lab::mpc {

struct MsLayout {
    int horizon = 0;  // N
    int n_w = 0;
    int n_v = 0;

    int dim() const { return (horizon + 1) * n_w + horizon * n_v; }
    int n_eq() const { return (horizon + 1) * n_w; }
    int w_off(int k) const { return k * n_w; }
    int v_off(int k) const { return (horizon + 1) * n_w + k * n_v; }

    Vec state(const Vec& z, int k) const { return z.segment(w_off(k), n_w); }
    Vec input(const Vec& z, int k) const { return z.segment(v_off(k), n_v); }
};

struct Transcription {
    MsLayout layout;
    scalarize::MoProblem mo;
};

// Feasible-by-construction default start: hold the equilibrium input (clamped
// to the box) and roll the dynamics out from the measured state.
inline Vec rollout_guess(const DiscreteDynamics& dyn, const Vec& v_hold, const Vec& x0,
                         const MsLayout& lay) {
    Vec z = Vec::Zero(lay.dim());
    const Vec v = v_hold.cwiseMax(dyn.v_lb).cwiseMin(dyn.v_ub);
    Vec w = x0;
    z.segment(lay.w_off(0), lay.n_w) = w;
    for (int k = 0; k < lay.horizon; ++k) {
        z.segment(lay.v_off(k), lay.n_v) = v;
        w = dyn.step(w, v);
        z.segment(lay.w_off(k + 1), lay.n_w) = w;
    }
    return z;
}

inline Transcription transcribe(const DiscreteDynamics& dyn, const StageCosts& costs,
                                const TerminalIngredients& term, const Vec& x0,
                                int horizon, double fd_step = 1e-5) {
    dyn.validate();
    costs.validate();
    if (horizon < 2) throw InvalidInput("transcribe: horizon must be at least 2");
    if (x0.size() != dyn.n_w || !x0.allFinite())
        throw InvalidInput("transcribe: initial state has wrong shape or is not finite");
    if (term.p.rows() != dyn.n_w || term.alpha < 0.0)
        throw InvalidInput("transcribe: terminal ingredients do not match the dynamics");

    Transcription t;
    MsLayout& lay = t.layout;
    lay.horizon = horizon;
    lay.n_w = dyn.n_w;
    lay.n_v = dyn.n_v;

    scalarize::MoProblem& mo = t.mo;
    mo.dim = lay.dim();
    mo.n_obj = costs.n_obj();

    mo.lb = Vec(mo.dim);
    mo.ub = Vec(mo.dim);
    for (int k = 0; k <= horizon; ++k) {
        mo.lb.segment(lay.w_off(k), lay.n_w) = dyn.w_lb;
        mo.ub.segment(lay.w_off(k), lay.n_w) = dyn.w_ub;
    }
    for (int k = 0; k < horizon; ++k) {
        mo.lb.segment(lay.v_off(k), lay.n_v) = dyn.v_lb;
        mo.ub.segment(lay.v_off(k), lay.n_v) = dyn.v_ub;
    }

    const int n_obj = mo.n_obj;
    const std::vector<Mat> q = costs.q;
    const std::vector<Mat> r = costs.r;
    const Vec w_ss = costs.w_ss;
    const Vec v_ss = costs.v_ss;
    const Mat p_term = term.p;
    const double alpha = term.alpha;
    const StepMap step = dyn.step;
    const StepJacFn jac = dyn.jacobians;
    const Vec x_init = x0;

    mo.objectives = [lay, q, r, w_ss, v_ss, p_term, n_obj](const Vec& z) {
        Vec j = Vec::Zero(n_obj);
        for (int k = 0; k < lay.horizon; ++k) {
            const Vec dw = z.segment(lay.w_off(k), lay.n_w) - w_ss;
            const Vec dv = z.segment(lay.v_off(k), lay.n_v) - v_ss;
            for (int i = 0; i < n_obj; ++i)
                j[i] += dw.dot(q[std::size_t(i)] * dw) + dv.dot(r[std::size_t(i)] * dv);
        }
        const Vec dw_n = z.segment(lay.w_off(lay.horizon), lay.n_w) - w_ss;
        const double f_term = dw_n.dot(p_term * dw_n);
        for (int i = 0; i < n_obj; ++i) j[i] += f_term;
        return j;
    };

    mo.objective_jacobian = [lay, q, r, w_ss, v_ss, p_term, n_obj](const Vec& z) {
        Mat jac_obj = Mat::Zero(n_obj, lay.dim());
        for (int k = 0; k < lay.horizon; ++k) {
            const Vec dw = z.segment(lay.w_off(k), lay.n_w) - w_ss;
            const Vec dv = z.segment(lay.v_off(k), lay.n_v) - v_ss;
            for (int i = 0; i < n_obj; ++i) {
                jac_obj.block(i, lay.w_off(k), 1, lay.n_w) =
                    (2.0 * q[std::size_t(i)] * dw).transpose();
                jac_obj.block(i, lay.v_off(k), 1, lay.n_v) =
                    (2.0 * r[std::size_t(i)] * dv).transpose();
            }
        }
        const Vec dw_n = z.segment(lay.w_off(lay.horizon), lay.n_w) - w_ss;
        const Vec g_term = 2.0 * p_term * dw_n;
        for (int i = 0; i < n_obj; ++i)
            jac_obj.block(i, lay.w_off(lay.horizon), 1, lay.n_w) = g_term.transpose();
        return jac_obj;
    };

    // Hessians are constant block diagonals: 2 sum_i w_i Q_i per stage state,
    // 2 (sum_i w_i) P at the tail state, 2 sum_i w_i R_i per stage input.
    mo.objective_hessians = [lay, q, r, p_term, n_obj](const Vec&, const Vec& w) {
        Mat qw = Mat::Zero(lay.n_w, lay.n_w);
        Mat rw = Mat::Zero(lay.n_v, lay.n_v);
        for (int i = 0; i < n_obj; ++i) {
            qw += w[i] * q[std::size_t(i)];
            rw += w[i] * r[std::size_t(i)];
        }
        const Mat pw = w.sum() * p_term;
        std::vector<SpTriplet> trip;
        trip.reserve(std::size_t(lay.horizon + 1) *
                     std::size_t(lay.n_w * lay.n_w + lay.n_v * lay.n_v));
        auto add_block = [&trip](int off, const Mat& blk) {
            for (int i = 0; i < blk.rows(); ++i)
                for (int j = 0; j < blk.cols(); ++j)
                    if (blk(i, j) != 0.0) trip.emplace_back(off + i, off + j, 2.0 * blk(i, j));
        };
        for (int k = 0; k < lay.horizon; ++k) {
            add_block(lay.w_off(k), qw);
            add_block(lay.v_off(k), rw);
        }
        add_block(lay.w_off(lay.horizon), pw);
        SpMat out(lay.dim(), lay.dim());
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    };

    mo.n_eq = lay.n_eq();
    mo.eq = [lay, step, x_init](const Vec& z) {
        Vec h(lay.n_eq());
        h.segment(0, lay.n_w) = z.segment(lay.w_off(0), lay.n_w) - x_init;
        for (int k = 0; k < lay.horizon; ++k) {
            const Vec w_next = step(z.segment(lay.w_off(k), lay.n_w),
                                    z.segment(lay.v_off(k), lay.n_v));
            h.segment((k + 1) * lay.n_w, lay.n_w) =
                z.segment(lay.w_off(k + 1), lay.n_w) - w_next;
        }
        return h;
    };

    mo.eq_jacobian = [lay, step, jac, fd_step](const Vec& z) {
        std::vector<SpTriplet> trip;
        trip.reserve(std::size_t(lay.n_w + lay.horizon * (lay.n_w + lay.n_w * lay.n_w +
                                                          lay.n_w * lay.n_v)));
        for (int i = 0; i < lay.n_w; ++i) trip.emplace_back(i, lay.w_off(0) + i, 1.0);
        for (int k = 0; k < lay.horizon; ++k) {
            const Vec w = z.segment(lay.w_off(k), lay.n_w);
            const Vec v = z.segment(lay.v_off(k), lay.n_v);
            StepLinearization lin;
            if (jac)
                lin = jac(w, v);
            else
                lin = linearize_step(step, w, v, fd_step);
            const int row0 = (k + 1) * lay.n_w;
            for (int i = 0; i < lay.n_w; ++i) {
                trip.emplace_back(row0 + i, lay.w_off(k + 1) + i, 1.0);
                for (int c = 0; c < lay.n_w; ++c)
                    trip.emplace_back(row0 + i, lay.w_off(k) + c, -lin.a(i, c));
                for (int c = 0; c < lay.n_v; ++c)
                    trip.emplace_back(row0 + i, lay.v_off(k) + c, -lin.b(i, c));
            }
        }
        SpMat out(lay.n_eq(), lay.dim());
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    };

    mo.n_ineq = 1;
    mo.ineq = [lay, p_term, w_ss, alpha](const Vec& z) {
        const Vec dw_n = z.segment(lay.w_off(lay.horizon), lay.n_w) - w_ss;
        Vec g(1);
        g[0] = alpha - dw_n.dot(p_term * dw_n);
        return g;
    };
    mo.ineq_jacobian = [lay, p_term, w_ss](const Vec& z) {
        const Vec dw_n = z.segment(lay.w_off(lay.horizon), lay.n_w) - w_ss;
        const Vec g = -2.0 * p_term * dw_n;
        std::vector<SpTriplet> trip;
        trip.reserve(std::size_t(lay.n_w));
        for (int i = 0; i < lay.n_w; ++i)
            trip.emplace_back(0, lay.w_off(lay.horizon) + i, g[i]);
        SpMat out(1, lay.dim());
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    };
    mo.ineq_hessians = [lay, p_term](const Vec&, const Vec& w) {
        std::vector<SpTriplet> trip;
        trip.reserve(std::size_t(lay.n_w * lay.n_w));
        const int off = lay.w_off(lay.horizon);
        for (int i = 0; i < lay.n_w; ++i)
            for (int j = 0; j < lay.n_w; ++j)
                if (p_term(i, j) != 0.0)
                    trip.emplace_back(off + i, off + j, -2.0 * w[0] * p_term(i, j));
        SpMat out(lay.dim(), lay.dim());
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    };

    mo.initial_guess = rollout_guess(dyn, v_ss, x0, lay);
    return t;
}

// One-stage shift of a solved trajectory: the classical recursive-feasibility
// candidate.  The tail input is the local feedback at the old terminal state,
// clamped to the box against roundoff.
inline Vec shift_candidate(const Vec& z, const MsLayout& lay, const DiscreteDynamics& dyn,
                           const TerminalIngredients& term) {
    if (z.size() != lay.dim()) throw InvalidInput("shift_candidate: wrong trajectory length");
    Vec out(lay.dim());
    for (int k = 0; k < lay.horizon; ++k)
        out.segment(lay.w_off(k), lay.n_w) = z.segment(lay.w_off(k + 1), lay.n_w);
    for (int k = 0; k + 1 < lay.horizon; ++k)
        out.segment(lay.v_off(k), lay.n_v) = z.segment(lay.v_off(k + 1), lay.n_v);
    const Vec w_last = z.segment(lay.w_off(lay.horizon), lay.n_w);
    const Vec v_tail = term.kappa(w_last).cwiseMax(dyn.v_lb).cwiseMin(dyn.v_ub);
    out.segment(lay.v_off(lay.horizon - 1), lay.n_v) = v_tail;
    out.segment(lay.w_off(lay.horizon), lay.n_w) = dyn.step(w_last, v_tail);
    return out;
}

struct CandidateCheck {
    Vec j;                      // objective vector of the candidate
    double eq_violation = 0.0;  // shooting-defect residual (should be roundoff)
    double box_violation = 0.0;
    double terminal_violation = 0.0;  // level-set overshoot of the new w_N
};

inline CandidateCheck evaluate_candidate(const Transcription& t, const Vec& z) {
    CandidateCheck c;
    c.j = t.mo.objectives(z);
    c.eq_violation = t.mo.eq(z).cwiseAbs().maxCoeff();
    const Vec lo = t.mo.lb - z;
    const Vec hi = z - t.mo.ub;
    c.box_violation = std::max(0.0, std::max(lo.maxCoeff(), hi.maxCoeff()));
    c.terminal_violation = std::max(0.0, -t.mo.ineq(z)[0]);
    return c;
}

}  // namespace mompc_lab::mpc
