#pragma once

// Terminal ingredients for the stabilizing controller: a common quadratic
// terminal cost F(w) = (w - w_ss)' P (w - w_ss), a local feedback
// kappa(w) = v_ss - K (w - w_ss), and a level a such that on
// {F(w) <= a} the set is invariant, kappa is admissible, and F decreases by
// at least the running cost of every objective.  K comes from a discrete
// Riccati solve with inflated weights; P solves the discrete Lyapunov
// equation A_K' P A_K - P = -Omega where Omega is the inflated decrease
// matrix, so Omega - Q*_i stays positive semidefinite for every objective.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/mpc/discretize.hpp"

namespace mompc_lab::mpc {

struct StageCosts {
    std::vector<Mat> q;  // one (n_w x n_w) weight per objective
    std::vector<Mat> r;  // one (n_v x n_v) weight per objective
    Vec w_ss, v_ss;      // equilibrium pair the costs penalize around

    int n_obj() const { return int(q.size()); }

    void validate() const {
        if (q.empty() || q.size() != r.size())
            throw InvalidInput("StageCosts: need matching Q/R lists");
        const auto n_w = w_ss.size();
        const auto n_v = v_ss.size();
        if (n_w == 0 || n_v == 0) throw InvalidInput("StageCosts: missing equilibrium pair");
        for (std::size_t i = 0; i < q.size(); ++i) {
            check_spd(q[i], n_w, "Q", i);
            check_spd(r[i], n_v, "R", i);
        }
    }

    double stage_cost(int i, const Vec& w, const Vec& v) const {
        const Vec dw = w - w_ss;
        const Vec dv = v - v_ss;
        return dw.dot(q[std::size_t(i)] * dw) + dv.dot(r[std::size_t(i)] * dv);
    }

  private:
    static void check_spd(const Mat& m, Eigen::Index n, const char* tag, std::size_t i) {
        const std::string name = std::string(tag) + "_" + std::to_string(i + 1);
        if (m.rows() != n || m.cols() != n)
            throw InvalidInput("StageCosts: " + name + " has wrong shape");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff()))
            throw InvalidInput("StageCosts: " + name + " is not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat> es(m);
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
            throw InvalidInput("StageCosts: " + name + " is not positive definite");
    }
};

// ---------------------------------------------------------------------------
// Riccati and Lyapunov solves.

struct DlqrResult {
    Mat k;  // v = -K w stabilizes w+ = A w + B v
    Mat p;  // Riccati fixed point
};

inline DlqrResult dlqr(const Mat& a, const Mat& b, const Mat& q, const Mat& r) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
        r.rows() != b.cols() || r.cols() != b.cols())
        throw InvalidInput("dlqr: inconsistent shapes");
    Mat p = q;
    const int max_iter = 200000;
    for (int it = 0; it < max_iter; ++it) {
        const Mat bpb = r + b.transpose() * p * b;
        const Mat k = bpb.ldlt().solve(b.transpose() * p * a);
        Mat next = q + a.transpose() * p * (a - b * k);
        next = 0.5 * (next + next.transpose());
        const double diff = (next - p).cwiseAbs().maxCoeff();
        p = next;
        if (diff <= 1e-14 * std::max(1.0, p.cwiseAbs().maxCoeff())) {
            DlqrResult out;
            out.k = (r + b.transpose() * p * b).ldlt().solve(b.transpose() * p * a);
            out.p = p;
            const Mat a_k = a - b * out.k;
            if (a_k.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
                throw NumericalError("dlqr: closed loop is not Schur stable");
            return out;
        }
        if (!p.allFinite()) break;
    }
    throw NumericalError("dlqr: Riccati iteration did not converge (unstabilizable pair?)");
}

// Solves A' X A - X = -W for X; requires A Schur stable.
inline Mat solve_discrete_lyapunov(const Mat& a, const Mat& w) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || w.rows() != n || w.cols() != n)
        throw InvalidInput("solve_discrete_lyapunov: inconsistent shapes");
    Mat system = Mat::Identity(n * n, n * n);
    // Row j*n+i carries the (i, j) entry of X - A' X A; the unknown X(k, l)
    // lives at column l*n+k (column-major vec).
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < n; ++l)
                    system(j * n + i, l * n + k) -= a(k, i) * a(l, j);
    Eigen::FullPivLU<Mat> lu(system);
    if (!lu.isInvertible())
        throw NumericalError("solve_discrete_lyapunov: spectral radius of A is not below one");
    const Vec rhs = Eigen::Map<const Vec>(w.data(), n * n);
    const Vec vec_x = lu.solve(rhs);
    Mat x = Eigen::Map<const Mat>(vec_x.data(), n, n);
    return 0.5 * (x + x.transpose());
}

struct GainAndCost {
    Mat k;
    Mat p;
};

// K from the Riccati solve with the given weights, then P from the Lyapunov
// equation A_K' P A_K - P = -Omega.
inline GainAndCost dlqr_and_lyapunov(const Mat& a, const Mat& b, const Mat& q_lqr,
                                     const Mat& r_lqr, const Mat& omega) {
    GainAndCost out;
    out.k = dlqr(a, b, q_lqr, r_lqr).k;
    const Mat a_k = a - b * out.k;
    out.p = solve_discrete_lyapunov(a_k, omega);
    const double residual =
        (a_k.transpose() * out.p * a_k - out.p + omega).cwiseAbs().maxCoeff();
    if (residual > 1e-8)
        throw NumericalError("dlqr_and_lyapunov: Lyapunov residual " + std::to_string(residual));
    Eigen::SelfAdjointEigenSolver<Mat> es(out.p);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw NumericalError("dlqr_and_lyapunov: P is not positive definite");
    return out;
}

// ---------------------------------------------------------------------------
// Terminal ingredient synthesis.

struct TerminalIngredients {
    Mat p;       // common terminal cost matrix, positive definite
    Mat k;       // local feedback gain
    double alpha = 0.0;
    Mat omega;   // common decrease matrix
    Mat a, b;    // linearization at the equilibrium
    Mat a_k;     // A - B K
    std::vector<Mat> q_star;   // Q_i + K' R_i K
    std::vector<Mat> delta_q;  // Omega - Q*_i
    Vec w_ss, v_ss;
    std::vector<int> frozen_inputs;  // rows of K pinned to zero (saturated at v_ss)

    Vec kappa(const Vec& w) const { return v_ss - k * (w - w_ss); }

    double cost(const Vec& w) const {
        const Vec dw = w - w_ss;
        return dw.dot(p * dw);
    }
};

struct TerminalBuildConfig {
    double rho_x = 10.0;  // state weight inflation for the Riccati solve
    double rho_u = 10.0;  // input weight inflation
    double fd_step = 1e-5;
    int boundary_samples = 0;   // 0 = automatic (100 per state dimension)
    double alpha_min = 1e-8;    // search floor; collapse below it is an error
    double alpha_cap = 1e9;     // stand-in when no state bound limits the level set
    double check_tol = 1e-9;    // slack for the sampled decrease/invariance checks
    int bisect_iters = 40;
    unsigned direction_seed = 9001;  // used only for n_w > 2
};

struct TerminalReport {
    double max_input_violation = 0.0;      // kappa(w) outside the input box
    double max_state_violation = 0.0;      // sample outside the state box
    double max_invariance_violation = 0.0; // F(f(w, kappa(w))) - alpha
    Vec max_decrease_violation;            // per objective: F+ + l_i - F
    int n_samples = 0;

    double worst() const {
        double v = std::max({max_input_violation, max_state_violation,
                             max_invariance_violation});
        if (max_decrease_violation.size()) v = std::max(v, max_decrease_violation.maxCoeff());
        return v;
    }
};

namespace detail {

// Deterministic unit directions: the full circle for planar states, a seeded
// Gaussian sample otherwise.
inline std::vector<Vec> unit_directions(int n, int count, unsigned seed) {
    std::vector<Vec> dirs;
    dirs.reserve(std::size_t(count));
    if (n == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double t = 2.0 * M_PI * double(i) / double(count);
            Vec u(2);
            u << std::cos(t), std::sin(t);
            dirs.push_back(u);
        }
        return dirs;
    }
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (int(dirs.size()) < count) {
        Vec u(n);
        for (int j = 0; j < n; ++j) u[j] = gauss(gen);
        const double norm = u.norm();
        if (norm > 1e-12) dirs.push_back(u / norm);
    }
    return dirs;
}

inline double box_violation(const Vec& x, const Vec& lb, const Vec& ub) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::isfinite(lb[i])) v = std::max(v, lb[i] - x[i]);
        if (std::isfinite(ub[i])) v = std::max(v, x[i] - ub[i]);
    }
    return v;
}

}  // namespace detail

// Samples the level set {(w - w_ss)' P (w - w_ss) <= alpha} on its boundary
// and a few interior shells and reports the worst violation of input
// admissibility, state box membership, invariance, and the per-objective
// terminal decrease condition.
inline TerminalReport verify_terminal(const TerminalIngredients& term,
                                      const DiscreteDynamics& dyn, const StageCosts& costs,
                                      int n_samples = 0, unsigned seed = 9001) {
    dyn.validate();
    costs.validate();
    const int n_w = dyn.n_w;
    const int n_obj = costs.n_obj();
    TerminalReport rep;
    rep.max_decrease_violation = Vec::Zero(n_obj);

    if (n_samples <= 0) n_samples = 100 * n_w;
    Eigen::LLT<Mat> llt(term.p);
    if (llt.info() != Eigen::Success)
        throw NumericalError("verify_terminal: terminal matrix is not positive definite");
    const Mat l_inv_t = llt.matrixL().solve(Mat::Identity(n_w, n_w)).transpose();

    const std::vector<double> shells = {1.0, 0.5, 0.25, 0.1};
    const int per_shell = std::max(1, n_samples / int(shells.size()));
    const std::vector<Vec> dirs = detail::unit_directions(n_w, per_shell, seed);

    auto probe = [&](const Vec& w) {
        const Vec v = term.kappa(w);
        const Vec w_next = dyn.step(w, v);
        const double f_now = term.cost(w);
        const double f_next = term.cost(w_next);
        rep.max_input_violation =
            std::max(rep.max_input_violation, detail::box_violation(v, dyn.v_lb, dyn.v_ub));
        rep.max_state_violation =
            std::max(rep.max_state_violation, detail::box_violation(w, dyn.w_lb, dyn.w_ub));
        rep.max_invariance_violation =
            std::max(rep.max_invariance_violation, f_next - term.alpha);
        for (int i = 0; i < n_obj; ++i) {
            const double dec = f_next + costs.stage_cost(i, w, v) - f_now;
            rep.max_decrease_violation[i] = std::max(rep.max_decrease_violation[i], dec);
        }
        ++rep.n_samples;
    };

    if (term.alpha <= 0.0) {
        probe(term.w_ss);
        return rep;
    }
    for (double shell : shells) {
        const double radius = std::sqrt(shell * term.alpha);
        for (const Vec& u : dirs) probe(term.w_ss + radius * (l_inv_t * u));
    }
    return rep;
}

// Full synthesis recipe: linearize at the equilibrium, freeze inputs that the
// equilibrium already saturates, solve the inflated Riccati and Lyapunov
// problems, then search the largest level that passes the sampled checks.
inline TerminalIngredients build_terminal_ingredients(const DiscreteDynamics& dyn,
                                                      const StageCosts& costs,
                                                      const TerminalBuildConfig& cfg = {}) {
    dyn.validate();
    costs.validate();
    const int n_w = dyn.n_w;
    const int n_v = dyn.n_v;
    const int n_obj = costs.n_obj();
    if (costs.w_ss.size() != n_w || costs.v_ss.size() != n_v)
        throw InvalidInput("build_terminal_ingredients: equilibrium dimensions mismatch");

    TerminalIngredients term;
    term.w_ss = costs.w_ss;
    term.v_ss = costs.v_ss;

    {
        const Vec resid = dyn.step(costs.w_ss, costs.v_ss) - costs.w_ss;
        if (resid.cwiseAbs().maxCoeff() > 1e-7)
            throw InvalidInput("build_terminal_ingredients: (w_ss, v_ss) is not an equilibrium");
    }

    const StepLinearization lin = linearize_step(dyn.step, costs.w_ss, costs.v_ss, cfg.fd_step);
    term.a = lin.a;
    term.b = lin.b;

    // Inputs the equilibrium pins to a bound cannot move in either direction,
    // so the local feedback must not act through them.
    Mat b_eff = lin.b;
    for (int j = 0; j < n_v; ++j) {
        const double width = dyn.v_ub[j] - dyn.v_lb[j];
        const double tol = 1e-6 * (std::isfinite(width) ? std::max(width, 1e-12) : 1.0);
        const bool at_lower =
            std::isfinite(dyn.v_lb[j]) && costs.v_ss[j] - dyn.v_lb[j] <= tol;
        const bool at_upper =
            std::isfinite(dyn.v_ub[j]) && dyn.v_ub[j] - costs.v_ss[j] <= tol;
        if (at_lower || at_upper) {
            term.frozen_inputs.push_back(j);
            b_eff.col(j).setZero();
        }
    }

    const Mat q_lqr = costs.q[0] + cfg.rho_x * Mat::Identity(n_w, n_w);
    const Mat r_lqr = costs.r[0] + cfg.rho_u * Mat::Identity(n_v, n_v);
    term.k = dlqr(lin.a, b_eff, q_lqr, r_lqr).k;
    for (int j : term.frozen_inputs) term.k.row(j).setZero();

    term.omega = q_lqr + term.k.transpose() * r_lqr * term.k;
    term.omega = 0.5 * (term.omega + term.omega.transpose());
    term.a_k = lin.a - b_eff * term.k;
    term.p = solve_discrete_lyapunov(term.a_k, term.omega);
    {
        const double residual =
            (term.a_k.transpose() * term.p * term.a_k - term.p + term.omega)
                .cwiseAbs()
                .maxCoeff();
        if (residual > 1e-8)
            throw NumericalError("build_terminal_ingredients: Lyapunov residual " +
                                 std::to_string(residual));
        Eigen::SelfAdjointEigenSolver<Mat> es(term.p);
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
            throw NumericalError("build_terminal_ingredients: P is not positive definite");
    }

    term.q_star.reserve(std::size_t(n_obj));
    term.delta_q.reserve(std::size_t(n_obj));
    for (int i = 0; i < n_obj; ++i) {
        Mat qs = costs.q[std::size_t(i)] +
                 term.k.transpose() * costs.r[std::size_t(i)] * term.k;
        qs = 0.5 * (qs + qs.transpose());
        term.q_star.push_back(qs);
        term.delta_q.push_back(0.5 * ((term.omega - qs) + (term.omega - qs).transpose()));
    }

    // Largest level set that stays inside the state box.
    const Mat p_inv = term.p.inverse();
    double alpha_box = cfg.alpha_cap;
    for (int i = 0; i < n_w; ++i) {
        double margin = std::numeric_limits<double>::infinity();
        if (std::isfinite(dyn.w_ub[i])) margin = std::min(margin, dyn.w_ub[i] - costs.w_ss[i]);
        if (std::isfinite(dyn.w_lb[i])) margin = std::min(margin, costs.w_ss[i] - dyn.w_lb[i]);
        if (!std::isfinite(margin)) continue;
        if (margin <= 0.0)
            throw InfeasibleProblem(
                "build_terminal_ingredients: equilibrium sits on the state box boundary");
        alpha_box = std::min(alpha_box, margin * margin / p_inv(i, i));
    }

    // The feedback is linear, so the input box yields an exact cap as well:
    // max |K_j dw| over the level set is sqrt(alpha (K P^-1 K')_jj).
    const Mat kpk = term.k * p_inv * term.k.transpose();
    for (int j = 0; j < n_v; ++j) {
        if (kpk(j, j) <= 1e-300) continue;  // frozen or inactive row
        double margin = std::numeric_limits<double>::infinity();
        if (std::isfinite(dyn.v_ub[j])) margin = std::min(margin, dyn.v_ub[j] - costs.v_ss[j]);
        if (std::isfinite(dyn.v_lb[j])) margin = std::min(margin, costs.v_ss[j] - dyn.v_lb[j]);
        if (!std::isfinite(margin)) continue;
        if (margin <= 0.0)
            throw InfeasibleProblem(
                "build_terminal_ingredients: active feedback through a saturated input");
        alpha_box = std::min(alpha_box, margin * margin / kpk(j, j));
    }

    const int samples = cfg.boundary_samples > 0 ? cfg.boundary_samples : 100 * n_w;
    auto passes = [&](double alpha) {
        TerminalIngredients trial = term;
        trial.alpha = alpha;
        const TerminalReport rep =
            verify_terminal(trial, dyn, costs, samples, cfg.direction_seed);
        const double tol = cfg.check_tol * std::max(1.0, alpha);
        return rep.max_input_violation <= tol && rep.max_state_violation <= tol &&
               rep.max_invariance_violation <= tol &&
               rep.max_decrease_violation.maxCoeff() <= tol;
    };

    double alpha = alpha_box;
    double fail_above = -1.0;
    while (!passes(alpha)) {
        fail_above = alpha;
        alpha *= 0.5;
        if (alpha < cfg.alpha_min)
            throw InfeasibleProblem(
                "build_terminal_ingredients: no nontrivial terminal set found");
    }
    if (fail_above > 0.0) {
        double lo = std::log(alpha), hi = std::log(fail_above);
        for (int it = 0; it < cfg.bisect_iters; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (passes(std::exp(mid)))
                lo = mid;
            else
                hi = mid;
        }
        alpha = std::exp(lo);
    }
    term.alpha = alpha;
    return term;
}

}  // namespace mompc_lab::mpc
