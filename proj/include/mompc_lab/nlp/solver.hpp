#pragma once

// Augmented-Lagrangian solver.  Outer loop: first-order multiplier updates
// with geometric penalty growth.  Inner loop: projected L-BFGS over the box
// with a backtracking Armijo search along the projected arc.  Everything is
// deterministic for fixed inputs; the optional multistart draws its starting
// points from a caller-seeded generator.

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include "mompc_lab/nlp/fd.hpp"
#include "mompc_lab/nlp/problem.hpp"

namespace mompc_lab::nlp {

namespace detail {

inline Vec clamp_box(const Vec& x, const Vec& lb, const Vec& ub) {
    return x.cwiseMax(lb).cwiseMin(ub);
}

// Callback access with finite-difference fallbacks.
struct Callbacks {
    const NlpProblem& p;
    double fd_step;

    double f(const Vec& x) const { return p.objective(x); }
    Vec grad(const Vec& x) const {
        return p.gradient ? p.gradient(x) : fd_gradient(p.objective, x, fd_step);
    }
    Vec h(const Vec& x) const { return p.n_eq ? p.eq(x) : Vec(0); }
    Vec g(const Vec& x) const { return p.n_ineq ? p.ineq(x) : Vec(0); }
    SpMat jh(const Vec& x) const {
        if (!p.n_eq) return SpMat(0, p.dim);
        return p.eq_jacobian ? p.eq_jacobian(x)
                             : fd_jacobian_sparse(p.eq, x, p.n_eq, fd_step);
    }
    SpMat jg(const Vec& x) const {
        if (!p.n_ineq) return SpMat(0, p.dim);
        return p.ineq_jacobian ? p.ineq_jacobian(x)
                               : fd_jacobian_sparse(p.ineq, x, p.n_ineq, fd_step);
    }
};

struct Multipliers {
    Vec lambda;  // equalities
    Vec mu;      // inequalities, kept nonnegative
    double rho;
};

// Value of the augmented Lagrangian at already-evaluated constraint values.
inline double al_value(double f, const Vec& hv, const Vec& gv, const Multipliers& m) {
    double val = f;
    for (Eigen::Index j = 0; j < hv.size(); ++j)
        val += -m.lambda[j] * hv[j] + 0.5 * m.rho * hv[j] * hv[j];
    for (Eigen::Index i = 0; i < gv.size(); ++i) {
        if (gv[i] <= m.mu[i] / m.rho)
            val += -m.mu[i] * gv[i] + 0.5 * m.rho * gv[i] * gv[i];
        else
            val += -0.5 * m.mu[i] * m.mu[i] / m.rho;
    }
    return val;
}

// First-order multiplier estimates at constraint values (hv, gv).
inline Vec eq_estimate(const Vec& hv, const Multipliers& m) {
    return m.lambda - m.rho * hv;
}
inline Vec ineq_estimate(const Vec& gv, const Multipliers& m) {
    Vec est = m.mu - m.rho * gv;
    return est.cwiseMax(0.0);
}

inline double feasibility(const Vec& hv, const Vec& gv) {
    double v = 0.0;
    if (hv.size()) v = hv.cwiseAbs().maxCoeff();
    if (gv.size()) v = std::max(v, std::max(0.0, -gv.minCoeff()));
    return v;
}

// Bounded-memory BFGS pairs with curvature guarding.
class LbfgsMemory {
  public:
    explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

    void clear() { pairs_.clear(); }

    void push(const Vec& s, const Vec& y) {
        double sy = s.dot(y);
        if (!(sy > 1e-12 * s.norm() * y.norm())) return;  // keep H positive definite
        if ((int)pairs_.size() == capacity_) pairs_.pop_front();
        pairs_.push_back({s, y, sy});
    }

    Vec direction(const Vec& grad) const {
        Vec q = grad;
        if (pairs_.empty()) return -q;
        std::vector<double> alpha(pairs_.size());
        for (int i = (int)pairs_.size() - 1; i >= 0; --i) {
            alpha[i] = pairs_[i].s.dot(q) / pairs_[i].sy;
            q -= alpha[i] * pairs_[i].y;
        }
        const auto& last = pairs_.back();
        q *= last.sy / last.y.squaredNorm();
        for (std::size_t i = 0; i < pairs_.size(); ++i) {
            double beta = pairs_[i].y.dot(q) / pairs_[i].sy;
            q += (alpha[i] - beta) * pairs_[i].s;
        }
        return -q;
    }

  private:
    struct Pair {
        Vec s, y;
        double sy;
    };
    int capacity_;
    std::deque<Pair> pairs_;
};

struct InnerState {
    Vec x;
    Vec hv, gv;
    double f;
    int iterations = 0;
};

// Backtracking Armijo search along the projected arc.  On acceptance the
// iterate and its cached evaluations are advanced in place.
inline bool armijo_arc(const Callbacks& cb, const NlpProblem& p, const Multipliers& m,
                       const Vec& d, const Vec& al_grad, Vec& x, double& f, Vec& hv,
                       Vec& gv, double& L) {
    double step = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
        Vec xt = clamp_box(x + step * d, p.lb, p.ub);
        Vec dx = xt - x;
        if (dx.cwiseAbs().maxCoeff() == 0.0) break;
        double ft = cb.f(xt);
        Vec ht = cb.h(xt), gt = cb.g(xt);
        double Lt = al_value(ft, ht, gt, m);
        double slope = al_grad.dot(dx);
        if (Lt <= L + 1e-4 * std::min(slope, 0.0)) {
            x = std::move(xt);
            f = ft;
            hv = std::move(ht);
            gv = std::move(gt);
            L = Lt;
            return true;
        }
        step *= 0.5;
    }
    return false;
}

// Minimize the augmented Lagrangian over the box to projected-gradient
// tolerance omega.
inline InnerState minimize_al(const Callbacks& cb, const NlpProblem& p, Vec x,
                              const Multipliers& m, double omega, int max_inner) {
    InnerState st;
    x = clamp_box(x, p.lb, p.ub);
    double f = cb.f(x);
    Vec hv = cb.h(x), gv = cb.g(x);
    double L = al_value(f, hv, gv, m);

    LbfgsMemory mem(16);
    Vec grad_prev, x_prev;
    int it = 0;
    for (; it < max_inner; ++it) {
        Vec al_grad = cb.grad(x);
        if (p.n_eq) {
            Vec weq = m.rho * hv - m.lambda;
            al_grad += cb.jh(x).transpose() * weq;
        }
        if (p.n_ineq) {
            Vec win = -ineq_estimate(gv, m);
            al_grad += cb.jg(x).transpose() * win;
        }

        double pg = (x - clamp_box(x - al_grad, p.lb, p.ub)).cwiseAbs().maxCoeff();
        if (pg <= omega) break;

        if (x_prev.size()) mem.push(x - x_prev, al_grad - grad_prev);
        x_prev = x;
        grad_prev = al_grad;

        Vec d = mem.direction(al_grad);
        bool steepest = false;
        if (!(d.dot(al_grad) < 0.0)) {  // direction lost descent property
            mem.clear();
            d = -al_grad;
            steepest = true;
        }

        if (!armijo_arc(cb, p, m, d, al_grad, x, f, hv, gv, L)) {
            if (!steepest) {  // retry from a fresh steepest-descent step
                mem.clear();
                continue;
            }
            break;  // no progress possible at machine precision
        }
    }
    st.x = x;
    st.hv = hv;
    st.gv = gv;
    st.f = f;
    st.iterations = it;
    return st;
}

// Newton variant of the inner loop for problems that expose curvature.  The
// model Hessian combines the objective Hessian, Gauss-Newton terms of the
// penalized constraints, and the exact curvature of active inequalities when
// available.  Variables pinned by the box with an outward-pushing gradient
// are frozen out of the linear solve; indefiniteness is handled with
// Levenberg damping, falling back to steepest descent as a last resort.
inline InnerState minimize_al_newton(const Callbacks& cb, const NlpProblem& p, Vec x,
                                     const Multipliers& m, double omega, int max_inner) {
    InnerState st;
    x = clamp_box(x, p.lb, p.ub);
    double f = cb.f(x);
    Vec hv = cb.h(x), gv = cb.g(x);
    double L = al_value(f, hv, gv, m);
    const int n = p.dim;

    // Inequalities included in the curvature model.  Membership only grows
    // within one inner solve: at large rho the first-order activity test
    // flickers with the floating-point noise of g(x), and toggling rho-scale
    // Gauss-Newton terms in and out makes the direction cycle.  Keeping a row
    // only overestimates curvature, which the line search tolerates.
    std::vector<char> curv(std::size_t(p.n_ineq), 0);
    for (int i = 0; i < p.n_ineq; ++i) curv[std::size_t(i)] = m.mu[i] > 0.0;

    int stall = 0;
    int it = 0;
    for (; it < max_inner; ++it) {
        SpMat jh(0, n), jg(0, n);
        Vec al_grad = cb.grad(x);
        if (p.n_eq) {
            jh = cb.jh(x);
            al_grad += jh.transpose() * Vec(m.rho * hv - m.lambda);
        }
        Vec mu_est;
        if (p.n_ineq) {
            jg = cb.jg(x);
            mu_est = ineq_estimate(gv, m);
            al_grad += jg.transpose() * Vec(-mu_est);
            for (int i = 0; i < p.n_ineq; ++i)
                if (mu_est[i] > 0.0) curv[std::size_t(i)] = 1;
        }

        double pg = (x - clamp_box(x - al_grad, p.lb, p.ub)).cwiseAbs().maxCoeff();
        if (pg <= omega) break;

        // Freeze box-active variables whose gradient pushes outward.
        std::vector<char> frozen(std::size_t(n), 0);
        for (int i = 0; i < n; ++i) {
            const bool at_lo = std::isfinite(p.lb[i]) && x[i] - p.lb[i] <= 0.0;
            const bool at_hi = std::isfinite(p.ub[i]) && p.ub[i] - x[i] <= 0.0;
            if ((at_lo && al_grad[i] > 0.0) || (at_hi && al_grad[i] < 0.0))
                frozen[std::size_t(i)] = 1;
        }

        // Model Hessian of the augmented Lagrangian.  Gauss-Newton terms of
        // dense active inequality rows would fill the matrix, so they are
        // split off and applied as a low-rank correction to the sparse
        // factorization.
        SpMat h = p.objective_hessian(x);
        if (h.rows() != n || h.cols() != n)
            throw InvalidInput("objective_hessian: wrong shape");
        if (p.n_eq) h = h + SpMat(m.rho * (SpMat(jh.transpose()) * jh));
        std::vector<int> dense_rows;
        if (p.n_ineq) {
            std::vector<int> row_nnz(std::size_t(p.n_ineq), 0);
            for (int k = 0; k < jg.outerSize(); ++k)
                for (SpMat::InnerIterator itr(jg, k); itr; ++itr)
                    ++row_nnz[std::size_t(itr.row())];
            const int dense_cut = std::max(32, n / 4);
            std::vector<char> is_dense(std::size_t(p.n_ineq), 0);
            for (int i = 0; i < p.n_ineq; ++i)
                if (curv[std::size_t(i)] && row_nnz[std::size_t(i)] > dense_cut) {
                    is_dense[std::size_t(i)] = 1;
                    dense_rows.push_back(i);
                }
            std::vector<SpTriplet> act_trip;
            for (int k = 0; k < jg.outerSize(); ++k)
                for (SpMat::InnerIterator itr(jg, k); itr; ++itr)
                    if (curv[std::size_t(itr.row())] && !is_dense[std::size_t(itr.row())])
                        act_trip.emplace_back(int(itr.row()), int(itr.col()), itr.value());
            SpMat jga(p.n_ineq, n);
            jga.setFromTriplets(act_trip.begin(), act_trip.end());
            h = h + SpMat(m.rho * (SpMat(jga.transpose()) * jga));
            if (p.ineq_hessian && mu_est.maxCoeff() > 0.0)
                h = h + p.ineq_hessian(x, Vec(-mu_est));
        }
        Mat u = Mat::Zero(Eigen::Index(dense_rows.size()), n);  // frozen columns zeroed
        if (!dense_rows.empty()) {
            std::vector<Eigen::Index> dense_pos(std::size_t(p.n_ineq), -1);
            for (std::size_t r = 0; r < dense_rows.size(); ++r)
                dense_pos[std::size_t(dense_rows[r])] = Eigen::Index(r);
            for (int k = 0; k < jg.outerSize(); ++k)
                for (SpMat::InnerIterator itr(jg, k); itr; ++itr) {
                    const Eigen::Index r = dense_pos[std::size_t(itr.row())];
                    if (r >= 0 && !frozen[std::size_t(itr.col())])
                        u(r, itr.col()) = itr.value();
                }
        }

        double diag_max = 1.0;
        for (int i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(h.coeff(i, i)));

        Vec d;
        bool have_newton = false;
        double tau = 0.0;
        for (int attempt = 0; attempt < 6 && !have_newton; ++attempt) {
            std::vector<SpTriplet> trip;
            trip.reserve(std::size_t(h.nonZeros()) + std::size_t(n));
            for (int k = 0; k < h.outerSize(); ++k)
                for (SpMat::InnerIterator itr(h, k); itr; ++itr)
                    if (!frozen[std::size_t(itr.row())] && !frozen[std::size_t(itr.col())])
                        trip.emplace_back(int(itr.row()), int(itr.col()), itr.value());
            for (int i = 0; i < n; ++i)
                trip.emplace_back(i, i, frozen[std::size_t(i)] ? 1.0 : tau);
            SpMat sys(n, n);
            sys.setFromTriplets(trip.begin(), trip.end());

            Eigen::SimplicialLDLT<SpMat> ldlt(sys);
            if (ldlt.info() == Eigen::Success) {
                Vec rhs = -al_grad;
                for (int i = 0; i < n; ++i)
                    if (frozen[std::size_t(i)]) rhs[i] = 0.0;
                Vec cand = ldlt.solve(rhs);
                if (dense_rows.size() && cand.allFinite()) {
                    // (H + rho U'U)^-1 rhs via the Woodbury identity.
                    const Mat y = ldlt.solve(u.transpose());
                    Mat s = u * y;
                    s.diagonal().array() += 1.0 / m.rho;
                    const Vec correction =
                        y * s.fullPivLu().solve(Vec(u * cand));
                    if (correction.allFinite()) cand -= correction;
                }
                if (cand.allFinite() && cand.dot(al_grad) < 0.0) {
                    d = std::move(cand);
                    have_newton = true;
                }
            }
            tau = (tau == 0.0) ? 1e-10 * diag_max : 100.0 * tau;
        }
        if (!have_newton) d = -al_grad;

        const double l_before = L;
        if (!armijo_arc(cb, p, m, d, al_grad, x, f, hv, gv, L)) {
            if (have_newton) {
                d = -al_grad;  // retry once along steepest descent
                if (!armijo_arc(cb, p, m, d, al_grad, x, f, hv, gv, L)) break;
            } else {
                break;
            }
        }
        // Accepted steps that no longer move the value are floating-point
        // churn; hand control back to the outer loop.
        if (l_before - L <= 1e-13 * std::max(1.0, std::abs(L))) {
            if (++stall >= 8) break;
        } else {
            stall = 0;
        }
    }
    st.x = x;
    st.hv = hv;
    st.gv = gv;
    st.f = f;
    st.iterations = it;
    return st;
}

struct OptimalityMeasure {
    double stationarity;
    double complementarity;
};

inline OptimalityMeasure lagrangian_residual(const Callbacks& cb, const NlpProblem& p,
                                             const Vec& x, const Vec& gv, const Vec& lambda,
                                             const Vec& mu) {
    Vec r = cb.grad(x);
    if (p.n_eq) r -= cb.jh(x).transpose() * lambda;
    if (p.n_ineq) r -= cb.jg(x).transpose() * mu;
    double station = (x - clamp_box(x - r, p.lb, p.ub)).cwiseAbs().maxCoeff();
    // Complementarity is scaled per row: a large multiplier on a tightly
    // active constraint must not amplify a feasibility-level residual.
    double comp = 0.0;
    for (Eigen::Index i = 0; i < gv.size(); ++i)
        comp = std::max(comp, std::abs(mu[i] * gv[i]) / (1.0 + mu[i]));
    return {station, comp};
}

// Penalty-independent multiplier estimate: least-squares fit of the
// stationarity system over the strictly interior coordinates, restricted to
// near-active inequalities.  The first-order estimates lambda - rho h(x)
// amplify the floating-point floor of the constraint residuals by rho, which
// caps the reachable KKT residual once the penalty is large; the fit does
// not.  Returns false when there is nothing to fit.
inline bool refine_duals(const Callbacks& cb, const NlpProblem& p, const Vec& x,
                         const Vec& gv, const Vec& mu_seed, Vec& lambda_out, Vec& mu_out) {
    std::vector<int> free_pos(std::size_t(p.dim), -1);
    int n_free = 0;
    for (int i = 0; i < p.dim; ++i) {
        const bool at_lo = std::isfinite(p.lb[i]) && x[i] - p.lb[i] <= 0.0;
        const bool at_hi = std::isfinite(p.ub[i]) && p.ub[i] - x[i] <= 0.0;
        if (!at_lo && !at_hi) free_pos[std::size_t(i)] = n_free++;
    }
    std::vector<int> act_pos(std::size_t(p.n_ineq), -1);
    int n_act = 0;
    for (int i = 0; i < p.n_ineq; ++i)
        if (gv[i] <= 1e-6 || mu_seed[i] > 0.0) act_pos[std::size_t(i)] = n_act++;
    const int cols = p.n_eq + n_act;
    if (cols == 0 || n_free == 0) return false;

    Mat sys = Mat::Zero(n_free, cols);
    if (p.n_eq) {
        const SpMat jh = cb.jh(x);
        for (int k = 0; k < jh.outerSize(); ++k)
            for (SpMat::InnerIterator it(jh, k); it; ++it) {
                const int fp = free_pos[std::size_t(it.col())];
                if (fp >= 0) sys(fp, it.row()) = it.value();
            }
    }
    SpMat jg(0, p.dim);
    if (p.n_ineq) {
        jg = cb.jg(x);
        for (int k = 0; k < jg.outerSize(); ++k)
            for (SpMat::InnerIterator it(jg, k); it; ++it) {
                const int fp = free_pos[std::size_t(it.col())];
                const int ap = act_pos[std::size_t(it.row())];
                if (fp >= 0 && ap >= 0) sys(fp, p.n_eq + ap) = it.value();
            }
    }
    const Vec grad = cb.grad(x);
    Vec rhs(n_free);
    for (int i = 0; i < p.dim; ++i)
        if (free_pos[std::size_t(i)] >= 0) rhs[free_pos[std::size_t(i)]] = grad[i];

    const Vec mult = sys.colPivHouseholderQr().solve(rhs);
    if (!mult.allFinite()) return false;
    lambda_out = mult.head(p.n_eq);
    mu_out = Vec::Zero(p.n_ineq);
    for (int i = 0; i < p.n_ineq; ++i)
        if (act_pos[std::size_t(i)] >= 0)
            mu_out[i] = std::max(0.0, mult[p.n_eq + act_pos[std::size_t(i)]]);
    return true;
}

inline SolveReport solve_single(const NlpProblem& p, const SolverConfig& cfg, Vec x0) {
    Callbacks cb{p, cfg.fd_step};
    Multipliers m{Vec::Zero(p.n_eq), Vec::Zero(p.n_ineq), cfg.penalty_init};

    SolveReport rep;
    Vec x = clamp_box(x0, p.lb, p.ub);
    double omega = std::max(1e-3, cfg.tol_kkt);
    double eta = 1e-1;
    double v_prev = kInf;
    int stalled = 0;

    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        InnerState st = p.objective_hessian
                            ? minimize_al_newton(cb, p, x, m, omega, cfg.max_inner)
                            : minimize_al(cb, p, x, m, omega, cfg.max_inner);
        x = st.x;
        rep.iterations += st.iterations;
        rep.outer_iterations = outer + 1;

        double v = feasibility(st.hv, st.gv);
        Vec lam_hat = eq_estimate(st.hv, m);
        Vec mu_hat = ineq_estimate(st.gv, m);
        OptimalityMeasure opt = lagrangian_residual(cb, p, x, st.gv, lam_hat, mu_hat);
        double kkt = std::max(opt.stationarity, opt.complementarity);

        // Near feasibility the first-order estimates hit a rho-amplified noise
        // floor; a least-squares fit is exact there and also sharpens the
        // multiplier carry below.
        if (kkt > cfg.tol_kkt && v <= std::max(eta, 1e3 * cfg.tol_feas)) {
            Vec lam_ls, mu_ls;
            if (refine_duals(cb, p, x, st.gv, mu_hat, lam_ls, mu_ls)) {
                const OptimalityMeasure opt_ls =
                    lagrangian_residual(cb, p, x, st.gv, lam_ls, mu_ls);
                const double kkt_ls = std::max(opt_ls.stationarity, opt_ls.complementarity);
                if (kkt_ls < kkt) {
                    lam_hat = std::move(lam_ls);
                    mu_hat = std::move(mu_ls);
                    opt = opt_ls;
                    kkt = kkt_ls;
                }
            }
        }

        rep.x = x;
        rep.objective = st.f;
        rep.kkt_residual = kkt;
        rep.constraint_violation = v;
        rep.eq_multipliers = lam_hat;
        rep.ineq_multipliers = mu_hat;

        if (v <= cfg.tol_feas && kkt <= cfg.tol_kkt) {
            rep.status = SolveStatus::optimal;
            return rep;
        }

        if (v <= std::max(eta, 10.0 * cfg.tol_feas)) {
            m.lambda = lam_hat;
            m.mu = mu_hat;
            omega = std::max(0.2 * omega, 0.1 * cfg.tol_kkt);
            eta = std::max(0.2 * eta, 0.5 * cfg.tol_feas);
        } else {
            m.rho = std::min(m.rho * cfg.penalty_growth, cfg.penalty_max);
        }

        // Declare infeasibility only after the penalty saturated high while
        // the violation stopped improving.
        if (v > std::max(1e3 * cfg.tol_feas, 1e-9) && v > 0.25 * v_prev &&
            m.rho >= std::min(1e8, cfg.penalty_max)) {
            if (++stalled >= 4) {
                rep.status = SolveStatus::infeasible;
                return rep;
            }
        } else {
            stalled = 0;
        }
        v_prev = v;
    }
    rep.status = (rep.constraint_violation > std::max(1e3 * cfg.tol_feas, 1e-9) &&
                  stalled > 0)
                     ? SolveStatus::infeasible
                     : SolveStatus::max_iter;
    return rep;
}

}  // namespace detail

// Least-squares KKT diagnostics at an arbitrary point.  Multipliers are
// estimated from the stationarity system restricted to active inequalities
// and clamped to be dual feasible; the same residual definition gates the
// solver's "optimal" status.
inline KktReport check_kkt(const NlpProblem& p, const Vec& x, const SolverConfig& cfg = {}) {
    p.validate();
    if (x.size() != p.dim) throw InvalidInput("check_kkt: point has wrong dimension");
    detail::Callbacks cb{p, cfg.fd_step};

    Vec grad = cb.grad(x);
    Vec hv = cb.h(x), gv = cb.g(x);
    Mat Jh = Mat(cb.jh(x));
    Mat Jg = Mat(cb.jg(x));

    double act_tol = std::max(1e-6, 10.0 * cfg.tol_feas);
    std::vector<int> active;
    for (int i = 0; i < p.n_ineq; ++i)
        if (gv[i] <= act_tol) active.push_back(i);

    KktReport rep;
    rep.eq_multipliers = Vec::Zero(p.n_eq);
    rep.ineq_multipliers = Vec::Zero(p.n_ineq);

    const int cols = p.n_eq + (int)active.size();
    if (cols > 0) {
        Mat M(p.dim, cols);
        for (int j = 0; j < p.n_eq; ++j) M.col(j) = Jh.row(j).transpose();
        for (std::size_t k = 0; k < active.size(); ++k)
            M.col(p.n_eq + (int)k) = Jg.row(active[k]).transpose();
        Vec mult = M.colPivHouseholderQr().solve(grad);
        for (int j = 0; j < p.n_eq; ++j) rep.eq_multipliers[j] = mult[j];
        for (std::size_t k = 0; k < active.size(); ++k)
            rep.ineq_multipliers[active[k]] = std::max(0.0, mult[p.n_eq + (int)k]);
    }

    Vec r = grad;
    if (p.n_eq) r -= Jh.transpose() * rep.eq_multipliers;
    if (p.n_ineq) r -= Jg.transpose() * rep.ineq_multipliers;
    double station = (x - detail::clamp_box(x - r, p.lb, p.ub)).cwiseAbs().maxCoeff();
    // Same scaled complementarity as the solver's optimality gate.
    double comp = 0.0;
    for (int i = 0; i < p.n_ineq; ++i)
        comp = std::max(comp, std::abs(rep.ineq_multipliers[i] * gv[i]) /
                                  (1.0 + rep.ineq_multipliers[i]));

    double box_viol = 0.0;
    for (int i = 0; i < p.dim; ++i) {
        if (std::isfinite(p.lb[i])) box_viol = std::max(box_viol, p.lb[i] - x[i]);
        if (std::isfinite(p.ub[i])) box_viol = std::max(box_viol, x[i] - p.ub[i]);
    }

    rep.kkt_residual = std::max(station, comp);
    rep.constraint_violation = std::max(detail::feasibility(hv, gv), box_viol);
    return rep;
}

inline SolveReport solve(const NlpProblem& p, const SolverConfig& cfg = {}) {
    p.validate();

    Vec x0;
    if (p.initial_guess.size() == p.dim) {
        x0 = p.initial_guess;
    } else {
        x0 = Vec::Zero(p.dim);  // midpoint where the box is bounded, else 0
        for (int i = 0; i < p.dim; ++i)
            if (std::isfinite(p.lb[i]) && std::isfinite(p.ub[i]))
                x0[i] = 0.5 * (p.lb[i] + p.ub[i]);
    }

    SolveReport best = detail::solve_single(p, cfg, x0);
    if (cfg.multistart <= 0) return best;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto better = [&](const SolveReport& a, const SolveReport& b) {
        bool fa = a.constraint_violation <= cfg.tol_feas;
        bool fb = b.constraint_violation <= cfg.tol_feas;
        if (fa != fb) return fa;
        if (fa) return a.objective < b.objective;
        return a.constraint_violation < b.constraint_violation;
    };
    for (int k = 0; k < cfg.multistart; ++k) {
        Vec xs(p.dim);
        for (int i = 0; i < p.dim; ++i) {
            double lo = std::isfinite(p.lb[i]) ? p.lb[i] : x0[i] - 10.0;
            double hi = std::isfinite(p.ub[i]) ? p.ub[i] : x0[i] + 10.0;
            xs[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * unit(rng);
        }
        SolveReport r = detail::solve_single(p, cfg, xs);
        r.iterations += best.iterations;  // keep the running total observable
        if (better(r, best)) best = r;
    }
    return best;
}

}  // namespace mompc_lab::nlp
