#pragma once

// Scalarization of multi-objective programs.
//
// Two formulations share one parameter layout: a plain weighted sum, and a
// goal-attainment program that shoots a ray from an origin point along a
// direction and maximizes how far the ray can be pushed while the objective
// vector stays dominated by the ray point (Pascoletti-Serafini with the
// nonnegative-orthant ordering cone).  A switch value of 1 degenerates the
// latter into the former, which is how individual minima and decision-making
// solves run through identical machinery.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mompc_lab/core/moo.hpp"
#include "mompc_lab/nlp/solver.hpp"
#include "mompc_lab/scalarize/mo_problem.hpp"

namespace mompc_lab::scalarize {

enum class Formulation { weighted_sum, pascoletti_serafini };

// Unified parameter block.  Field use by formulation:
//   weighted_sum:         ws_weight
//   pascoletti_serafini:  ws_weight, im_switch, shoot_origin, shoot_dir
// Unused fields are zero-filled.
struct ScalarizationParam {
    Formulation form = Formulation::weighted_sum;
    Vec ws_weight;
    double im_switch = 0.0;  // sigma in [0,1]; 1 reduces to the weighted sum
    Vec shoot_origin;
    Vec shoot_dir;

    void validate(int n_obj) const {
        auto check_len = [&](const Vec& v, const char* name) {
            if (v.size() != n_obj)
                throw InvalidInput(std::string("ScalarizationParam: ") + name +
                                   " must have one entry per objective");
        };
        if (form == Formulation::weighted_sum) {
            check_len(ws_weight, "ws_weight");
            return;
        }
        if (im_switch < 0.0 || im_switch > 1.0)
            throw InvalidInput("ScalarizationParam: im_switch must lie in [0, 1]");
        if (im_switch > 0.0) check_len(ws_weight, "ws_weight");
        if (im_switch < 1.0) {
            check_len(shoot_origin, "shoot_origin");
            check_len(shoot_dir, "shoot_dir");
            if (shoot_dir.cwiseAbs().maxCoeff() <= 0.0)
                throw InvalidInput("ScalarizationParam: shoot_dir must be nonzero");
        }
    }
};

// Identity weight for objective i with a ridge that keeps every other
// objective marginally active, so that minimizers stay unique in flat
// regions.  Entries: delta off the pivot, 1 - delta*(n-1) at the pivot.
inline Vec regularized_basis(int i, int n_obj, double delta) {
    if (n_obj < 2 || i < 0 || i >= n_obj)
        throw InvalidInput("regularized_basis: index out of range");
    if (delta < 0.0 || delta >= 1.0 / double(n_obj))
        throw InvalidInput("regularized_basis: delta must satisfy 0 <= delta < 1/n");
    Vec w = Vec::Constant(n_obj, delta);
    w[i] = 1.0 - delta * double(n_obj - 1);
    return w;
}

inline ScalarizationParam im_param(Formulation form, int i, int n_obj, double delta) {
    ScalarizationParam p;
    p.form = form;
    p.ws_weight = regularized_basis(i, n_obj, delta);
    p.im_switch = 1.0;
    p.shoot_origin = Vec::Zero(n_obj);
    p.shoot_dir = Vec::Zero(n_obj);
    return p;
}

// ---------------------------------------------------------------------------

enum class DmMethod { ws_pref, ws_knee, ps_normal, ps_quasi, ps_visual, ps_nadir };

inline const char* to_string(DmMethod m) {
    switch (m) {
        case DmMethod::ws_pref: return "ws-pref";
        case DmMethod::ws_knee: return "ws-knee";
        case DmMethod::ps_normal: return "ps-normal";
        case DmMethod::ps_quasi: return "ps-quasi";
        case DmMethod::ps_visual: return "ps-visual";
        case DmMethod::ps_nadir: return "ps-nadir";
    }
    return "unknown";
}

inline DmMethod dm_method_from_string(const std::string& s) {
    if (s == "ws-pref") return DmMethod::ws_pref;
    if (s == "ws-knee") return DmMethod::ws_knee;
    if (s == "ps-normal") return DmMethod::ps_normal;
    if (s == "ps-quasi") return DmMethod::ps_quasi;
    if (s == "ps-visual") return DmMethod::ps_visual;
    if (s == "ps-nadir") return DmMethod::ps_nadir;
    throw InvalidInput("unknown decision method: " + s);
}

inline void validate_preference(const Vec& beta, Eigen::Index n_obj) {
    if (beta.size() != n_obj) throw InvalidInput("preference: wrong length");
    if ((beta.array() < -1e-12).any() || (beta.array() > 1.0 + 1e-12).any())
        throw InvalidInput("preference: entries must lie in [0, 1]");
    if (std::abs(beta.sum() - 1.0) > 1e-9)
        throw InvalidInput("preference: entries must sum to one");
}

struct DmParam {
    ScalarizationParam param;
    // Set when a knee-point weight has mixed signs; the solve still runs (it
    // is then a farthest-hyperplane search, not a plain weighted sum).
    bool mixed_sign_warning = false;
};

inline DmParam dm_param(DmMethod method, const PayoffSummary& s, const Vec& beta_pref) {
    validate_preference(beta_pref, s.n_obj());
    const Eigen::Index n = s.n_obj();
    DmParam out;
    ScalarizationParam& p = out.param;
    p.ws_weight = Vec::Zero(n);
    p.shoot_origin = Vec::Zero(n);
    p.shoot_dir = Vec::Zero(n);
    switch (method) {
        case DmMethod::ws_pref:
            p.form = Formulation::weighted_sum;
            p.ws_weight = s.scale.asDiagonal() * beta_pref;
            break;
        case DmMethod::ws_knee:
            p.form = Formulation::weighted_sum;
            p.ws_weight = -s.chim_normal;
            out.mixed_sign_warning = (p.ws_weight.minCoeff() < 0.0);
            break;
        case DmMethod::ps_normal:
            p.form = Formulation::pascoletti_serafini;
            p.shoot_origin = s.simplex_point(beta_pref);
            p.shoot_dir = s.chim_normal;
            break;
        case DmMethod::ps_quasi:
            p.form = Formulation::pascoletti_serafini;
            p.shoot_origin = s.simplex_point(beta_pref);
            p.shoot_dir = s.quasi_normal_center;
            break;
        case DmMethod::ps_visual:
            p.form = Formulation::pascoletti_serafini;
            p.shoot_origin = s.simplex_point(beta_pref);
            p.shoot_dir = s.visual_normal;
            break;
        case DmMethod::ps_nadir: {
            p.form = Formulation::pascoletti_serafini;
            p.shoot_origin = s.nadir;
            Vec dir = s.simplex_point(beta_pref) - s.nadir;
            if (dir.cwiseAbs().maxCoeff() <= 0.0)
                throw InvalidInput("dm_param: preference point coincides with nadir");
            p.shoot_dir = dir;
            break;
        }
    }
    return out;
}

// Ray direction covering the whole front: nested right-angle spherical
// coordinates over the negative orthant, stretched by the objective ranges.
// tau has one entry per angle, each in [0, 1]; corners map to the axes.
inline Vec sri_direction(const Vec& tau, const PayoffSummary& s) {
    const Eigen::Index n = s.n_obj();
    if (tau.size() != n - 1) throw InvalidInput("sri_direction: tau must have n-1 entries");
    if ((tau.array() < 0.0).any() || (tau.array() > 1.0).any())
        throw InvalidInput("sri_direction: tau entries must lie in [0, 1]");
    Vec seg(n);
    double radial = 1.0;
    for (Eigen::Index k = 0; k < n - 1; ++k) {
        double a = tau[k] * std::numbers::pi / 2.0;
        seg[k] = radial * std::cos(a);
        radial *= std::sin(a);
    }
    seg[n - 1] = radial;
    Vec inv_scale = s.scale.cwiseInverse();
    return inv_scale.asDiagonal() * (-seg);
}

// All weights with entries k/m on the unit simplex, ascending
// lexicographically in the leading components.  Size: C(m + n - 1, n - 1).
inline std::vector<Vec> unit_simplex_grid(int n, int m) {
    if (n < 1 || m < 1) throw InvalidInput("unit_simplex_grid: need n >= 1, m >= 1");
    std::vector<Vec> grid;
    Vec current = Vec::Zero(n);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n - 1) {
            current[pos] = double(remaining) / double(m);
            grid.push_back(current);
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            current[pos] = double(k) / double(m);
            self(self, pos + 1, remaining - k);
        }
    };
    rec(rec, 0, m);
    return grid;
}

// ---------------------------------------------------------------------------
// Assembly of the scalar NLP.

struct BuildOptions {
    // Positive per-objective factors applied to cone and descent rows.  They
    // do not change the feasible set; they equalize row magnitudes for the
    // solver.  Empty means all ones.
    Vec row_scale;
    double descent_slack = 1e-9;
};

struct ScalarizedNlp {
    nlp::NlpProblem nlp;
    bool has_level_var = false;  // extra trailing variable when shooting
    int cone_offset = -1;        // row offsets into nlp.ineq, -1 when absent
    int descent_offset = -1;
};

namespace detail {

inline SpMat widen(const SpMat& a, int extra_cols) {
    SpMat out(a.rows(), a.cols() + extra_cols);
    std::vector<SpTriplet> trip;
    trip.reserve(std::size_t(a.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            trip.emplace_back(int(it.row()), int(it.col()), it.value());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

// Square matrix padded with trailing zero rows/columns up to dim.
inline SpMat embed_square(const SpMat& a, int dim) {
    if (a.rows() == dim) return a;
    SpMat out(dim, dim);
    std::vector<SpTriplet> trip;
    trip.reserve(std::size_t(a.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            trip.emplace_back(int(it.row()), int(it.col()), it.value());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace detail

inline ScalarizedNlp build_scalarized(const MoProblem& mo, const ScalarizationParam& param,
                                      const DescentBound& descent,
                                      const BuildOptions& opts = {}) {
    mo.validate();
    param.validate(mo.n_obj);
    if (descent.finite() && descent.size() != mo.n_obj)
        throw InvalidInput("build_scalarized: descent bound has wrong length");

    Vec row_scale = opts.row_scale.size() ? opts.row_scale : Vec::Ones(mo.n_obj);
    if (row_scale.size() != mo.n_obj || (row_scale.array() <= 0.0).any())
        throw InvalidInput("build_scalarized: row_scale must be positive per objective");

    const double sigma = (param.form == Formulation::weighted_sum) ? 1.0 : param.im_switch;
    const bool shooting = sigma < 1.0;
    const int n_obj = mo.n_obj;
    const int dim = mo.dim + (shooting ? 1 : 0);
    const int n_cone = shooting ? n_obj : 0;
    const int n_descent = descent.finite() ? n_obj : 0;
    const double cone_factor = 1.0 - sigma;

    ScalarizedNlp out;
    out.has_level_var = shooting;
    nlp::NlpProblem& p = out.nlp;
    p.dim = dim;

    const ScalarizationParam prm = param;  // captured by value below
    const Vec w = (sigma > 0.0) ? Vec(prm.ws_weight) : Vec(Vec::Zero(n_obj));
    const double slack = opts.descent_slack;
    const Vec db = descent.finite() ? descent.values() : Vec();
    auto mo_obj = mo.objectives;

    // Objective: (1 - sigma) * (-l) + sigma * w' J(x)
    p.objective = [mo_obj, w, sigma, shooting, dim](const Vec& z) {
        double val = 0.0;
        if (sigma > 0.0) val += sigma * w.dot(mo_obj(z.head(dim - (shooting ? 1 : 0))));
        if (shooting) val += -(1.0 - sigma) * z[dim - 1];
        return val;
    };
    if (mo.objective_jacobian) {
        auto mo_jac = mo.objective_jacobian;
        p.gradient = [mo_jac, w, sigma, shooting, dim](const Vec& z) {
            Vec g = Vec::Zero(dim);
            const int nx = dim - (shooting ? 1 : 0);
            if (sigma > 0.0) g.head(nx) = sigma * mo_jac(z.head(nx)).transpose() * w;
            if (shooting) g[dim - 1] = -(1.0 - sigma);
            return g;
        };
    }
    if (mo.objective_hessians) {
        auto moh = mo.objective_hessians;
        const int nx = mo.dim;
        if (sigma > 0.0) {
            const Vec hw = sigma * w;
            p.objective_hessian = [moh, hw, nx, dim](const Vec& z) {
                return detail::embed_square(moh(z.head(nx), hw), dim);
            };
        } else {
            p.objective_hessian = [dim](const Vec&) { return SpMat(dim, dim); };
        }
    }

    // Box bounds; the level variable is free.
    p.lb = Vec::Constant(dim, -nlp::kInf);
    p.ub = Vec::Constant(dim, nlp::kInf);
    p.lb.head(mo.dim) = mo.lb;
    p.ub.head(mo.dim) = mo.ub;

    // Equalities pass through unchanged.
    p.n_eq = mo.n_eq;
    if (mo.n_eq) {
        auto mo_eq = mo.eq;
        const int nx = mo.dim;
        p.eq = [mo_eq, nx](const Vec& z) { return mo_eq(z.head(nx)); };
        if (mo.eq_jacobian) {
            auto mo_eq_jac = mo.eq_jacobian;
            const int extra = shooting ? 1 : 0;
            p.eq_jacobian = [mo_eq_jac, nx, extra](const Vec& z) {
                SpMat j = mo_eq_jac(z.head(nx));
                return extra ? detail::widen(j, extra) : j;
            };
        }
    }

    // Inequalities: native rows, then cone rows, then descent rows.
    p.n_ineq = mo.n_ineq + n_cone + n_descent;
    out.cone_offset = n_cone ? mo.n_ineq : -1;
    out.descent_offset = n_descent ? mo.n_ineq + n_cone : -1;
    if (p.n_ineq) {
        auto mo_ineq = mo.ineq;
        const int nx = mo.dim;
        const int n_native = mo.n_ineq;
        p.ineq = [mo_ineq, mo_obj, prm, row_scale, db, slack, cone_factor, nx, n_native,
                  n_cone, n_descent](const Vec& z) {
            Vec g(n_native + n_cone + n_descent);
            if (n_native) g.head(n_native) = mo_ineq(z.head(nx));
            if (n_cone || n_descent) {
                Vec j = mo_obj(z.head(nx));
                if (n_cone) {
                    double l = z[z.size() - 1];
                    for (int i = 0; i < n_cone; ++i)
                        g[n_native + i] = cone_factor * row_scale[i] *
                                          (prm.shoot_origin[i] + l * prm.shoot_dir[i] - j[i]);
                }
                for (int i = 0; i < n_descent; ++i)
                    g[n_native + n_cone + i] = row_scale[i] * (db[i] + slack - j[i]);
            }
            return g;
        };
        const bool have_native_jac = (mo.n_ineq == 0) || bool(mo.ineq_jacobian);
        if (have_native_jac && mo.objective_jacobian) {
            auto mo_ineq_jac = mo.ineq_jacobian;
            auto mo_jac = mo.objective_jacobian;
            const bool shoot = shooting;
            const int dim_total = dim;
            p.ineq_jacobian = [mo_ineq_jac, mo_jac, prm, row_scale, cone_factor, nx,
                               n_native, n_cone, n_descent, shoot,
                               dim_total](const Vec& z) {
                std::vector<SpTriplet> trip;
                if (n_native) {
                    SpMat jn = mo_ineq_jac(z.head(nx));
                    for (int k = 0; k < jn.outerSize(); ++k)
                        for (SpMat::InnerIterator it(jn, k); it; ++it)
                            trip.emplace_back(int(it.row()), int(it.col()), it.value());
                }
                if (n_cone || n_descent) {
                    Mat jj = mo_jac(z.head(nx));
                    for (int i = 0; i < n_cone; ++i) {
                        double f = cone_factor * row_scale[i];
                        for (int c = 0; c < nx; ++c) {
                            double v = -f * jj(i, c);
                            if (v != 0.0) trip.emplace_back(n_native + i, c, v);
                        }
                        trip.emplace_back(n_native + i, dim_total - 1,
                                          f * prm.shoot_dir[i]);
                    }
                    for (int i = 0; i < n_descent; ++i) {
                        int r = n_native + n_cone + i;
                        for (int c = 0; c < nx; ++c) {
                            double v = -row_scale[i] * jj(i, c);
                            if (v != 0.0) trip.emplace_back(r, c, v);
                        }
                    }
                }
                SpMat out_j(n_native + n_cone + n_descent, dim_total);
                out_j.setFromTriplets(trip.begin(), trip.end());
                return out_j;
            };
        }
        // Row curvature: native rows through the problem's own callback,
        // cone and descent rows through the objective Hessians (their
        // Hessian is the negated, scaled objective Hessian).
        if ((mo.objective_hessians && (n_cone || n_descent)) ||
            (mo.ineq_hessians && mo.n_ineq)) {
            auto moh = mo.objective_hessians;
            auto mih = mo.ineq_hessians;
            const int nx = mo.dim;
            const int n_obj_rows = n_obj;
            p.ineq_hessian = [moh, mih, row_scale, cone_factor, nx, n_native, n_cone,
                              n_descent, n_obj_rows, dim](const Vec& z, const Vec& wrow) {
                SpMat acc(dim, dim);
                const Vec xz = z.head(nx);
                if (mih && n_native)
                    acc = acc + detail::embed_square(mih(xz, Vec(wrow.head(n_native))), dim);
                if (moh && (n_cone || n_descent)) {
                    Vec wobj = Vec::Zero(n_obj_rows);
                    for (int i = 0; i < n_cone; ++i)
                        wobj[i] -= cone_factor * row_scale[i] * wrow[n_native + i];
                    for (int i = 0; i < n_descent; ++i)
                        wobj[i] -= row_scale[i] * wrow[n_native + n_cone + i];
                    if (wobj.cwiseAbs().maxCoeff() > 0.0)
                        acc = acc + detail::embed_square(moh(xz, wobj), dim);
                }
                return acc;
            };
        }
    }

    // Starting point: caller guess for x; the level variable starts at the
    // largest value keeping the ray point dominating J(x0), when defined.
    if (mo.initial_guess.size() == mo.dim) {
        Vec z0(dim);
        z0.head(mo.dim) = mo.initial_guess;
        if (shooting) {
            Vec j0 = mo.objectives(mo.initial_guess);
            double l_lo = -nlp::kInf, l_hi = nlp::kInf;
            for (int i = 0; i < n_obj; ++i) {
                double need = j0[i] - prm.shoot_origin[i];
                if (prm.shoot_dir[i] > 1e-300)
                    l_lo = std::max(l_lo, need / prm.shoot_dir[i]);
                else if (prm.shoot_dir[i] < -1e-300)
                    l_hi = std::min(l_hi, need / prm.shoot_dir[i]);
                else if (need > 0.0)
                    l_lo = nlp::kInf;  // row can never hold; start neutral
            }
            double l0 = 0.0;
            if (std::isfinite(l_hi))
                l0 = std::max(l_hi, std::isfinite(l_lo) ? l_lo : l_hi);
            else if (std::isfinite(l_lo))
                l0 = l_lo;
            z0[dim - 1] = std::isfinite(l0) ? l0 : 0.0;
        }
        p.initial_guess = z0;
    }

    return out;
}

// ---------------------------------------------------------------------------
// Individual minima and decision solves.

struct ImResult {
    Mat phi;  // pay-off matrix: column i = J at the minimizer of objective i
    std::vector<Vec> minimizers;
    std::vector<nlp::SolveReport> reports;
};

inline ImResult compute_individual_minima(const MoProblem& mo, Formulation form,
                                          double delta, const nlp::SolverConfig& cfg = {},
                                          const std::vector<Vec>& warm_starts = {}) {
    mo.validate();
    ImResult res;
    res.phi = Mat(mo.n_obj, mo.n_obj);
    res.minimizers.resize(mo.n_obj);
    res.reports.resize(mo.n_obj);
    for (int i = 0; i < mo.n_obj; ++i) {
        ScalarizationParam prm = im_param(form, i, mo.n_obj, delta);
        ScalarizedNlp sn = build_scalarized(mo, prm, DescentBound::unbounded(mo.n_obj));
        if (i < (int)warm_starts.size() && warm_starts[i].size() == sn.nlp.dim)
            sn.nlp.initial_guess = warm_starts[i];
        nlp::SolveReport rep = nlp::solve(sn.nlp, cfg);
        res.minimizers[i] = rep.x.head(mo.dim);
        res.phi.col(i) = mo.objectives(res.minimizers[i]);
        res.reports[i] = std::move(rep);
    }
    return res;
}

struct DmResult {
    Vec x;  // minimizer in the original decision space
    Vec j;  // objective vector at x
    nlp::SolveReport report;
    bool mixed_sign_warning = false;
    bool descent_ok = true;
};

inline DmResult solve_dm(const MoProblem& mo, DmMethod method, const PayoffSummary& summary,
                         const Vec& beta_pref, const DescentBound& descent,
                         const nlp::SolverConfig& cfg = {}, const Vec& warm_start = Vec(),
                         double descent_check_slack = 1e-8,
                         const BuildOptions& build_opts = {}) {
    DmParam dp = dm_param(method, summary, beta_pref);
    BuildOptions opts = build_opts;
    if (opts.row_scale.size() == 0) opts.row_scale = summary.scale;
    ScalarizedNlp sn = build_scalarized(mo, dp.param, descent, opts);
    if (warm_start.size() == mo.dim) {
        MoProblem tmp = mo;  // reuse the level-variable initialization logic
        tmp.initial_guess = warm_start;
        sn = build_scalarized(tmp, dp.param, descent, opts);
    } else if (warm_start.size() == sn.nlp.dim) {
        sn.nlp.initial_guess = warm_start;
    }
    DmResult res;
    res.mixed_sign_warning = dp.mixed_sign_warning;
    res.report = nlp::solve(sn.nlp, cfg);
    res.x = res.report.x.head(mo.dim);
    res.j = mo.objectives(res.x);
    res.descent_ok = descent_admissible(res.j, descent, descent_check_slack);
    return res;
}

}  // namespace mompc_lab::scalarize
