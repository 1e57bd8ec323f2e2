#pragma once

// Generic nonlinear program with box bounds, equality and inequality
// constraints.  Derivative callbacks are optional; the solver falls back to
// central finite differences when they are absent.

#include <functional>
#include <limits>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab::nlp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min f(x)  s.t.  h(x) = 0,  g(x) >= 0,  lb <= x <= ub
struct NlpProblem {
    int dim = 0;

    std::function<double(const Vec&)> objective;
    std::function<Vec(const Vec&)> gradient;  // optional analytic gradient

    Vec lb, ub;  // box bounds; +-inf entries allowed

    int n_eq = 0;
    std::function<Vec(const Vec&)> eq;             // h(x), size n_eq
    std::function<SpMat(const Vec&)> eq_jacobian;  // optional, n_eq x dim

    int n_ineq = 0;
    std::function<Vec(const Vec&)> ineq;             // g(x), size n_ineq
    std::function<SpMat(const Vec&)> ineq_jacobian;  // optional, n_ineq x dim

    // Optional curvature callbacks.  objective_hessian returns Hess f(x);
    // ineq_hessian returns sum_i w_i Hess g_i(x) for caller weights.  When
    // objective_hessian is set the solver switches its inner loop from
    // L-BFGS to a damped projected Newton method with sparse factorizations.
    std::function<SpMat(const Vec&)> objective_hessian;
    std::function<SpMat(const Vec&, const Vec&)> ineq_hessian;

    Vec initial_guess;

    void validate() const {
        if (dim <= 0) throw InvalidInput("NlpProblem: dim must be positive");
        if (!objective) throw InvalidInput("NlpProblem: objective is required");
        if (lb.size() != dim || ub.size() != dim)
            throw InvalidInput("NlpProblem: bounds must have length dim");
        for (int i = 0; i < dim; ++i) {
            if (std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] > ub[i])
                throw InfeasibleProblem("NlpProblem: empty box in variable " +
                                        std::to_string(i));
        }
        if (n_eq > 0 && !eq) throw InvalidInput("NlpProblem: n_eq > 0 without eq callback");
        if (n_ineq > 0 && !ineq)
            throw InvalidInput("NlpProblem: n_ineq > 0 without ineq callback");
        if (initial_guess.size() != 0 && initial_guess.size() != dim)
            throw InvalidInput("NlpProblem: initial guess has wrong length");
    }

    // Unbounded box helper.
    static Vec free_bounds(int dim, double sign) {
        return Vec::Constant(dim, sign * kInf);
    }
};

struct SolverConfig {
    double tol_kkt = 1e-8;
    double tol_feas = 1e-8;
    int max_outer = 40;
    int max_inner = 400;
    double fd_step = 1e-6;  // relative central-difference step
    double penalty_init = 10.0;
    double penalty_growth = 10.0;
    double penalty_max = 1e12;
    int lbfgs_memory = 15;
    int multistart = 0;  // additional seeded random starts (0 = single start)
    unsigned seed = 0;
};

enum class SolveStatus { optimal, max_iter, infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

struct SolveReport {
    SolveStatus status = SolveStatus::max_iter;
    Vec x;
    double objective = 0.0;
    double kkt_residual = kInf;
    double constraint_violation = kInf;
    int iterations = 0;        // accumulated inner iterations
    int outer_iterations = 0;  // multiplier/penalty updates
    Vec eq_multipliers;
    Vec ineq_multipliers;
};

struct KktReport {
    double kkt_residual = kInf;          // stationarity + complementarity
    double constraint_violation = kInf;  // max of eq/ineq/bound violation
    Vec eq_multipliers;
    Vec ineq_multipliers;
};

}  // namespace mompc_lab::nlp
