#pragma once

// A multi-objective program: a vector of objectives over a common feasible
// set described with the same building blocks as NlpProblem.  Derivative
// callbacks are optional and flow through to the scalarized programs.

#include <functional>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab::scalarize {

struct MoProblem {
    int dim = 0;
    int n_obj = 0;

    std::function<Vec(const Vec&)> objectives;          // J(x), size n_obj
    std::function<Mat(const Vec&)> objective_jacobian;  // optional, n_obj x dim

    Vec lb, ub;

    int n_eq = 0;
    std::function<Vec(const Vec&)> eq;
    std::function<SpMat(const Vec&)> eq_jacobian;

    int n_ineq = 0;
    std::function<Vec(const Vec&)> ineq;
    std::function<SpMat(const Vec&)> ineq_jacobian;

    // Optional curvature: weighted Hessian combinations sum_i w_i Hess J_i(x)
    // and sum_i w_i Hess g_i(x).  Their presence unlocks the Newton inner
    // loop of the solver on the scalarized programs.
    std::function<SpMat(const Vec&, const Vec&)> objective_hessians;
    std::function<SpMat(const Vec&, const Vec&)> ineq_hessians;

    Vec initial_guess;

    void validate() const {
        if (dim <= 0 || n_obj < 2)
            throw InvalidInput("MoProblem: need dim > 0 and at least two objectives");
        if (!objectives) throw InvalidInput("MoProblem: objectives callback is required");
        if (lb.size() != dim || ub.size() != dim)
            throw InvalidInput("MoProblem: bounds must have length dim");
        if (n_eq > 0 && !eq) throw InvalidInput("MoProblem: n_eq > 0 without eq callback");
        if (n_ineq > 0 && !ineq)
            throw InvalidInput("MoProblem: n_ineq > 0 without ineq callback");
    }
};

}  // namespace mompc_lab::scalarize
