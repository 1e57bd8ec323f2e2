#pragma once

// Discrete-time dynamics out of a continuous-time right-hand side.  One
// macro step is the composition of M Heun (explicit trapezoid) steps, each
// second order in the micro step.  Central differences supply the step-map
// linearization used by the terminal synthesis and the shooting Jacobians.

#include <functional>
#include <utility>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/nlp/fd.hpp"

namespace mompc_lab::mpc {

// Right-hand side x' = rhs(x, u); any disturbance is baked into the closure.
using OdeRhs = std::function<Vec(const Vec&, const Vec&)>;
// Discrete step map w+ = f(w, v).
using StepMap = std::function<Vec(const Vec&, const Vec&)>;

struct StepLinearization {
    Mat a;  // d f / d w
    Mat b;  // d f / d v
};

// Analytic Jacobians of the step map; optional, finite differences otherwise.
using StepJacFn = std::function<StepLinearization(const Vec&, const Vec&)>;

struct DiscreteDynamics {
    int n_w = 0;
    int n_v = 0;
    StepMap step;
    StepJacFn jacobians;  // optional analytic derivatives of step
    Vec w_lb, w_ub;  // stage state box, +-inf entries allowed
    Vec v_lb, v_ub;  // stage input box
    Vec disturbance;  // held piecewise constant; informational

    void validate() const {
        if (n_w <= 0 || n_v <= 0) throw InvalidInput("DiscreteDynamics: empty dimensions");
        if (!step) throw InvalidInput("DiscreteDynamics: step map is required");
        if (w_lb.size() != n_w || w_ub.size() != n_w)
            throw InvalidInput("DiscreteDynamics: state box must have length n_w");
        if (v_lb.size() != n_v || v_ub.size() != n_v)
            throw InvalidInput("DiscreteDynamics: input box must have length n_v");
        for (int i = 0; i < n_w; ++i)
            if (!(w_lb[i] <= w_ub[i])) throw InvalidInput("DiscreteDynamics: empty state box");
        for (int i = 0; i < n_v; ++i)
            if (!(v_lb[i] <= v_ub[i])) throw InvalidInput("DiscreteDynamics: empty input box");
    }
};

inline Vec heun_step(const OdeRhs& rhs, const Vec& x, const Vec& u, double h) {
    const Vec k1 = rhs(x, u);
    const Vec k2 = rhs(x + h * k1, u);
    Vec next = x + 0.5 * h * (k1 + k2);
    if (!next.allFinite()) throw NumericalError("heun_step: non-finite state update");
    return next;
}

inline StepMap heun_discretize(OdeRhs rhs, double h_micro, int substeps) {
    if (!rhs) throw InvalidInput("heun_discretize: missing right-hand side");
    if (!(h_micro > 0.0)) throw InvalidInput("heun_discretize: step size must be positive");
    if (substeps < 1) throw InvalidInput("heun_discretize: need at least one substep");
    return [rhs = std::move(rhs), h_micro, substeps](const Vec& w, const Vec& v) {
        Vec x = w;
        for (int m = 0; m < substeps; ++m) x = heun_step(rhs, x, v, h_micro);
        return x;
    };
}

inline StepLinearization linearize_step(const StepMap& f, const Vec& w, const Vec& v,
                                        double rel_step = 1e-5) {
    if (!f) throw InvalidInput("linearize_step: missing step map");
    const int n_w = int(w.size());
    StepLinearization lin;
    lin.a = nlp::fd_jacobian([&](const Vec& x) { return f(x, v); }, w, n_w, rel_step);
    lin.b = nlp::fd_jacobian([&](const Vec& u) { return f(w, u); }, v, n_w, rel_step);
    if (!lin.a.allFinite() || !lin.b.allFinite())
        throw NumericalError("linearize_step: non-finite linearization");
    return lin;
}

// Right-hand-side Jacobians (d rhs / d x, d rhs / d u) at a point.
using OdeJacFn = std::function<StepLinearization(const Vec&, const Vec&)>;

// Exact chain rule of the Heun composition: one substep has
//   x+ = x + (h/2) (f(x,u) + f(x + h f(x,u), u)),
// so with J1 = df/dx(x,u), J2 = df/dx(x2,u), G1/G2 the input Jacobians,
//   A = I + (h/2) (J1 + J2 (I + h J1)),  B = (h/2) (G1 + G2 + h J2 G1).
inline StepJacFn heun_discretize_jacobians(OdeRhs rhs, OdeJacFn jac, double h_micro,
                                           int substeps) {
    if (!rhs || !jac) throw InvalidInput("heun_discretize_jacobians: missing callbacks");
    if (!(h_micro > 0.0) || substeps < 1)
        throw InvalidInput("heun_discretize_jacobians: bad step configuration");
    return [rhs = std::move(rhs), jac = std::move(jac), h_micro,
            substeps](const Vec& w, const Vec& v) {
        const int n = int(w.size());
        StepLinearization total;
        total.a = Mat::Identity(n, n);
        total.b = Mat::Zero(n, v.size());
        Vec x = w;
        for (int m = 0; m < substeps; ++m) {
            const Vec k1 = rhs(x, v);
            const Vec x2 = x + h_micro * k1;
            const StepLinearization d1 = jac(x, v);
            const StepLinearization d2 = jac(x2, v);
            Mat a = Mat::Identity(n, n) +
                    0.5 * h_micro * (d1.a + d2.a * (Mat::Identity(n, n) + h_micro * d1.a));
            Mat b = 0.5 * h_micro * (d1.b + d2.b + h_micro * d2.a * d1.b);
            total.b = a * total.b + b;
            total.a = a * total.a;
            x = x + 0.5 * h_micro * (k1 + rhs(x2, v));
        }
        if (!total.a.allFinite() || !total.b.allFinite())
            throw NumericalError("heun_discretize_jacobians: non-finite linearization");
        return total;
    };
}

// Step-map linearization for a DiscreteDynamics: analytic when provided.
inline StepLinearization linearize_dynamics(const DiscreteDynamics& dyn, const Vec& w,
                                            const Vec& v, double rel_step = 1e-5) {
    if (dyn.jacobians) return dyn.jacobians(w, v);
    return linearize_step(dyn.step, w, v, rel_step);
}

}  // namespace mompc_lab::mpc
