#pragma once

// Central finite differences with per-coordinate relative steps.

#include <functional>

#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab::nlp {

inline double fd_coord_step(double x, double rel_step) {
    return rel_step * std::max(1.0, std::abs(x));
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double rel_step) {
    Vec g(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = fd_coord_step(x[i], rel_step);
        double xi = x[i];
        xp[i] = xi + h;
        double fp = f(xp);
        xp[i] = xi - h;
        double fm = f(xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& x, int n_out,
                       double rel_step) {
    Mat J(n_out, x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double h = fd_coord_step(x[i], rel_step);
        double xi = x[i];
        xp[i] = xi + h;
        Vec fp = F(xp);
        xp[i] = xi - h;
        Vec fm = F(xp);
        xp[i] = xi;
        J.col(i) = (fp - fm) / (2.0 * h);
    }
    return J;
}

inline SpMat fd_jacobian_sparse(const std::function<Vec(const Vec&)>& F, const Vec& x,
                                int n_out, double rel_step) {
    return fd_jacobian(F, x, n_out, rel_step).sparseView();
}

}  // namespace mompc_lab::nlp
