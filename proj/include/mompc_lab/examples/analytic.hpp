#pragma once

// Closed-form benchmark image sets.  Both problems map decisions directly to
// objectives, J(x) = x, so the feasible image set equals the feasible set:
// a solid ellipsoid with semi-axes (1, 10, 100), alone or cut by three
// half-spaces.  Their fronts have analytic samplers, which makes them exact
// references for the front-geometry metrics.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/scalarize/mo_problem.hpp"

namespace mompc_lab::examples {

inline Vec ellipsoid_semi_axes() {
    Vec a(3);
    a << 1.0, 10.0, 100.0;
    return a;
}

// Half-space cuts x : a.dot(x) >= b through the ellipsoid.  Each cut removes
// a cap of the front and exposes a flat facet; a strictly positive normal
// keeps every facet point Pareto-optimal.  In the unit-sphere coordinates
// s = -diag(1/semi_axes) x of the front, a cut is the cap of angular radius
// psi around the axis u: a = u/semi_axes (componentwise), b = -cos(psi).
struct HalfSpaceCut {
    Vec axis;      // unit vector u in sphere coordinates, strictly positive
    double angle;  // cap radius psi in radians

    Vec normal() const { return (axis.array() / ellipsoid_semi_axes().array()).matrix(); }
    double offset() const { return -std::cos(angle); }
};

// One deep central cut plus two smaller off-center ones.  The central facet
// is a flat region too large for any finite weight grid to sample in its
// interior, which makes the front behave like the nonideal fronts where
// weighted sums lose coverage; the side cuts break the symmetry.  None of
// the caps contains an individual minimum, so the pay-off matrix matches the
// uncut ellipsoid.
inline std::vector<HalfSpaceCut> nonconvex_cuts() {
    auto unit = [](double x, double y, double z) {
        Vec u(3);
        u << x, y, z;
        return Vec(u / u.norm());
    };
    const double deg = std::acos(-1.0) / 180.0;
    return {
        {unit(1.0, 1.15, 0.9), 30.0 * deg},
        {unit(4.5, 0.8, 0.7), 8.0 * deg},
        {unit(0.6, 1.1, 3.4), 9.0 * deg},
    };
}

namespace detail {

inline scalarize::MoProblem ellipsoid_base() {
    const Vec a = ellipsoid_semi_axes();
    scalarize::MoProblem mo;
    mo.dim = 3;
    mo.n_obj = 3;
    mo.objectives = [](const Vec& x) { return x; };
    mo.objective_jacobian = [](const Vec&) { return Mat(Mat::Identity(3, 3)); };
    mo.lb = -1.5 * a;
    mo.ub = 1.5 * a;
    mo.initial_guess = Vec::Zero(3);
    return mo;
}

inline double ellipsoid_gauge(const Vec& x, const Vec& a) {
    return (x.array() / a.array()).matrix().squaredNorm();
}

}  // namespace detail

// min (x1, x2, x3) over the solid ellipsoid (x1/1)^2 + (x2/10)^2 +
// (x3/100)^2 <= 1.  Individual minima sit at the negative axis extremes, the
// front is the all-negative octant of the boundary, and the normalized front
// is the unit-sphere octant around the normalized nadir (1,1,1).
inline scalarize::MoProblem make_ellipsoid_problem() {
    const Vec a = ellipsoid_semi_axes();
    scalarize::MoProblem mo = detail::ellipsoid_base();
    mo.n_ineq = 1;
    mo.ineq = [a](const Vec& x) {
        Vec g(1);
        g << 1.0 - detail::ellipsoid_gauge(x, a);
        return g;
    };
    mo.ineq_jacobian = [a](const Vec& x) {
        SpMat j(1, 3);
        for (int k = 0; k < 3; ++k)
            j.insert(0, k) = -2.0 * x[k] / (a[k] * a[k]);
        j.makeCompressed();
        return j;
    };
    mo.objective_hessians = [](const Vec&, const Vec&) { return SpMat(3, 3); };
    mo.ineq_hessians = [a](const Vec&, const Vec& w) {
        SpMat h(3, 3);
        for (int k = 0; k < 3; ++k)
            h.insert(k, k) = -2.0 * w[0] / (a[k] * a[k]);
        h.makeCompressed();
        return h;
    };
    return mo;
}

// The same ellipsoid intersected with the three half-spaces of
// nonconvex_cuts().  The intersection stays convex as a set, but the front
// gains flat facets and loses its symmetry.
inline scalarize::MoProblem make_nonconvex_problem() {
    const Vec a = ellipsoid_semi_axes();
    const std::vector<HalfSpaceCut> cuts = nonconvex_cuts();
    scalarize::MoProblem mo = detail::ellipsoid_base();
    mo.n_ineq = 1 + (int)cuts.size();
    std::vector<Vec> normals;
    Vec offsets((int)cuts.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        normals.push_back(cuts[i].normal());
        offsets[(int)i] = cuts[i].offset();
    }
    mo.ineq = [a, normals, offsets](const Vec& x) {
        Vec g(1 + (int)normals.size());
        g[0] = 1.0 - detail::ellipsoid_gauge(x, a);
        for (std::size_t i = 0; i < normals.size(); ++i)
            g[1 + (int)i] = normals[i].dot(x) - offsets[(int)i];
        return g;
    };
    mo.ineq_jacobian = [a, normals](const Vec& x) {
        SpMat j(1 + (int)normals.size(), 3);
        for (int k = 0; k < 3; ++k)
            j.insert(0, k) = -2.0 * x[k] / (a[k] * a[k]);
        for (std::size_t i = 0; i < normals.size(); ++i)
            for (int k = 0; k < 3; ++k)
                j.insert(1 + (int)i, k) = normals[i][k];
        j.makeCompressed();
        return j;
    };
    mo.objective_hessians = [](const Vec&, const Vec&) { return SpMat(3, 3); };
    mo.ineq_hessians = [a](const Vec&, const Vec& w) {
        SpMat h(3, 3);  // cut rows are linear; only the gauge carries curvature
        for (int k = 0; k < 3; ++k)
            h.insert(k, k) = -2.0 * w[0] / (a[k] * a[k]);
        h.makeCompressed();
        return h;
    };
    return mo;
}

// ---------------------------------------------------------------------------
// Analytic front samplers.  Everything is built in the unit-sphere
// coordinates s (nonnegative octant, front point x = -semi_axes .* s for
// spherical parts) and mapped to image space at the end.

namespace detail {

// Quasi-uniform cover of the nonnegative unit-sphere octant: latitude rings
// with counts proportional to their circumference, endpoints included so the
// three boundary arcs are sampled.
inline std::vector<Vec> octant_grid(int count) {
    if (count < 4) throw InvalidInput("octant_grid: need at least 4 samples");
    const double pi = std::acos(-1.0);
    // count ~= 1 + sum_r m(theta_r), m ~ sin(theta) * (2R/pi) * ring budget.
    const int rings = std::max(2, (int)std::lround(std::sqrt(pi * count / 2.0)));
    std::vector<Vec> pts;
    pts.reserve((std::size_t)count + (std::size_t)rings + 2);
    Vec pole(3);
    pole << 0.0, 0.0, 1.0;
    pts.push_back(pole);
    const double budget = (double)(count - 1);
    // sum of sin(theta_r) over rings normalizes the per-ring allocation
    double sin_sum = 0.0;
    for (int r = 1; r <= rings; ++r) sin_sum += std::sin(0.5 * pi * r / rings);
    for (int r = 1; r <= rings; ++r) {
        const double theta = 0.5 * pi * r / rings;
        const int m = std::max(2, (int)std::lround(budget * std::sin(theta) / sin_sum));
        for (int j = 0; j < m; ++j) {
            const double phi = 0.5 * pi * j / (m - 1);
            Vec s(3);
            s << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                std::cos(theta);
            pts.push_back(s);
        }
    }
    return pts;
}

inline bool inside_cap(const Vec& s, const HalfSpaceCut& cut, double margin = 0.0) {
    return s.dot(cut.axis) > std::cos(cut.angle) + margin;
}

// Orthonormal frame spanning the plane orthogonal to u.
inline void plane_frame(const Vec& u, Vec& e1, Vec& e2) {
    const Eigen::Vector3d u3 = u;
    Eigen::Vector3d seed = Eigen::Vector3d::Zero();
    Eigen::Index k = 0;
    u3.cwiseAbs().minCoeff(&k);
    seed[k] = 1.0;
    const Eigen::Vector3d a = (seed - seed.dot(u3) * u3).normalized();
    e1 = a;
    e2 = u3.cross(a).normalized();
}

// Concentric rings over a facet disk of radius sin(psi) in the cut plane,
// rim included; points outside the octant or inside another cap are dropped.
inline void facet_grid(const HalfSpaceCut& cut, const std::vector<HalfSpaceCut>& all,
                       double spacing, std::vector<Vec>& out) {
    const double pi = std::acos(-1.0);
    const double rad = std::sin(cut.angle);
    Vec e1, e2;
    plane_frame(cut.axis, e1, e2);
    const Vec base = std::cos(cut.angle) * cut.axis;
    const int rings = std::max(2, (int)std::lround(rad / spacing));
    for (int r = 0; r <= rings; ++r) {
        const double rr = rad * r / rings;
        const int m = std::max(1, (int)std::lround(2.0 * pi * rr / spacing));
        for (int j = 0; j < m; ++j) {
            const double phi = 2.0 * pi * j / m;
            const Vec s = base + rr * (std::cos(phi) * e1 + std::sin(phi) * e2);
            if (s.minCoeff() < 0.0) continue;
            bool cut_away = false;
            for (const auto& other : all)
                if (&other != &cut && inside_cap(s, other)) cut_away = true;
            if (!cut_away) out.push_back(s);
        }
    }
}

inline Mat to_image(const std::vector<Vec>& s_pts) {
    const Vec a = ellipsoid_semi_axes();
    Mat out((Eigen::Index)s_pts.size(), 3);
    for (std::size_t i = 0; i < s_pts.size(); ++i)
        out.row((Eigen::Index)i) = (-a.array() * s_pts[i].array()).transpose();
    return out;
}

}  // namespace detail

// Image-space samples of the ellipsoid front (the all-negative octant of the
// boundary), count points, boundary arcs included.
inline Mat ellipsoid_front_samples(int count) {
    return detail::to_image(detail::octant_grid(count));
}

// Image-space samples of the cut front: the spherical remainder plus one
// grid per facet, allocated by exact area so the sampling density is
// uniform across both parts.  Facet rims are sampled by both parts' grids,
// which stitches the reconstruction across the crease.
inline Mat nonconvex_front_samples(int count) {
    const double pi = std::acos(-1.0);
    const std::vector<HalfSpaceCut> cuts = nonconvex_cuts();
    double cap_area = 0.0, facet_area = 0.0;
    for (const auto& c : cuts) {
        cap_area += 2.0 * pi * (1.0 - std::cos(c.angle));
        facet_area += pi * std::sin(c.angle) * std::sin(c.angle);
    }
    const double sphere_area = pi / 2.0 - cap_area;
    const double total = sphere_area + facet_area;
    const double density = count / total;

    // Oversample the octant by the cut fraction so the survivors match the
    // spherical budget, then reject points inside any cap.
    const int octant_count = std::max(4, (int)std::lround(density * pi / 2.0));
    std::vector<Vec> pts;
    for (const Vec& s : detail::octant_grid(octant_count)) {
        bool cut_away = false;
        for (const auto& c : cuts)
            if (detail::inside_cap(s, c)) cut_away = true;
        if (!cut_away) pts.push_back(s);
    }
    const double spacing = 1.0 / std::sqrt(density);
    for (const auto& c : cuts) detail::facet_grid(c, cuts, spacing, pts);
    return detail::to_image(pts);
}

}  // namespace mompc_lab::examples
