#pragma once

// Order-theoretic and affine-geometric primitives for multi-objective
// minimization: dominance filtering, the sign-normalized scaling operator,
// pay-off matrix summaries (nadir/utopia/normal directions) and signed
// distances to translated hyperplanes.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab {

// ---------------------------------------------------------------------------
// scal: rescale v so that sum(|v_i|) == 1 and the entry of largest magnitude
// becomes negative.  Ties on the magnitude are broken toward the smallest
// index.  The output is collinear with the input.
inline Vec scal(const Vec& v) {
    if (v.size() == 0) throw InvalidInput("scal: empty vector");
    double sum_abs = v.cwiseAbs().sum();
    if (!(sum_abs > 0.0) || !std::isfinite(sum_abs))
        throw InvalidInput("scal: vector must be nonzero and finite");
    Eigen::Index i_max = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        if (a > best) {  // strict: ties keep the smallest index
            best = a;
            i_max = i;
        }
    }
    double c = 1.0 / sum_abs;
    if (v[i_max] > 0.0) c = -c;
    return c * v;
}

// ---------------------------------------------------------------------------
// Normal of the hyperplane through n affinely independent points in R^n,
// given as the columns of a square matrix.  Returned with unit Euclidean
// norm and a deterministic sign (first nonzero component positive); apply
// scal() for the sign-normalized variant.
inline Vec hyperplane_normal(const Mat& points) {
    const Eigen::Index n = points.rows();
    if (points.cols() != n)
        throw InvalidInput("hyperplane_normal: need exactly n points in R^n (square matrix)");
    if (n < 2) throw InvalidInput("hyperplane_normal: dimension must be at least 2");
    Mat diffs(n, n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j) diffs.col(j) = points.col(j + 1) - points.col(0);
    Eigen::JacobiSVD<Mat> svd(diffs, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    double tol = std::max(1e-12, 1e-10 * sv[0]);
    if (!(sv[n - 2] > tol))
        throw RankDeficiency("hyperplane_normal: points are affinely dependent");
    Vec normal = svd.matrixU().col(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(normal[i]) > 1e-14) {
            if (normal[i] < 0.0) normal = -normal;
            break;
        }
    }
    return normal;
}

// ---------------------------------------------------------------------------
// Summary of a pay-off matrix.  Column j holds the full objective vector
// evaluated at the minimizer of objective j, so the diagonal carries the
// individual minima.  Nadir/utopia are the row-wise worst/best values, and
// scale holds the reciprocal ranges used to map into normalized image space.
struct PayoffSummary {
    Mat phi;           // n x n pay-off matrix
    Vec nadir;         // row-wise max
    Vec utopia;        // row-wise min
    Vec scale;         // 1 / (nadir - utopia), componentwise
    Vec chim_normal;   // sign-normalized normal of the simplex through the columns
    Vec quasi_normal_center;  // sign-normalized -(phi*b_c - utopia), b_c barycentric
    Vec visual_normal;        // chim normal computed in normalized space, mapped back

    Eigen::Index n_obj() const { return phi.rows(); }

    Vec barycenter_weights() const {
        return Vec::Constant(phi.rows(), 1.0 / double(phi.rows()));
    }

    // Image of a weight vector on the simplex spanned by the columns.
    Vec simplex_point(const Vec& beta) const { return phi * beta; }

    // Map a point of image space into normalized coordinates (utopia -> 0,
    // nadir -> 1 componentwise).
    Vec normalize(const Vec& j) const { return scale.asDiagonal() * (j - utopia); }
};

// Quasi-normal direction for a simplex weight: sign-normalized direction
// from the utopia point toward (and past) the simplex point, negated.
inline Vec quasi_normal(const Mat& phi, const Vec& utopia, const Vec& beta) {
    Vec diff = phi * beta - utopia;
    if (diff.cwiseAbs().maxCoeff() <= 0.0)
        throw InvalidInput("quasi_normal: simplex point coincides with utopia");
    return scal(-diff);
}

inline PayoffSummary payoff_summary(const Mat& phi) {
    const Eigen::Index n = phi.rows();
    if (phi.cols() != n || n < 2)
        throw InvalidInput("payoff_summary: pay-off matrix must be square, n >= 2");
    {
        Eigen::JacobiSVD<Mat> svd(phi);
        const auto& sv = svd.singularValues();
        if (!(sv[n - 1] > std::max(1e-12, 1e-10 * sv[0])))
            throw RankDeficiency("payoff_summary: pay-off matrix is rank deficient");
    }
    PayoffSummary s;
    s.phi = phi;
    s.nadir = phi.rowwise().maxCoeff();
    s.utopia = phi.rowwise().minCoeff();
    s.scale = Vec(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double range = s.nadir[i] - s.utopia[i];
        if (!(range > 0.0))
            throw NumericalError("payoff_summary: nadir equals utopia in component " +
                                 std::to_string(i));
        s.scale[i] = 1.0 / range;
    }
    s.chim_normal = scal(hyperplane_normal(phi));
    s.quasi_normal_center = quasi_normal(phi, s.utopia, s.barycenter_weights());
    Mat phi_scaled = s.scale.asDiagonal() * phi;
    Vec inv_scale = s.scale.cwiseInverse();
    s.visual_normal = scal(inv_scale.asDiagonal() * hyperplane_normal(phi_scaled));
    return s;
}

// ---------------------------------------------------------------------------
// Signed distance of a point to the hyperplane {x : w'x + b = 0}, measured
// along direction d instead of along the normal.  Requires w'd > 0.
inline double signed_distance(const Vec& point, const Vec& w, double b, const Vec& d) {
    if (point.size() != w.size() || point.size() != d.size())
        throw InvalidInput("signed_distance: dimension mismatch");
    double nw = w.norm();
    double nd = d.norm();
    if (!(nw > 0.0) || !(nd > 0.0))
        throw InvalidInput("signed_distance: w and d must be nonzero");
    double wd = w.dot(d);
    if (!(wd > 0.0))
        throw InvalidInput("signed_distance: direction must make an acute angle with w");
    // (w'p + b)/|w| divided by cos(angle(w, d)) == (w'p + b) * |d| / (w'd)
    return (w.dot(point) + b) * nd / wd;
}

// Linear surrogate whose minimizer coincides with the maximizer of the
// signed distance above (for fixed w, b, d with w'd > 0).
inline double fhp_objective(const Vec& point, const Vec& w) {
    if (point.size() != w.size()) throw InvalidInput("fhp_objective: dimension mismatch");
    return -w.dot(point);
}

// ---------------------------------------------------------------------------
// Dominance filter for minimization.  Returns the indices of points that no
// other point dominates:  q dominates p when q <= p + tol componentwise and
// q < p - tol in at least one component.  Stable order, duplicates survive.
inline std::vector<std::size_t> pareto_filter(const std::vector<Vec>& points,
                                              double tol = 0.0) {
    const std::size_t n = points.size();
    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t p = 0; p < n; ++p) {
        if (p > 0 && points[p].size() != points[0].size())
            throw InvalidInput("pareto_filter: inconsistent dimensions");
        bool dominated = false;
        for (std::size_t q = 0; q < n && !dominated; ++q) {
            if (q == p) continue;
            bool leq_all = true;
            bool lt_one = false;
            for (Eigen::Index i = 0; i < points[p].size(); ++i) {
                if (points[q][i] > points[p][i] + tol) {
                    leq_all = false;
                    break;
                }
                if (points[q][i] < points[p][i] - tol) lt_one = true;
            }
            dominated = leq_all && lt_one;
        }
        if (!dominated) keep.push_back(p);
    }
    return keep;
}

// ---------------------------------------------------------------------------
// Componentwise upper bound on objective vectors that can be switched off
// entirely.  The unbounded state is an explicit flag rather than an
// infinity-valued vector so serialization stays exact.
class DescentBound {
  public:
    static DescentBound unbounded(Eigen::Index n) {
        DescentBound b;
        b.finite_ = false;
        b.bound_ = Vec::Zero(n);
        return b;
    }
    static DescentBound at(const Vec& bound) {
        if (bound.size() == 0) throw InvalidInput("DescentBound: empty bound");
        if (!bound.allFinite()) throw InvalidInput("DescentBound: bound must be finite");
        DescentBound b;
        b.finite_ = true;
        b.bound_ = bound;
        return b;
    }

    bool finite() const { return finite_; }
    Eigen::Index size() const { return bound_.size(); }
    const Vec& values() const {
        if (!finite_) throw InvalidInput("DescentBound: unbounded has no values");
        return bound_;
    }

  private:
    bool finite_ = false;
    Vec bound_;
};

// True when j respects the bound componentwise, up to slack.
inline bool descent_admissible(const Vec& j, const DescentBound& bound, double slack = 0.0) {
    if (!bound.finite()) return true;
    if (j.size() != bound.size()) throw InvalidInput("descent_admissible: dimension mismatch");
    return (j.array() <= bound.values().array() + slack).all();
}

}  // namespace mompc_lab
