#pragma once

// Front evaluation metrics.  An atlas carries geodesic distance fields from
// each anchor (individual-minimum image) over a reconstructed front mesh.
// Reference points for preference vectors are weighted Karcher selections
// among mesh vertices; coverage compares reconstructed patch area against the
// full front; preference translation scores how far realized points land from
// their references, normalized by the front's central anchor spread.

#include <array>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/geom/ball_pivot.hpp"
#include "mompc_lab/geom/geodesic.hpp"
#include "mompc_lab/geom/mesh.hpp"
#include "mompc_lab/geom/point_cloud.hpp"

namespace mompc_lab::geom {

namespace detail {

inline int nearest_vertex(const Mat& vertices, const Vec& q) {
    if (vertices.rows() == 0) throw InvalidInput("nearest_vertex: empty vertex set");
    int best = 0;
    double best_d = (vertices.row(0).transpose() - q).squaredNorm();
    for (Eigen::Index i = 1; i < vertices.rows(); ++i) {
        const double d2 = (vertices.row(i).transpose() - q).squaredNorm();
        if (d2 < best_d) {
            best_d = d2;
            best = (int)i;
        }
    }
    return best;
}

// Piecewise-linear field value at an off-vertex point: barycentric
// interpolation over the containing face among those incident to the nearest
// vertex, falling back to that vertex's value when no face contains the
// in-plane projection (boundary or off-mesh points).
inline double field_at(const TriMesh& mesh,
                       const std::vector<std::vector<int>>& vertex_faces,
                       const Vec& field, const Vec& q, int nearest) {
    const Eigen::Vector3d p = q;
    for (int fi : vertex_faces[nearest]) {
        const auto& f = mesh.faces[fi];
        const Eigen::Vector3d p0 = mesh.vertices.row(f[0]);
        const Eigen::Vector3d e1 = mesh.vertices.row(f[1]).transpose() - p0;
        const Eigen::Vector3d e2 = mesh.vertices.row(f[2]).transpose() - p0;
        const Eigen::Vector3d r = p - p0;
        const double g11 = e1.squaredNorm(), g22 = e2.squaredNorm(), g12 = e1.dot(e2);
        const double det = g11 * g22 - g12 * g12;
        if (det <= 1e-300) continue;
        const double r1 = r.dot(e1), r2 = r.dot(e2);
        const double l1 = (g22 * r1 - g12 * r2) / det;
        const double l2 = (g11 * r2 - g12 * r1) / det;
        const double l0 = 1.0 - l1 - l2;
        const double tol = -1e-9;
        if (l0 >= tol && l1 >= tol && l2 >= tol)
            return l0 * field[f[0]] + l1 * field[f[1]] + l2 * field[f[2]];
    }
    return field[nearest];
}

}  // namespace detail

struct GeodesicAtlas {
    TriMesh mesh;              // compacted: every vertex referenced by a face
    std::vector<int> anchors;  // vertex index per anchor point
    Mat dist;                  // V x n_anchors; col i = field from anchor i

    Eigen::Index n_anchors() const { return dist.cols(); }
};

inline GeodesicAtlas build_geodesic_atlas(const TriMesh& front_mesh,
                                          const Mat& anchor_points) {
    GeodesicAtlas atlas;
    atlas.mesh = front_mesh;
    atlas.mesh.compact();
    atlas.mesh.validate();
    if (atlas.mesh.n_faces() == 0)
        throw InvalidInput("build_geodesic_atlas: mesh has no faces");
    if (anchor_points.cols() != 3)
        throw InvalidInput("build_geodesic_atlas: anchors must be 3-d points");
    const Eigen::Index n = anchor_points.rows();
    if (n < 1) throw InvalidInput("build_geodesic_atlas: no anchors");
    atlas.anchors.resize(n);
    atlas.dist = Mat(atlas.mesh.n_vertices(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        atlas.anchors[i] =
            detail::nearest_vertex(atlas.mesh.vertices, anchor_points.row(i));
        atlas.dist.col(i) = fast_marching_distance(atlas.mesh, atlas.anchors[i]);
    }
    return atlas;
}

// Vertex minimizing sum_i w_i * d_i(v)^2; ties resolve to the smallest index.
inline int karcher_select(const GeodesicAtlas& atlas, const Vec& weights) {
    if (weights.size() != atlas.dist.cols())
        throw InvalidInput("karcher_select: weight count mismatch");
    const Vec cost = atlas.dist.array().square().matrix() * weights;
    Eigen::Index idx = 0;
    cost.minCoeff(&idx);
    if (!std::isfinite(cost[idx]))
        throw NumericalError("karcher_select: front mesh is disconnected");
    return (int)idx;
}

// Batched selection: columns of W are weight vectors.
inline std::vector<int> karcher_select_batch(const GeodesicAtlas& atlas, const Mat& W) {
    if (W.rows() != atlas.dist.cols())
        throw InvalidInput("karcher_select_batch: weight count mismatch");
    const Mat cost = atlas.dist.array().square().matrix() * W;
    std::vector<int> out(W.cols());
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
        Eigen::Index idx = 0;
        cost.col(j).minCoeff(&idx);
        if (!std::isfinite(cost(idx, j)))
            throw NumericalError("karcher_select_batch: front mesh is disconnected");
        out[j] = (int)idx;
    }
    return out;
}

struct CoverageResult {
    double ratio = 0.0;      // patch area / front area, capped at 1
    double front_area = 0.0;
    double patch_area = 0.0;
    TriMesh patch;
};

inline CoverageResult coverage(const TriMesh& front_mesh, const PointCloud& points,
                               const BallPivotConfig& bp = {},
                               const AreaSpec& area = AreaSpec::planar()) {
    CoverageResult res;
    res.front_area = mesh_area(front_mesh, area);
    if (!(res.front_area > 0.0))
        throw InvalidInput("coverage: front mesh has zero area");
    if (points.size() >= 3) res.patch = ball_pivot(points, bp);
    if (res.patch.n_faces() > 0) res.patch_area = mesh_area(res.patch, area);
    res.ratio = std::min(1.0, res.patch_area / res.front_area);
    return res;
}

struct TranslationResult {
    double metric = 0.0;      // 1 - mean_error / normalizer
    double mean_error = 0.0;  // mean geodesic reference-to-realized distance
    double normalizer = 0.0;  // mean geodesic spread of anchors around center
    std::vector<int> ref_vertices;
    std::vector<int> realized_vertices;
};

// prefs: one preference vector per row (N x n).  realized: matching realized
// image-space points per row (N x 3), snapped to the atlas mesh.
inline TranslationResult translation_metric(const GeodesicAtlas& atlas,
                                            const Mat& prefs, const Mat& realized) {
    const Eigen::Index n = atlas.dist.cols();
    const Eigen::Index N = prefs.rows();
    if (prefs.cols() != n) throw InvalidInput("translation_metric: pref size mismatch");
    if (realized.rows() != N || realized.cols() != 3)
        throw InvalidInput("translation_metric: realized points must be N x 3");
    if (N == 0) throw InvalidInput("translation_metric: no preference vectors");

    TranslationResult res;
    const Vec beta_c = Vec::Constant(n, 1.0 / double(n));
    const int ref_c = karcher_select(atlas, beta_c);
    res.normalizer = atlas.dist.row(ref_c).mean();
    if (!(res.normalizer > 0.0) || !std::isfinite(res.normalizer))
        throw NumericalError("translation_metric: degenerate anchor spread");

    res.ref_vertices = karcher_select_batch(atlas, prefs.transpose());
    res.realized_vertices.resize(N);
    const auto vf = atlas.mesh.vertex_faces();
    std::unordered_map<int, Vec> fields;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
        const int rv = res.ref_vertices[j];
        const int dv = detail::nearest_vertex(atlas.mesh.vertices, realized.row(j));
        res.realized_vertices[j] = dv;
        auto it = fields.find(rv);
        if (it == fields.end())
            it = fields.emplace(rv, fast_marching_distance(atlas.mesh, rv)).first;
        const double d =
            detail::field_at(atlas.mesh, vf, it->second, realized.row(j), dv);
        if (!std::isfinite(d))
            throw NumericalError("translation_metric: disconnected front mesh");
        acc += d;
    }
    res.mean_error = acc / double(N);
    res.metric = 1.0 - res.mean_error / res.normalizer;
    return res;
}

// Injective RGB tag for 3-simplex preference vectors (plot/export annotation).
inline std::array<double, 3> simplex_color(const Vec& beta) {
    if (beta.size() != 3) throw InvalidInput("simplex_color: needs a 3-vector");
    static constexpr std::array<std::array<double, 3>, 3> base = {{
        {0.894, 0.102, 0.110},
        {0.216, 0.494, 0.722},
        {0.302, 0.686, 0.290},
    }};
    std::array<double, 3> rgb{};
    for (int c = 0; c < 3; ++c)
        rgb[c] = beta[0] * base[0][c] + beta[1] * base[1][c] + beta[2] * base[2][c];
    return rgb;
}

}  // namespace mompc_lab::geom
