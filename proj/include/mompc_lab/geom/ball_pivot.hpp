#pragma once

// Ball-pivoting surface reconstruction over 3-d point clouds.  A ball of
// fixed radius rolls over the cloud: triangles are created where the ball
// rests on three points with no point inside it.  A directed half-edge front
// keeps the output an oriented manifold; unclosed boundary edges are retried
// at escalated radii so moderately nonuniform sampling still closes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/geom/mesh.hpp"
#include "mompc_lab/geom/point_cloud.hpp"

namespace mompc_lab::geom {

struct BallPivotConfig {
    double radius = 0.0;        // base ball radius; 0 derives it from the cloud
    double radius_factor = 2.5; // auto base = factor * median nearest-neighbor gap
    std::vector<double> escalation = {1.0, 2.0, 4.0};  // pass radii = base * entry
    int knn_normals = 10;       // neighborhood size for seed-normal estimation
    Vec orientation_hint;       // approximate outward direction; empty = -(1,1,1)
};

namespace detail {

// Uniform hash grid; query radius must not exceed the cell size.
class Grid3 {
  public:
    Grid3(const Mat& pts, double cell) : pts_(pts), cell_(cell) {
        if (!(cell > 0.0)) throw InvalidInput("Grid3: cell size must be positive");
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            cells_[key(cell_of(pts.row(i).transpose()))].push_back((int)i);
    }

    std::vector<int> query(const Eigen::Vector3d& q, double dist) const {
        if (dist > cell_ * (1.0 + 1e-12))
            throw InvalidInput("Grid3: query radius exceeds cell size");
        std::vector<int> out;
        const auto base = cell_of(q);
        const double d2 = dist * dist;
        for (int ox = -1; ox <= 1; ++ox)
            for (int oy = -1; oy <= 1; ++oy)
                for (int oz = -1; oz <= 1; ++oz) {
                    auto it = cells_.find(
                        key({base[0] + ox, base[1] + oy, base[2] + oz}));
                    if (it == cells_.end()) continue;
                    for (int i : it->second)
                        if ((pts_.row(i).transpose() - q).squaredNorm() <= d2)
                            out.push_back(i);
                }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    std::array<long long, 3> cell_of(const Eigen::Vector3d& p) const {
        return {(long long)std::floor(p[0] / cell_), (long long)std::floor(p[1] / cell_),
                (long long)std::floor(p[2] / cell_)};
    }
    static std::uint64_t key(const std::array<long long, 3>& c) {
        std::uint64_t h = 1469598103934665603ull;
        for (long long v : c) {
            h ^= (std::uint64_t)v + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
    const Mat& pts_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace detail

inline TriMesh ball_pivot(const PointCloud& cloud, const BallPivotConfig& cfg = {}) {
    if (cloud.dim() != 3) throw InvalidInput("ball_pivot: cloud must be 3-d");
    const Mat& P = cloud.points();
    const int N = (int)P.rows();
    TriMesh mesh;
    mesh.vertices = P;
    if (N < 3) return mesh;

    // Seed normals (local PCA, oriented by the hint) and nearest-neighbor gaps.
    const int k = std::max(3, std::min(cfg.knn_normals, N - 1));
    Eigen::Vector3d hint = cfg.orientation_hint.size() == 3
                               ? Eigen::Vector3d(cfg.orientation_hint)
                               : Eigen::Vector3d(-1.0, -1.0, -1.0);
    if (hint.norm() == 0.0) throw InvalidInput("ball_pivot: zero orientation hint");
    hint.normalize();
    Mat normals(N, 3);
    std::vector<double> nn_gap(N);
    {
        std::vector<std::pair<double, int>> d(N);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j)
                d[j] = {(P.row(j) - P.row(i)).squaredNorm(), j};
            d[i].first = std::numeric_limits<double>::infinity();
            std::partial_sort(d.begin(), d.begin() + k, d.end());
            nn_gap[i] = std::sqrt(d[0].first);
            Eigen::Vector3d mean = P.row(i);
            for (int t = 0; t < k; ++t) mean += P.row(d[t].second).transpose();
            mean /= double(k + 1);
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            auto accumulate = [&](const Eigen::Vector3d& p) {
                Eigen::Vector3d c = p - mean;
                cov += c * c.transpose();
            };
            accumulate(P.row(i));
            for (int t = 0; t < k; ++t) accumulate(P.row(d[t].second));
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
            Eigen::Vector3d n = es.eigenvectors().col(0);
            const double side = n.dot(hint);
            if (side < 0.0) n = -n;
            if (side == 0.0)
                for (int c = 0; c < 3; ++c)
                    if (n[c] != 0.0) {
                        if (n[c] < 0.0) n = -n;
                        break;
                    }
            normals.row(i) = n;
        }
    }

    double base = cfg.radius;
    if (base <= 0.0) {
        std::vector<double> gaps = nn_gap;
        std::nth_element(gaps.begin(), gaps.begin() + N / 2, gaps.end());
        base = cfg.radius_factor * gaps[N / 2];
        if (!(base > 0.0))
            throw InvalidInput("ball_pivot: cannot derive a radius from the cloud");
    }
    std::vector<double> radii;
    for (double e : cfg.escalation)
        if (e > 0.0) radii.push_back(base * e);
    if (radii.empty()) radii.push_back(base);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    struct Half {
        int a, b, opp;
        Eigen::Vector3d center;
    };
    auto dkey = [](int a, int b) {
        return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
    };
    auto ukey = [&](int a, int b) { return a < b ? dkey(a, b) : dkey(b, a); };
    std::unordered_map<std::uint64_t, Half> half;      // unmatched directed edges
    std::unordered_map<std::uint64_t, int> tri_count;  // faces per undirected edge
    std::vector<int> half_deg(N, 0);
    std::vector<char> used(N, 0);
    std::deque<std::uint64_t> active;

    auto edge_faces = [&](int a, int b) {
        auto it = tri_count.find(ukey(a, b));
        return it == tri_count.end() ? 0 : it->second;
    };

    auto add_face = [&](int p, int q, int s, const Eigen::Vector3d& center) {
        mesh.faces.push_back({p, q, s});
        used[p] = used[q] = used[s] = 1;
        const int v[3] = {p, q, s};
        for (int e = 0; e < 3; ++e) {
            const int x = v[e], y = v[(e + 1) % 3], o = v[(e + 2) % 3];
            ++tri_count[ukey(x, y)];
            auto twin = half.find(dkey(y, x));
            if (twin != half.end()) {
                half.erase(twin);
                --half_deg[x];
                --half_deg[y];
            } else {
                half[dkey(x, y)] = Half{x, y, o, center};
                active.push_back(dkey(x, y));
                ++half_deg[x];
                ++half_deg[y];
            }
        }
    };

    // Both centers of the radius-r ball through three points; the first lies on
    // the cross(b-a, c-a) side.  Empty when the circumradius reaches r.
    auto ball_centers =
        [&](int ia, int ib, int ic,
            double r) -> std::optional<std::array<Eigen::Vector3d, 2>> {
        const Eigen::Vector3d a = P.row(ia), b = P.row(ib), c = P.row(ic);
        const Eigen::Vector3d ab = b - a, ac = c - a;
        const Eigen::Vector3d n = ab.cross(ac);
        const double n2 = n.squaredNorm();
        if (n2 <= 1e-30) return std::nullopt;
        const Eigen::Vector3d cc =
            a + (ac.squaredNorm() * n.cross(ab) + ab.squaredNorm() * ac.cross(n)) /
                    (2.0 * n2);
        const double h2 = r * r - (cc - a).squaredNorm();
        if (h2 <= 0.0) return std::nullopt;
        const Eigen::Vector3d off = std::sqrt(h2) * n.normalized();
        return std::array<Eigen::Vector3d, 2>{cc + off, cc - off};
    };

    const detail::Grid3* grid = nullptr;
    double r_cur = 0.0;

    auto ball_empty = [&](const Eigen::Vector3d& c, int e0, int e1, int e2) {
        const double lim = r_cur * r_cur * (1.0 - 1e-9);
        for (int i : grid->query(c, r_cur))
            if (i != e0 && i != e1 && i != e2 &&
                (P.row(i).transpose() - c).squaredNorm() < lim)
                return false;
        return true;
    };

    constexpr double two_pi = 6.283185307179586476925;

    auto try_pivot = [&](const Half& he) {
        const int a = he.a, b = he.b;
        const Eigen::Vector3d pa = P.row(a), pb = P.row(b);
        const Eigen::Vector3d m = 0.5 * (pa + pb);
        Eigen::Vector3d u = pb - pa;
        if (u.squaredNorm() <= 1e-30) return false;
        u.normalize();
        Eigen::Vector3d v0 = he.center - m;
        v0 -= u * u.dot(v0);
        if (v0.squaredNorm() <= 1e-30) return false;
        double best_theta = 0.0;
        int best_x = -1;
        Eigen::Vector3d best_c = Eigen::Vector3d::Zero();
        for (int x : grid->query(m, 2.0 * r_cur)) {
            if (x == a || x == b || x == he.opp) continue;
            if (used[x] && half_deg[x] == 0) continue;  // interior vertex
            if (edge_faces(a, x) >= 2 || edge_faces(b, x) >= 2) continue;
            if (half.count(dkey(a, x)) || half.count(dkey(x, b))) continue;
            // Orientation guard: candidate triangle (b, a, x) must face the
            // same side as the estimated point normals, else the ball is
            // creeping around the patch boundary onto the underside.
            const Eigen::Vector3d px = P.row(x);
            const Eigen::Vector3d tri_n = (pa - pb).cross(px - pb);
            const Eigen::Vector3d vn =
                normals.row(a) + normals.row(b) + normals.row(x);
            if (tri_n.dot(vn) <= 0.0) continue;
            auto cs = ball_centers(a, b, x, r_cur);
            if (!cs) continue;
            for (const Eigen::Vector3d& c : *cs) {
                if (!ball_empty(c, a, b, x)) continue;
                Eigen::Vector3d v = c - m;
                v -= u * u.dot(v);
                if (v.squaredNorm() <= 1e-30) continue;
                double theta = std::atan2(u.dot(v0.cross(v)), v0.dot(v));
                if (theta < -1e-9)
                    theta += two_pi;
                else if (theta < 0.0)
                    theta = 0.0;
                if (best_x < 0 || theta < best_theta - 1e-12 ||
                    (std::abs(theta - best_theta) <= 1e-12 && x < best_x)) {
                    best_theta = theta;
                    best_x = x;
                    best_c = c;
                }
            }
        }
        if (best_x < 0) return false;
        add_face(b, a, best_x, best_c);
        return true;
    };

    auto drain = [&] {
        while (!active.empty()) {
            const std::uint64_t kk = active.front();
            active.pop_front();
            auto it = half.find(kk);
            if (it == half.end()) continue;  // glued meanwhile
            const Half he = it->second;
            try_pivot(he);
        }
    };

    auto seed_from = [&](int p) {
        std::vector<std::pair<double, int>> cand;
        for (int q : grid->query(P.row(p), 2.0 * r_cur))
            if (q != p && !used[q])
                cand.push_back({(P.row(q) - P.row(p)).squaredNorm(), q});
        std::sort(cand.begin(), cand.end());
        const Eigen::Vector3d pp = P.row(p);
        for (std::size_t i = 0; i < cand.size(); ++i)
            for (std::size_t j = i + 1; j < cand.size(); ++j) {
                int q = cand[i].second, s = cand[j].second;
                const Eigen::Vector3d pq = P.row(q), ps = P.row(s);
                const Eigen::Vector3d nt = (pq - pp).cross(ps - pp);
                const Eigen::Vector3d vn =
                    normals.row(p) + normals.row(q) + normals.row(s);
                if (nt.dot(vn) < 0.0) std::swap(q, s);
                auto cs = ball_centers(p, q, s, r_cur);
                if (!cs) continue;
                if (!ball_empty((*cs)[0], p, q, s)) continue;
                add_face(p, q, s, (*cs)[0]);
                return true;
            }
        return false;
    };

    for (double r : radii) {
        r_cur = r;
        detail::Grid3 g(P, 2.0 * r);
        grid = &g;
        std::vector<std::uint64_t> keys;
        keys.reserve(half.size());
        for (const auto& kv : half) keys.push_back(kv.first);
        std::sort(keys.begin(), keys.end());
        active.assign(keys.begin(), keys.end());
        drain();
        for (int p = 0; p < N; ++p) {
            if (used[p]) continue;
            if (seed_from(p)) drain();
        }
        grid = nullptr;
    }
    return mesh;
}

}  // namespace mompc_lab::geom
