#pragma once

// Geodesic distance fields on triangle meshes.  fast_marching_distance solves
// the eikonal equation with first-order triangle updates; the Dijkstra
// edge-graph distance is an upper bound on the true geodesic and serves as an
// independent cross-check.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/geom/mesh.hpp"

namespace mompc_lab::geom {

inline Vec dijkstra_distance(const TriMesh& mesh, int source) {
    const int V = (int)mesh.n_vertices();
    if (source < 0 || source >= V)
        throw InvalidInput("dijkstra_distance: source out of range");
    std::vector<std::vector<std::pair<int, double>>> adj(V);
    for (const auto& e : mesh.edges()) {
        const double w = (mesh.vertices.row(e[0]) - mesh.vertices.row(e[1])).norm();
        adj[e[0]].push_back({e[1], w});
        adj[e[1]].push_back({e[0], w});
    }
    Vec dist = Vec::Constant(V, std::numeric_limits<double>::infinity());
    dist[source] = 0.0;
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
    pq.push({0.0, source});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (auto [w, len] : adj[v])
            if (d + len < dist[w]) {
                dist[w] = d + len;
                pq.push({dist[w], w});
            }
    }
    return dist;
}

namespace detail {

// First-order eikonal update for the unknown corner C of a triangle whose
// other corners carry accepted values.  Falls back to edge propagation when
// the characteristic misses the triangle or the angle at C is obtuse.
inline double eikonal_update(const Eigen::Vector3d& A, double Ta,
                             const Eigen::Vector3d& B, double Tb,
                             const Eigen::Vector3d& C) {
    if (Ta > Tb) return eikonal_update(B, Tb, A, Ta, C);
    const double u = Tb - Ta;
    const double a = (B - C).norm();
    const double b = (A - C).norm();
    if (a <= 0.0 || b <= 0.0) return std::min(Ta + b, Tb + a);
    const double cos_t = (A - C).dot(B - C) / (a * b);
    const double aa = a * a + b * b - 2.0 * a * b * cos_t;
    const double bb = 2.0 * b * u * (a * cos_t - b);
    const double cc = b * b * (u * u - a * a * (1.0 - cos_t * cos_t));
    const double disc = bb * bb - 4.0 * aa * cc;
    if (disc >= 0.0 && aa > 0.0 && cos_t >= 0.0) {
        const double t = (-bb + std::sqrt(disc)) / (2.0 * aa);
        if (t > u && t > 0.0) {
            const double reach = b * (t - u) / t;
            const double upper = cos_t > 1e-300
                                     ? a / cos_t
                                     : std::numeric_limits<double>::infinity();
            if (reach > a * cos_t && reach < upper) return Ta + t;
        }
    }
    return std::min(Ta + b, Tb + a);
}

}  // namespace detail

namespace detail {

// Acute support triangle for an obtuse mesh corner, produced by unfolding the
// neighborhood into the plane.  The target vertex sits at the origin; a and b
// are support vertices with unfolded planar coordinates pa and pb.
struct VirtualTri {
    int target;
    int a, b;
    Eigen::Vector2d pa, pb;
};

// Unfolds faces across edges until a vertex lands in the angular window that
// splits the obtuse wedge at `target` into two acute wedges.  Each obtuse
// corner contributes at most two virtual triangles; failures (boundary,
// depth cap, fold-over) leave the corner on the edge-propagation fallback.
inline void unfold_obtuse(const TriMesh& mesh,
                          const std::vector<std::vector<int>>& vf,
                          std::vector<VirtualTri>& out) {
    const int V = (int)mesh.n_vertices();
    // edge key -> the two incident faces
    std::unordered_map<long long, std::array<int, 2>> e2f;
    e2f.reserve(mesh.n_faces() * 2);
    auto key = [V](int p, int q) {
        return (long long)std::min(p, q) * V + std::max(p, q);
    };
    for (int fi = 0; fi < (int)mesh.n_faces(); ++fi) {
        const auto& f = mesh.faces[fi];
        for (int k = 0; k < 3; ++k) {
            auto [it, fresh] = e2f.try_emplace(key(f[k], f[(k + 1) % 3]),
                                               std::array<int, 2>{fi, -1});
            if (!fresh) it->second[1] = fi;
        }
    }
    auto neighbor = [&](int p, int q, int fi) {
        auto it = e2f.find(key(p, q));
        if (it == e2f.end()) return -1;
        return it->second[0] == fi ? it->second[1] : it->second[0];
    };
    for (int fi = 0; fi < (int)mesh.n_faces(); ++fi) {
        const auto& f = mesh.faces[fi];
        for (int k = 0; k < 3; ++k) {
            const int c = f[k], ia = f[(k + 1) % 3], ib = f[(k + 2) % 3];
            const Eigen::Vector3d pc = mesh.vertices.row(c);
            const Eigen::Vector3d va = mesh.vertices.row(ia).transpose() - pc;
            const Eigen::Vector3d vb = mesh.vertices.row(ib).transpose() - pc;
            const double la = va.norm(), lb = vb.norm();
            if (la <= 0.0 || lb <= 0.0) continue;
            if (va.dot(vb) >= 0.0) continue;  // acute corner, standard update
            const double wedge = std::acos(std::clamp(va.dot(vb) / (la * lb), -1.0, 1.0));
            // planar layout: target at origin, a on the x-axis
            Eigen::Vector2d A(la, 0.0), B(lb * std::cos(wedge), lb * std::sin(wedge));
            double phi_lo = 0.0, phi_hi = wedge;
            int pid = ia, qid = ib, cur = fi;
            Eigen::Vector2d P = A, Q = B, from(0.0, 0.0);
            for (int depth = 0; depth < 16; ++depth) {
                const int g = neighbor(pid, qid, cur);
                if (g < 0) break;
                int rid = -1;
                for (int t = 0; t < 3; ++t)
                    if (mesh.faces[g][t] != pid && mesh.faces[g][t] != qid)
                        rid = mesh.faces[g][t];
                const Eigen::Vector3d pr = mesh.vertices.row(rid);
                const double lp = (pr - (Eigen::Vector3d)mesh.vertices.row(pid).transpose()).norm();
                const double lq = (pr - (Eigen::Vector3d)mesh.vertices.row(qid).transpose()).norm();
                const Eigen::Vector2d e = Q - P;
                const double L = e.norm();
                if (L <= 0.0) break;
                const Eigen::Vector2d u = e / L;
                Eigen::Vector2d nrm(-u.y(), u.x());
                if (nrm.dot(from - P) > 0.0) nrm = -nrm;  // lay flat away from the sheet
                const double x = (lp * lp + L * L - lq * lq) / (2.0 * L);
                const double h2 = lp * lp - x * x;
                const Eigen::Vector2d R = P + x * u + std::sqrt(std::max(h2, 0.0)) * nrm;
                const double phi = std::atan2(R.y(), R.x());
                if (phi <= phi_lo || phi >= phi_hi) break;  // fold-over
                constexpr double half_pi = std::numbers::pi / 2.0;
                if (phi >= phi_hi - half_pi - 1e-12 && phi <= phi_lo + half_pi + 1e-12) {
                    out.push_back({c, pid, rid, P, R});
                    out.push_back({c, rid, qid, R, Q});
                    break;
                }
                if (phi > phi_lo + half_pi) {  // sub-wedge (a, r) still obtuse
                    from = Q;
                    qid = rid;
                    Q = R;
                    phi_hi = phi;
                } else {  // sub-wedge (r, b) still obtuse
                    from = P;
                    pid = rid;
                    P = R;
                    phi_lo = phi;
                }
                cur = g;
            }
        }
    }
}

}  // namespace detail

// exact_rings: vertices within that many edge hops of the source are seeded
// with straight-line distance, taming the point-source truncation error; the
// seeded patch must be small against the surface curvature radius.
inline Vec fast_marching_distance(const TriMesh& mesh, int source,
                                  int exact_rings = 2) {
    const int V = (int)mesh.n_vertices();
    if (source < 0 || source >= V)
        throw InvalidInput("fast_marching_distance: source out of range");
    const auto vf = mesh.vertex_faces();
    std::vector<detail::VirtualTri> virt;
    detail::unfold_obtuse(mesh, vf, virt);
    std::vector<std::vector<int>> virt_of(V);
    for (int i = 0; i < (int)virt.size(); ++i) {
        virt_of[virt[i].a].push_back(i);
        virt_of[virt[i].b].push_back(i);
    }
    Vec T = Vec::Constant(V, std::numeric_limits<double>::infinity());
    std::vector<char> accepted(V, 0);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
    T[source] = 0.0;
    pq.push({0.0, source});
    if (exact_rings > 0) {
        const Eigen::Vector3d ps = mesh.vertices.row(source);
        std::vector<int> hop(V, -1);
        std::queue<int> bfs;
        hop[source] = 0;
        bfs.push(source);
        while (!bfs.empty()) {
            const int v = bfs.front();
            bfs.pop();
            if (hop[v] >= exact_rings) continue;
            for (int fi : vf[v])
                for (int w : mesh.faces[fi])
                    if (hop[w] < 0) {
                        hop[w] = hop[v] + 1;
                        T[w] = (mesh.vertices.row(w).transpose() - ps).norm();
                        pq.push({T[w], w});
                        bfs.push(w);
                    }
        }
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (accepted[v]) continue;
        accepted[v] = 1;
        for (int fi : vf[v]) {
            const auto& f = mesh.faces[fi];
            for (int k = 0; k < 3; ++k) {
                const int w = f[k];
                if (w == v || accepted[w]) continue;
                int other = -1;
                for (int t = 0; t < 3; ++t)
                    if (f[t] != v && f[t] != w) other = f[t];
                const Eigen::Vector3d pv = mesh.vertices.row(v);
                const Eigen::Vector3d pw = mesh.vertices.row(w);
                double cand;
                if (accepted[other]) {
                    const Eigen::Vector3d po = mesh.vertices.row(other);
                    cand = detail::eikonal_update(pv, T[v], po, T[other], pw);
                } else {
                    cand = T[v] + (pw - pv).norm();
                }
                if (cand < T[w]) {
                    T[w] = cand;
                    pq.push({cand, w});
                }
            }
        }
        for (int vi : virt_of[v]) {
            const auto& vt = virt[vi];
            if (accepted[vt.target]) continue;
            const int other = vt.a == v ? vt.b : vt.a;
            const Eigen::Vector2d& pv = vt.a == v ? vt.pa : vt.pb;
            const Eigen::Vector2d& po = vt.a == v ? vt.pb : vt.pa;
            double cand;
            if (accepted[other]) {
                cand = detail::eikonal_update({pv.x(), pv.y(), 0.0}, T[v],
                                              {po.x(), po.y(), 0.0}, T[other],
                                              {0.0, 0.0, 0.0});
            } else {
                cand = T[v] + pv.norm();
            }
            if (cand < T[vt.target]) {
                T[vt.target] = cand;
                pq.push({cand, vt.target});
            }
        }
    }
    return T;
}

}  // namespace mompc_lab::geom
