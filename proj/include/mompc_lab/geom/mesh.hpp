#pragma once

// Triangle meshes over point clouds in R^3, with surface-area measures.
// Planar area sums flat triangle areas.  Spherical area maps vertices back to
// the unit sphere (undoing an axis-aligned stretch) and sums spherical
// triangle excesses, so meshes of curved fronts are not under-measured by
// chordal approximation.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab::geom {

struct TriMesh {
    Mat vertices;                            // V x 3
    std::vector<std::array<int, 3>> faces;   // CCW index triples into vertices

    Eigen::Index n_vertices() const { return vertices.rows(); }
    Eigen::Index n_faces() const { return (Eigen::Index)faces.size(); }

    void validate() const {
        if (vertices.cols() != 3) throw InvalidInput("TriMesh: vertices must be 3-d");
        for (const auto& f : faces) {
            for (int k = 0; k < 3; ++k)
                if (f[k] < 0 || f[k] >= vertices.rows())
                    throw InvalidInput("TriMesh: face index out of range");
            if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
                throw InvalidInput("TriMesh: degenerate face");
        }
    }

    // Unique undirected edges (i < j), sorted lexicographically.
    std::vector<std::array<int, 2>> edges() const {
        std::vector<std::array<int, 2>> es;
        es.reserve(faces.size() * 3);
        for (const auto& f : faces)
            for (int k = 0; k < 3; ++k) {
                int a = f[k], b = f[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                es.push_back({a, b});
            }
        std::sort(es.begin(), es.end());
        es.erase(std::unique(es.begin(), es.end()), es.end());
        return es;
    }

    // Faces incident to each vertex, in face-index order.
    std::vector<std::vector<int>> vertex_faces() const {
        std::vector<std::vector<int>> vf(vertices.rows());
        for (int fi = 0; fi < (int)faces.size(); ++fi)
            for (int k = 0; k < 3; ++k) vf[faces[fi][k]].push_back(fi);
        return vf;
    }

    // Drops vertices referenced by no face; returns old->new vertex map
    // (-1 for dropped vertices).
    std::vector<int> compact() {
        std::vector<int> remap(vertices.rows(), -1);
        for (const auto& f : faces)
            for (int k = 0; k < 3; ++k) remap[f[k]] = 0;
        int next = 0;
        for (auto& r : remap)
            if (r == 0) r = next++;
        Mat nv(next, 3);
        for (Eigen::Index i = 0; i < vertices.rows(); ++i)
            if (remap[i] >= 0) nv.row(remap[i]) = vertices.row(i);
        vertices = std::move(nv);
        for (auto& f : faces)
            for (int k = 0; k < 3; ++k) f[k] = remap[f[k]];
        return remap;
    }

    void write_off(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("TriMesh: cannot open " + path);
        out.precision(17);
        out << "OFF\n" << vertices.rows() << " " << faces.size() << " 0\n";
        for (Eigen::Index i = 0; i < vertices.rows(); ++i)
            out << vertices(i, 0) << " " << vertices(i, 1) << " " << vertices(i, 2)
                << "\n";
        for (const auto& f : faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
    }

    static TriMesh read_off(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("TriMesh: cannot open " + path);
        auto next_line = [&](std::string& line) {
            while (std::getline(in, line))
                if (!line.empty() && line[0] != '#') return true;
            return false;
        };
        std::string line;
        if (!next_line(line) || line.substr(0, 3) != "OFF")
            throw IoError("TriMesh: missing OFF header in " + path);
        if (!next_line(line)) throw IoError("TriMesh: truncated " + path);
        std::stringstream hdr(line);
        Eigen::Index nv = 0, nf = 0, ne = 0;
        hdr >> nv >> nf >> ne;
        TriMesh m;
        m.vertices = Mat(nv, 3);
        for (Eigen::Index i = 0; i < nv; ++i) {
            if (!next_line(line)) throw IoError("TriMesh: truncated " + path);
            std::stringstream ss(line);
            ss >> m.vertices(i, 0) >> m.vertices(i, 1) >> m.vertices(i, 2);
        }
        m.faces.reserve(nf);
        for (Eigen::Index i = 0; i < nf; ++i) {
            if (!next_line(line)) throw IoError("TriMesh: truncated " + path);
            std::stringstream ss(line);
            int cnt = 0;
            std::array<int, 3> f{};
            ss >> cnt >> f[0] >> f[1] >> f[2];
            if (cnt != 3) throw IoError("TriMesh: non-triangle face in " + path);
            m.faces.push_back(f);
        }
        m.validate();
        return m;
    }
};

// Surface-area measure.  Planar ignores center/radii.  Spherical requires all
// face vertices to lie on the stretched sphere center + radii .* S^2 within
// on_sphere_tol after undoing the stretch; the excess is accumulated on the
// unit sphere and rescaled by radius^2 only when the stretch is uniform, so
// nonuniform stretches yield areas in unit-sphere measure.
struct AreaSpec {
    enum class Kind { planar, spherical } kind = Kind::planar;
    Vec center;
    Vec radii;
    double on_sphere_tol = 1e-6;

    static AreaSpec planar() { return {}; }
    static AreaSpec spherical(const Vec& center, const Vec& radii) {
        AreaSpec s;
        s.kind = Kind::spherical;
        s.center = center;
        s.radii = radii;
        return s;
    }
};

namespace detail {

inline double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Spherical excess of a unit-sphere triangle via L'Huilier's theorem.
inline double spherical_excess(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c) {
    const double sa = angle_between(b, c);
    const double sb = angle_between(a, c);
    const double sc = angle_between(a, b);
    const double s = 0.5 * (sa + sb + sc);
    const double t = std::tan(0.5 * s) * std::tan(0.5 * (s - sa)) *
                     std::tan(0.5 * (s - sb)) * std::tan(0.5 * (s - sc));
    return 4.0 * std::atan(std::sqrt(std::max(0.0, t)));
}

}  // namespace detail

inline double mesh_area(const TriMesh& mesh, const AreaSpec& spec = AreaSpec::planar()) {
    mesh.validate();
    if (spec.kind == AreaSpec::Kind::planar) {
        double area = 0.0;
        for (const auto& f : mesh.faces) {
            Eigen::Vector3d a = mesh.vertices.row(f[0]);
            Eigen::Vector3d b = mesh.vertices.row(f[1]);
            Eigen::Vector3d c = mesh.vertices.row(f[2]);
            area += 0.5 * (b - a).cross(c - a).norm();
        }
        return area;
    }
    if (spec.center.size() != 3 || spec.radii.size() != 3)
        throw InvalidInput("mesh_area: spherical mode needs a 3-d center and radii");
    if (spec.radii.minCoeff() <= 0.0)
        throw InvalidInput("mesh_area: sphere radii must be positive");
    std::vector<Eigen::Vector3d> unit(mesh.vertices.rows());
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
        Eigen::Vector3d y = (mesh.vertices.row(i).transpose() - spec.center).array() /
                            spec.radii.array();
        if (std::abs(y.norm() - 1.0) > spec.on_sphere_tol)
            throw InvalidInput("mesh_area: vertex off the stated sphere");
        unit[i] = y.normalized();
    }
    double excess = 0.0;
    for (const auto& f : mesh.faces)
        excess += detail::spherical_excess(unit[f[0]], unit[f[1]], unit[f[2]]);
    const double rspread = spec.radii.maxCoeff() - spec.radii.minCoeff();
    if (rspread <= 1e-12 * spec.radii.maxCoeff())
        return excess * spec.radii[0] * spec.radii[0];
    return excess;
}

}  // namespace mompc_lab::geom
