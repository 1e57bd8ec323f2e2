#pragma once

// Point clouds in image space.  Rows are points.  Construction deduplicates
// coincident points so downstream surface reconstruction sees a simple set.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab::geom {

class PointCloud {
  public:
    PointCloud() = default;

    static PointCloud from_rows(const Mat& rows, double dedup_tol = 1e-12) {
        PointCloud pc;
        if (rows.rows() == 0) {
            pc.pts_ = Mat(0, rows.cols());
            return pc;
        }
        const Eigen::Index d = rows.cols();
        std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> cells;
        std::vector<Eigen::Index> keep;
        auto cell_key = [&](const Vec& p, int ox, int oy, int oz) {
            std::uint64_t h = 1469598103934665603ull;
            for (Eigen::Index k = 0; k < d; ++k) {
                long long c = (long long)std::floor(p[k] / dedup_tol);
                c += (k == 0 ? ox : k == 1 ? oy : k == 2 ? oz : 0);
                h ^= (std::uint64_t)c + 0x9e3779b97f4a7c15ull;
                h *= 1099511628211ull;
            }
            return h;
        };
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            Vec p = rows.row(i);
            bool dup = false;
            for (int ox = -1; ox <= 1 && !dup; ++ox)
                for (int oy = -1; oy <= 1 && !dup; ++oy)
                    for (int oz = -1; oz <= 1 && !dup; ++oz) {
                        auto it = cells.find(cell_key(p, ox, oy, oz));
                        if (it == cells.end()) continue;
                        for (Eigen::Index j : it->second)
                            if ((rows.row(j).transpose() - p).cwiseAbs().maxCoeff() <=
                                dedup_tol) {
                                dup = true;
                                break;
                            }
                    }
            if (!dup) {
                cells[cell_key(p, 0, 0, 0)].push_back(i);
                keep.push_back(i);
            }
        }
        pc.pts_ = Mat(keep.size(), d);
        for (std::size_t k = 0; k < keep.size(); ++k) pc.pts_.row(k) = rows.row(keep[k]);
        return pc;
    }

    const Mat& points() const { return pts_; }
    Eigen::Index size() const { return pts_.rows(); }
    Eigen::Index dim() const { return pts_.cols(); }
    Vec point(Eigen::Index i) const { return pts_.row(i); }

    // Index of the point nearest to q (ties toward the smaller index).
    Eigen::Index nearest(const Vec& q) const {
        if (pts_.rows() == 0) throw InvalidInput("PointCloud::nearest: empty cloud");
        Eigen::Index best = 0;
        double best_d = (pts_.row(0).transpose() - q).squaredNorm();
        for (Eigen::Index i = 1; i < pts_.rows(); ++i) {
            double d2 = (pts_.row(i).transpose() - q).squaredNorm();
            if (d2 < best_d) {
                best_d = d2;
                best = i;
            }
        }
        return best;
    }

    void write_csv(const std::string& path,
                   const std::vector<std::string>& metadata = {}) const {
        std::ofstream out(path);
        if (!out) throw IoError("PointCloud: cannot open " + path);
        out.precision(17);
        for (const auto& line : metadata) out << "# " << line << "\n";
        for (Eigen::Index i = 0; i < pts_.rows(); ++i) {
            for (Eigen::Index j = 0; j < pts_.cols(); ++j) {
                if (j) out << ",";
                out << pts_(i, j);
            }
            out << "\n";
        }
    }

    static PointCloud read_csv(const std::string& path, double dedup_tol = 1e-12) {
        std::ifstream in(path);
        if (!in) throw IoError("PointCloud: cannot open " + path);
        std::vector<Vec> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::stringstream ss(line);
            std::vector<double> vals;
            std::string tok;
            while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
            if (vals.empty()) continue;
            Vec v(vals.size());
            for (std::size_t k = 0; k < vals.size(); ++k) v[k] = vals[k];
            if (!rows.empty() && rows.front().size() != v.size())
                throw IoError("PointCloud: ragged CSV in " + path);
            rows.push_back(v);
        }
        Mat m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i];
        return from_rows(m, dedup_tol);
    }

  private:
    Mat pts_;
};

}  // namespace mompc_lab::geom
