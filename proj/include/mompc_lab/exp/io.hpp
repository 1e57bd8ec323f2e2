#pragma once

// Result-file plumbing shared by the experiment drivers.  Every table starts
// with a '# key: value' metadata block (config hash, grid sizes, solver
// tolerances) so a result file is traceable to the exact run that made it.
// Numbers are written with round-trip precision; no timestamps, so identical
// configs yield byte-identical files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"

namespace mompc_lab::exp {

using json = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(const std::string& s) {
    std::ostringstream os;
    os << std::hex << fnv1a64(s);
    return os.str();
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string fmt(double v, int precision) {
    std::ostringstream os;
    os.precision(precision);
    os << std::fixed << v;
    return os.str();
}

using MetaBlock = std::vector<std::pair<std::string, std::string>>;

inline void ensure_parent(const std::filesystem::path& p) {
    const auto dir = p.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

// header: column names; rows: pre-formatted cells, one vector per line.
inline void write_csv(const std::filesystem::path& path, const MetaBlock& meta,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw IoError("write_csv: cannot open " + path.string());
    for (const auto& [k, v] : meta) out << "# " << k << ": " << v << "\n";
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out << ",";
        out << header[j];
    }
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw InvalidInput("write_csv: row width differs from header");
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ",";
            out << row[j];
        }
        out << "\n";
    }
    if (!out) throw IoError("write_csv: short write to " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw IoError("write_json: cannot open " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write_json: short write to " + path.string());
}

inline json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json mat_to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_to_json(m.row(i)));
    return a;
}

}  // namespace mompc_lab::exp
