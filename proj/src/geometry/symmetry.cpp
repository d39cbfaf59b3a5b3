#include "avatar/geometry/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "avatar/error.hpp"

namespace avatar {

using nlohmann::json;

Axis parse_axis(const std::string& name) {
    if (name == "x" || name == "X") return Axis::X;
    if (name == "y" || name == "Y") return Axis::Y;
    if (name == "z" || name == "Z") return Axis::Z;
    throw ParameterError("unknown axis '" + name + "'");
}

std::string axis_name(Axis axis) {
    switch (axis) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "x";
}

Vec3 reflect(const Vec3& p, Axis axis) {
    Vec3 r = p;
    r[static_cast<int>(axis)] = -r[static_cast<int>(axis)];
    return r;
}

std::vector<int> SymmetryMap::dense(int vertex_count) const {
    std::vector<int> mirror(vertex_count, -1);
    auto set = [&](int i, int j) {
        if (i < 0 || i >= vertex_count) throw ParameterError("symmetry index out of range");
        if (mirror[i] != -1) throw ParameterError("vertex " + std::to_string(i) + " appears twice in symmetry map");
        mirror[i] = j;
    };
    for (auto [l, r] : vertex_pairs) {
        set(l, r);
        set(r, l);
    }
    for (int f : fixed) set(f, f);
    for (int i = 0; i < vertex_count; ++i) {
        if (mirror[i] < 0) throw ParameterError("vertex " + std::to_string(i) + " missing from symmetry map");
    }
    return mirror;
}

namespace {

// Hash grid over vertex positions with cell edge `cell`; queries scan the 27
// surrounding cells, which is exact for radii up to `cell`.
class PointGrid {
public:
    PointGrid(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell) {
        cells_.reserve(points.size());
        for (int i = 0; i < static_cast<int>(points.size()); ++i) cells_[key(coord(points[i]))].push_back(i);
    }

    // Nearest point within `radius` (<= cell); -1 when none. Ties go to the lower index.
    int nearest(const Vec3& q, double radius) const {
        const auto c = coord(q);
        int best = -1;
        double best_d2 = radius * radius;
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it == cells_.end()) continue;
                    for (int idx : it->second) {
                        const double d2 = (points_[idx] - q).squaredNorm();
                        if (d2 < best_d2 || (d2 == best_d2 && (best < 0 || idx < best))) {
                            best_d2 = d2;
                            best = idx;
                        }
                    }
                }
            }
        }
        return best;
    }

private:
    std::array<long long, 3> coord(const Vec3& p) const {
        return {static_cast<long long>(std::floor(p.x() / cell_)), static_cast<long long>(std::floor(p.y() / cell_)),
                static_cast<long long>(std::floor(p.z() / cell_))};
    }
    static std::uint64_t key(const std::array<long long, 3>& c) {
        std::uint64_t h = 1469598103934665603ULL;
        for (long long v : c) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

    const std::vector<Vec3>& points_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace

SymmetryMap mirror_correspondence(const TriMesh& mesh, Axis axis, double tolerance) {
    if (!(tolerance > 0.0)) throw ParameterError("symmetry tolerance must be positive");
    const int n = mesh.vertex_count();
    PointGrid grid(mesh.vertices, tolerance);

    std::vector<int> match(n, -1);
    for (int i = 0; i < n; ++i) {
        const Vec3 r = reflect(mesh.vertices[i], axis);
        if ((r - mesh.vertices[i]).norm() <= tolerance) {
            match[i] = i;
        } else {
            match[i] = grid.nearest(r, tolerance);
        }
    }

    SymmetryMap map;
    map.axis = axis;
    std::vector<int> offending;
    const int a = static_cast<int>(axis);
    for (int i = 0; i < n; ++i) {
        const int j = match[i];
        if (j < 0 || match[j] != i) {
            offending.push_back(i);
            continue;
        }
        if (j == i) {
            map.fixed.push_back(i);
        } else if (i < j) {
            const bool i_left = mesh.vertices[i][a] > mesh.vertices[j][a];
            map.vertex_pairs.emplace_back(i_left ? i : j, i_left ? j : i);
        }
    }
    if (!offending.empty()) {
        std::string msg = std::to_string(offending.size()) + " vertices have no mirror counterpart within " +
                          std::to_string(tolerance) + ": ";
        for (std::size_t k = 0; k < offending.size() && k < 16; ++k) msg += std::to_string(offending[k]) + " ";
        throw AsymmetryError(msg, std::move(offending));
    }
    return map;
}

void save_symmetry(const std::filesystem::path& path, const SymmetryMap& map) {
    json j;
    j["axis"] = axis_name(map.axis);
    json pairs = json::array();
    for (auto [l, r] : map.vertex_pairs) pairs.push_back({l, r});
    j["pairs"] = std::move(pairs);
    j["fixed"] = map.fixed;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump() << '\n';
}

SymmetryMap load_symmetry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open symmetry file " + path.string(), 0);
    try {
        const json j = json::parse(in);
        SymmetryMap map;
        map.axis = parse_axis(j.at("axis").get<std::string>());
        for (const auto& p : j.at("pairs")) map.vertex_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        map.fixed = j.at("fixed").get<std::vector<int>>();
        return map;
    } catch (const json::exception& e) {
        throw FormatError("invalid symmetry file " + path.string() + ": " + e.what(), 0);
    }
}

void save_labels(const std::filesystem::path& path, const VertexLabels& labels) {
    json j;
    j["labels"] = json::object();
    for (const auto& [name, idx] : labels) j["labels"][name] = idx;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump() << '\n';
}

VertexLabels load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open label file " + path.string(), 0);
    try {
        const json j = json::parse(in);
        VertexLabels labels;
        for (const auto& [name, idx] : j.at("labels").items()) labels[name] = idx.get<std::vector<int>>();
        return labels;
    } catch (const json::exception& e) {
        throw FormatError("invalid label file " + path.string() + ": " + e.what(), 0);
    }
}

void apply_labels(TriMesh& mesh, const VertexLabels& labels) {
    if (mesh.vertex_tags.size() != mesh.vertices.size()) mesh.vertex_tags.assign(mesh.vertices.size(), "");
    for (const auto& [name, indices] : labels) {
        for (int idx : indices) {
            if (idx < 0 || idx >= mesh.vertex_count()) {
                throw ParameterError("label '" + name + "' references vertex " + std::to_string(idx));
            }
            if (mesh.vertex_tags[idx].empty()) mesh.vertex_tags[idx] = name;
        }
    }
}

bool has_label(const TriMesh& mesh, int vertex, const std::set<std::string>& labels) {
    if (!mesh.has_tags()) return false;
    const std::string& tag = mesh.vertex_tags[vertex];
    return !tag.empty() && labels.count(tag) > 0;
}

}  // namespace avatar
