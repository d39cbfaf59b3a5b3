#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "avatar/geometry/mesh.hpp"

namespace avatar {

enum class Axis { X = 0, Y = 1, Z = 2 };

Axis parse_axis(const std::string& name);
std::string axis_name(Axis axis);

/// Left/right vertex correspondence. Each vertex is either in exactly one
/// pair or in `fixed`; `left` is the member with the larger axis coordinate.
struct SymmetryMap {
    Axis axis = Axis::X;
    std::vector<std::pair<int, int>> vertex_pairs;
    std::vector<int> fixed;

    // Dense involution: mirror[i] is the counterpart of i (i itself when fixed).
    // Throws ParameterError when the map does not cover [0, vertex_count).
    std::vector<int> dense(int vertex_count) const;
};

/// Pairs every vertex with the nearest vertex to its reflection across the
/// plane `axis = 0`. Vertices whose reflection lies within `tolerance` of
/// themselves are fixed. Throws AsymmetryError listing the vertices that have
/// no counterpart within tolerance, or whose counterpart is not mutual.
SymmetryMap mirror_correspondence(const TriMesh& mesh, Axis axis, double tolerance);

Vec3 reflect(const Vec3& p, Axis axis);

// {"axis": "x", "pairs": [[l, r], ...], "fixed": [...]}
void save_symmetry(const std::filesystem::path& path, const SymmetryMap& map);
SymmetryMap load_symmetry(const std::filesystem::path& path);

/// Named vertex index sets (for example "face", "fingers", "toes").
/// Stored as {"labels": {"face": [...], ...}}.
using VertexLabels = std::map<std::string, std::vector<int>>;

void save_labels(const std::filesystem::path& path, const VertexLabels& labels);
VertexLabels load_labels(const std::filesystem::path& path);

// Writes labels into mesh.vertex_tags; a vertex listed twice keeps the first label
// in map order. Throws ParameterError for indices outside the mesh.
void apply_labels(TriMesh& mesh, const VertexLabels& labels);

// True when the vertex carries any of `labels`.
bool has_label(const TriMesh& mesh, int vertex, const std::set<std::string>& labels);

}  // namespace avatar
