#pragma once

#include <filesystem>
#include <string>

#include "avatar/geometry/mesh.hpp"

namespace avatar {

/// Reads a triangle mesh from Wavefront OBJ (`v`, `vt`, `f`; other records ignored).
///
/// Face corners may be written as `v`, `v/vt`, `v//vn` or `v/vt/vn`, with
/// negative indices counted from the end. When any face carries texture
/// indices every face must. Throws FormatError (with line number) on malformed
/// input and UnsupportedTopologyError on polygons with more than three corners.
TriMesh load_mesh(const std::filesystem::path& path);

// Same as load_mesh but reads from an in-memory OBJ document.
TriMesh parse_obj(const std::string& text);

/// Writes positions, per-corner texture coordinates (deduplicated) and faces.
/// Numbers use the shortest round-trip representation, so a reload is bit-exact.
void save_mesh(const std::filesystem::path& path, const TriMesh& mesh);

std::string format_obj(const TriMesh& mesh);

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace avatar
