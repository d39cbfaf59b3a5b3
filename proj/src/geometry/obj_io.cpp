#include "avatar/geometry/obj_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "avatar/error.hpp"

namespace avatar {

namespace {

double parse_number(std::string_view token, std::size_t line) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw FormatError("invalid number '" + std::string(token) + "'", line);
    }
    return value;
}

int parse_index(std::string_view token, int count, std::size_t line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
        throw FormatError("invalid index '" + std::string(token) + "'", line);
    }
    const int resolved = value > 0 ? value - 1 : count + value;
    if (resolved < 0 || resolved >= count) {
        throw FormatError("index " + std::string(token) + " out of range", line);
    }
    return resolved;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

TriMesh parse_obj(const std::string& text) {
    TriMesh mesh;
    std::vector<Vec2> texcoords;
    int faces_with_uv = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;

        if (tokens[0] == "v") {
            if (tokens.size() < 4) throw FormatError("vertex needs three coordinates", line_no);
            mesh.vertices.emplace_back(parse_number(tokens[1], line_no), parse_number(tokens[2], line_no),
                                       parse_number(tokens[3], line_no));
        } else if (tokens[0] == "vt") {
            if (tokens.size() < 3) throw FormatError("texture coordinate needs two values", line_no);
            texcoords.emplace_back(parse_number(tokens[1], line_no), parse_number(tokens[2], line_no));
        } else if (tokens[0] == "f") {
            if (tokens.size() < 4) throw FormatError("face needs at least three corners", line_no);
            if (tokens.size() > 4) {
                throw UnsupportedTopologyError("face with " + std::to_string(tokens.size() - 1) +
                                               " corners at line " + std::to_string(line_no) +
                                               "; only triangles are supported");
            }
            Face face{};
            FaceUV uv{};
            int with_uv = 0;
            for (int c = 0; c < 3; ++c) {
                std::string_view corner = tokens[c + 1];
                const auto slash = corner.find('/');
                face[c] = parse_index(corner.substr(0, slash), mesh.vertex_count(), line_no);
                if (slash != std::string_view::npos) {
                    std::string_view rest = corner.substr(slash + 1);
                    const auto slash2 = rest.find('/');
                    std::string_view vt = rest.substr(0, slash2);
                    if (!vt.empty()) {
                        uv[c] = texcoords[parse_index(vt, static_cast<int>(texcoords.size()), line_no)];
                        ++with_uv;
                    }
                }
            }
            if (with_uv != 0 && with_uv != 3) {
                throw FormatError("face mixes corners with and without texture coordinates", line_no);
            }
            if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
                throw TopologyError("degenerate face at line " + std::to_string(line_no));
            }
            if (with_uv == 3) {
                if (faces_with_uv != mesh.face_count()) {
                    throw FormatError("texture coordinates present on some faces only", line_no);
                }
                ++faces_with_uv;
                mesh.uvs.push_back(uv);
            } else if (faces_with_uv > 0) {
                throw FormatError("texture coordinates present on some faces only", line_no);
            }
            mesh.faces.push_back(face);
        }
    }
    mesh.validate();
    return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open mesh file " + path.string(), 0);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_obj(buffer.str());
}

std::string format_double(double value) {
    if (value == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string format_obj(const TriMesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 40);
    for (const Vec3& v : mesh.vertices) {
        out += "v ";
        out += format_double(v.x());
        out += ' ';
        out += format_double(v.y());
        out += ' ';
        out += format_double(v.z());
        out += '\n';
    }

    std::vector<std::array<int, 3>> uv_index;
    if (mesh.has_uvs()) {
        std::map<std::pair<double, double>, int> ids;
        uv_index.resize(mesh.faces.size());
        for (std::size_t f = 0; f < mesh.uvs.size(); ++f) {
            for (int c = 0; c < 3; ++c) {
                const Vec2& t = mesh.uvs[f][c];
                auto [it, inserted] = ids.emplace(std::make_pair(t.x(), t.y()), static_cast<int>(ids.size()));
                if (inserted) {
                    out += "vt ";
                    out += format_double(t.x());
                    out += ' ';
                    out += format_double(t.y());
                    out += '\n';
                }
                uv_index[f][c] = it->second;
            }
        }
    }

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        out += 'f';
        for (int c = 0; c < 3; ++c) {
            out += ' ';
            out += std::to_string(mesh.faces[f][c] + 1);
            if (mesh.has_uvs()) {
                out += '/';
                out += std::to_string(uv_index[f][c] + 1);
            }
        }
        out += '\n';
    }
    return out;
}

void save_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write mesh file " + path.string());
    out << format_obj(mesh);
}

}  // namespace avatar
