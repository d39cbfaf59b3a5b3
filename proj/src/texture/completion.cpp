#include "avatar/texture/completion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "avatar/camera/scan.hpp"
#include "avatar/image/image_io.hpp"

namespace avatar {

FlowField identity_flow(int width, int height) {
    FlowField flow(width, height, Vec2::Zero());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) flow.at(x, y) = Vec2(x, y);
    return flow;
}

namespace {

std::array<int, 3> sorted_face(const Face& f) {
    std::array<int, 3> s = f;
    std::sort(s.begin(), s.end());
    return s;
}

// Squared distance to the nearest zero cell of f along a line; exact on integers.
void distance_1d(const std::vector<double>& f, std::vector<double>& d) {
    const int n = static_cast<int>(f.size());
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto cross = [&](int q, int p) {
        return ((f[q] + q * static_cast<double>(q)) - (f[p] + p * static_cast<double>(p))) / (2.0 * (q - p));
    };
    for (int q = 1; q < n; ++q) {
        double s = cross(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = cross(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Exact squared Euclidean distance from every cell to the nearest visible cell.
Grid<double> squared_distance(const UVMask& mask) {
    const int w = mask.width(), h = mask.height();
    const double far = 1e18;
    Grid<double> g(w, h, far);
    std::vector<double> f, d;
    f.resize(h);
    d.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = mask.at(x, y) ? 0.0 : far;
        distance_1d(f, d);
        for (int y = 0; y < h; ++y) g.at(x, y) = d[y];
    }
    f.resize(w);
    d.resize(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = g.at(x, y);
        distance_1d(f, d);
        for (int x = 0; x < w; ++x) g.at(x, y) = d[x];
    }
    return g;
}

// The row-major first visible texel at squared distance d2 from (x, y).
Vec2 source_at(const UVMask& mask, int x, int y, double d2) {
    const long long r2 = std::llround(d2);
    const long long r = static_cast<long long>(std::sqrt(static_cast<double>(r2))) + 1;
    for (long long dy = -r; dy <= r; ++dy) {
        const long long rem = r2 - dy * dy;
        if (rem < 0) continue;
        long long dx = static_cast<long long>(std::sqrt(static_cast<double>(rem)));
        while (dx * dx > rem) --dx;
        while ((dx + 1) * (dx + 1) <= rem) ++dx;
        if (dx * dx != rem) continue;
        const int yy = static_cast<int>(y + dy);
        for (long long sx : {x - dx, x + dx}) {
            if (mask.in_bounds(static_cast<int>(sx), yy) && mask.at(static_cast<int>(sx), yy)) {
                return Vec2(static_cast<double>(sx), yy);
            }
        }
    }
    throw Error("distance transform disagrees with the visibility mask");
}

}  // namespace

UVSymmetry derive_uv_symmetry(const TriMesh& mesh, const SymmetryMap& symmetry, int width, int height) {
    if (!mesh.has_uvs()) throw AtlasError("UV symmetry needs a UV atlas");
    if (width <= 0 || height <= 0) throw ParameterError("texture size must be positive");
    const std::vector<int> mirror = symmetry.dense(mesh.vertex_count());
    std::map<std::array<int, 3>, int> by_set;
    for (int f = 0; f < mesh.face_count(); ++f) by_set[sorted_face(mesh.faces[f])] = f;

    UVSymmetry out;
    out.position = Grid<Vec2>(width, height, Vec2::Zero());
    out.covered = BinaryMask(width, height, 0);
    out.partner = Grid<int>(width, height, -1);
    for (int f = 0; f < mesh.face_count(); ++f) {
        const Face& face = mesh.faces[f];
        const Face mf{mirror[face[0]], mirror[face[1]], mirror[face[2]]};
        const auto it = by_set.find(sorted_face(mf));
        if (it == by_set.end()) throw AtlasError("face " + std::to_string(f) + " has no mirror face");
        const int g = it->second;
        // Mirror UV of corner k is the corner of g holding mirror[face[k]].
        std::array<Vec2, 3> muv;
        for (int k = 0; k < 3; ++k) {
            for (int j = 0; j < 3; ++j) {
                if (mesh.faces[g][j] == mf[k]) muv[k] = mesh.uvs[g][j];
            }
        }
        const FaceUV& uv = mesh.uvs[f];
        scan_triangle(Vec2(uv[0].x() * width, uv[0].y() * height), Vec2(uv[1].x() * width, uv[1].y() * height),
                      Vec2(uv[2].x() * width, uv[2].y() * height), width, height,
                      [&](int x, int y, double b0, double b1, double b2) {
                          out.position.at(x, y) = uv_to_texel(b0 * muv[0] + b1 * muv[1] + b2 * muv[2], width, height);
                          out.covered.at(x, y) = 1;
                      });
    }
    Grid<int> rounded(width, height, -1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (!out.covered.at(x, y)) continue;
            const Vec2& p = out.position.at(x, y);
            const int mx = static_cast<int>(std::lround(p.x()));
            const int my = static_cast<int>(std::lround(p.y()));
            if (out.covered.in_bounds(mx, my) && out.covered.at(mx, my)) {
                rounded.at(x, y) = static_cast<int>(rounded.index(mx, my));
            }
        }
    }
    for (std::size_t i = 0; i < rounded.size(); ++i) {
        const int m = rounded[i];
        if (m >= 0 && rounded[static_cast<std::size_t>(m)] == static_cast<int>(i)) out.partner[i] = m;
    }
    return out;
}

void save_uv_symmetry(const std::filesystem::path& path, const UVSymmetry& symmetry) {
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = 0; i < symmetry.partner.size(); ++i) {
        const int m = symmetry.partner[i];
        if (m >= static_cast<int>(i)) pairs.push_back({static_cast<int>(i), m});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << nlohmann::json{{"width", symmetry.width()}, {"height", symmetry.height()}, {"pairs", pairs}}.dump()
        << '\n';
}

UVSymmetry load_uv_symmetry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open UV symmetry " + path.string(), 0);
    try {
        const auto j = nlohmann::json::parse(in);
        const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
        if (w <= 0 || h <= 0) throw FormatError("UV symmetry size must be positive", 0);
        UVSymmetry out;
        out.position = Grid<Vec2>(w, h, Vec2::Zero());
        out.covered = BinaryMask(w, h, 0);
        out.partner = Grid<int>(w, h, -1);
        const long n = static_cast<long>(w) * h;
        for (const auto& p : j.at("pairs")) {
            const int a = p.at(0).get<int>(), b = p.at(1).get<int>();
            if (a < 0 || b < 0 || a >= n || b >= n) throw FormatError("UV symmetry texel out of range", 0);
            if (out.partner[a] >= 0 || out.partner[b] >= 0) throw FormatError("UV symmetry texel paired twice", 0);
            out.partner[a] = b;
            out.partner[b] = a;
            out.position[a] = Vec2(b % w, b / w);
            out.position[b] = Vec2(a % w, a / w);
            out.covered[a] = out.covered[b] = 1;
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid UV symmetry " + path.string() + ": " + e.what(), 0);
    }
}

FlowField nearest_visible_flow(const UVMask& mask, const UVSymmetry* symmetry, const FlowOptions& options) {
    if (count_true(mask) == 0) throw EmptyVisibilityError("no visible texel to copy from");
    if (symmetry && !symmetry->partner.same_size(mask)) throw AlignmentError("UV symmetry and mask differ in size");
    if (!(options.gamma > 0.0)) throw ParameterError("symmetry preference factor must be positive");
    const int w = mask.width(), h = mask.height();
    const Grid<double> d2 = squared_distance(mask);
    FlowField flow = identity_flow(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (mask.at(x, y)) continue;
            const double own = d2.at(x, y);
            if (symmetry && options.symmetry_preference) {
                const int m = symmetry->partner.at(x, y);
                if (m >= 0) {
                    const int mx = m % w, my = m / w;
                    const double mirrored = d2.at(mx, my);
                    if (options.gamma * std::sqrt(mirrored) < std::sqrt(own)) {
                        flow.at(x, y) = source_at(mask, mx, my, mirrored);
                        continue;
                    }
                }
            }
            flow.at(x, y) = source_at(mask, x, y, own);
        }
    }
    return flow;
}

UVTexture apply_flow(const UVTexture& texture, const FlowField& flow) {
    if (!texture.same_size(flow)) throw AlignmentError("flow and texture differ in size");
    UVTexture out(texture.width(), texture.height(), Rgb::Zero());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!flow[i].allFinite()) throw BoundsError("non-finite flow target");
        out[i] = bilinear_sample(texture, clamp_to_grid(flow[i], texture.width(), texture.height()));
    }
    return out;
}

std::pair<UVTexture, UVMask> symmetric_composite(const UVTexture& texture, const UVMask& mask,
                                                 const UVSymmetry& symmetry) {
    if (!texture.same_size(mask) || !symmetry.partner.same_size(mask)) {
        throw AlignmentError("texture, mask and UV symmetry differ in size");
    }
    UVTexture tex = texture;
    UVMask out = mask;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const int m = symmetry.partner[i];
        if (!mask[i] && m >= 0 && mask[static_cast<std::size_t>(m)]) {
            tex[i] = texture[static_cast<std::size_t>(m)];
            out[i] = 1;
        }
    }
    return {std::move(tex), std::move(out)};
}

FlowField NearestVisibleFlowPredictor::predict(const UVTexture&, const UVMask& mask,
                                               const UVSymmetry* symmetry) const {
    return nearest_visible_flow(mask, symmetry, options_);
}

namespace {

// Edge-aware smoothing restricted to `free` texels; every other texel is fixed.
void smooth_free_texels(UVTexture& tex, const UVMask& free, int iterations, double sigma) {
    const int w = tex.width(), h = tex.height();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int it = 0; it < iterations; ++it) {
        UVTexture next = tex;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!free.at(x, y)) continue;
                const Rgb c = tex.at(x, y);
                Eigen::Vector3d sum = c.cast<double>();
                double wsum = 1.0;
                const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& n : nb) {
                    if (!tex.in_bounds(n[0], n[1])) continue;
                    const Rgb& o = tex.at(n[0], n[1]);
                    const double wt = std::exp(-(o - c).cast<double>().squaredNorm() * inv);
                    sum += wt * o.cast<double>();
                    wsum += wt;
                }
                next.at(x, y) = (sum / wsum).cast<float>();
            }
        }
        tex = std::move(next);
    }
}

}  // namespace

UVTexture complete_texture(const UVTexture& partial, const UVMask& mask, const UVSymmetry* symmetry,
                           const CompletionConfig& config, const FlowPredictor* predictor) {
    if (!partial.same_size(mask)) throw AlignmentError("texture and mask differ in size");
    if (count_true(mask) == 0) throw EmptyVisibilityError("texture completion needs a visible texel");
    if (config.smoothing_iterations < 0 || !(config.smoothing_sigma > 0.0)) {
        throw ParameterError("invalid smoothing settings");
    }
    UVTexture tex = partial;
    UVMask vis = mask;
    const UVSymmetry* sym = config.use_symmetry ? symmetry : nullptr;
    if (sym) std::tie(tex, vis) = symmetric_composite(tex, vis, *sym);
    const NearestVisibleFlowPredictor fallback(config.flow);
    const FlowPredictor& flow_source = predictor ? *predictor : fallback;
    const FlowField flow = flow_source.predict(tex, vis, sym);
    if (!flow.same_size(mask)) throw AlignmentError("predicted flow has the wrong size");
    UVTexture out = apply_flow(tex, flow);
    if (config.smoothing_iterations > 0) {
        UVMask free(mask.width(), mask.height(), 0);
        for (std::size_t i = 0; i < mask.size(); ++i) free[i] = !mask[i];
        smooth_free_texels(out, free, config.smoothing_iterations, config.smoothing_sigma);
    }
    // Visible texels are copied back so an external flow cannot alter them.
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out[i] = partial[i];
    }
    return out;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
    FloatGrid g{flow.width(), flow.height(), 2, {}};
    g.values.reserve(flow.size() * 2);
    for (std::size_t i = 0; i < flow.size(); ++i) {
        g.values.push_back(static_cast<float>(flow[i].x()));
        g.values.push_back(static_cast<float>(flow[i].y()));
    }
    write_float_grid(path, g);
}

FlowField read_flow(const std::filesystem::path& path) {
    const FloatGrid g = read_float_grid(path);
    if (g.channels != 2) throw FormatError("flow field needs two channels", 0);
    FlowField flow(g.width, g.height, Vec2::Zero());
    for (std::size_t i = 0; i < flow.size(); ++i) flow[i] = Vec2(g.values[2 * i], g.values[2 * i + 1]);
    return flow;
}

}  // namespace avatar
