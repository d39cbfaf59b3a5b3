#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "avatar/geometry/mesh.hpp"
#include "avatar/geometry/symmetry.hpp"
#include "avatar/texture/texture.hpp"

namespace avatar {

/// Per-texel source position in continuous texel coordinates.
using FlowField = Grid<Vec2>;

FlowField identity_flow(int width, int height);

/// Left/right correspondence in texture space.
///
/// `position` is the continuous mirrored coordinate of every texel covered by
/// the atlas (`covered`). `partner` is the discrete counterpart (row-major
/// index, -1 when none): the rounded mirror position, kept only when the
/// rounding is mutual, so partner is an exact involution.
struct UVSymmetry {
    Grid<Vec2> position;
    BinaryMask covered;
    Grid<int> partner;

    int width() const { return partner.width(); }
    int height() const { return partner.height(); }
};

/// Derives the texel mirror map from the vertex symmetry and the UV atlas.
/// Every face must have a mirror face (the face on the mirrored vertices);
/// otherwise, or when the mesh has no UVs, throws AtlasError.
UVSymmetry derive_uv_symmetry(const TriMesh& mesh, const SymmetryMap& symmetry, int width = kDefaultTextureSize,
                              int height = kDefaultTextureSize);

// {"width": W, "height": H, "pairs": [[a, b], ...]} with row-major texel indices, a < b.
void save_uv_symmetry(const std::filesystem::path& path, const UVSymmetry& symmetry);
UVSymmetry load_uv_symmetry(const std::filesystem::path& path);

struct FlowOptions {
    bool symmetry_preference = true;
    double gamma = 1.5;
};

/// Visible texels map to themselves. An invisible texel maps to its nearest
/// visible texel (Euclidean, ties to the row-major first). With symmetry
/// preference it maps instead to the visible texel nearest its mirror partner
/// when gamma * (partner distance) < (own distance). Throws
/// EmptyVisibilityError when nothing is visible.
FlowField nearest_visible_flow(const UVMask& mask, const UVSymmetry* symmetry = nullptr,
                               const FlowOptions& options = {});

/// out(t) = bilinear_sample(texture, flow(t)) with flow targets clamped to
/// the grid. Throws AlignmentError on a size mismatch and BoundsError for a
/// non-finite flow.
UVTexture apply_flow(const UVTexture& texture, const FlowField& flow);

/// Fills each invisible texel whose partner is visible with the partner's
/// color and marks it visible. Visible texels are unchanged. Idempotent.
std::pair<UVTexture, UVMask> symmetric_composite(const UVTexture& texture, const UVMask& mask,
                                                 const UVSymmetry& symmetry);

/// Pluggable flow source; the default is nearest_visible_flow.
class FlowPredictor {
public:
    virtual ~FlowPredictor() = default;
    virtual FlowField predict(const UVTexture& texture, const UVMask& mask, const UVSymmetry* symmetry) const = 0;
};

class NearestVisibleFlowPredictor : public FlowPredictor {
public:
    explicit NearestVisibleFlowPredictor(FlowOptions options = {}) : options_(options) {}
    FlowField predict(const UVTexture& texture, const UVMask& mask, const UVSymmetry* symmetry) const override;

private:
    FlowOptions options_;
};

struct CompletionConfig {
    bool use_symmetry = true;
    FlowOptions flow;
    int smoothing_iterations = 0;  // edge-aware passes over originally invisible texels
    double smoothing_sigma = 0.1;  // color distance scale of the edge weight
};

/// symmetric_composite, then flow, then apply_flow, then optional smoothing of
/// originally invisible texels. Visible texels come out bit-exact. Throws
/// EmptyVisibilityError for an empty mask and AlignmentError on size mismatch.
UVTexture complete_texture(const UVTexture& partial, const UVMask& mask, const UVSymmetry* symmetry,
                           const CompletionConfig& config = {}, const FlowPredictor* predictor = nullptr);

// Flow fields use the shared float grid format with two channels (x, y).
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace avatar
