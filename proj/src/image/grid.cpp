#include "avatar/image/grid.hpp"

namespace avatar {

BinaryMask DepthMap::foreground() const {
    BinaryMask mask(width(), height(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) mask[i] = std::isfinite(values[i]) ? 1 : 0;
    return mask;
}

std::size_t count_true(const BinaryMask& mask) {
    std::size_t n = 0;
    for (std::uint8_t b : mask.data()) n += b ? 1 : 0;
    return n;
}

GrayImage luminance(const RgbImage& image) {
    GrayImage out(image.width(), image.height(), 0.0);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const Rgb& c = image[i];
        out[i] = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
    }
    return out;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_size(b)) throw AlignmentError("mask sizes differ");
    BinaryMask out(a.width(), a.height(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
    return out;
}

}  // namespace avatar
