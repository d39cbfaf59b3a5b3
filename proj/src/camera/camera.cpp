#include "avatar/camera/camera.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "avatar/error.hpp"

namespace avatar {

using nlohmann::json;

void WeakPerspectiveCamera::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("camera scale must be positive");
    if (width <= 0 || height <= 0) throw ParameterError("camera image size must be positive");
    if (depth_sign != 1 && depth_sign != -1) throw ParameterError("camera depth_sign must be +1 or -1");
    if (!translation.allFinite()) throw ParameterError("camera translation must be finite");
}

WeakPerspectiveCamera fit_camera(const Bounds3& box, int width, int height, double margin, int depth_sign) {
    WeakPerspectiveCamera cam;
    cam.width = width;
    cam.height = height;
    cam.depth_sign = depth_sign;
    const Vec3 ext = box.extent();
    const double usable = 1.0 - 2.0 * margin;
    const double sx = ext.x() > 0.0 ? usable * width / ext.x() : 1e300;
    const double sy = ext.y() > 0.0 ? usable * height / ext.y() : 1e300;
    cam.scale = std::min(sx, sy);
    if (cam.scale >= 1e300) cam.scale = 1.0;
    const Vec3 c = box.center();
    cam.translation = Vec2(0.5 * width, 0.5 * height) - cam.scale * c.head<2>();
    cam.validate();
    return cam;
}

void save_camera(const std::filesystem::path& path, const WeakPerspectiveCamera& camera) {
    json j;
    j["scale"] = camera.scale;
    j["translation"] = {camera.translation.x(), camera.translation.y()};
    j["image_size"] = {camera.width, camera.height};
    j["depth_sign"] = camera.depth_sign;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

WeakPerspectiveCamera load_camera(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open camera file " + path.string(), 0);
    try {
        const json j = json::parse(in);
        WeakPerspectiveCamera cam;
        cam.scale = j.at("scale").get<double>();
        cam.translation = Vec2(j.at("translation").at(0).get<double>(), j.at("translation").at(1).get<double>());
        cam.width = j.at("image_size").at(0).get<int>();
        cam.height = j.at("image_size").at(1).get<int>();
        cam.depth_sign = j.value("depth_sign", -1);
        cam.validate();
        return cam;
    } catch (const json::exception& e) {
        throw FormatError("invalid camera file " + path.string() + ": " + e.what(), 0);
    }
}

}  // namespace avatar
