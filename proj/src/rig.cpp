#include "parkloc/rig.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "parkloc/error.hpp"

namespace parkloc {

using ordered_json = nlohmann::ordered_json;

namespace {

std::array<Homography, 4> inverses(const std::array<Homography, 4>& fwd) {
    return {invert(fwd[0]), invert(fwd[1]), invert(fwd[2]), invert(fwd[3])};
}

ordered_json entries_json(const Homography& h) {
    ordered_json arr = ordered_json::array();
    for (const double e : h.row_major()) arr.push_back(e);
    return arr;
}

}  // namespace

CameraRig::CameraRig(const std::array<Homography, 4>& ground_to_image)
    : forward_(ground_to_image), inverse_(inverses(ground_to_image)) {}

CameraRig parse_rig(std::string_view document) {
    try {
        const auto doc = ordered_json::parse(document);
        std::array<Homography, 4> hs;
        for (const Camera c : kAllCameras) {
            const auto& arr = doc.at(std::string(to_string(c)));
            if (!arr.is_array() || arr.size() != 9) {
                throw Error(ErrorKind::ParseError,
                            "rig: camera '" + std::string(to_string(c)) + "' needs 9 entries");
            }
            std::array<double, 9> e{};
            for (std::size_t k = 0; k < 9; ++k) e[k] = arr[k].get<double>();
            hs[static_cast<std::size_t>(c)] = Homography::from_row_major(e);
        }
        return CameraRig(hs);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("rig: ") + e.what());
    }
}

std::string dump_rig(const CameraRig& rig) {
    ordered_json doc;
    for (const Camera c : kAllCameras) {
        doc[std::string(to_string(c))] = entries_json(rig.ground_to_image(c));
    }
    return doc.dump(1) + "\n";
}

CameraRig load_rig(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open rig " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rig(ss.str());
}

void save_rig(const CameraRig& rig, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write rig " + path);
    out << dump_rig(rig);
}

std::string dump_homography(const Homography& h, std::string_view camera) {
    ordered_json doc;
    doc[camera.empty() ? std::string("h") : std::string(camera)] = entries_json(h);
    return doc.dump(1) + "\n";
}

}  // namespace parkloc
