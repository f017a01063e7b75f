#pragma once

#include <array>
#include <string>
#include <string_view>

#include "parkloc/detection.hpp"
#include "parkloc/geometry.hpp"

namespace parkloc {

/// One homography per surround camera, mapping vehicle-frame ground
/// coordinates to that camera's (rectified) image. Inverses are cached.
class CameraRig {
public:
    explicit CameraRig(const std::array<Homography, 4>& ground_to_image);

    const Homography& ground_to_image(Camera c) const { return forward_[index(c)]; }
    const Homography& image_to_ground(Camera c) const { return inverse_[index(c)]; }

    friend bool operator==(const CameraRig& a, const CameraRig& b) { return a.forward_ == b.forward_; }

private:
    static std::size_t index(Camera c) { return static_cast<std::size_t>(c); }

    std::array<Homography, 4> forward_;
    std::array<Homography, 4> inverse_;
};

/// {"front": [h11..h33], "rear": [...], "left": [...], "right": [...]}
CameraRig parse_rig(std::string_view document);
std::string dump_rig(const CameraRig& rig);
CameraRig load_rig(const std::string& path);
void save_rig(const CameraRig& rig, const std::string& path);

/// Single homography file written by `calib`: {"h": [h11..h33]}, or a
/// one-camera rig fragment {"<camera>": [...]} when `camera` is given.
std::string dump_homography(const Homography& h, std::string_view camera = {});

}  // namespace parkloc
