#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parkloc/geometry.hpp"

namespace parkloc {

enum class Camera : std::uint8_t { Front = 0, Rear = 1, Left = 2, Right = 3 };

inline constexpr std::array<Camera, 4> kAllCameras = {Camera::Front, Camera::Rear, Camera::Left,
                                                      Camera::Right};

std::string_view to_string(Camera camera);
std::optional<Camera> camera_from_string(std::string_view name);

enum class TextClass : std::uint8_t { PillarText = 0, ParklotText = 1, OtherText = 2 };

/// Four image corners, clockwise (as seen on screen, v pointing down) starting
/// at the top-left corner.
struct BoundingBox {
    std::array<Point2Image, 4> corners{};

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Shoelace area in image coordinates; positive for clockwise-on-screen order.
double signed_area(const BoundingBox& box);

/// Finite corners, no crossing edges, positive signed area.
bool is_valid_box(const BoundingBox& box);

Point2Image bbox_center(const BoundingBox& box);

struct DetectionRecord {
    std::int64_t frame = 0;
    double timestamp = 0.0;
    Camera camera = Camera::Front;
    BoundingBox box;
    TextClass text_class = TextClass::ParklotText;
    std::string content;
    double score = 1.0;

    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct FrameBundle {
    std::int64_t frame = 0;
    double timestamp = 0.0;
    double heading = 0.0;  // ego yaw in the lot frame, from odometry
    std::vector<DetectionRecord> detections;

    friend bool operator==(const FrameBundle&, const FrameBundle&) = default;
};

/// Anything that yields frame bundles in order: a recorded log, the
/// simulator, or a live recognizer.
class DetectionSource {
public:
    virtual ~DetectionSource() = default;
    virtual std::optional<FrameBundle> next() = 0;
};

class VectorSource final : public DetectionSource {
public:
    explicit VectorSource(std::vector<FrameBundle> bundles) : bundles_(std::move(bundles)) {}
    std::optional<FrameBundle> next() override;

private:
    std::vector<FrameBundle> bundles_;
    std::size_t pos_ = 0;
};

/// One bundle per line. Throws Error{ParseError} naming the line, and
/// Error{NonMonotoneTimestamp} when time goes backwards.
class LogReader final : public DetectionSource {
public:
    explicit LogReader(const std::string& path);
    explicit LogReader(std::istream& in);

    std::optional<FrameBundle> next() override;

private:
    std::unique_ptr<std::ifstream> owned_;
    std::istream* in_;
    std::size_t line_no_ = 0;
    std::optional<double> last_timestamp_;
};

FrameBundle parse_bundle(std::string_view line, std::size_t line_no);
std::string format_bundle(const FrameBundle& bundle);

std::vector<FrameBundle> read_log(const std::string& path);
std::vector<FrameBundle> read_log(std::istream& in);
void write_log(std::ostream& out, std::span<const FrameBundle> bundles);
void write_log(const std::string& path, std::span<const FrameBundle> bundles);

}  // namespace parkloc
