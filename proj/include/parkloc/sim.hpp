#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parkloc/detection.hpp"
#include "parkloc/fusion.hpp"
#include "parkloc/map.hpp"
#include "parkloc/rig.hpp"

namespace parkloc::sim {

/// Rows of spots along the lot X axis. Row r sits at y = r * row_spacing();
/// each row's driving line runs aisle_width / 2 below it. Labels count up
/// along +X within a row and continue row after row.
struct LotSpec {
    int rows = 2;
    int spots_per_row = 50;
    double spot_pitch = 2.5;
    double aisle_width = 6.0;
    std::string lot_id = "sim-lot";

    double row_spacing() const { return 2.0 * aisle_width; }
};

HdMap generate_lot(const LotSpec& spec);

/// Zero-padded 1-based label, at least three digits wide.
std::string spot_label(int number, int total_spots);

/// Part of the ground a camera reports detections for, in the camera's
/// mount frame (forward along the optical azimuth, lateral to its left).
struct VisibleRegion {
    double min_forward = 0.5;
    double max_forward = 6.0;
    double max_lateral = 6.0;
};

/// Pinhole camera on the vehicle body, pitched down toward the ground.
struct CameraMount {
    Camera camera = Camera::Front;
    double x = 0.0;    // vehicle frame, meters
    double y = 0.0;
    double yaw = 0.0;  // optical azimuth, radians from vehicle +x
    double height = 1.0;
    double pitch = 0.6108652381980153;  // 35 degrees below horizontal
    double focal_px = 400.0;
    double cu = 640.0;
    double cv = 480.0;
    VisibleRegion region;
};

std::array<CameraMount, 4> default_mounts();

/// Vehicle ground plane -> image homography of a mount.
Homography mount_homography(const CameraMount& mount);
CameraRig make_rig(const std::array<CameraMount, 4>& mounts);

/// Ground rectangle in front of each camera (mount frame) whose four corners
/// are clicked in the image to calibrate that camera.
struct CalibrationTarget {
    double near = 1.0;
    double far = 5.0;
    double half_width = 2.0;

    friend bool operator==(const CalibrationTarget&, const CalibrationTarget&) = default;
};

/// Rig as a calibration would estimate it: each homography is solved from the
/// target corners with Gaussian pixel noise on the clicks. Sigma 0 gives
/// make_rig(mounts) exactly.
CameraRig calibrate_rig(const std::array<CameraMount, 4>& mounts, const CalibrationTarget& target,
                        double pixel_sigma, std::uint64_t seed);
bool in_view(const CameraMount& mount, const VehicleOffset& p);

struct NoiseSpec {
    double pixel_sigma = 0.0;   // Gaussian on each box corner
    double misread_rate = 0.0;  // content replaced by another in-map label
    double dropout_rate = 0.0;  // visible observation yields nothing
    double ghost_rate = 0.0;    // per frame, one far-away or out-of-map label
    std::uint64_t seed = 0;
    int ghost_min_label_distance = 20;

    void validate() const;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double t = 0.0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

using Trajectory = std::vector<Pose>;

enum class Pattern { StraightAisle, Serpentine };

std::string_view to_string(Pattern p);
Pattern pattern_from_string(std::string_view s);

struct TrajectorySpec {
    double speed = 2.0;  // m/s
    Pattern pattern = Pattern::StraightAisle;
    double rate_hz = 30.0;
    double duration_s = 0.0;  // 0 drives the whole path
    double aisle_offset = 3.0;
    double start_x = 0.0;      // along the first row, relative to its first spot
    double turn_radius = 3.0;
    double end_margin = 4.0;   // run-out past the row end before turning
};

/// Rows are recovered from the map by grouping anchors with equal y.
Trajectory generate_trajectory(const HdMap& map, const TrajectorySpec& spec);

enum class TruthTag { Clean, Misread, Ghost };

std::string_view to_string(TruthTag t);

struct DroppedObservation {
    std::string label;
    Camera camera = Camera::Front;

    friend bool operator==(const DroppedObservation&, const DroppedObservation&) = default;
};

/// Ground truth for one frame, line-aligned with the detection log.
struct TruthFrame {
    std::int64_t frame = 0;
    Pose pose;
    std::vector<TruthTag> tags;  // one per detection, in bundle order
    std::vector<DroppedObservation> dropped;

    friend bool operator==(const TruthFrame&, const TruthFrame&) = default;
};

struct SimFrame {
    FrameBundle bundle;
    TruthFrame truth;
};

/// Everything the renderer needs that does not change between frames.
class World {
public:
    World(HdMap map, std::array<CameraMount, 4> mounts);
    World(const World&) = delete;
    World& operator=(const World&) = delete;
    World(World&&) noexcept = default;
    World& operator=(World&&) noexcept = default;

    const HdMap& map() const noexcept { return map_; }
    const std::array<CameraMount, 4>& mounts() const noexcept { return mounts_; }
    const CameraRig& rig() const noexcept { return rig_; }

    struct Spot {
        const ParkingSpot* spot;
        std::int64_t number;
    };
    const std::vector<Spot>& spots() const noexcept { return spots_; }
    std::int64_t max_number() const noexcept { return max_number_; }
    std::size_t label_width() const noexcept { return label_width_; }

private:
    HdMap map_;
    std::array<CameraMount, 4> mounts_;
    CameraRig rig_;
    std::vector<Spot> spots_;
    std::int64_t max_number_ = 0;
    std::size_t label_width_ = 3;
};

/// Per-frame generator seed; frames can be rendered in any order.
std::uint64_t frame_seed(std::uint64_t seed, std::int64_t frame);

SimFrame synthesize_frame(const World& world, const Pose& pose, std::int64_t frame,
                          const NoiseSpec& noise);

struct SimRun {
    std::vector<FrameBundle> bundles;
    std::vector<TruthFrame> truth;
};

/// Renders every trajectory sample; frames are spread over OpenMP threads.
SimRun synthesize_run(const World& world, const Trajectory& trajectory, const NoiseSpec& noise);
/// Reference loop, identical output.
SimRun synthesize_run_serial(const World& world, const Trajectory& trajectory,
                             const NoiseSpec& noise);

std::string format_truth(const TruthFrame& truth);
TruthFrame parse_truth(std::string_view line, std::size_t line_no);
void write_truth(const std::string& path, std::span<const TruthFrame> truth);
std::vector<TruthFrame> read_truth(const std::string& path);

struct Scenario {
    std::string name = "custom";
    LotSpec lot;
    TrajectorySpec trajectory;
    NoiseSpec noise;
    CalibrationTarget calibration;
};

/// Straight drive along the whole first aisle of a 2 x 100 lot with
/// pixel sigma 2, 10% misreads, 5% ghosts and 10% dropout.
Scenario standard_scenario(std::uint64_t seed = 42);
/// Noise-free serpentine through a 2 x 50 lot (labels 001-050, 051-100).
Scenario serpentine_scenario(std::uint64_t seed = 42);
Scenario clean_straight_scenario(std::uint64_t seed = 42);

/// A built-in name (`standard`, `serpentine`, `clean`) or a JSON file.
Scenario load_scenario(const std::string& name_or_path);
std::string dump_scenario(const Scenario& s);
Scenario parse_scenario(std::string_view document);

struct Simulation {
    World world;
    CameraRig rig;  // calibrated rig handed to the pipeline
    Trajectory trajectory;
    SimRun run;
};

Simulation simulate(const Scenario& scenario);

}  // namespace parkloc::sim
