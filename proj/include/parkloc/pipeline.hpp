#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkloc/config.hpp"
#include "parkloc/detection.hpp"
#include "parkloc/filter.hpp"
#include "parkloc/fusion.hpp"
#include "parkloc/map.hpp"
#include "parkloc/rig.hpp"

namespace parkloc {

/// A detection by its position in the frame bundle.
struct DetectionRef {
    std::size_t index = 0;
    std::string text;
    Camera camera = Camera::Front;

    friend bool operator==(const DetectionRef&, const DetectionRef&) = default;
};

struct FrameOutcome {
    std::int64_t frame = 0;
    double timestamp = 0.0;
    std::optional<EgoPose> pose;
    std::vector<DetectionRef> accepted;  // text is the matched spot label
    std::vector<DetectionRef> rejected_by_filter;
    std::vector<DetectionRef> rejected_by_map;
    std::vector<DetectionRef> discarded_class;
    std::vector<DetectionRef> projection_failures;
    double latency_s = 0.0;

    friend bool operator==(const FrameOutcome&, const FrameOutcome&) = default;
};

/// Per-vehicle positioning state machine: class filter, exact map match,
/// anomaly filter, projection, camera averaging and anchor fusion.
///
/// Single-threaded; the map and rig are shared read-only and may back any
/// number of pipelines on other threads.
class Pipeline {
public:
    Pipeline(PipelineConfig config, std::shared_ptr<const HdMap> map,
             std::shared_ptr<const CameraRig> rig);

    /// Loads the map and rig named in the config. Errors surface here,
    /// before any frame is processed.
    static Pipeline from_config(const PipelineConfig& config);

    FrameOutcome process_frame(const FrameBundle& bundle);

    const PipelineConfig& config() const noexcept { return config_; }
    const FilterState& filter_state(Camera camera = Camera::Front) const;
    std::size_t rejection_streak(Camera camera = Camera::Front) const;
    std::size_t resets() const noexcept { return resets_; }

private:
    std::size_t slot(Camera camera) const;

    PipelineConfig config_;
    std::shared_ptr<const HdMap> map_;
    std::shared_ptr<const CameraRig> rig_;
    std::array<FilterState, 4> filters_;
    std::array<std::size_t, 4> streaks_{};
    std::size_t resets_ = 0;
};

/// Stateful fold of process_frame over a source.
void run(Pipeline& pipeline, DetectionSource& source,
         const std::function<void(const FrameOutcome&)>& sink);
std::vector<FrameOutcome> run(Pipeline& pipeline, DetectionSource& source);
std::vector<FrameOutcome> run(const PipelineConfig& config, DetectionSource& source);

std::string format_outcome(const FrameOutcome& outcome);
FrameOutcome parse_outcome(std::string_view line, std::size_t line_no);
void write_outcomes(std::ostream& out, std::span<const FrameOutcome> outcomes);
void write_outcomes(const std::string& path, std::span<const FrameOutcome> outcomes);
std::vector<FrameOutcome> read_outcomes(const std::string& path);

}  // namespace parkloc
