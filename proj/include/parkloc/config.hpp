#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace parkloc {

struct PipelineConfig {
    std::size_t filter_capacity = 30;
    std::size_t reset_after_rejections = 90;
    bool per_camera_filter = false;  // one queue per camera instead of per vehicle
    bool afm = true;                 // anomaly filtering
    bool mcrp = true;                // multi-camera relative positioning
    bool mcap = true;                // multi-camera absolute positioning
    bool measure_latency = true;
    std::string map_path;
    std::string rig_path;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws Error{InvalidConfig} when capacity < 2 or the reset count is 0.
void validate(const PipelineConfig& config);

/// Sets one key (`filter.capacity`, `filter.reset_after_rejections`,
/// `filter.per_camera`, `afm`, `mcrp`, `mcap`, `timing`, `map`, `rig`).
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});
std::string dump_config(const PipelineConfig& config);

}  // namespace parkloc
