#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "parkloc/config.hpp"
#include "parkloc/pipeline.hpp"
#include "parkloc/sim.hpp"

namespace parkloc {

struct ErrorStats {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

struct RunMetrics {
    ErrorStats ex;         // |x error|, meters
    ErrorStats ey;         // |y error|, meters
    ErrorStats euclidean;  // meters
    double precision_m = 0.0;  // mean Euclidean error
    double filter_precision = 1.0;
    double filter_recall = 1.0;
    double ghost_recall = 1.0;  // recall restricted to ghost injections
    double pose_ratio = 0.0;
    double latency_mean_s = 0.0;
    double latency_max_s = 0.0;

    std::size_t frames = 0;
    std::size_t frames_with_pose = 0;
    std::size_t anomalies_rejected = 0;  // true positives
    std::size_t clean_rejected = 0;      // false positives
    std::size_t anomalies_passed = 0;    // false negatives
    std::size_t ghosts_rejected = 0;
    std::size_t ghosts_passed = 0;
};

/// Percentile by linear interpolation at rank q * (n - 1); 0 for empty input.
double percentile(std::vector<double> values, double q);

/// Pose errors over frames with a pose; filter precision/recall against the
/// truth tags of detections that reached the anomaly filter. A ratio with an
/// empty denominator is reported as 1. Throws Error{FrameMismatch} when the
/// two streams are not frame-aligned.
RunMetrics evaluate(std::span<const FrameOutcome> outcomes, std::span<const sim::TruthFrame> truth);

struct AblationRow {
    bool afm = false;
    bool mcrp = false;
    bool mcap = false;
    RunMetrics metrics;
};

struct ModuleFlags {
    bool afm, mcrp, mcap;
};

/// The eight module combinations, in the order the ablation table lists them.
std::span<const ModuleFlags> ablation_combinations();

/// Replays one simulated run under every module combination; combinations
/// run on separate OpenMP threads.
std::vector<AblationRow> ablation_sweep(const PipelineConfig& base, const sim::Simulation& sim);
std::vector<AblationRow> ablation_sweep_serial(const PipelineConfig& base,
                                               const sim::Simulation& sim);
std::vector<AblationRow> ablation_sweep(const PipelineConfig& base, const sim::Scenario& scenario);

/// One sweep per seed (scenario noise seed replaced), parallel over seeds.
std::vector<std::vector<AblationRow>> ablation_over_seeds(const PipelineConfig& base,
                                                          const sim::Scenario& scenario,
                                                          std::span<const std::uint64_t> seeds);

/// Replays `sim` once through a pipeline built from `config`.
std::vector<FrameOutcome> replay(const PipelineConfig& config, const sim::Simulation& sim);

inline constexpr const char* kMetricsCsvHeader =
    "afm,mcrp,mcap,mean_ex,mean_ey,med_e,p95_e,precision_m,filt_prec,filt_rec,pose_ratio,"
    "lat_mean_s,lat_max_s";

/// Shortest round-trip decimal, always with '.' as separator.
std::string format_number(double v);

void write_metrics_csv(std::ostream& out, std::span<const AblationRow> rows);
std::string metrics_csv(std::span<const AblationRow> rows);
std::vector<AblationRow> parse_metrics_csv(std::string_view text);
std::string metrics_table(std::span<const AblationRow> rows);

}  // namespace parkloc
