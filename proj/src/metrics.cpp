#include "parkloc/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

#include "parkloc/error.hpp"

namespace parkloc {

namespace {

ErrorStats stats_of(std::vector<double> v) {
    ErrorStats s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (const double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    s.median = percentile(v, 0.5);
    s.p95 = percentile(std::move(v), 0.95);
    return s;
}

double ratio_or_one(std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

constexpr ModuleFlags kCombos[8] = {
    {false, false, false}, {true, false, false}, {true, true, false}, {true, false, true},
    {false, true, false},  {false, false, true}, {false, true, true}, {true, true, true},
};

}  // namespace

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double w = rank - static_cast<double>(lo);
    if (w == 0.0 || lo + 1 >= values.size()) return values[lo];
    return values[lo] + w * (values[lo + 1] - values[lo]);
}

RunMetrics evaluate(std::span<const FrameOutcome> outcomes, std::span<const sim::TruthFrame> truth) {
    if (outcomes.size() != truth.size()) {
        throw Error(ErrorKind::FrameMismatch, std::to_string(outcomes.size()) + " outcomes vs " +
                                                  std::to_string(truth.size()) + " truth frames");
    }
    RunMetrics m;
    m.frames = outcomes.size();
    std::vector<double> ex;
    std::vector<double> ey;
    std::vector<double> e;
    double lat_sum = 0.0;

    const auto is_anomaly = [](const sim::TruthFrame& t, std::size_t index) {
        if (index >= t.tags.size()) {
            throw Error(ErrorKind::FrameMismatch,
                        "frame " + std::to_string(t.frame) + ": detection index out of range");
        }
        return t.tags[index] != sim::TruthTag::Clean;
    };
    const auto is_ghost = [](const sim::TruthFrame& t, std::size_t index) {
        return t.tags[index] == sim::TruthTag::Ghost;
    };

    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const FrameOutcome& o = outcomes[k];
        const sim::TruthFrame& t = truth[k];
        if (o.frame != t.frame) {
            throw Error(ErrorKind::FrameMismatch, "outcome frame " + std::to_string(o.frame) +
                                                      " vs truth frame " + std::to_string(t.frame));
        }
        lat_sum += o.latency_s;
        m.latency_max_s = std::max(m.latency_max_s, o.latency_s);
        if (o.pose) {
            ++m.frames_with_pose;
            const double dx = std::abs(o.pose->x - t.pose.x);
            const double dy = std::abs(o.pose->y - t.pose.y);
            ex.push_back(dx);
            ey.push_back(dy);
            e.push_back(std::hypot(dx, dy));
        }
        for (const auto& r : o.rejected_by_filter) {
            if (is_anomaly(t, r.index)) ++m.anomalies_rejected;
            else ++m.clean_rejected;
            if (is_ghost(t, r.index)) ++m.ghosts_rejected;
        }
        for (const auto* list : {&o.accepted, &o.projection_failures}) {
            for (const auto& r : *list) {
                if (is_anomaly(t, r.index)) ++m.anomalies_passed;
                if (is_ghost(t, r.index)) ++m.ghosts_passed;
            }
        }
    }

    m.ex = stats_of(std::move(ex));
    m.ey = stats_of(std::move(ey));
    m.euclidean = stats_of(std::move(e));
    m.precision_m = m.euclidean.mean;
    m.filter_precision = ratio_or_one(m.anomalies_rejected, m.anomalies_rejected + m.clean_rejected);
    m.filter_recall = ratio_or_one(m.anomalies_rejected, m.anomalies_rejected + m.anomalies_passed);
    m.ghost_recall = ratio_or_one(m.ghosts_rejected, m.ghosts_rejected + m.ghosts_passed);
    m.pose_ratio = m.frames == 0 ? 0.0
                                 : static_cast<double>(m.frames_with_pose) / static_cast<double>(m.frames);
    m.latency_mean_s = m.frames == 0 ? 0.0 : lat_sum / static_cast<double>(m.frames);
    return m;
}

std::span<const ModuleFlags> ablation_combinations() { return kCombos; }

std::vector<FrameOutcome> replay(const PipelineConfig& config, const sim::Simulation& sim) {
    // Non-owning handles: the simulation outlives the pipeline.
    std::shared_ptr<const HdMap> map(&sim.world.map(), [](const HdMap*) {});
    std::shared_ptr<const CameraRig> rig(&sim.rig, [](const CameraRig*) {});
    Pipeline pipeline(config, map, rig);
    std::vector<FrameOutcome> out;
    out.reserve(sim.run.bundles.size());
    for (const auto& b : sim.run.bundles) out.push_back(pipeline.process_frame(b));
    return out;
}

namespace {

AblationRow run_combo(const PipelineConfig& base, const sim::Simulation& sim, ModuleFlags f) {
    PipelineConfig cfg = base;
    cfg.afm = f.afm;
    cfg.mcrp = f.mcrp;
    cfg.mcap = f.mcap;
    const auto outcomes = replay(cfg, sim);
    return {f.afm, f.mcrp, f.mcap, evaluate(outcomes, sim.run.truth)};
}

}  // namespace

std::vector<AblationRow> ablation_sweep_serial(const PipelineConfig& base,
                                               const sim::Simulation& sim) {
    std::vector<AblationRow> rows;
    for (const auto& f : kCombos) rows.push_back(run_combo(base, sim, f));
    return rows;
}

std::vector<AblationRow> ablation_sweep(const PipelineConfig& base, const sim::Simulation& sim) {
    std::vector<AblationRow> rows(std::size(kCombos));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(std::size(kCombos)); ++i) {
        rows[static_cast<std::size_t>(i)] = run_combo(base, sim, kCombos[i]);
    }
    return rows;
}

std::vector<AblationRow> ablation_sweep(const PipelineConfig& base, const sim::Scenario& scenario) {
    return ablation_sweep(base, sim::simulate(scenario));
}

std::vector<std::vector<AblationRow>> ablation_over_seeds(const PipelineConfig& base,
                                                          const sim::Scenario& scenario,
                                                          std::span<const std::uint64_t> seeds) {
    std::vector<std::vector<AblationRow>> out(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
        sim::Scenario s = scenario;
        s.noise.seed = seeds[static_cast<std::size_t>(i)];
        const sim::Simulation simulation = sim::simulate(s);
        out[static_cast<std::size_t>(i)] = ablation_sweep_serial(base, simulation);
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, p);
}

void write_metrics_csv(std::ostream& out, std::span<const AblationRow> rows) {
    out << kMetricsCsvHeader << '\n';
    for (const auto& r : rows) {
        const RunMetrics& m = r.metrics;
        out << (r.afm ? 1 : 0) << ',' << (r.mcrp ? 1 : 0) << ',' << (r.mcap ? 1 : 0) << ','
            << format_number(m.ex.mean) << ',' << format_number(m.ey.mean) << ','
            << format_number(m.euclidean.median) << ',' << format_number(m.euclidean.p95) << ','
            << format_number(m.precision_m) << ',' << format_number(m.filter_precision) << ','
            << format_number(m.filter_recall) << ',' << format_number(m.pose_ratio) << ','
            << format_number(m.latency_mean_s) << ',' << format_number(m.latency_max_s) << '\n';
    }
}

std::string metrics_csv(std::span<const AblationRow> rows) {
    std::ostringstream ss;
    write_metrics_csv(ss, rows);
    return ss.str();
}

std::vector<AblationRow> parse_metrics_csv(std::string_view text) {
    std::vector<AblationRow> rows;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kMetricsCsvHeader) {
                throw Error(ErrorKind::ParseError, "metrics CSV: unexpected header");
            }
            continue;
        }
        std::array<double, 13> f{};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t k = 0; k < f.size(); ++k) {
            auto [next, ec] = std::from_chars(p, end, f[k]);
            if (ec != std::errc{}) {
                throw Error(ErrorKind::ParseError, "metrics CSV line " + std::to_string(line_no));
            }
            p = next;
            if (k + 1 < f.size()) {
                if (p == end || *p != ',') {
                    throw Error(ErrorKind::ParseError, "metrics CSV line " + std::to_string(line_no));
                }
                ++p;
            }
        }
        AblationRow r;
        r.afm = f[0] != 0.0;
        r.mcrp = f[1] != 0.0;
        r.mcap = f[2] != 0.0;
        r.metrics.ex.mean = f[3];
        r.metrics.ey.mean = f[4];
        r.metrics.euclidean.median = f[5];
        r.metrics.euclidean.p95 = f[6];
        r.metrics.precision_m = f[7];
        r.metrics.euclidean.mean = f[7];
        r.metrics.filter_precision = f[8];
        r.metrics.filter_recall = f[9];
        r.metrics.pose_ratio = f[10];
        r.metrics.latency_mean_s = f[11];
        r.metrics.latency_max_s = f[12];
        rows.push_back(r);
    }
    return rows;
}

std::string metrics_table(std::span<const AblationRow> rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-4s %-4s %-4s %9s %9s %9s %9s %9s %7s %7s %6s %10s\n",
                  "AFM", "MCRP", "MCAP", "prec[cm]", "mean_ex", "mean_ey", "p95_ex", "p95_ey",
                  "f_prec", "f_rec", "poses", "lat[us]");
    out << line;
    for (const auto& r : rows) {
        const RunMetrics& m = r.metrics;
        std::snprintf(line, sizeof(line),
                      "%-4s %-4s %-4s %9.2f %9.4f %9.4f %9.4f %9.4f %7.3f %7.3f %6.3f %10.2f\n",
                      r.afm ? "on" : "-", r.mcrp ? "on" : "-", r.mcap ? "on" : "-",
                      m.precision_m * 100.0, m.ex.mean, m.ey.mean, m.ex.p95, m.ey.p95,
                      m.filter_precision, m.filter_recall, m.pose_ratio, m.latency_mean_s * 1e6);
        out << line;
    }
    return out.str();
}

}  // namespace parkloc
