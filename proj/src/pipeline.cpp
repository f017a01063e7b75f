#include "parkloc/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "parkloc/error.hpp"

namespace parkloc {

using ordered_json = nlohmann::ordered_json;

namespace {

struct Survivor {
    const ParkingSpot* spot;
    Point2Ground ego;
    double score;
};

std::array<FilterState, 4> make_filters(std::size_t capacity) {
    return {FilterState(capacity), FilterState(capacity), FilterState(capacity),
            FilterState(capacity)};
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const HdMap> map,
                   std::shared_ptr<const CameraRig> rig)
    : config_(std::move(config)),
      map_(std::move(map)),
      rig_(std::move(rig)),
      filters_((validate(config_), make_filters(config_.filter_capacity))) {
    if (!map_ || !rig_) {
        throw Error(ErrorKind::InvalidConfig, "pipeline needs a map and a camera rig");
    }
}

Pipeline Pipeline::from_config(const PipelineConfig& config) {
    validate(config);
    if (config.map_path.empty() || config.rig_path.empty()) {
        throw Error(ErrorKind::InvalidConfig, "config must name a map and a rig");
    }
    auto map = std::make_shared<const HdMap>(load_map(config.map_path));
    auto rig = std::make_shared<const CameraRig>(load_rig(config.rig_path));
    return Pipeline(config, std::move(map), std::move(rig));
}

std::size_t Pipeline::slot(Camera camera) const {
    return config_.per_camera_filter ? static_cast<std::size_t>(camera) : 0;
}

const FilterState& Pipeline::filter_state(Camera camera) const { return filters_[slot(camera)]; }

std::size_t Pipeline::rejection_streak(Camera camera) const { return streaks_[slot(camera)]; }

FrameOutcome Pipeline::process_frame(const FrameBundle& bundle) {
    const auto start = std::chrono::steady_clock::now();

    FrameOutcome out;
    out.frame = bundle.frame;
    out.timestamp = bundle.timestamp;

    std::vector<Survivor> survivors;
    survivors.reserve(bundle.detections.size());

    for (std::size_t i = 0; i < bundle.detections.size(); ++i) {
        const DetectionRecord& det = bundle.detections[i];
        DetectionRef ref{i, det.content, det.camera};

        if (det.text_class != TextClass::ParklotText) {
            out.discarded_class.push_back(std::move(ref));
            continue;
        }
        const ParkingSpot* spot = find_exact(*map_, det.content);
        if (spot == nullptr) {
            out.rejected_by_map.push_back(std::move(ref));
            continue;
        }
        if (config_.afm) {
            std::optional<std::int64_t> number;
            try {
                number = extract_number(det.content);
            } catch (const Error&) {
                number.reset();
            }
            if (!number) {
                out.rejected_by_filter.push_back(std::move(ref));
                continue;
            }
            const std::size_t s = slot(det.camera);
            if (filters_[s].step(*number) == Decision::Rejected) {
                out.rejected_by_filter.push_back(std::move(ref));
                if (++streaks_[s] >= config_.reset_after_rejections) {
                    filters_[s].reset();
                    streaks_[s] = 0;
                    ++resets_;
                }
                continue;
            }
            streaks_[s] = 0;
        }

        Point2Ground ground;
        try {
            ground = apply_inverse(rig_->image_to_ground(det.camera), bbox_center(det.box));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PointAtInfinity) throw;
            out.projection_failures.push_back(std::move(ref));
            continue;
        }
        const RelativeEstimate rel{det.camera, {ground.x, ground.y}, spot->label};
        survivors.push_back({spot, ego_from_anchor(*spot, rel, bundle.heading), det.score});
        out.accepted.push_back(std::move(ref));
    }

    if (!survivors.empty()) {
        // Group by anchor in order of first appearance.
        std::vector<AnchorPosition> anchors;
        std::vector<double> anchor_scores;
        std::vector<bool> done(survivors.size(), false);
        std::vector<Point2Ground> egos;
        for (std::size_t i = 0; i < survivors.size(); ++i) {
            if (done[i]) continue;
            egos.clear();
            double best = survivors[i].score;
            egos.push_back(survivors[i].ego);
            for (std::size_t j = i + 1; j < survivors.size(); ++j) {
                if (done[j] || survivors[j].spot != survivors[i].spot) continue;
                done[j] = true;
                if (config_.mcrp) {
                    egos.push_back(survivors[j].ego);
                    best = std::max(best, survivors[j].score);
                }
            }
            anchors.push_back({survivors[i].spot->label, fuse_relative(egos)});
            anchor_scores.push_back(best);
        }

        EgoPose pose;
        pose.heading = bundle.heading;
        pose.timestamp = bundle.timestamp;
        if (config_.mcap) {
            const FusedPosition fused = fuse_frame(anchors);
            pose.x = fused.position.x;
            pose.y = fused.position.y;
            pose.n_anchors = fused.n_anchors;
        } else {
            std::size_t best = 0;
            for (std::size_t k = 1; k < anchors.size(); ++k) {
                if (anchor_scores[k] > anchor_scores[best]) best = k;
            }
            pose.x = anchors[best].ego.x;
            pose.y = anchors[best].ego.y;
            pose.n_anchors = 1;
        }
        out.pose = pose;
    }

    if (config_.measure_latency) {
        out.latency_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return out;
}

void run(Pipeline& pipeline, DetectionSource& source,
         const std::function<void(const FrameOutcome&)>& sink) {
    while (auto bundle = source.next()) {
        sink(pipeline.process_frame(*bundle));
    }
}

std::vector<FrameOutcome> run(Pipeline& pipeline, DetectionSource& source) {
    std::vector<FrameOutcome> out;
    run(pipeline, source, [&](const FrameOutcome& o) { out.push_back(o); });
    return out;
}

std::vector<FrameOutcome> run(const PipelineConfig& config, DetectionSource& source) {
    Pipeline pipeline = Pipeline::from_config(config);
    return run(pipeline, source);
}

namespace {

ordered_json refs_json(const std::vector<DetectionRef>& refs) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : refs) {
        ordered_json o;
        o["i"] = r.index;
        o["text"] = r.text;
        o["cam"] = std::string(to_string(r.camera));
        arr.push_back(std::move(o));
    }
    return arr;
}

std::vector<DetectionRef> refs_from_json(const ordered_json& arr, std::size_t line_no) {
    std::vector<DetectionRef> out;
    for (const auto& o : arr) {
        const auto cam = camera_from_string(o.at("cam").get<std::string>());
        if (!cam) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad camera");
        }
        out.push_back({o.at("i").get<std::size_t>(), o.at("text").get<std::string>(), *cam});
    }
    return out;
}

}  // namespace

std::string format_outcome(const FrameOutcome& o) {
    ordered_json doc;
    doc["frame"] = o.frame;
    doc["t"] = o.timestamp;
    if (o.pose) {
        ordered_json p;
        p["x"] = o.pose->x;
        p["y"] = o.pose->y;
        p["heading"] = o.pose->heading;
        p["n_anchors"] = o.pose->n_anchors;
        doc["pose"] = std::move(p);
    } else {
        doc["pose"] = nullptr;
    }
    doc["accepted"] = refs_json(o.accepted);
    doc["rejected_by_filter"] = refs_json(o.rejected_by_filter);
    doc["rejected_by_map"] = refs_json(o.rejected_by_map);
    doc["discarded_class"] = refs_json(o.discarded_class);
    doc["projection_failures"] = refs_json(o.projection_failures);
    doc["latency_s"] = o.latency_s;
    return doc.dump();
}

FrameOutcome parse_outcome(std::string_view line, std::size_t line_no) {
    try {
        const auto doc = ordered_json::parse(line);
        FrameOutcome o;
        o.frame = doc.at("frame").get<std::int64_t>();
        o.timestamp = doc.at("t").get<double>();
        const auto& p = doc.at("pose");
        if (!p.is_null()) {
            EgoPose pose;
            pose.x = p.at("x").get<double>();
            pose.y = p.at("y").get<double>();
            pose.heading = p.at("heading").get<double>();
            pose.n_anchors = p.at("n_anchors").get<int>();
            pose.timestamp = o.timestamp;
            o.pose = pose;
        }
        o.accepted = refs_from_json(doc.at("accepted"), line_no);
        o.rejected_by_filter = refs_from_json(doc.at("rejected_by_filter"), line_no);
        o.rejected_by_map = refs_from_json(doc.at("rejected_by_map"), line_no);
        o.discarded_class = refs_from_json(doc.at("discarded_class"), line_no);
        o.projection_failures = refs_from_json(doc.at("projection_failures"), line_no);
        o.latency_s = doc.at("latency_s").get<double>();
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
}

void write_outcomes(std::ostream& out, std::span<const FrameOutcome> outcomes) {
    for (const auto& o : outcomes) out << format_outcome(o) << '\n';
}

void write_outcomes(const std::string& path, std::span<const FrameOutcome> outcomes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write run file " + path);
    write_outcomes(out, outcomes);
}

std::vector<FrameOutcome> read_outcomes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open run file " + path);
    std::vector<FrameOutcome> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_outcome(line, line_no));
    }
    return out;
}

}  // namespace parkloc
