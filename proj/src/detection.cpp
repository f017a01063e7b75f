#include "parkloc/detection.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "parkloc/error.hpp"

namespace parkloc {

using ordered_json = nlohmann::ordered_json;

namespace {

double cross(const Point2Image& o, const Point2Image& a, const Point2Image& b) {
    return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

bool segments_cross(const Point2Image& p1, const Point2Image& p2, const Point2Image& q1,
                    const Point2Image& q2) {
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 &&
           d3 != 0.0 && d4 != 0.0;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

std::string_view to_string(Camera camera) {
    switch (camera) {
        case Camera::Front: return "front";
        case Camera::Rear: return "rear";
        case Camera::Left: return "left";
        case Camera::Right: return "right";
    }
    return "?";
}

std::optional<Camera> camera_from_string(std::string_view name) {
    for (const Camera c : kAllCameras) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

double signed_area(const BoundingBox& box) {
    double twice = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& a = box.corners[i];
        const auto& b = box.corners[(i + 1) % 4];
        twice += a.u * b.v - b.u * a.v;
    }
    return 0.5 * twice;
}

bool is_valid_box(const BoundingBox& box) {
    for (const auto& c : box.corners) {
        if (!std::isfinite(c.u) || !std::isfinite(c.v)) return false;
    }
    const auto& c = box.corners;
    if (segments_cross(c[0], c[1], c[2], c[3]) || segments_cross(c[1], c[2], c[3], c[0])) {
        return false;
    }
    return signed_area(box) > 0.0;
}

Point2Image bbox_center(const BoundingBox& box) {
    const auto& c = box.corners;
    return {(c[0].u + c[1].u + c[2].u + c[3].u) / 4.0, (c[0].v + c[1].v + c[2].v + c[3].v) / 4.0};
}

std::optional<FrameBundle> VectorSource::next() {
    if (pos_ >= bundles_.size()) return std::nullopt;
    return bundles_[pos_++];
}

FrameBundle parse_bundle(std::string_view line, std::size_t line_no) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        fail(line_no, e.what());
    }
    FrameBundle b;
    try {
        b.frame = doc.at("frame").get<std::int64_t>();
        b.timestamp = doc.at("t").get<double>();
        b.heading = doc.at("heading").get<double>();
        if (!std::isfinite(b.timestamp) || !std::isfinite(b.heading)) {
            fail(line_no, "non-finite time or heading");
        }
        const auto& dets = doc.at("detections");
        if (!dets.is_array()) fail(line_no, "'detections' must be an array");
        b.detections.reserve(dets.size());
        for (const auto& d : dets) {
            DetectionRecord r;
            r.frame = b.frame;
            r.timestamp = b.timestamp;
            const auto cam = camera_from_string(d.at("cam").get<std::string>());
            if (!cam) fail(line_no, "unknown camera '" + d.at("cam").get<std::string>() + "'");
            r.camera = *cam;
            const auto& box = d.at("box");
            if (!box.is_array() || box.size() != 8) fail(line_no, "'box' needs 8 numbers");
            for (std::size_t k = 0; k < 4; ++k) {
                r.box.corners[k] = {box[2 * k].get<double>(), box[2 * k + 1].get<double>()};
            }
            if (!is_valid_box(r.box)) fail(line_no, "invalid bounding box");
            const int cls = d.at("class").get<int>();
            if (cls < 0 || cls > 2) fail(line_no, "class must be 0, 1 or 2");
            r.text_class = static_cast<TextClass>(cls);
            r.content = d.at("text").get<std::string>();
            if (r.content.empty()) fail(line_no, "empty text");
            r.score = d.at("score").get<double>();
            if (!(r.score >= 0.0 && r.score <= 1.0)) {
                fail(line_no, "score " + std::to_string(r.score) + " outside [0,1]");
            }
            b.detections.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(line_no, e.what());
    }
    return b;
}

std::string format_bundle(const FrameBundle& bundle) {
    ordered_json doc;
    doc["frame"] = bundle.frame;
    doc["t"] = bundle.timestamp;
    doc["heading"] = bundle.heading;
    ordered_json dets = ordered_json::array();
    for (const auto& r : bundle.detections) {
        ordered_json d;
        d["cam"] = std::string(to_string(r.camera));
        ordered_json box = ordered_json::array();
        for (const auto& c : r.box.corners) {
            box.push_back(c.u);
            box.push_back(c.v);
        }
        d["box"] = std::move(box);
        d["class"] = static_cast<int>(r.text_class);
        d["text"] = r.content;
        d["score"] = r.score;
        dets.push_back(std::move(d));
    }
    doc["detections"] = std::move(dets);
    return doc.dump();
}

LogReader::LogReader(const std::string& path)
    : owned_(std::make_unique<std::ifstream>(path, std::ios::binary)), in_(owned_.get()) {
    if (!*owned_) throw Error(ErrorKind::Io, "cannot open log " + path);
}

LogReader::LogReader(std::istream& in) : in_(&in) {}

std::optional<FrameBundle> LogReader::next() {
    std::string line;
    while (std::getline(*in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        FrameBundle b = parse_bundle(line, line_no_);
        if (last_timestamp_ && b.timestamp < *last_timestamp_) {
            throw Error(ErrorKind::NonMonotoneTimestamp,
                        "line " + std::to_string(line_no_) + ": timestamp goes backwards");
        }
        last_timestamp_ = b.timestamp;
        return b;
    }
    return std::nullopt;
}

std::vector<FrameBundle> read_log(std::istream& in) {
    LogReader reader(in);
    std::vector<FrameBundle> out;
    while (auto b = reader.next()) out.push_back(std::move(*b));
    return out;
}

std::vector<FrameBundle> read_log(const std::string& path) {
    LogReader reader(path);
    std::vector<FrameBundle> out;
    while (auto b = reader.next()) out.push_back(std::move(*b));
    return out;
}

void write_log(std::ostream& out, std::span<const FrameBundle> bundles) {
    for (const auto& b : bundles) out << format_bundle(b) << '\n';
}

void write_log(const std::string& path, std::span<const FrameBundle> bundles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write log " + path);
    write_log(out, bundles);
}

}  // namespace parkloc
