#include "parkloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "parkloc/error.hpp"
#include "parkloc/filter.hpp"

namespace parkloc::sim {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kBoxHalfX = 0.5;  // painted number footprint, lot frame
constexpr double kBoxHalfY = 0.4;
constexpr int kMaxNoiseRetries = 16;

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string zero_pad(std::int64_t number, std::size_t width) {
    std::string s = std::to_string(number);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lot

std::string spot_label(int number, int total_spots) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total_spots).size());
    return zero_pad(number, width);
}

HdMap generate_lot(const LotSpec& spec) {
    if (spec.rows <= 0 || spec.spots_per_row <= 0 || !(spec.spot_pitch > 0.0) ||
        !(spec.aisle_width > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "lot dimensions must be positive");
    }
    const int total = spec.rows * spec.spots_per_row;
    std::vector<ParkingSpot> spots;
    spots.reserve(static_cast<std::size_t>(total));
    for (int r = 0; r < spec.rows; ++r) {
        for (int i = 0; i < spec.spots_per_row; ++i) {
            const int number = r * spec.spots_per_row + i + 1;
            spots.push_back({spot_label(number, total),
                             {i * spec.spot_pitch, r * spec.row_spacing()},
                             0});
        }
    }
    return HdMap::build(spec.lot_id, spots);
}

// ---------------------------------------------------------------------------
// Cameras

std::array<CameraMount, 4> default_mounts() {
    std::array<CameraMount, 4> m;
    m[0].camera = Camera::Front;
    m[0].x = 2.0;
    m[0].yaw = 0.0;
    m[1].camera = Camera::Rear;
    m[1].x = -2.0;
    m[1].yaw = std::numbers::pi;
    m[2].camera = Camera::Left;
    m[2].y = 0.9;
    m[2].yaw = std::numbers::pi / 2.0;
    m[3].camera = Camera::Right;
    m[3].y = -0.9;
    m[3].yaw = -std::numbers::pi / 2.0;
    return m;
}

Homography mount_homography(const CameraMount& m) {
    const Eigen::Vector3d fwd(std::cos(m.yaw), std::sin(m.yaw), 0.0);
    const Eigen::Vector3d right(std::sin(m.yaw), -std::cos(m.yaw), 0.0);
    const Eigen::Vector3d up(0.0, 0.0, 1.0);
    const double cp = std::cos(m.pitch);
    const double sp = std::sin(m.pitch);

    Eigen::Matrix3d r;
    r.row(0) = right.transpose();
    r.row(1) = -(cp * up + sp * fwd).transpose();
    r.row(2) = (cp * fwd - sp * up).transpose();
    const Eigen::Vector3d center(m.x, m.y, m.height);

    Eigen::Matrix3d k;
    k << m.focal_px, 0.0, m.cu,
         0.0, m.focal_px, m.cv,
         0.0, 0.0, 1.0;
    Eigen::Matrix3d rt;
    rt.col(0) = r.col(0);
    rt.col(1) = r.col(1);
    rt.col(2) = -r * center;
    return Homography(k * rt);
}

CameraRig make_rig(const std::array<CameraMount, 4>& mounts) {
    std::array<Homography, 4> hs;
    for (const auto& m : mounts) hs[static_cast<std::size_t>(m.camera)] = mount_homography(m);
    return CameraRig(hs);
}

CameraRig calibrate_rig(const std::array<CameraMount, 4>& mounts, const CalibrationTarget& target,
                        double pixel_sigma, std::uint64_t seed) {
    if (!(pixel_sigma >= 0.0) || !std::isfinite(pixel_sigma))
        throw Error(ErrorKind::InvalidConfig, "calibration pixel sigma must be finite and >= 0");
    if (!(target.near > 0.0 && target.far > target.near && target.half_width > 0.0))
        throw Error(ErrorKind::InvalidConfig, "calibration target must satisfy 0 < near < far, half_width > 0");
    if (pixel_sigma == 0.0) return make_rig(mounts);

    std::array<Homography, 4> hs;
    for (const auto& m : mounts) {
        const auto cam = static_cast<std::size_t>(m.camera);
        const Homography truth = mount_homography(m);
        Rng rng(frame_seed(seed, -1 - static_cast<std::int64_t>(cam)));
        std::normal_distribution<double> click(0.0, pixel_sigma);
        const double c = std::cos(m.yaw);
        const double s = std::sin(m.yaw);
        std::array<Correspondence, 4> pairs;
        const std::array<std::array<double, 2>, 4> corners = {{{target.near, target.half_width},
                                                              {target.far, target.half_width},
                                                              {target.far, -target.half_width},
                                                              {target.near, -target.half_width}}};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto [f, l] = corners[i];
            const Point2Ground g{m.x + c * f - s * l, m.y + s * f + c * l};
            Point2Image q = project(truth, g);
            q.u += click(rng);
            q.v += click(rng);
            pairs[i] = {g, q};
        }
        hs[cam] = solve_homography(pairs);
    }
    return CameraRig(hs);
}

bool in_view(const CameraMount& m, const VehicleOffset& p) {
    const double dx = p.x - m.x;
    const double dy = p.y - m.y;
    const double forward = dx * std::cos(m.yaw) + dy * std::sin(m.yaw);
    const double lateral = -dx * std::sin(m.yaw) + dy * std::cos(m.yaw);
    return forward >= m.region.min_forward && forward <= m.region.max_forward &&
           std::abs(lateral) <= m.region.max_lateral;
}

void NoiseSpec::validate() const {
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!(pixel_sigma >= 0.0) || !prob(misread_rate) || !prob(dropout_rate) || !prob(ghost_rate)) {
        throw Error(ErrorKind::InvalidConfig, "noise rates must lie in [0,1] and sigma >= 0");
    }
    if (ghost_min_label_distance < 1) {
        throw Error(ErrorKind::InvalidConfig, "ghost_min_label_distance must be positive");
    }
}

// ---------------------------------------------------------------------------
// Trajectory

std::string_view to_string(Pattern p) {
    return p == Pattern::Serpentine ? "serpentine" : "straight-aisle";
}

Pattern pattern_from_string(std::string_view s) {
    if (s == "serpentine") return Pattern::Serpentine;
    if (s == "straight-aisle" || s == "straight") return Pattern::StraightAisle;
    throw Error(ErrorKind::InvalidConfig, "unknown trajectory pattern '" + std::string(s) + "'");
}

namespace {

struct Row {
    double y;
    double x_min;
    double x_max;
};

std::vector<Row> rows_of(const HdMap& map) {
    std::vector<Point2Ground> anchors;
    for (const auto& [label, s] : map.spots()) anchors.push_back(s.anchor);
    std::sort(anchors.begin(), anchors.end(),
              [](const Point2Ground& a, const Point2Ground& b) { return a.y < b.y; });
    std::vector<Row> rows;
    for (const auto& a : anchors) {
        if (rows.empty() || a.y - rows.back().y > 1e-6) {
            rows.push_back({a.y, a.x, a.x});
        } else {
            rows.back().x_min = std::min(rows.back().x_min, a.x);
            rows.back().x_max = std::max(rows.back().x_max, a.x);
        }
    }
    return rows;
}

// Piecewise path of straight lines and constant-radius arcs.
class Path {
public:
    Path(double x, double y, double heading) : x_(x), y_(y), h_(heading) {}

    void straight(double length) {
        if (length <= 0.0) return;
        segs_.push_back({x_, y_, h_, length, 0.0, 0});
        x_ += length * std::cos(h_);
        y_ += length * std::sin(h_);
        total_ += length;
    }

    // sign +1 turns left (counter-clockwise), -1 right.
    void turn(double radius, double angle, int sign) {
        const double length = radius * angle;
        segs_.push_back({x_, y_, h_, length, radius, sign});
        const Pose end = eval(segs_.back(), length);
        x_ = end.x;
        y_ = end.y;
        h_ = end.heading;
        total_ += length;
    }

    double length() const { return total_; }

    Pose at(double s) const {
        for (const auto& seg : segs_) {
            if (s <= seg.length) return eval(seg, s);
            s -= seg.length;
        }
        // Past the end: keep going straight.
        return {x_ + s * std::cos(h_), y_ + s * std::sin(h_), h_, 0.0};
    }

private:
    struct Segment {
        double x, y, h, length, radius;
        int sign;
    };

    static Pose eval(const Segment& seg, double s) {
        if (seg.sign == 0) {
            return {seg.x + s * std::cos(seg.h), seg.y + s * std::sin(seg.h), seg.h, 0.0};
        }
        const double sg = seg.sign;
        const double cx = seg.x - sg * seg.radius * std::sin(seg.h);
        const double cy = seg.y + sg * seg.radius * std::cos(seg.h);
        const double h = seg.h + sg * s / seg.radius;
        return {cx + sg * seg.radius * std::sin(h), cy - sg * seg.radius * std::cos(h), h, 0.0};
    }

    double x_, y_, h_;
    double total_ = 0.0;
    std::vector<Segment> segs_;
};

}  // namespace

Trajectory generate_trajectory(const HdMap& map, const TrajectorySpec& spec) {
    if (!(spec.speed > 0.0) || !(spec.rate_hz > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "speed and rate must be positive");
    }
    const std::vector<Row> rows = rows_of(map);
    const Row& first = rows.front();
    Path path(first.x_min + spec.start_x, first.y - spec.aisle_offset, 0.0);

    if (spec.pattern == Pattern::StraightAisle) {
        path.straight(first.x_max - (first.x_min + spec.start_x));
    } else {
        double x = first.x_min + spec.start_x;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const bool forward = r % 2 == 0;
            const bool last = r + 1 == rows.size();
            double x_end = forward ? rows[r].x_max : rows[r].x_min;
            if (!last) x_end += forward ? spec.end_margin : -spec.end_margin;
            path.straight(std::abs(x_end - x));
            x = x_end;
            if (last) break;
            const double climb = rows[r + 1].y - rows[r].y - 2.0 * spec.turn_radius;
            if (climb < 0.0) {
                throw Error(ErrorKind::InvalidConfig, "rows too close for the turn radius");
            }
            const int sign = forward ? 1 : -1;
            path.turn(spec.turn_radius, std::numbers::pi / 2.0, sign);
            path.straight(climb);
            path.turn(spec.turn_radius, std::numbers::pi / 2.0, sign);
        }
    }

    const double step = spec.speed / spec.rate_hz;
    std::size_t n = 0;
    if (spec.duration_s > 0.0) {
        n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.rate_hz));
    } else {
        n = static_cast<std::size_t>(std::floor(path.length() / step + 1e-9)) + 1;
    }
    Trajectory out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / spec.rate_hz;
        Pose p = path.at(spec.speed * t);
        p.t = t;
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering

World::World(HdMap map, std::array<CameraMount, 4> mounts)
    : map_(std::move(map)), mounts_(mounts), rig_(make_rig(mounts_)) {
    spots_.reserve(map_.size());
    for (const auto& [label, s] : map_.spots()) {
        std::int64_t number = -1;
        try {
            number = extract_number(label).value_or(-1);
        } catch (const Error&) {
            number = -1;
        }
        spots_.push_back({&s, number});
        max_number_ = std::max(max_number_, number);
        label_width_ = std::max(label_width_, label.size());
    }
}

std::string_view to_string(TruthTag t) {
    switch (t) {
        case TruthTag::Clean: return "clean";
        case TruthTag::Misread: return "misread";
        case TruthTag::Ghost: return "ghost";
    }
    return "?";
}

std::uint64_t frame_seed(std::uint64_t seed, std::int64_t frame) {
    return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(frame));
}

namespace {

// Clockwise on screen (v down), starting from the top-left-most corner.
BoundingBox order_corners(std::array<Point2Image, 4> pts) {
    double mu = 0.0;
    double mv = 0.0;
    for (const auto& p : pts) {
        mu += p.u / 4.0;
        mv += p.v / 4.0;
    }
    std::sort(pts.begin(), pts.end(), [&](const Point2Image& a, const Point2Image& b) {
        return std::atan2(a.v - mv, a.u - mu) < std::atan2(b.v - mv, b.u - mu);
    });
    std::size_t start = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        if (pts[i].u + pts[i].v < pts[start].u + pts[start].v) start = i;
    }
    BoundingBox box;
    for (std::size_t i = 0; i < 4; ++i) box.corners[i] = pts[(start + i) % 4];
    return box;
}

// Projects the painted footprint around `anchor` (lot frame) and re-centers
// the quad so its corner mean lands exactly on the anchor's image.
std::optional<BoundingBox> render_box(const Homography& h, const Pose& pose,
                                      const Point2Ground& anchor, double sigma, Rng& rng) {
    const Point2Ground ego{pose.x, pose.y};
    const VehicleOffset center_off = anchor_offset(ego, pose.heading, anchor);
    const Point2Image center = project(h, {center_off.x, center_off.y});

    std::array<Point2Image, 4> img;
    const std::array<std::array<double, 2>, 4> signs = {{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
    double mu = 0.0;
    double mv = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point2Ground corner{anchor.x + signs[i][0] * kBoxHalfX,
                                  anchor.y + signs[i][1] * kBoxHalfY};
        const VehicleOffset off = anchor_offset(ego, pose.heading, corner);
        img[i] = project(h, {off.x, off.y});
        mu += img[i].u / 4.0;
        mv += img[i].v / 4.0;
    }
    for (auto& p : img) {
        p.u += center.u - mu;
        p.v += center.v - mv;
    }
    const BoundingBox clean = order_corners(img);
    if (sigma <= 0.0) {
        if (is_valid_box(clean)) return clean;
        return std::nullopt;
    }
    std::normal_distribution<double> noise(0.0, sigma);
    for (int attempt = 0; attempt < kMaxNoiseRetries; ++attempt) {
        BoundingBox noisy = clean;
        for (auto& c : noisy.corners) {
            c.u += noise(rng);
            c.v += noise(rng);
        }
        if (is_valid_box(noisy)) return noisy;
    }
    return std::nullopt;
}

}  // namespace

SimFrame synthesize_frame(const World& world, const Pose& pose, std::int64_t frame,
                          const NoiseSpec& noise) {
    Rng rng(frame_seed(noise.seed, frame));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SimFrame out;
    out.bundle.frame = frame;
    out.bundle.timestamp = pose.t;
    out.bundle.heading = pose.heading;
    out.truth.frame = frame;
    out.truth.pose = pose;

    const auto& spots = world.spots();
    const Point2Ground ego{pose.x, pose.y};
    std::vector<std::int64_t> visible_numbers;

    auto make_record = [&](Camera cam, const BoundingBox& box, std::string text) {
        DetectionRecord r;
        r.frame = frame;
        r.timestamp = pose.t;
        r.camera = cam;
        r.box = box;
        r.text_class = TextClass::ParklotText;
        r.content = std::move(text);
        r.score = 0.5 + 0.5 * unit(rng);
        return r;
    };

    for (const CameraMount& mount : world.mounts()) {
        const Homography& h = world.rig().ground_to_image(mount.camera);
        for (std::size_t s = 0; s < spots.size(); ++s) {
            const ParkingSpot& spot = *spots[s].spot;
            if (!in_view(mount, anchor_offset(ego, pose.heading, spot.anchor))) continue;
            visible_numbers.push_back(spots[s].number);
            if (unit(rng) < noise.dropout_rate) {
                out.truth.dropped.push_back({spot.label, mount.camera});
                continue;
            }
            const auto box = render_box(h, pose, spot.anchor, noise.pixel_sigma, rng);
            if (!box) {
                out.truth.dropped.push_back({spot.label, mount.camera});
                continue;
            }
            std::string text = spot.label;
            TruthTag tag = TruthTag::Clean;
            if (unit(rng) < noise.misread_rate && spots.size() > 1) {
                std::uniform_int_distribution<std::size_t> pick(0, spots.size() - 2);
                std::size_t other = pick(rng);
                if (other >= s) ++other;
                text = spots[other].spot->label;
                tag = TruthTag::Misread;
            }
            out.bundle.detections.push_back(make_record(mount.camera, *box, std::move(text)));
            out.truth.tags.push_back(tag);
        }
    }

    // Recognizer output order carries no camera or position information.
    for (std::size_t i = out.bundle.detections.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        const std::size_t j = pick(rng);
        std::swap(out.bundle.detections[i - 1], out.bundle.detections[j]);
        std::swap(out.truth.tags[i - 1], out.truth.tags[j]);
    }

    if (unit(rng) < noise.ghost_rate) {
        std::uniform_int_distribution<std::size_t> pick_cam(0, 3);
        const CameraMount& mount = world.mounts()[pick_cam(rng)];
        const VisibleRegion& reg = mount.region;
        const double fwd = reg.min_forward + unit(rng) * (reg.max_forward - reg.min_forward);
        const double lat = (2.0 * unit(rng) - 1.0) * reg.max_lateral;
        const VehicleOffset off{mount.x + fwd * std::cos(mount.yaw) - lat * std::sin(mount.yaw),
                                mount.y + fwd * std::sin(mount.yaw) + lat * std::cos(mount.yaw)};
        const VehicleOffset lot_off = rotate_to_lot(off, pose.heading);
        const Point2Ground where{ego.x + lot_off.x, ego.y + lot_off.y};

        std::string text;
        if (unit(rng) < 0.5) {
            std::uniform_int_distribution<std::size_t> pick(0, spots.size() - 1);
            for (int tries = 0; tries < 64 && text.empty(); ++tries) {
                const auto& cand = spots[pick(rng)];
                if (cand.number < 0) continue;
                bool far = true;
                for (const std::int64_t v : visible_numbers) {
                    if (std::abs(cand.number - v) < noise.ghost_min_label_distance) {
                        far = false;
                        break;
                    }
                }
                if (far) text = cand.spot->label;
            }
        }
        if (text.empty()) {
            std::uniform_int_distribution<std::int64_t> extra(100, 999);
            text = zero_pad(world.max_number() + extra(rng), world.label_width());
        }
        const auto box = render_box(world.rig().ground_to_image(mount.camera), pose, where,
                                    noise.pixel_sigma, rng);
        if (box) {
            std::uniform_int_distribution<std::size_t> pos(0, out.bundle.detections.size());
            const std::size_t at = pos(rng);
            out.bundle.detections.insert(
                out.bundle.detections.begin() + static_cast<std::ptrdiff_t>(at),
                make_record(mount.camera, *box, std::move(text)));
            out.truth.tags.insert(out.truth.tags.begin() + static_cast<std::ptrdiff_t>(at),
                                  TruthTag::Ghost);
        }
    }
    return out;
}

SimRun synthesize_run_serial(const World& world, const Trajectory& trajectory,
                             const NoiseSpec& noise) {
    noise.validate();
    SimRun run;
    run.bundles.reserve(trajectory.size());
    run.truth.reserve(trajectory.size());
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        SimFrame f = synthesize_frame(world, trajectory[k], static_cast<std::int64_t>(k), noise);
        run.bundles.push_back(std::move(f.bundle));
        run.truth.push_back(std::move(f.truth));
    }
    return run;
}

SimRun synthesize_run(const World& world, const Trajectory& trajectory, const NoiseSpec& noise) {
    noise.validate();
    const auto n = static_cast<std::int64_t>(trajectory.size());
    SimRun run;
    run.bundles.resize(trajectory.size());
    run.truth.resize(trajectory.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
        SimFrame f = synthesize_frame(world, trajectory[static_cast<std::size_t>(k)], k, noise);
        run.bundles[static_cast<std::size_t>(k)] = std::move(f.bundle);
        run.truth[static_cast<std::size_t>(k)] = std::move(f.truth);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Truth sidecar

std::string format_truth(const TruthFrame& t) {
    ordered_json doc;
    doc["frame"] = t.frame;
    doc["t"] = t.pose.t;
    doc["x"] = t.pose.x;
    doc["y"] = t.pose.y;
    doc["heading"] = t.pose.heading;
    ordered_json tags = ordered_json::array();
    for (const auto tag : t.tags) tags.push_back(std::string(to_string(tag)));
    doc["tags"] = std::move(tags);
    ordered_json dropped = ordered_json::array();
    for (const auto& d : t.dropped) {
        ordered_json o;
        o["label"] = d.label;
        o["cam"] = std::string(parkloc::to_string(d.camera));
        dropped.push_back(std::move(o));
    }
    doc["dropped"] = std::move(dropped);
    return doc.dump();
}

TruthFrame parse_truth(std::string_view line, std::size_t line_no) {
    const auto fail = [&](const std::string& msg) {
        return Error(ErrorKind::ParseError, "truth line " + std::to_string(line_no) + ": " + msg);
    };
    try {
        const auto doc = ordered_json::parse(line);
        TruthFrame t;
        t.frame = doc.at("frame").get<std::int64_t>();
        t.pose = {doc.at("x").get<double>(), doc.at("y").get<double>(),
                  doc.at("heading").get<double>(), doc.at("t").get<double>()};
        for (const auto& tag : doc.at("tags")) {
            const auto s = tag.get<std::string>();
            if (s == "clean") t.tags.push_back(TruthTag::Clean);
            else if (s == "misread") t.tags.push_back(TruthTag::Misread);
            else if (s == "ghost") t.tags.push_back(TruthTag::Ghost);
            else throw fail("unknown tag '" + s + "'");
        }
        for (const auto& d : doc.at("dropped")) {
            const auto cam = camera_from_string(d.at("cam").get<std::string>());
            if (!cam) throw fail("bad camera");
            t.dropped.push_back({d.at("label").get<std::string>(), *cam});
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw fail(e.what());
    }
}

void write_truth(const std::string& path, std::span<const TruthFrame> truth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write truth " + path);
    for (const auto& t : truth) out << format_truth(t) << '\n';
}

std::vector<TruthFrame> read_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open truth " + path);
    std::vector<TruthFrame> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_truth(line, line_no));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenarios

Scenario standard_scenario(std::uint64_t seed) {
    Scenario s;
    s.name = "standard";
    s.lot.rows = 2;
    s.lot.spots_per_row = 100;
    s.trajectory.pattern = Pattern::StraightAisle;
    s.trajectory.speed = 2.0;
    s.trajectory.start_x = 5.0;
    s.noise.pixel_sigma = 2.0;
    s.noise.misread_rate = 0.10;
    s.noise.ghost_rate = 0.05;
    s.noise.dropout_rate = 0.10;
    s.noise.seed = seed;
    return s;
}

Scenario serpentine_scenario(std::uint64_t seed) {
    Scenario s;
    s.name = "serpentine";
    s.lot.rows = 2;
    s.lot.spots_per_row = 50;
    s.trajectory.pattern = Pattern::Serpentine;
    s.trajectory.speed = 2.0;
    s.noise.seed = seed;
    return s;
}

Scenario clean_straight_scenario(std::uint64_t seed) {
    Scenario s;
    s.name = "clean";
    s.trajectory.pattern = Pattern::StraightAisle;
    s.trajectory.speed = 2.0;
    s.trajectory.duration_s = 10.0;
    s.trajectory.start_x = 5.0;
    s.noise.seed = seed;
    return s;
}

std::string dump_scenario(const Scenario& s) {
    ordered_json doc;
    doc["name"] = s.name;
    doc["lot"] = {{"rows", s.lot.rows},
                  {"spots_per_row", s.lot.spots_per_row},
                  {"spot_pitch", s.lot.spot_pitch},
                  {"aisle_width", s.lot.aisle_width},
                  {"lot_id", s.lot.lot_id}};
    doc["trajectory"] = {{"speed", s.trajectory.speed},
                         {"pattern", std::string(to_string(s.trajectory.pattern))},
                         {"rate_hz", s.trajectory.rate_hz},
                         {"duration_s", s.trajectory.duration_s},
                         {"aisle_offset", s.trajectory.aisle_offset},
                         {"start_x", s.trajectory.start_x},
                         {"turn_radius", s.trajectory.turn_radius},
                         {"end_margin", s.trajectory.end_margin}};
    doc["noise"] = {{"pixel_sigma", s.noise.pixel_sigma},
                    {"misread_rate", s.noise.misread_rate},
                    {"dropout_rate", s.noise.dropout_rate},
                    {"ghost_rate", s.noise.ghost_rate},
                    {"seed", s.noise.seed},
                    {"ghost_min_label_distance", s.noise.ghost_min_label_distance}};
    doc["calibration"] = {{"near", s.calibration.near},
                          {"far", s.calibration.far},
                          {"half_width", s.calibration.half_width}};
    return doc.dump(1) + "\n";
}

Scenario parse_scenario(std::string_view document) {
    try {
        const auto doc = ordered_json::parse(document);
        Scenario s;
        s.name = doc.value("name", s.name);
        if (doc.contains("lot")) {
            const auto& l = doc["lot"];
            s.lot.rows = l.value("rows", s.lot.rows);
            s.lot.spots_per_row = l.value("spots_per_row", s.lot.spots_per_row);
            s.lot.spot_pitch = l.value("spot_pitch", s.lot.spot_pitch);
            s.lot.aisle_width = l.value("aisle_width", s.lot.aisle_width);
            s.lot.lot_id = l.value("lot_id", s.lot.lot_id);
        }
        if (doc.contains("trajectory")) {
            const auto& t = doc["trajectory"];
            s.trajectory.speed = t.value("speed", s.trajectory.speed);
            s.trajectory.pattern =
                pattern_from_string(t.value("pattern", std::string(to_string(s.trajectory.pattern))));
            s.trajectory.rate_hz = t.value("rate_hz", s.trajectory.rate_hz);
            s.trajectory.duration_s = t.value("duration_s", s.trajectory.duration_s);
            s.trajectory.aisle_offset = t.value("aisle_offset", s.trajectory.aisle_offset);
            s.trajectory.start_x = t.value("start_x", s.trajectory.start_x);
            s.trajectory.turn_radius = t.value("turn_radius", s.trajectory.turn_radius);
            s.trajectory.end_margin = t.value("end_margin", s.trajectory.end_margin);
        }
        if (doc.contains("noise")) {
            const auto& n = doc["noise"];
            s.noise.pixel_sigma = n.value("pixel_sigma", s.noise.pixel_sigma);
            s.noise.misread_rate = n.value("misread_rate", s.noise.misread_rate);
            s.noise.dropout_rate = n.value("dropout_rate", s.noise.dropout_rate);
            s.noise.ghost_rate = n.value("ghost_rate", s.noise.ghost_rate);
            s.noise.seed = n.value("seed", s.noise.seed);
            s.noise.ghost_min_label_distance =
                n.value("ghost_min_label_distance", s.noise.ghost_min_label_distance);
        }
        if (doc.contains("calibration")) {
            const auto& c = doc["calibration"];
            s.calibration.near = c.value("near", s.calibration.near);
            s.calibration.far = c.value("far", s.calibration.far);
            s.calibration.half_width = c.value("half_width", s.calibration.half_width);
        }
        s.noise.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::string& name_or_path) {
    if (name_or_path == "standard") return standard_scenario();
    if (name_or_path == "serpentine") return serpentine_scenario();
    if (name_or_path == "clean") return clean_straight_scenario();
    std::ifstream in(name_or_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "unknown scenario or unreadable file '" + name_or_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

Simulation simulate(const Scenario& scenario) {
    World world(generate_lot(scenario.lot), default_mounts());
    CameraRig rig = calibrate_rig(world.mounts(), scenario.calibration, scenario.noise.pixel_sigma,
                                  scenario.noise.seed);
    Trajectory trajectory = generate_trajectory(world.map(), scenario.trajectory);
    SimRun run = synthesize_run(world, trajectory, scenario.noise);
    return {std::move(world), std::move(rig), std::move(trajectory), std::move(run)};
}

}  // namespace parkloc::sim
