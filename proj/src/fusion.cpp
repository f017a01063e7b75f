#include "parkloc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>
#include <string_view>

#include "parkloc/error.hpp"

namespace parkloc {

namespace {

// Sums in lexicographic order so the mean is bit-identical under permutation.
Point2Ground ordered_mean(std::vector<Point2Ground> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2Ground& a, const Point2Ground& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& p : pts) {
        sx += p.x;
        sy += p.y;
    }
    const double n = static_cast<double>(pts.size());
    return {sx / n, sy / n};
}

}  // namespace

VehicleOffset rotate_to_lot(const VehicleOffset& v, double heading) {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Point2Ground ego_from_anchor(const ParkingSpot& spot, const RelativeEstimate& rel, double heading) {
    const VehicleOffset r = rotate_to_lot(rel.offset, heading);
    return {spot.anchor.x - r.x, spot.anchor.y - r.y};
}

VehicleOffset anchor_offset(const Point2Ground& ego, double heading, const Point2Ground& anchor) {
    return rotate_to_lot({anchor.x - ego.x, anchor.y - ego.y}, -heading);
}

Point2Ground fuse_relative(std::span<const Point2Ground> estimates) {
    if (estimates.empty()) {
        throw Error(ErrorKind::EmptyInput, "no estimates to fuse");
    }
    return ordered_mean({estimates.begin(), estimates.end()});
}

FusedPosition fuse_frame(std::span<const AnchorPosition> per_anchor) {
    if (per_anchor.empty()) {
        throw Error(ErrorKind::EmptyInput, "no anchors to fuse");
    }
    std::vector<Point2Ground> pts;
    pts.reserve(per_anchor.size());
    std::set<std::string_view> labels;
    for (const auto& a : per_anchor) {
        pts.push_back(a.ego);
        labels.insert(a.spot_label);
    }
    return {ordered_mean(std::move(pts)), static_cast<int>(labels.size())};
}

}  // namespace parkloc
