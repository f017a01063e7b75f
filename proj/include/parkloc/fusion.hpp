#pragma once

#include <span>
#include <string>

#include "parkloc/detection.hpp"
#include "parkloc/geometry.hpp"
#include "parkloc/map.hpp"

namespace parkloc {

/// Vehicle frame: +x forward, +y left, origin at the vehicle reference point.
struct VehicleOffset {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const VehicleOffset&, const VehicleOffset&) = default;
};

/// Where one camera sees a matched spot's anchor, relative to the vehicle.
struct RelativeEstimate {
    Camera camera = Camera::Front;
    VehicleOffset offset;
    std::string spot_label;
};

struct EgoPose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // counter-clockwise from lot +X
    double timestamp = 0.0;
    int n_anchors = 0;

    friend bool operator==(const EgoPose&, const EgoPose&) = default;
};

/// Rotates a vehicle-frame vector into the lot frame.
VehicleOffset rotate_to_lot(const VehicleOffset& v, double heading);

/// Inverse of the observation model anchor = ego + R(heading) * offset.
Point2Ground ego_from_anchor(const ParkingSpot& spot, const RelativeEstimate& rel, double heading);

/// Forward observation model, used by the simulator.
VehicleOffset anchor_offset(const Point2Ground& ego, double heading, const Point2Ground& anchor);

/// Component-wise mean; throws Error{EmptyInput}.
Point2Ground fuse_relative(std::span<const Point2Ground> estimates);

struct AnchorPosition {
    std::string spot_label;
    Point2Ground ego;
};

struct FusedPosition {
    Point2Ground position;
    int n_anchors = 0;  // distinct labels
};

/// Mean over per-anchor ego positions; throws Error{EmptyInput}.
FusedPosition fuse_frame(std::span<const AnchorPosition> per_anchor);

}  // namespace parkloc
