#pragma once

#include <cstddef>
#include <span>

#include "parkloc/geometry.hpp"

namespace parkloc {

// Batch forms of project / apply_inverse. Points whose denominator vanishes
// come back as NaN and are counted in the return value. The *_serial
// variants are the reference loops the parallel kernels are tested against.

std::size_t project_points(const Homography& h, std::span<const Point2Ground> in,
                           std::span<Point2Image> out);
std::size_t project_points_serial(const Homography& h, std::span<const Point2Ground> in,
                                  std::span<Point2Image> out);

std::size_t back_project_points(const Homography& inverse, std::span<const Point2Image> in,
                                std::span<Point2Ground> out);
std::size_t back_project_points_serial(const Homography& inverse, std::span<const Point2Image> in,
                                       std::span<Point2Ground> out);

}  // namespace parkloc
