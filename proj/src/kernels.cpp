#include "parkloc/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "parkloc/error.hpp"

namespace parkloc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Row3 {
    double a, b, c;
};

struct Coeffs {
    Row3 r0, r1, r2;
};

Coeffs coeffs_of(const Homography& h) {
    const auto& m = h.matrix();
    return {{m(0, 0), m(0, 1), m(0, 2)}, {m(1, 0), m(1, 1), m(1, 2)}, {m(2, 0), m(2, 1), m(2, 2)}};
}

// Same arithmetic order as project() so results match bit for bit.
inline bool map_point(const Coeffs& k, double x, double y, double& ox, double& oy) {
    const double w = k.r2.a * x + k.r2.b * y + k.r2.c;
    if (!(std::abs(w) > 1e-12)) {
        ox = kNaN;
        oy = kNaN;
        return false;
    }
    ox = (k.r0.a * x + k.r0.b * y + k.r0.c) / w;
    oy = (k.r1.a * x + k.r1.b * y + k.r1.c) / w;
    return true;
}

void check_sizes(std::size_t in, std::size_t out) {
    if (in != out) throw Error(ErrorKind::InvalidConfig, "batch projection: input and output sizes differ");
}

}  // namespace

std::size_t project_points_serial(const Homography& h, std::span<const Point2Ground> in,
                                  std::span<Point2Image> out) {
    check_sizes(in.size(), out.size());
    const Coeffs k = coeffs_of(h);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!map_point(k, in[i].x, in[i].y, out[i].u, out[i].v)) ++failures;
    }
    return failures;
}

std::size_t project_points(const Homography& h, std::span<const Point2Ground> in,
                           std::span<Point2Image> out) {
    check_sizes(in.size(), out.size());
    const Coeffs k = coeffs_of(h);
    const auto n = static_cast<std::int64_t>(in.size());
    std::int64_t failures = 0;
#pragma omp parallel for schedule(static) reduction(+ : failures)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(i);
        if (!map_point(k, in[j].x, in[j].y, out[j].u, out[j].v)) ++failures;
    }
    return static_cast<std::size_t>(failures);
}

std::size_t back_project_points_serial(const Homography& inverse, std::span<const Point2Image> in,
                                       std::span<Point2Ground> out) {
    check_sizes(in.size(), out.size());
    const Coeffs k = coeffs_of(inverse);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!map_point(k, in[i].u, in[i].v, out[i].x, out[i].y)) ++failures;
    }
    return failures;
}

std::size_t back_project_points(const Homography& inverse, std::span<const Point2Image> in,
                                std::span<Point2Ground> out) {
    check_sizes(in.size(), out.size());
    const Coeffs k = coeffs_of(inverse);
    const auto n = static_cast<std::int64_t>(in.size());
    std::int64_t failures = 0;
#pragma omp parallel for schedule(static) reduction(+ : failures)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(i);
        if (!map_point(k, in[j].u, in[j].v, out[j].x, out[j].y)) ++failures;
    }
    return static_cast<std::size_t>(failures);
}

}  // namespace parkloc
