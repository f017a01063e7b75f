#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace parkloc {

/// Pixel coordinates on a (rectified) image plane.
struct Point2Image {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Point2Image&, const Point2Image&) = default;
};

/// Metric coordinates on the ground plane (lot frame or vehicle frame,
/// depending on which homography produced them).
struct Point2Ground {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2Ground&, const Point2Ground&) = default;
};

struct Correspondence {
    Point2Ground ground;
    Point2Image image;
};

/// 3x3 plane-to-plane projective map from ground to image, stored in the
/// canonical scale: Frobenius norm 1 and h33 >= 0.
class Homography {
public:
    static constexpr double kMinDeterminant = 1e-12;

    /// Identity map.
    Homography();

    /// Normalizes `m`; throws Error{SingularMatrix} when it is not invertible
    /// and Error{NonFinite} on NaN/inf entries.
    explicit Homography(const Eigen::Matrix3d& m);

    /// Row-major entries h11..h33.
    static Homography from_row_major(std::span<const double, 9> entries);

    const Eigen::Matrix3d& matrix() const noexcept { return m_; }
    double operator()(int row, int col) const { return m_(row, col); }
    std::array<double, 9> row_major() const;

    friend bool operator==(const Homography& a, const Homography& b) { return a.m_ == b.m_; }

private:
    Eigen::Matrix3d m_;
};

/// Direct linear transform over >= 4 pairs with Hartley normalization.
/// Least squares for more than four pairs.
Homography solve_homography(std::span<const Correspondence> pairs);

Homography invert(const Homography& h);

/// Ground -> image, throws Error{PointAtInfinity} when the projective
/// denominator vanishes.
Point2Image project(const Homography& h, const Point2Ground& p);

/// Image -> ground through the inverse map.
Point2Ground project_image_to_ground(const Homography& h, const Point2Image& q);

/// Same as project_image_to_ground when the caller already holds invert(h).
Point2Ground apply_inverse(const Homography& inverse, const Point2Image& q);

/// Calibration pairs CSV: header `ground_x,ground_y,image_u,image_v`.
std::vector<Correspondence> parse_correspondences_csv(std::istream& in);
std::vector<Correspondence> read_correspondences_csv(const std::string& path);

}  // namespace parkloc
