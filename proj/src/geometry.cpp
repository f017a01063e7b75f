#include "parkloc/geometry.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "parkloc/error.hpp"

namespace parkloc {

namespace {

constexpr double kDenominatorEps = 1e-12;
constexpr double kDegenerateRatio = 1e-9;

Eigen::Matrix3d normalize_scale(const Eigen::Matrix3d& m) {
    if (!m.allFinite()) {
        throw Error(ErrorKind::NonFinite, "homography has non-finite entries");
    }
    const double norm = m.norm();
    if (norm == 0.0) {
        throw Error(ErrorKind::SingularMatrix, "zero matrix");
    }
    Eigen::Matrix3d out = m / norm;
    if (out(2, 2) < 0.0) {
        out = -out;
    }
    return out;
}

// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
template <typename GetX, typename GetY>
Eigen::Matrix3d hartley_transform(std::span<const Correspondence> pairs, GetX gx, GetY gy) {
    const double n = static_cast<double>(pairs.size());
    double cx = 0.0;
    double cy = 0.0;
    for (const auto& c : pairs) {
        cx += gx(c);
        cy += gy(c);
    }
    cx /= n;
    cy /= n;
    double mean_dist = 0.0;
    for (const auto& c : pairs) {
        mean_dist += std::hypot(gx(c) - cx, gy(c) - cy);
    }
    mean_dist /= n;
    if (mean_dist <= 0.0) {
        throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");
    }
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0.0, -s * cx,
         0.0, s, -s * cy,
         0.0, 0.0, 1.0;
    return t;
}

bool finite_pair(const Correspondence& c) {
    return std::isfinite(c.ground.x) && std::isfinite(c.ground.y) && std::isfinite(c.image.u) &&
           std::isfinite(c.image.v);
}

}  // namespace

Homography::Homography() : m_(normalize_scale(Eigen::Matrix3d::Identity())) {}

Homography::Homography(const Eigen::Matrix3d& m) : m_(normalize_scale(m)) {
    if (std::abs(m_.determinant()) <= kMinDeterminant) {
        throw Error(ErrorKind::SingularMatrix, "homography is not invertible");
    }
}

Homography Homography::from_row_major(std::span<const double, 9> e) {
    Eigen::Matrix3d m;
    m << e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8];
    return Homography(m);
}

std::array<double, 9> Homography::row_major() const {
    std::array<double, 9> out{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out[static_cast<std::size_t>(r * 3 + c)] = m_(r, c);
        }
    }
    return out;
}

Homography solve_homography(std::span<const Correspondence> pairs) {
    if (pairs.size() < 4) {
        throw Error(ErrorKind::TooFewPairs,
                    "need at least 4 correspondences, got " + std::to_string(pairs.size()));
    }
    for (const auto& c : pairs) {
        if (!finite_pair(c)) {
            throw Error(ErrorKind::NonFinite, "correspondence with non-finite coordinate");
        }
    }

    const Eigen::Matrix3d tg = hartley_transform(
        pairs, [](const Correspondence& c) { return c.ground.x; },
        [](const Correspondence& c) { return c.ground.y; });
    const Eigen::Matrix3d ti = hartley_transform(
        pairs, [](const Correspondence& c) { return c.image.u; },
        [](const Correspondence& c) { return c.image.v; });

    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::Matrix<double, Eigen::Dynamic, 9> a(2 * n, 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = pairs[static_cast<std::size_t>(i)];
        const Eigen::Vector3d g = tg * Eigen::Vector3d(c.ground.x, c.ground.y, 1.0);
        const Eigen::Vector3d q = ti * Eigen::Vector3d(c.image.u, c.image.v, 1.0);
        const double x = g.x();
        const double y = g.y();
        const double u = q.x();
        const double v = q.y();
        a.row(2 * i) << x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u;
        a.row(2 * i + 1) << 0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v;
    }

    Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // The solution is unique only when the design matrix has rank 8.
    if (sv.size() < 8 || sv(0) <= 0.0 || sv(7) / sv(0) < kDegenerateRatio) {
        throw Error(ErrorKind::DegenerateConfiguration,
                    "correspondences do not determine a unique homography (collinear points?)");
    }
    const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    const Eigen::Matrix3d denorm = ti.inverse() * hn * tg;
    if (!denorm.allFinite()) {
        throw Error(ErrorKind::NonFinite, "solve produced non-finite entries");
    }
    try {
        return Homography(denorm);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SingularMatrix) {
            throw Error(ErrorKind::DegenerateConfiguration, "solved homography is singular");
        }
        throw;
    }
}

Homography invert(const Homography& h) {
    const Eigen::Matrix3d& m = h.matrix();
    if (std::abs(m.determinant()) <= Homography::kMinDeterminant) {
        throw Error(ErrorKind::SingularMatrix, "cannot invert singular homography");
    }
    return Homography(m.inverse());
}

Point2Image project(const Homography& h, const Point2Ground& p) {
    const Eigen::Matrix3d& m = h.matrix();
    const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
    if (!(std::abs(w) > kDenominatorEps)) {
        throw Error(ErrorKind::PointAtInfinity, "ground point maps to the line at infinity");
    }
    return {(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w,
            (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

Point2Ground apply_inverse(const Homography& inverse, const Point2Image& q) {
    const Point2Image g = project(inverse, Point2Ground{q.u, q.v});
    return {g.u, g.v};
}

Point2Ground project_image_to_ground(const Homography& h, const Point2Image& q) {
    return apply_inverse(invert(h), q);
}

std::vector<Correspondence> parse_correspondences_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::ParseError, "empty correspondence file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ground_x,ground_y,image_u,image_v") {
        throw Error(ErrorKind::ParseError, "line 1: unexpected header '" + line + "'");
    }
    std::vector<Correspondence> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 4> vals{};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t k = 0; k < 4; ++k) {
            auto [next, ec] = std::from_chars(p, end, vals[k]);
            if (ec != std::errc{}) {
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number");
            }
            p = next;
            if (k < 3) {
                if (p == end || *p != ',') {
                    throw Error(ErrorKind::ParseError,
                                "line " + std::to_string(line_no) + ": expected 4 fields");
                }
                ++p;
            }
        }
        if (p != end) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": trailing data");
        }
        out.push_back({{vals[0], vals[1]}, {vals[2], vals[3]}});
    }
    return out;
}

std::vector<Correspondence> read_correspondences_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    return parse_correspondences_csv(in);
}

}  // namespace parkloc
