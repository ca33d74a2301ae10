#include "cod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cod {

namespace {

constexpr double kAreaEpsilon = 1e-12;  // m^2, degenerate sliver cutoff

Eigen::Matrix4d rect_homogeneous(const CalibrationChain& calib) {
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r.topLeftCorner<3, 3>() = calib.rectification;
  return r;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

// Clips `subject` against the half-plane left of edge a->b.
std::vector<Eigen::Vector2d> clip_edge(const std::vector<Eigen::Vector2d>& subject,
                                       const Eigen::Vector2d& a,
                                       const Eigen::Vector2d& b) {
  std::vector<Eigen::Vector2d> out;
  const std::size_t n = subject.size();
  auto side = [&](const Eigen::Vector2d& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& cur = subject[i];
    const Eigen::Vector2d& nxt = subject[(i + 1) % n];
    const double sc = side(cur);
    const double sn = side(nxt);
    if (sc >= 0.0) out.push_back(cur);
    if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

double convex_intersection_area(const std::array<Eigen::Vector2d, 4>& a,
                                const std::array<Eigen::Vector2d, 4>& b) {
  std::vector<Eigen::Vector2d> poly(a.begin(), a.end());
  for (int i = 0; i < 4 && poly.size() >= 3; ++i) {
    poly = clip_edge(poly, b[i], b[(i + 1) % 4]);
  }
  if (poly.size() < 3) return 0.0;
  const double area = std::abs(polygon_area(poly));
  return area < kAreaEpsilon ? 0.0 : area;
}

}  // namespace

double normalize_angle(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

bool Box3D::valid() const {
  return dims.x() > 0.0 && dims.y() > 0.0 && dims.z() > 0.0 &&
         yaw > -kPi - 1e-12 && yaw <= kPi + 1e-12 && score >= 0.0 &&
         score <= 1.0;
}

double CalibrationChain::rotation_error() const {
  const Eigen::Matrix3d r = lidar_to_cam.topLeftCorner<3, 3>();
  return (r.transpose() * r - Eigen::Matrix3d::Identity())
      .cwiseAbs()
      .maxCoeff();
}

std::array<Eigen::Vector3d, 8> box3d_corners(const Box3D& box) {
  const double hl = 0.5 * box.dims.x();
  const double hw = 0.5 * box.dims.y();
  const double hh = 0.5 * box.dims.z();

  Eigen::Matrix3d rot;
  std::array<Eigen::Vector3d, 8> local;
  int k = 0;
  if (box.frame == FrameTag::lidar) {
    rot = Eigen::AngleAxisd(box.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (double sl : {-1.0, 1.0})
      for (double sw : {-1.0, 1.0})
        for (double sh : {-1.0, 1.0}) local[k++] = {sl * hl, sw * hw, sh * hh};
  } else {
    // camera frame: y is vertical, footprint spans x (length) and z (width)
    rot = Eigen::AngleAxisd(box.yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    for (double sl : {-1.0, 1.0})
      for (double sw : {-1.0, 1.0})
        for (double sh : {-1.0, 1.0}) local[k++] = {sl * hl, sh * hh, sw * hw};
  }

  std::array<Eigen::Vector3d, 8> corners;
  for (int i = 0; i < 8; ++i) corners[i] = box.center + rot * local[i];
  return corners;
}

std::array<Eigen::Vector2d, 4> box3d_bev_corners(const Box3D& box) {
  const double hl = 0.5 * box.dims.x();
  const double hw = 0.5 * box.dims.y();
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);

  std::array<Eigen::Vector2d, 4> corners;
  const std::array<Eigen::Vector2d, 4> local = {
      Eigen::Vector2d{hl, hw}, Eigen::Vector2d{-hl, hw},
      Eigen::Vector2d{-hl, -hw}, Eigen::Vector2d{hl, -hw}};
  if (box.frame == FrameTag::lidar) {
    // (x, y) ground plane, rotation by +yaw
    for (int i = 0; i < 4; ++i) {
      const auto& p = local[i];
      corners[i] = {box.center.x() + c * p.x() - s * p.y(),
                    box.center.y() + s * p.x() + c * p.y()};
    }
  } else {
    // (x, z) plane; Ry(yaw) maps (x, z) -> (c*x + s*z, -s*x + c*z)
    for (int i = 0; i < 4; ++i) {
      const auto& p = local[i];
      corners[i] = {box.center.x() + c * p.x() + s * p.y(),
                    box.center.z() - s * p.x() + c * p.y()};
    }
  }
  // canonical counter-clockwise order for the clipper
  std::vector<Eigen::Vector2d> tmp(corners.begin(), corners.end());
  if (polygon_area(tmp) < 0.0) std::reverse(corners.begin(), corners.end());
  return corners;
}

std::vector<ProjectedPoint> project_points(
    const CalibrationChain& calib, const std::vector<Eigen::Vector3d>& points) {
  const Eigen::Matrix4d cam_from_lidar =
      rect_homogeneous(calib) * calib.lidar_to_cam;
  const Eigen::Matrix<double, 3, 4> full =
      calib.intrinsic_projection * cam_from_lidar;

  std::vector<ProjectedPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Eigen::Vector4d x(p.x(), p.y(), p.z(), 1.0);
    const double depth = (cam_from_lidar * x).z();
    ProjectedPoint pp;
    pp.depth = depth;
    if (depth <= kDepthEpsilon) {
      out.push_back(pp);
      continue;
    }
    const Eigen::Vector3d uvw = full * x;
    if (std::abs(uvw.z()) <= kDepthEpsilon) {
      out.push_back(pp);
      continue;
    }
    pp.u = uvw.x() / uvw.z();
    pp.v = uvw.y() / uvw.z();
    pp.valid = true;
    out.push_back(pp);
  }
  return out;
}

std::optional<Box2D> project_box3d(const CalibrationChain& calib,
                                   const Box3D& box, int image_width,
                                   int image_height) {
  const auto corners = box3d_corners(box);
  const auto projected = project_points(
      calib, std::vector<Eigen::Vector3d>(corners.begin(), corners.end()));

  double left = std::numeric_limits<double>::infinity();
  double top = std::numeric_limits<double>::infinity();
  double right = -std::numeric_limits<double>::infinity();
  double bottom = -std::numeric_limits<double>::infinity();
  int valid_count = 0;
  for (const auto& pp : projected) {
    if (!pp.valid) continue;
    ++valid_count;
    left = std::min(left, pp.u);
    right = std::max(right, pp.u);
    top = std::min(top, pp.v);
    bottom = std::max(bottom, pp.v);
  }
  if (valid_count < 2) return std::nullopt;

  Box2D b;
  b.left = std::clamp(left, 0.0, static_cast<double>(image_width));
  b.right = std::clamp(right, 0.0, static_cast<double>(image_width));
  b.top = std::clamp(top, 0.0, static_cast<double>(image_height));
  b.bottom = std::clamp(bottom, 0.0, static_cast<double>(image_height));
  b.class_id = box.class_id;
  b.score = box.score;
  b.obj_id = box.obj_id;
  if (!b.valid()) return std::nullopt;
  return b;
}

CalibrationChain perturb_calibration(const CalibrationChain& calib,
                                     const NoiseSpec& spec,
                                     std::mt19937_64& rng) {
  CalibrationChain out = calib;
  const double rot_std_rad = std::sqrt(spec.rot_variance) * kPi / 180.0;
  const double trans_std = std::sqrt(spec.trans_variance);

  if (rot_std_rad > 0.0) {
    std::normal_distribution<double> dist(0.0, rot_std_rad);
    const double ax = dist(rng);
    const double ay = dist(rng);
    const double az = dist(rng);
    const Eigen::Matrix3d noise =
        (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
         Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
         Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    out.lidar_to_cam.topLeftCorner<3, 3>() =
        noise * calib.lidar_to_cam.topLeftCorner<3, 3>();
  }
  if (trans_std > 0.0) {
    std::normal_distribution<double> dist(0.0, trans_std);
    for (int i = 0; i < 3; ++i) out.lidar_to_cam(i, 3) += dist(rng);
  }
  return out;
}

CalibrationChain perturb_calibration(const CalibrationChain& calib,
                                     const NoiseSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  return perturb_calibration(calib, spec, rng);
}

double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw =
      std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih =
      std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double bev_inter =
      convex_intersection_area(box3d_bev_corners(a), box3d_bev_corners(b));
  if (bev_inter <= 0.0) return 0.0;

  const double va = a.frame == FrameTag::lidar ? a.center.z() : a.center.y();
  const double vb = b.frame == FrameTag::lidar ? b.center.z() : b.center.y();
  const double overlap = std::min(va + 0.5 * a.dims.z(), vb + 0.5 * b.dims.z()) -
                         std::max(va - 0.5 * a.dims.z(), vb - 0.5 * b.dims.z());
  if (overlap <= 0.0) return 0.0;

  const double inter = bev_inter * overlap;
  const double vol_a = a.dims.prod();
  const double vol_b = b.dims.prod();
  const double uni = vol_a + vol_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

Box3D box3d_camera_to_lidar(const Box3D& box, const CalibrationChain& calib) {
  const Eigen::Matrix4d cam_from_lidar =
      rect_homogeneous(calib) * calib.lidar_to_cam;
  const Eigen::Matrix4d lidar_from_cam = cam_from_lidar.inverse();

  Box3D out = box;
  out.frame = FrameTag::lidar;
  out.center = (lidar_from_cam *
                Eigen::Vector4d(box.center.x(), box.center.y(),
                                box.center.z(), 1.0))
                   .head<3>();
  // heading of the camera box mapped into the lidar ground plane
  const Eigen::Vector3d heading_cam(std::cos(box.yaw), 0.0, -std::sin(box.yaw));
  const Eigen::Vector3d heading_lidar =
      lidar_from_cam.topLeftCorner<3, 3>() * heading_cam;
  out.yaw = normalize_angle(std::atan2(heading_lidar.y(), heading_lidar.x()));
  return out;
}

}  // namespace cod
