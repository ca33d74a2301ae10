#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace cod {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDepthEpsilon = 1e-6;  // meters

// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

enum class FrameTag { lidar, camera };

/// Oriented 3D bounding box. In the lidar frame the vertical axis is z and
/// yaw rotates about +z; in the camera frame the vertical axis is y and yaw
/// rotates about +y (KITTI rotation_y). center is the box centroid.
struct Box3D {
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  Eigen::Vector3d dims{1.0, 1.0, 1.0};  // length, width, height
  double yaw = 0.0;
  int class_id = 0;
  double score = 1.0;
  std::int64_t obj_id = -1;
  FrameTag frame = FrameTag::lidar;

  bool valid() const;
};

/// Axis-aligned image-space box, pixel units.
struct Box2D {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;
  int class_id = 0;
  double score = 1.0;
  std::int64_t obj_id = -1;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
  bool valid() const { return left < right && top < bottom; }
};

/// LiDAR point -> pixel transform stack: intrinsic * rect * lidar_to_cam.
struct CalibrationChain {
  Eigen::Matrix<double, 3, 4> intrinsic_projection =
      Eigen::Matrix<double, 3, 4>::Identity();
  Eigen::Matrix3d rectification = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d lidar_to_cam = Eigen::Matrix4d::Identity();

  // max |R^T R - I| of the extrinsic rotation block
  double rotation_error() const;
};

/// Zero-mean Gaussian calibration noise. Variances, not stds; rotation in
/// squared degrees, translation in squared meters.
struct NoiseSpec {
  double rot_variance = 0.0;
  double trans_variance = 0.0;
  std::uint64_t seed = 0;

  bool valid() const { return rot_variance >= 0.0 && trans_variance >= 0.0; }
};

struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool valid = false;
};

std::array<Eigen::Vector3d, 8> box3d_corners(const Box3D& box);

std::vector<ProjectedPoint> project_points(
    const CalibrationChain& calib, const std::vector<Eigen::Vector3d>& points);

/// Axis-aligned hull of the validly projected corners, clipped to the image.
/// Empty when fewer than 2 corners have positive depth or the clipped hull
/// is degenerate.
std::optional<Box2D> project_box3d(const CalibrationChain& calib,
                                   const Box3D& box, int image_width,
                                   int image_height);

CalibrationChain perturb_calibration(const CalibrationChain& calib,
                                     const NoiseSpec& spec,
                                     std::mt19937_64& rng);
CalibrationChain perturb_calibration(const CalibrationChain& calib,
                                     const NoiseSpec& spec);

double iou_2d(const Box2D& a, const Box2D& b);

/// BEV polygon intersection (Sutherland-Hodgman) times vertical overlap,
/// over volume union. Boxes must share a frame.
double iou_3d(const Box3D& a, const Box3D& b);

/// Footprint of the box in its horizontal plane, counter-clockwise.
std::array<Eigen::Vector2d, 4> box3d_bev_corners(const Box3D& box);

/// Nearest rotation matrix in the Frobenius sense (SVD projection).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

/// Converts a camera-frame box (rectified coordinates, KITTI labels) to the
/// lidar frame through the calibration chain.
Box3D box3d_camera_to_lidar(const Box3D& box, const CalibrationChain& calib);

}  // namespace cod
