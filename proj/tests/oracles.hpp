// Independent reference computations used to check the implementation.
// Everything here deliberately avoids the library's own code paths.
#pragma once

#include "cod/geometry.hpp"
#include "cod/matching.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace oracles {

// --- assignment -----------------------------------------------------------

// Exhaustive optimum over all maximal matchings avoiding forbidden pairs.
// Returns (matched_pairs, total_cost) with matched count maximized first.
inline std::pair<int, double> brute_force_assignment(
    const cod::CostMatrix& cost) {
  const int n = std::max(cost.rows, cost.cols);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  int best_matched = -1;
  double best_cost = 0.0;
  do {
    int matched = 0;
    double total = 0.0;
    for (int r = 0; r < cost.rows; ++r) {
      const int c = perm[r];
      if (c >= cost.cols) continue;
      const double v = cost.at(r, c);
      if (std::isinf(v)) continue;
      ++matched;
      total += v;
    }
    if (matched > best_matched ||
        (matched == best_matched && total < best_cost)) {
      best_matched = matched;
      best_cost = total;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best_matched, best_cost};
}

inline std::pair<int, double> assignment_score(const cod::Assignment& asg) {
  double total = 0.0;
  for (const auto& p : asg.pairs) total += p.cost;
  return {static_cast<int>(asg.pairs.size()), total};
}

// --- rotated-box volume overlap -------------------------------------------

// Point-in-oriented-box test written from scratch: transform into the box's
// local axes and compare against half extents.
inline bool point_in_box3d(const Eigen::Vector3d& p, const cod::Box3D& box) {
  const Eigen::Vector3d d = p - box.center;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  double u, v, w;
  if (box.frame == cod::FrameTag::lidar) {
    u = c * d.x() + s * d.y();
    v = -s * d.x() + c * d.y();
    w = d.z();
  } else {
    u = c * d.x() - s * d.z();
    v = s * d.x() + c * d.z();
    w = d.y();
  }
  return std::abs(u) <= 0.5 * box.dims.x() && std::abs(v) <= 0.5 * box.dims.y() &&
         std::abs(w) <= 0.5 * box.dims.z();
}

inline double monte_carlo_iou3d(const cod::Box3D& a, const cod::Box3D& b,
                                int samples, std::uint64_t seed) {
  // AABB covering both boxes, from their corner sets
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e18);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(-1e18);
  for (const cod::Box3D* box : {&a, &b}) {
    for (const auto& corner : cod::box3d_corners(*box)) {
      lo = lo.cwiseMin(corner);
      hi = hi.cwiseMax(corner);
    }
  }
  const Eigen::Vector3d span = hi - lo;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long in_a = 0, in_b = 0, in_both = 0;
  for (int i = 0; i < samples; ++i) {
    const Eigen::Vector3d p = lo + Eigen::Vector3d(unit(rng) * span.x(),
                                                   unit(rng) * span.y(),
                                                   unit(rng) * span.z());
    const bool pa = point_in_box3d(p, a);
    const bool pb = point_in_box3d(p, b);
    in_a += pa;
    in_b += pb;
    in_both += pa && pb;
  }
  const long uni = in_a + in_b - in_both;
  return uni > 0 ? static_cast<double>(in_both) / uni : 0.0;
}

// --- rasterized 2D IoU ------------------------------------------------------

inline double rasterized_iou2d(const cod::Box2D& a, const cod::Box2D& b,
                               double cell = 0.01) {
  const double lo_x = std::min(a.left, b.left);
  const double hi_x = std::max(a.right, b.right);
  const double lo_y = std::min(a.top, b.top);
  const double hi_y = std::max(a.bottom, b.bottom);
  long in_a = 0, in_b = 0, in_both = 0;
  for (double x = lo_x + 0.5 * cell; x < hi_x; x += cell) {
    for (double y = lo_y + 0.5 * cell; y < hi_y; y += cell) {
      const bool pa = x >= a.left && x <= a.right && y >= a.top && y <= a.bottom;
      const bool pb = x >= b.left && x <= b.right && y >= b.top && y <= b.bottom;
      in_a += pa;
      in_b += pb;
      in_both += pa && pb;
    }
  }
  const long uni = in_a + in_b - in_both;
  return uni > 0 ? static_cast<double>(in_both) / uni : 0.0;
}

// --- corner rotation + projection ------------------------------------------

// 8-point rotation+translation, lidar frame, independent of box3d_corners.
inline std::array<Eigen::Vector3d, 8> reference_corners_lidar(
    double x, double y, double z, double l, double w, double h, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  std::array<Eigen::Vector3d, 8> out;
  int k = 0;
  for (double sx : {-0.5, 0.5}) {
    for (double sy : {-0.5, 0.5}) {
      for (double sz : {-0.5, 0.5}) {
        const double lx = sx * l, ly = sy * w, lz = sz * h;
        out[k++] = {x + c * lx - s * ly, y + s * lx + c * ly, z + lz};
      }
    }
  }
  return out;
}

// Straight-line homogeneous projection of a lidar point, written out by hand.
inline std::array<double, 3> reference_project(
    const cod::CalibrationChain& calib, const Eigen::Vector3d& p) {
  Eigen::Vector4d x(p.x(), p.y(), p.z(), 1.0);
  Eigen::Vector4d cam = calib.lidar_to_cam * x;
  Eigen::Vector4d rect = cam;
  rect.head<3>() = calib.rectification * cam.head<3>();
  const Eigen::Vector3d uvw = calib.intrinsic_projection * rect;
  return {uvw.x() / uvw.z(), uvw.y() / uvw.z(), rect.z()};
}

}  // namespace oracles
