#include "cod/simdet.hpp"

#include "cod/hash.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cod {

namespace {

constexpr double kMinDimFraction = 0.05;

double gauss(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(rng);
}

double clamped_score(std::mt19937_64& rng, double mean, double sigma) {
  return std::clamp(mean + gauss(rng, sigma), 0.0, 1.0);
}

int poisson_count(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<int> dist(mean);
  return dist(rng);
}

std::vector<int> frame_class_vocabulary(const Frame& frame) {
  std::vector<int> classes;
  for (const auto& gt : frame.gts) {
    if (gt.class_id == kDontCare) continue;
    if (std::find(classes.begin(), classes.end(), gt.class_id) == classes.end())
      classes.push_back(gt.class_id);
  }
  if (classes.empty()) classes.push_back(kCar);
  return classes;
}

}  // namespace

std::vector<Box3D> simulate_detections_3d(const Frame& frame,
                                          const DetectorSpec& spec) {
  std::mt19937_64 rng(fnv1a(fnv1a(spec.seed, frame.frame_id), 0x3d));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Box3D> out;

  Eigen::Vector3d region_lo(0.0, -20.0, -2.0);
  Eigen::Vector3d region_hi(60.0, 20.0, 2.0);
  Eigen::Vector3d mean_dims(4.0, 1.8, 1.6);
  FrameTag tag = FrameTag::lidar;
  int real_gts = 0;
  for (const auto& gt : frame.gts) {
    if (gt.class_id == kDontCare) continue;
    if (real_gts == 0) {
      region_lo = region_hi = gt.box3d.center;
      mean_dims = gt.box3d.dims;
      tag = gt.box3d.frame;
    } else {
      region_lo = region_lo.cwiseMin(gt.box3d.center);
      region_hi = region_hi.cwiseMax(gt.box3d.center);
      mean_dims += gt.box3d.dims;
    }
    ++real_gts;
  }
  if (real_gts > 0) mean_dims /= real_gts;
  region_lo.array() -= 5.0;
  region_hi.array() += 5.0;

  for (const auto& gt : frame.gts) {
    if (gt.class_id == kDontCare) continue;
    if (spec.miss_rate > 0.0 && unit(rng) < spec.miss_rate) continue;

    Box3D det = gt.box3d;
    det.class_id = gt.class_id;
    det.obj_id = gt.obj_id;
    for (int axis = 0; axis < 3; ++axis)
      det.center[axis] += gauss(rng, spec.center_sigma);
    for (int axis = 0; axis < 3; ++axis) {
      const double scale = 1.0 + gauss(rng, spec.dim_sigma);
      det.dims[axis] =
          std::max(det.dims[axis] * scale, det.dims[axis] * kMinDimFraction);
    }
    det.yaw = normalize_angle(det.yaw + gauss(rng, spec.yaw_sigma));
    det.score = clamped_score(rng, spec.tp_score_mean, spec.tp_score_sigma);
    out.push_back(det);
  }

  const auto vocabulary = frame_class_vocabulary(frame);
  const int fp_count = poisson_count(rng, spec.fp_rate);
  for (int k = 0; k < fp_count; ++k) {
    Box3D fp;
    fp.frame = tag;
    for (int axis = 0; axis < 3; ++axis) {
      fp.center[axis] =
          region_lo[axis] + unit(rng) * (region_hi[axis] - region_lo[axis]);
    }
    for (int axis = 0; axis < 3; ++axis)
      fp.dims[axis] = mean_dims[axis] * (0.5 + unit(rng));
    fp.yaw = normalize_angle(-kPi + unit(rng) * 2.0 * kPi);
    fp.class_id =
        vocabulary[static_cast<std::size_t>(unit(rng) * vocabulary.size()) %
                   vocabulary.size()];
    fp.score = clamped_score(rng, spec.fp_score_mean, spec.fp_score_sigma);
    fp.obj_id = -(k + 1);
    out.push_back(fp);
  }
  return out;
}

std::vector<Box2D> simulate_detections_2d(const Frame& frame,
                                          const DetectorSpec& spec) {
  std::mt19937_64 rng(fnv1a(fnv1a(spec.seed, frame.frame_id), 0x2d));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = frame.image_width;
  const double height = frame.image_height;
  std::vector<Box2D> out;

  for (const auto& gt : frame.gts) {
    if (gt.class_id == kDontCare) continue;
    if (spec.miss_rate > 0.0 && unit(rng) < spec.miss_rate) continue;

    Box2D det = gt.box2d;
    det.class_id = gt.class_id;
    det.obj_id = gt.obj_id;
    const double min_w = kMinDimFraction * gt.box2d.width();
    const double min_h = kMinDimFraction * gt.box2d.height();
    det.left += gauss(rng, spec.center_sigma);
    det.top += gauss(rng, spec.center_sigma);
    det.right += gauss(rng, spec.center_sigma);
    det.bottom += gauss(rng, spec.center_sigma);
    // re-center degenerate boxes at the dimension floor
    if (det.width() < min_w) {
      const double c = 0.5 * (det.left + det.right);
      det.left = c - 0.5 * min_w;
      det.right = c + 0.5 * min_w;
    }
    if (det.height() < min_h) {
      const double c = 0.5 * (det.top + det.bottom);
      det.top = c - 0.5 * min_h;
      det.bottom = c + 0.5 * min_h;
    }
    det.score = clamped_score(rng, spec.tp_score_mean, spec.tp_score_sigma);
    out.push_back(det);
  }

  const auto vocabulary = frame_class_vocabulary(frame);
  const int fp_count = poisson_count(rng, spec.fp_rate);
  for (int k = 0; k < fp_count; ++k) {
    Box2D fp;
    const double w = 10.0 + unit(rng) * 0.2 * width;
    const double h = 10.0 + unit(rng) * 0.4 * height;
    fp.left = unit(rng) * std::max(width - w, 1.0);
    fp.top = unit(rng) * std::max(height - h, 1.0);
    fp.right = fp.left + w;
    fp.bottom = fp.top + h;
    fp.class_id =
        vocabulary[static_cast<std::size_t>(unit(rng) * vocabulary.size()) %
                   vocabulary.size()];
    fp.score = clamped_score(rng, spec.fp_score_mean, spec.fp_score_sigma);
    fp.obj_id = -(k + 1);
    out.push_back(fp);
  }
  return out;
}

}  // namespace cod
