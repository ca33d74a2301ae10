#pragma once

#include "cod/datasets.hpp"
#include "cod/geometry.hpp"

#include <cstdint>
#include <vector>

namespace cod {

/// Error process for a seeded stand-in detector. All randomness derives from
/// (seed, frame_id), so replays are exact.
struct DetectorSpec {
  double center_sigma = 0.0;  // meters (3D) / pixels (2D)
  double dim_sigma = 0.0;     // multiplicative fraction
  double yaw_sigma = 0.0;     // radians
  double miss_rate = 0.0;
  double fp_rate = 0.0;  // expected false positives per frame
  double tp_score_mean = 0.9;
  double tp_score_sigma = 0.0;
  double fp_score_mean = 0.3;
  double fp_score_sigma = 0.0;
  std::uint64_t seed = 0;

  bool valid() const {
    return center_sigma >= 0.0 && dim_sigma >= 0.0 && yaw_sigma >= 0.0 &&
           miss_rate >= 0.0 && miss_rate <= 1.0 && fp_rate >= 0.0;
  }
};

/// Per-GT drop / jitter plus Poisson false positives. Detections keep the
/// source GT's obj_id; false positives get fresh negative ids. A zero-noise
/// spec reproduces the GT geometry exactly.
std::vector<Box3D> simulate_detections_3d(const Frame& frame,
                                          const DetectorSpec& spec);

std::vector<Box2D> simulate_detections_2d(const Frame& frame,
                                          const DetectorSpec& spec);

}  // namespace cod
