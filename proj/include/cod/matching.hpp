#pragma once

#include "cod/geometry.hpp"

#include <limits>
#include <map>
#include <vector>

namespace cod {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

enum class CostMetric { center_distance_3d, neg_iou_3d, neg_iou_2d };

/// Rectangular detection x ground-truth cost matrix. +inf marks forbidden
/// pairs (class mismatch); all other entries are finite and nonnegative.
struct CostMatrix {
  int rows = 0;  // detections
  int cols = 0;  // ground truths
  std::vector<double> data;
  CostMetric metric = CostMetric::center_distance_3d;

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
};

struct Assignment {
  struct Pair {
    int det_index;
    int gt_index;
    double cost;
  };
  std::vector<Pair> pairs;
  std::vector<int> unmatched_dets;
  std::vector<int> unmatched_gts;
};

/// Class-mismatched pairs are forbidden. neg_iou_2d projects the 3D boxes
/// through `calib` first; dets a projection rejects are forbidden everywhere.
CostMatrix build_cost_matrix(const std::vector<Box3D>& dets,
                             const std::vector<Box3D>& gts, CostMetric metric,
                             const CalibrationChain* calib = nullptr,
                             int image_width = 0, int image_height = 0);

/// Cost matrix between two 2D box lists under 1 - iou_2d, class gated.
CostMatrix build_cost_matrix_2d(const std::vector<Box2D>& dets,
                                const std::vector<Box2D>& gts);

/// Minimum-cost maximal matching that never uses a forbidden pair.
/// Rectangular inputs are padded internally with a large finite sentinel;
/// forbidden pairs are excluded from the result afterwards.
Assignment hungarian(const CostMatrix& cost);

/// Moves pairs with cost > max_cost to the unmatched sets. Idempotent.
Assignment gate_assignment(const Assignment& asg, double max_cost);

/// Per-class gates keyed by det class id; classes not listed use
/// default_gate.
Assignment gate_assignment_per_class(const Assignment& asg,
                                     const std::vector<Box3D>& dets,
                                     const std::map<int, double>& gates,
                                     double default_gate);

}  // namespace cod
