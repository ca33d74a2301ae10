#pragma once

#include "cod/datasets.hpp"
#include "cod/geometry.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cod {

struct EvalConfig {
  // IoU needed for a true positive, per class (KITTI protocol)
  std::map<int, double> iou_thresholds = {
      {kCar, 0.7}, {kPedestrian, 0.5}, {kCyclist, 0.5}};
  int recall_points = 11;
  // CP matching thresholds; 3D defaults to the class's AP threshold
  std::map<int, double> cp_iou3d_thresholds = {
      {kCar, 0.7}, {kPedestrian, 0.5}, {kCyclist, 0.5}};
  double cp_iou2d_threshold = 0.5;
  // when set, the CP denominator only counts GTs at or below this level
  bool cp_filter_by_difficulty = false;
  Difficulty cp_difficulty = Difficulty::hard;

  double iou_threshold(int class_id) const {
    const auto it = iou_thresholds.find(class_id);
    return it != iou_thresholds.end() ? it->second : 0.5;
  }
  double cp_iou3d(int class_id) const {
    const auto it = cp_iou3d_thresholds.find(class_id);
    return it != cp_iou3d_thresholds.end() ? it->second : 0.5;
  }
};

struct ApResult {
  double ap = 0.0;  // percent
  bool empty = false;  // no admissible ground truth
};

/// KITTI-style 11-point interpolated AP, percent. Detections are pooled over
/// frames and ranked by score; per frame the greedy one-to-one match claims
/// the best-overlap admissible GT at IoU >= threshold. GTs harder than
/// `level` (or ignored) contribute no recall and absorb detections that only
/// overlap them.
template <class BoxT, class IouFn>
ApResult ap_r11(const std::vector<std::vector<BoxT>>& det_frames,
                const std::vector<std::vector<std::pair<BoxT, Difficulty>>>&
                    gt_frames,
                IouFn iou, double threshold, Difficulty level,
                int recall_points = 11) {
  ApResult result;
  int gt_count = 0;
  std::vector<std::pair<double, bool>> scored;  // (score, is_tp)

  for (std::size_t f = 0; f < gt_frames.size(); ++f) {
    const auto& gts = gt_frames[f];
    for (const auto& [box, diff] : gts) {
      (void)box;
      if (diff != Difficulty::ignored && diff <= level) ++gt_count;
    }
    if (f >= det_frames.size()) continue;

    std::vector<int> order(det_frames[f].size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return det_frames[f][a].score > det_frames[f][b].score;
    });

    std::vector<char> claimed(gts.size(), 0);
    for (int di : order) {
      const BoxT& det = det_frames[f][di];
      int best = -1;
      double best_iou = threshold;
      double best_ignored_iou = 0.0;
      for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (gts[gi].first.class_id != det.class_id) continue;
        const double v = iou(det, gts[gi].first);
        const bool admissible =
            gts[gi].second != Difficulty::ignored && gts[gi].second <= level;
        if (admissible) {
          if (!claimed[gi] && v >= best_iou) {
            best_iou = v;
            best = static_cast<int>(gi);
          }
        } else {
          best_ignored_iou = std::max(best_ignored_iou, v);
        }
      }
      if (best >= 0) {
        claimed[best] = 1;
        scored.emplace_back(det.score, true);
      } else if (best_ignored_iou < threshold) {
        scored.emplace_back(det.score, false);
      }
      // detections explained only by an out-of-level GT are neither TP nor FP
    }
  }

  if (gt_count == 0) {
    result.empty = true;
    return result;
  }

  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> precisions, recalls;
  int tp = 0, fp = 0;
  for (const auto& [score, is_tp] : scored) {
    (void)score;
    is_tp ? ++tp : ++fp;
    precisions.push_back(static_cast<double>(tp) / (tp + fp));
    recalls.push_back(static_cast<double>(tp) / gt_count);
  }

  double sum = 0.0;
  for (int k = 0; k < recall_points; ++k) {
    const double r = static_cast<double>(k) / (recall_points - 1);
    double best_precision = 0.0;
    for (std::size_t i = 0; i < recalls.size(); ++i) {
      if (recalls[i] >= r - 1e-12)
        best_precision = std::max(best_precision, precisions[i]);
    }
    sum += best_precision;
  }
  result.ap = 100.0 * sum / recall_points;
  return result;
}

/// One 3D/2D detection pair with a shared object identity.
struct Triple {
  Box3D box3;
  Box2D box2;
  std::int64_t shared_id = -1;
};

struct PairedFrame {
  std::string frame_id;
  std::vector<Triple> triples;
};

/// CP = 100 * TCD / GT per class. A triple is a true consistent detection
/// when its 3D box matches a ground-truth object and its 2D box matches the
/// same object's 2D box, each above the configured IoU. GTs are creditable
/// once, claimed greedily by 3D score.
std::map<int, double> consistency_precision(
    const std::vector<PairedFrame>& paired_frames,
    const std::vector<Frame>& gt_frames, const EvalConfig& config);

/// l_lidar + alpha * l_image.
double combine_losses(double l_lidar, double l_image, double alpha);

/// Arithmetic mean of per-class APs.
double aggregate_map(const std::vector<double>& class_aps);

enum class Modality { box3d, bbox };

struct EvalReport {
  struct ApRow {
    int class_id;
    Difficulty difficulty;
    Modality modality;
    double ap;
    bool empty;
  };
  std::vector<ApRow> ap_rows;
  std::map<int, double> cp;  // percent per class
  EvalConfig config;

  std::string to_csv() const;
};

}  // namespace cod
