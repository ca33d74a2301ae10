#include "cod/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace cod {

namespace {

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::map<int, double> consistency_precision(
    const std::vector<PairedFrame>& paired_frames,
    const std::vector<Frame>& gt_frames, const EvalConfig& config) {
  std::unordered_map<std::string, const Frame*> by_id;
  for (const auto& frame : gt_frames) by_id[frame.frame_id] = &frame;

  auto admissible = [&](const GroundTruthObject& gt) {
    if (gt.class_id == kDontCare) return false;
    const Difficulty d = assign_difficulty(gt);
    if (d == Difficulty::ignored) return false;
    return !config.cp_filter_by_difficulty || d <= config.cp_difficulty;
  };

  std::map<int, int> gt_counts;
  for (const auto& frame : gt_frames) {
    for (const auto& gt : frame.gts) {
      if (admissible(gt)) ++gt_counts[gt.class_id];
    }
  }

  std::map<int, int> tcd;
  for (const auto& paired : paired_frames) {
    const auto it = by_id.find(paired.frame_id);
    if (it == by_id.end()) continue;
    const Frame& frame = *it->second;

    std::vector<int> order(paired.triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return paired.triples[a].box3.score > paired.triples[b].box3.score;
    });

    std::vector<char> claimed(frame.gts.size(), 0);
    for (int ti : order) {
      const Triple& triple = paired.triples[ti];
      const double thr3 = config.cp_iou3d(triple.box3.class_id);
      int best = -1;
      double best_iou = thr3;
      for (std::size_t gi = 0; gi < frame.gts.size(); ++gi) {
        const auto& gt = frame.gts[gi];
        if (claimed[gi] || gt.class_id != triple.box3.class_id) continue;
        if (!admissible(gt)) continue;
        const double v = iou_3d(triple.box3, gt.box3d);
        if (v >= best_iou) {
          best_iou = v;
          best = static_cast<int>(gi);
        }
      }
      if (best < 0) continue;
      // the 2D box must refer to the very same object
      if (iou_2d(triple.box2, frame.gts[best].box2d) <
          config.cp_iou2d_threshold)
        continue;
      claimed[best] = 1;
      ++tcd[triple.box3.class_id];
    }
  }

  std::map<int, double> cp;
  for (const auto& [class_id, count] : gt_counts) {
    cp[class_id] = 100.0 * tcd[class_id] / count;
  }
  return cp;
}

double combine_losses(double l_lidar, double l_image, double alpha) {
  return l_lidar + alpha * l_image;
}

double aggregate_map(const std::vector<double>& class_aps) {
  if (class_aps.empty()) return 0.0;
  double sum = 0.0;
  for (double ap : class_aps) sum += ap;
  return sum / class_aps.size();
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "# cod evaluation report\n";
  for (const auto& [class_id, thr] : config.iou_thresholds)
    out << "# ap_iou[" << class_name(class_id) << "]=" << fixed6(thr) << "\n";
  for (const auto& [class_id, thr] : config.cp_iou3d_thresholds)
    out << "# cp_iou3d[" << class_name(class_id) << "]=" << fixed6(thr) << "\n";
  out << "# cp_iou2d=" << fixed6(config.cp_iou2d_threshold) << "\n";
  out << "# recall_points=" << config.recall_points << "\n";
  out << "metric,class,difficulty,modality,value,empty\n";
  for (const auto& row : ap_rows) {
    out << "AP," << class_name(row.class_id) << ','
        << difficulty_name(row.difficulty) << ','
        << (row.modality == Modality::box3d ? "3D" : "Bbox") << ','
        << fixed6(row.ap) << ',' << (row.empty ? 1 : 0) << "\n";
  }
  // mAP per difficulty x modality over the evaluated classes
  for (Modality mod : {Modality::box3d, Modality::bbox}) {
    for (Difficulty diff :
         {Difficulty::easy, Difficulty::moderate, Difficulty::hard}) {
      std::vector<double> aps;
      for (const auto& row : ap_rows) {
        if (row.modality == mod && row.difficulty == diff) aps.push_back(row.ap);
      }
      if (aps.empty()) continue;
      out << "mAP,all," << difficulty_name(diff) << ','
          << (mod == Modality::box3d ? "3D" : "Bbox") << ','
          << fixed6(aggregate_map(aps)) << ",0\n";
    }
  }
  for (const auto& [class_id, value] : cp) {
    out << "CP," << class_name(class_id) << ",,," << fixed6(value) << ",0\n";
  }
  return out.str();
}

}  // namespace cod
