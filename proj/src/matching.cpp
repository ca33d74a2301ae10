#include "cod/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cod {

namespace {

// Large finite sentinel for padding and forbidden entries while solving.
// Any real matching cost in this toolkit is orders of magnitude smaller, so
// the solver maximizes the number of allowed pairs before minimizing cost.
constexpr double kPadCost = 1e9;

// Jonker-Volgenant style shortest augmenting path assignment on a square
// matrix, O(n^3). Returns row -> column.
std::vector<int> solve_square(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

CostMatrix build_cost_matrix(const std::vector<Box3D>& dets,
                             const std::vector<Box3D>& gts, CostMetric metric,
                             const CalibrationChain* calib, int image_width,
                             int image_height) {
  CostMatrix m;
  m.rows = static_cast<int>(dets.size());
  m.cols = static_cast<int>(gts.size());
  m.metric = metric;
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);

  std::vector<std::optional<Box2D>> det2d, gt2d;
  if (metric == CostMetric::neg_iou_2d) {
    if (!calib) throw std::invalid_argument("neg_iou_2d needs a calibration");
    for (const auto& d : dets)
      det2d.push_back(project_box3d(*calib, d, image_width, image_height));
    for (const auto& g : gts)
      gt2d.push_back(project_box3d(*calib, g, image_width, image_height));
  }

  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if (dets[r].class_id != gts[c].class_id) {
        m.at(r, c) = kForbidden;
        continue;
      }
      switch (metric) {
        case CostMetric::center_distance_3d:
          m.at(r, c) = (dets[r].center - gts[c].center).norm();
          break;
        case CostMetric::neg_iou_3d:
          m.at(r, c) = 1.0 - iou_3d(dets[r], gts[c]);
          break;
        case CostMetric::neg_iou_2d:
          m.at(r, c) = (det2d[r] && gt2d[c])
                           ? 1.0 - iou_2d(*det2d[r], *gt2d[c])
                           : kForbidden;
          break;
      }
    }
  }
  return m;
}

CostMatrix build_cost_matrix_2d(const std::vector<Box2D>& dets,
                                const std::vector<Box2D>& gts) {
  CostMatrix m;
  m.rows = static_cast<int>(dets.size());
  m.cols = static_cast<int>(gts.size());
  m.metric = CostMetric::neg_iou_2d;
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      m.at(r, c) = dets[r].class_id == gts[c].class_id
                       ? 1.0 - iou_2d(dets[r], gts[c])
                       : kForbidden;
    }
  }
  return m;
}

Assignment hungarian(const CostMatrix& cost) {
  Assignment out;
  const int n = std::max(cost.rows, cost.cols);
  if (n == 0) return out;

  std::vector<std::vector<double>> padded(n, std::vector<double>(n, kPadCost));
  for (int r = 0; r < cost.rows; ++r) {
    for (int c = 0; c < cost.cols; ++c) {
      const double v = cost.at(r, c);
      padded[r][c] = std::isinf(v) ? kPadCost : v;
    }
  }

  const auto row_to_col = solve_square(padded);
  std::vector<char> gt_matched(cost.cols, 0);
  for (int r = 0; r < cost.rows; ++r) {
    const int c = row_to_col[r];
    if (c >= 0 && c < cost.cols && !std::isinf(cost.at(r, c))) {
      out.pairs.push_back({r, c, cost.at(r, c)});
      gt_matched[c] = 1;
    } else {
      out.unmatched_dets.push_back(r);
    }
  }
  for (int c = 0; c < cost.cols; ++c) {
    if (!gt_matched[c]) out.unmatched_gts.push_back(c);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const Assignment::Pair& a, const Assignment::Pair& b) {
              return a.det_index < b.det_index;
            });
  return out;
}

Assignment gate_assignment(const Assignment& asg, double max_cost) {
  Assignment out;
  out.unmatched_dets = asg.unmatched_dets;
  out.unmatched_gts = asg.unmatched_gts;
  for (const auto& pair : asg.pairs) {
    if (pair.cost > max_cost) {
      out.unmatched_dets.push_back(pair.det_index);
      out.unmatched_gts.push_back(pair.gt_index);
    } else {
      out.pairs.push_back(pair);
    }
  }
  std::sort(out.unmatched_dets.begin(), out.unmatched_dets.end());
  std::sort(out.unmatched_gts.begin(), out.unmatched_gts.end());
  return out;
}

Assignment gate_assignment_per_class(const Assignment& asg,
                                     const std::vector<Box3D>& dets,
                                     const std::map<int, double>& gates,
                                     double default_gate) {
  Assignment out;
  out.unmatched_dets = asg.unmatched_dets;
  out.unmatched_gts = asg.unmatched_gts;
  for (const auto& pair : asg.pairs) {
    const auto it = gates.find(dets[pair.det_index].class_id);
    const double gate = it != gates.end() ? it->second : default_gate;
    if (pair.cost > gate) {
      out.unmatched_dets.push_back(pair.det_index);
      out.unmatched_gts.push_back(pair.gt_index);
    } else {
      out.pairs.push_back(pair);
    }
  }
  std::sort(out.unmatched_dets.begin(), out.unmatched_dets.end());
  std::sort(out.unmatched_gts.begin(), out.unmatched_gts.end());
  return out;
}

}  // namespace cod
