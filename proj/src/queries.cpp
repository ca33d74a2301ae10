#include "cod/queries.hpp"

#include "cod/datasets.hpp"

#include <algorithm>
#include <random>

namespace cod {

namespace {

Query query_from_projection(const Box2D& box, int image_width,
                            int image_height, const Box3D& det,
                            const EmbeddingTable& table) {
  Query q;
  q.provenance = Query::Provenance::lidar_proposal;
  q.requires_matching = false;
  q.cx = 0.5 * (box.left + box.right) / image_width;
  q.cy = 0.5 * (box.top + box.bottom) / image_height;
  q.w = box.width() / image_width;
  q.h = box.height() / image_height;
  q.content = embed_category(det.class_id, table);
  return q;
}

}  // namespace

EmbeddingTable make_embedding_table(const std::vector<int>& class_ids, int dim,
                                    std::uint64_t seed) {
  EmbeddingTable table;
  table.dim = dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int cid : class_ids) {
    std::vector<double> row(dim);
    for (auto& v : row) v = dist(rng);
    table.rows[cid] = std::move(row);
  }
  return table;
}

const std::vector<double>& embed_category(int class_id,
                                          const EmbeddingTable& table) {
  const auto it = table.rows.find(class_id);
  if (it == table.rows.end())
    throw SchemaError("no embedding for class id " + std::to_string(class_id));
  return it->second;
}

QueryInitResult init_queries_from_lidar(const std::vector<Box3D>& dets,
                                        const std::vector<Box3D>& gts,
                                        const CalibrationChain& calib,
                                        int image_width, int image_height,
                                        const EmbeddingTable& table,
                                        const QueryInitConfig& config) {
  QueryInitResult result;
  if (dets.empty()) return result;

  const CostMatrix cost = build_cost_matrix(dets, gts, config.metric);
  const Assignment matched = gate_assignment_per_class(
      hungarian(cost), dets, config.gates, config.default_gate);

  for (const auto& pair : matched.pairs) {
    const Box3D& det = dets[pair.det_index];
    const auto projected =
        project_box3d(calib, det, image_width, image_height);
    if (!projected) {
      ++result.dropped_unprojectable;
      continue;
    }
    Query q = query_from_projection(*projected, image_width, image_height, det,
                                    table);
    q.det_index = pair.det_index;
    q.gt_index = pair.gt_index;
    result.queries.push_back(std::move(q));
  }
  return result;
}

QueryInitResult init_queries_no_gt(const std::vector<Box3D>& dets,
                                   const CalibrationChain& calib,
                                   int image_width, int image_height,
                                   const EmbeddingTable& table) {
  QueryInitResult result;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
    const auto projected =
        project_box3d(calib, dets[i], image_width, image_height);
    if (!projected) {
      ++result.dropped_unprojectable;
      continue;
    }
    Query q = query_from_projection(*projected, image_width, image_height,
                                    dets[i], table);
    q.det_index = i;
    result.queries.push_back(std::move(q));
  }
  return result;
}

std::vector<Query> heatmap_queries(int n, std::uint64_t seed, int dim) {
  std::vector<Query> out;
  out.reserve(std::max(n, 0));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    Query q;
    q.provenance = Query::Provenance::heatmap;
    q.requires_matching = true;
    q.slot = i;
    q.cx = unit(rng);
    q.cy = unit(rng);
    q.w = std::max(unit(rng), 1e-6);
    q.h = std::max(unit(rng), 1e-6);
    q.content.resize(dim);
    for (auto& v : q.content) v = signed_unit(rng);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Query> assemble_query_set(const std::vector<Query>& lidar_queries,
                                      const std::vector<Query>& heatmap) {
  std::vector<Query> out;
  out.reserve(lidar_queries.size() + heatmap.size());
  out.insert(out.end(), lidar_queries.begin(), lidar_queries.end());
  out.insert(out.end(), heatmap.begin(), heatmap.end());
  return out;
}

LossSplit split_for_loss(const std::vector<Query>& queries) {
  LossSplit split;
  for (const auto& q : queries) {
    (q.requires_matching ? split.matching_set : split.bypass_set).push_back(q);
  }
  return split;
}

}  // namespace cod
