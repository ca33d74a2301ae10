#pragma once

#include "cod/geometry.hpp"
#include "cod/matching.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace cod {

/// Decoder-input record. bbox is (cx, cy, w, h) normalized to [0,1] by the
/// image size; lidar-proposal queries are pre-bound to a ground truth and
/// skip bipartite matching at loss time.
struct Query {
  enum class Provenance { lidar_proposal, heatmap };

  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
  std::vector<double> content;
  Provenance provenance = Provenance::heatmap;
  int det_index = -1;  // lidar_proposal only
  int gt_index = -1;   // lidar_proposal only
  int slot = -1;       // heatmap only
  bool requires_matching = true;
};

struct EmbeddingTable {
  int dim = 16;
  std::map<int, std::vector<double>> rows;
};

/// Fixed random per-class content vectors (no training happens here).
EmbeddingTable make_embedding_table(const std::vector<int>& class_ids, int dim,
                                    std::uint64_t seed);

/// Throws SchemaError for class ids missing from the table.
const std::vector<double>& embed_category(int class_id,
                                          const EmbeddingTable& table);

struct QueryInitConfig {
  CostMetric metric = CostMetric::center_distance_3d;
  std::map<int, double> gates = {{0, 2.0}, {1, 1.0}, {2, 1.0}};
  double default_gate = 2.0;
};

struct QueryInitResult {
  std::vector<Query> queries;
  int dropped_unprojectable = 0;
};

/// Cost matrix -> Hungarian -> gate -> project surviving detections ->
/// normalized bbox + category embedding. Detections whose projection fails
/// are dropped and counted.
QueryInitResult init_queries_from_lidar(const std::vector<Box3D>& dets,
                                        const std::vector<Box3D>& gts,
                                        const CalibrationChain& calib,
                                        int image_width, int image_height,
                                        const EmbeddingTable& table,
                                        const QueryInitConfig& config = {});

/// Inference-time variant: no ground truth available, every projectable
/// detection becomes a query (gt_index stays -1).
QueryInitResult init_queries_no_gt(const std::vector<Box3D>& dets,
                                   const CalibrationChain& calib,
                                   int image_width, int image_height,
                                   const EmbeddingTable& table);

/// n placeholder heatmap queries, deterministic per seed.
std::vector<Query> heatmap_queries(int n, std::uint64_t seed, int dim);

/// Concatenation, lidar proposals first.
std::vector<Query> assemble_query_set(const std::vector<Query>& lidar_queries,
                                      const std::vector<Query>& heatmap);

struct LossSplit {
  std::vector<Query> bypass_set;    // requires_matching == false
  std::vector<Query> matching_set;  // the rest
};

LossSplit split_for_loss(const std::vector<Query>& queries);

}  // namespace cod
