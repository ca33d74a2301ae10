#pragma once

#include "cod/datasets.hpp"
#include "cod/exchange.hpp"
#include "cod/geometry.hpp"
#include "cod/metrics.hpp"
#include "cod/queries.hpp"
#include "cod/simdet.hpp"

#include <string>
#include <vector>

namespace cod {

enum class Mode { consistency, baseline_project, baseline_match };

const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct SyntheticSpec {
  int num_frames = 10;
  int min_objects = 3;
  int max_objects = 8;
  double min_depth = 8.0;
  double max_depth = 45.0;
};

struct DatasetConfig {
  enum class Type { synthetic, kitti } type = Type::synthetic;
  SyntheticSpec synthetic;
  std::string label_dir;
  std::string calib_dir;
  int image_width = 1242;
  int image_height = 375;
};

struct RunConfig {
  int config_version = 1;
  std::uint64_t seed = 0;
  Mode mode = Mode::consistency;
  std::vector<Mode> sweep_modes = {Mode::consistency, Mode::baseline_project,
                                   Mode::baseline_match};
  DatasetConfig dataset;
  DetectorSpec detector3d;
  DetectorSpec detector2d;
  std::vector<NoiseSpec> noise = {NoiseSpec{}};
  QueryInitConfig matching;
  double match_min_iou2d = 0.3;  // baseline_match pairing gate
  EvalConfig eval;
  int embedding_dim = 16;
  std::uint64_t embedding_seed = 1;
  int heatmap_count = 300;
  bool use_gt_matching = true;
  int jobs = 1;
};

/// Overrides are `key=value` pairs with dotted config paths, e.g.
/// `detector3d.center_sigma=0.1` or `dataset.num_frames=200`; they are
/// applied to the document before validation.
RunConfig parse_run_config(const std::string& json_text,
                           const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});

std::vector<Frame> make_synthetic_frames(const SyntheticSpec& spec,
                                         std::uint64_t master_seed);
std::vector<Frame> load_frames(const RunConfig& config);

struct ModeResult {
  std::vector<PairedFrame> paired;
  std::vector<std::vector<Box3D>> det3d;  // full simulated 3D detections
  int dropped_unprojectable = 0;
};

ModeResult run_mode(const std::vector<Frame>& frames, const RunConfig& config,
                    Mode mode, const NoiseSpec& noise);

std::vector<PairedFrame> run_consistency(const std::vector<Frame>& frames,
                                         const RunConfig& config);
std::vector<PairedFrame> run_baseline_project(const std::vector<Frame>& frames,
                                              const RunConfig& config);
std::vector<PairedFrame> run_baseline_match(const std::vector<Frame>& frames,
                                            const RunConfig& config);

struct Evaluation {
  EvalReport report;
  double mean_iou2d_vs_gt = 0.0;  // over triples with a known source object
  int iou2d_samples = 0;
};

Evaluation evaluate_mode(const std::vector<Frame>& frames,
                         const ModeResult& result, const RunConfig& config);

struct SweepRow {
  Mode mode;
  NoiseSpec noise;
  Evaluation evaluation;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::string to_csv() const;
};

/// Full evaluation for every sweep_modes x noise combination, rows sorted by
/// (mode, rot_variance, trans_variance). Deterministic per master seed.
SweepTable noise_sweep(const std::vector<Frame>& frames,
                       const RunConfig& config);

/// Static line chart of mean 2D IoU and CP against rotational noise.
std::string sweep_svg(const SweepTable& table);

/// Exports simulated detections per frame (consistency pairing) in the
/// detection-exchange format.
DetectionSet export_detections(const std::vector<Frame>& frames,
                               const RunConfig& config,
                               const NoiseSpec& noise);

}  // namespace cod
