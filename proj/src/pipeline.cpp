#include "cod/pipeline.hpp"

#include "cod/hash.hpp"
#include "cod/matching.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace cod {

namespace {

using nlohmann::json;

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : workers) t.join();
}

int resolve_class_key(const std::string& key) {
  if (const auto cid = class_id_from_name(key)) return *cid;
  try {
    return std::stoi(key);
  } catch (const std::exception&) {
    throw SchemaError("unknown class key in config: " + key);
  }
}

std::map<int, double> class_map_from_json(const json& j) {
  std::map<int, double> out;
  for (auto it = j.begin(); it != j.end(); ++it)
    out[resolve_class_key(it.key())] = it.value().get<double>();
  return out;
}

DetectorSpec detector_from_json(const json& j) {
  DetectorSpec spec;
  spec.center_sigma = j.value("center_sigma", spec.center_sigma);
  spec.dim_sigma = j.value("dim_sigma", spec.dim_sigma);
  spec.yaw_sigma = j.value("yaw_sigma", spec.yaw_sigma);
  spec.miss_rate = j.value("miss_rate", spec.miss_rate);
  spec.fp_rate = j.value("fp_rate", spec.fp_rate);
  spec.tp_score_mean = j.value("tp_score_mean", spec.tp_score_mean);
  spec.tp_score_sigma = j.value("tp_score_sigma", spec.tp_score_sigma);
  spec.fp_score_mean = j.value("fp_score_mean", spec.fp_score_mean);
  spec.fp_score_sigma = j.value("fp_score_sigma", spec.fp_score_sigma);
  spec.seed = j.value("seed", spec.seed);
  if (!spec.valid()) throw SchemaError("invalid detector spec");
  return spec;
}

NoiseSpec derive_noise(const NoiseSpec& base, std::uint64_t master_seed,
                       const std::string& frame_id) {
  NoiseSpec derived = base;
  derived.seed = fnv1a(fnv1a(master_seed, base.seed), frame_id);
  return derived;
}

DetectorSpec derive_detector(const DetectorSpec& base,
                             std::uint64_t master_seed, std::uint64_t salt) {
  DetectorSpec derived = base;
  derived.seed = fnv1a(fnv1a(master_seed, base.seed), salt);
  return derived;
}

EmbeddingTable default_embedding_table(const RunConfig& config) {
  std::vector<int> classes = {kCar,   kPedestrian,    kCyclist, kVan,
                              kTruck, kPersonSitting, kTram,    kMisc};
  return make_embedding_table(classes, config.embedding_dim,
                              config.embedding_seed);
}

// per-class filtered views for AP computation
template <class BoxT>
std::vector<std::vector<BoxT>> filter_class(
    const std::vector<std::vector<BoxT>>& frames, int class_id) {
  std::vector<std::vector<BoxT>> out(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& b : frames[f])
      if (b.class_id == class_id) out[f].push_back(b);
  }
  return out;
}

template <class BoxT>
std::vector<std::vector<std::pair<BoxT, Difficulty>>> filter_class_gt(
    const std::vector<std::vector<std::pair<BoxT, Difficulty>>>& frames,
    int class_id) {
  std::vector<std::vector<std::pair<BoxT, Difficulty>>> out(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& g : frames[f])
      if (g.first.class_id == class_id) out[f].push_back(g);
  }
  return out;
}

}  // namespace

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::consistency: return "consistency";
    case Mode::baseline_project: return "baseline_project";
    default: return "baseline_match";
  }
}

Mode mode_from_name(const std::string& name) {
  if (name == "consistency") return Mode::consistency;
  if (name == "baseline_project") return Mode::baseline_project;
  if (name == "baseline_match") return Mode::baseline_match;
  throw SchemaError("unknown mode: " + name);
}

RunConfig parse_run_config(const std::string& json_text,
                           const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }

  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw SchemaError("override must be key=value: " + kv);
    const std::string path = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json* node = &j;
    std::istringstream keys(path);
    std::string key;
    std::vector<std::string> parts;
    while (std::getline(keys, key, '.')) parts.push_back(key);
    if (parts.empty()) throw SchemaError("empty override key: " + kv);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    json parsed = json::parse(value, nullptr, false);
    (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
  }

  try {
    RunConfig config;
    config.config_version = j.value("config_version", 1);
    if (config.config_version != 1)
      throw SchemaError("unsupported config_version");
    if (!j.contains("seed")) throw SchemaError("config requires a seed");
    config.seed = j["seed"].get<std::uint64_t>();
    config.mode = mode_from_name(j.value("mode", "consistency"));
    if (j.contains("modes")) {
      config.sweep_modes.clear();
      for (const auto& m : j["modes"])
        config.sweep_modes.push_back(mode_from_name(m.get<std::string>()));
    }

    if (j.contains("dataset")) {
      const auto& jd = j["dataset"];
      const std::string type = jd.value("type", "synthetic");
      if (type == "synthetic") {
        config.dataset.type = DatasetConfig::Type::synthetic;
        config.dataset.synthetic.num_frames =
            jd.value("num_frames", config.dataset.synthetic.num_frames);
        config.dataset.synthetic.min_objects =
            jd.value("min_objects", config.dataset.synthetic.min_objects);
        config.dataset.synthetic.max_objects =
            jd.value("max_objects", config.dataset.synthetic.max_objects);
        config.dataset.synthetic.min_depth =
            jd.value("min_depth", config.dataset.synthetic.min_depth);
        config.dataset.synthetic.max_depth =
            jd.value("max_depth", config.dataset.synthetic.max_depth);
      } else if (type == "kitti") {
        config.dataset.type = DatasetConfig::Type::kitti;
        config.dataset.label_dir = jd.at("label_dir").get<std::string>();
        config.dataset.calib_dir = jd.at("calib_dir").get<std::string>();
        if (jd.contains("image_size")) {
          config.dataset.image_width = jd["image_size"].at(0).get<int>();
          config.dataset.image_height = jd["image_size"].at(1).get<int>();
        }
      } else {
        throw SchemaError("unknown dataset type: " + type);
      }
    }

    if (j.contains("detector3d"))
      config.detector3d = detector_from_json(j["detector3d"]);
    if (j.contains("detector2d"))
      config.detector2d = detector_from_json(j["detector2d"]);

    if (j.contains("noise")) {
      config.noise.clear();
      for (const auto& jn : j["noise"]) {
        NoiseSpec spec;
        spec.rot_variance = jn.value("rot_variance", 0.0);
        spec.trans_variance = jn.value("trans_variance", 0.0);
        spec.seed = jn.value("seed", std::uint64_t{0});
        if (!spec.valid()) throw SchemaError("noise variances must be >= 0");
        config.noise.push_back(spec);
      }
    }
    if (config.noise.empty()) config.noise.push_back(NoiseSpec{});

    if (j.contains("matching")) {
      const auto& jm = j["matching"];
      const std::string metric = jm.value("metric", "center_distance_3d");
      if (metric == "center_distance_3d")
        config.matching.metric = CostMetric::center_distance_3d;
      else if (metric == "neg_iou_3d")
        config.matching.metric = CostMetric::neg_iou_3d;
      else if (metric == "neg_iou_2d")
        config.matching.metric = CostMetric::neg_iou_2d;
      else
        throw SchemaError("unknown matching metric: " + metric);
      if (jm.contains("gates"))
        config.matching.gates = class_map_from_json(jm["gates"]);
      config.matching.default_gate =
          jm.value("default_gate", config.matching.default_gate);
      config.match_min_iou2d =
          jm.value("match_min_iou2d", config.match_min_iou2d);
    }

    if (j.contains("eval")) {
      const auto& je = j["eval"];
      if (je.contains("iou_thresholds")) {
        config.eval.iou_thresholds = class_map_from_json(je["iou_thresholds"]);
        config.eval.cp_iou3d_thresholds = config.eval.iou_thresholds;
      }
      if (je.contains("cp_iou3d_thresholds"))
        config.eval.cp_iou3d_thresholds =
            class_map_from_json(je["cp_iou3d_thresholds"]);
      config.eval.cp_iou2d_threshold =
          je.value("cp_iou2d", config.eval.cp_iou2d_threshold);
      config.eval.cp_filter_by_difficulty =
          je.value("cp_filter_by_difficulty", false);
    }

    if (j.contains("queries")) {
      const auto& jq = j["queries"];
      config.embedding_dim = jq.value("embedding_dim", config.embedding_dim);
      config.embedding_seed = jq.value("embedding_seed", config.embedding_seed);
      config.heatmap_count = jq.value("heatmap_count", config.heatmap_count);
      config.use_gt_matching =
          jq.value("use_gt_matching", config.use_gt_matching);
    }

    config.jobs = j.value("jobs", 1);
    if (config.jobs < 1) throw SchemaError("jobs must be >= 1");
    return config;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), overrides);
}

std::vector<Frame> make_synthetic_frames(const SyntheticSpec& spec,
                                         std::uint64_t master_seed) {
  // KITTI-like camera over a lidar whose axes are x-forward, y-left, z-up
  CalibrationChain calib;
  calib.intrinsic_projection << 721.5377, 0.0, 609.5593, 0.0,
                                0.0, 721.5377, 172.854, 0.0,
                                0.0, 0.0, 1.0, 0.0;
  calib.lidar_to_cam << 0.0, -1.0, 0.0, 0.0,
                        0.0, 0.0, -1.0, -0.1,
                        1.0, 0.0, 0.0, -0.2,
                        0.0, 0.0, 0.0, 1.0;

  struct ClassShape {
    int class_id;
    Eigen::Vector3d dims;
  };
  const std::vector<ClassShape> shapes = {
      {kCar, {4.0, 1.8, 1.5}},
      {kPedestrian, {0.8, 0.6, 1.75}},
      {kCyclist, {1.76, 0.6, 1.73}}};

  std::vector<Frame> frames;
  for (int f = 0; f < spec.num_frames; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%06d", f);
    Frame frame;
    frame.frame_id = name;
    frame.image_width = 1242;
    frame.image_height = 375;
    frame.calib = calib;

    std::mt19937_64 rng(fnv1a(master_seed, frame.frame_id));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int count =
        spec.min_objects +
        static_cast<int>(unit(rng) * (spec.max_objects - spec.min_objects + 1));

    std::vector<Eigen::Vector3d> centers;
    for (int k = 0; k < count; ++k) {
      const ClassShape& shape =
          shapes[static_cast<std::size_t>(unit(rng) * shapes.size()) %
                 shapes.size()];
      GroundTruthObject gt;
      gt.class_id = shape.class_id;
      gt.box3d.frame = FrameTag::lidar;
      gt.box3d.class_id = shape.class_id;
      gt.box3d.dims = shape.dims * (0.9 + 0.2 * unit(rng));

      // rejection-sample a center at least 3 m from the other objects
      Eigen::Vector3d center;
      for (int attempt = 0; attempt < 32; ++attempt) {
        const double depth =
            spec.min_depth + unit(rng) * (spec.max_depth - spec.min_depth);
        const double lateral = (unit(rng) - 0.5) * 0.7 * depth;
        center = {depth, lateral, -1.73 + 0.5 * gt.box3d.dims.z()};
        bool clear = true;
        for (const auto& other : centers) {
          if ((other - center).norm() < 3.0) {
            clear = false;
            break;
          }
        }
        if (clear) break;
      }
      centers.push_back(center);
      gt.box3d.center = center;
      gt.box3d.yaw = normalize_angle(-kPi + unit(rng) * 2.0 * kPi);
      gt.obj_id = static_cast<std::int64_t>(frame.gts.size());
      gt.box3d.obj_id = gt.obj_id;

      const auto projected = project_box3d(frame.calib, gt.box3d,
                                           frame.image_width,
                                           frame.image_height);
      if (!projected) continue;  // out of view, drop
      gt.box2d = *projected;
      gt.box2d.score = 1.0;
      gt.box2d.obj_id = gt.obj_id;
      frame.gts.push_back(gt);
    }
    // reindex after drops so obj_id equals the list position
    for (std::size_t i = 0; i < frame.gts.size(); ++i) {
      frame.gts[i].obj_id = static_cast<std::int64_t>(i);
      frame.gts[i].box3d.obj_id = frame.gts[i].obj_id;
      frame.gts[i].box2d.obj_id = frame.gts[i].obj_id;
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<Frame> load_frames(const RunConfig& config) {
  if (config.dataset.type == DatasetConfig::Type::synthetic)
    return make_synthetic_frames(config.dataset.synthetic, config.seed);
  return load_kitti_frames(config.dataset.label_dir, config.dataset.calib_dir,
                           config.dataset.image_width,
                           config.dataset.image_height);
}

ModeResult run_mode(const std::vector<Frame>& frames, const RunConfig& config,
                    Mode mode, const NoiseSpec& noise) {
  const DetectorSpec spec3 = derive_detector(config.detector3d, config.seed, 3);
  const DetectorSpec spec2 = derive_detector(config.detector2d, config.seed, 2);
  const EmbeddingTable table = default_embedding_table(config);

  ModeResult result;
  result.paired.resize(frames.size());
  result.det3d.resize(frames.size());
  std::atomic<int> dropped{0};

  parallel_for(static_cast<int>(frames.size()), config.jobs, [&](int fi) {
    const Frame& frame = frames[fi];
    if (!frame.has_calib)
      throw SchemaError("frame " + frame.frame_id + " has no calibration");
    const CalibrationChain calib_noisy = perturb_calibration(
        frame.calib, derive_noise(noise, config.seed, frame.frame_id));

    PairedFrame paired;
    paired.frame_id = frame.frame_id;
    std::vector<Box3D> det3 = simulate_detections_3d(frame, spec3);

    if (mode == Mode::consistency) {
      const std::vector<Box2D> det2 = simulate_detections_2d(frame, spec2);
      std::unordered_map<std::int64_t, const Box2D*> det2_by_obj;
      for (const auto& b : det2) {
        if (b.obj_id >= 0) det2_by_obj.emplace(b.obj_id, &b);
      }

      QueryInitResult queries;
      if (config.use_gt_matching) {
        std::vector<Box3D> gts3;
        for (const auto& gt : frame.gts) {
          if (gt.class_id != kDontCare) gts3.push_back(gt.box3d);
        }
        queries = init_queries_from_lidar(det3, gts3, calib_noisy,
                                          frame.image_width,
                                          frame.image_height, table,
                                          config.matching);
      } else {
        queries = init_queries_no_gt(det3, calib_noisy, frame.image_width,
                                     frame.image_height, table);
      }
      dropped += queries.dropped_unprojectable;

      // the 2D box comes from the image branch keyed by source object; the
      // pairing never consults the (noisy) calibration
      for (const auto& q : queries.queries) {
        const Box3D& det = det3[q.det_index];
        if (det.obj_id < 0) continue;
        const auto it = det2_by_obj.find(det.obj_id);
        if (it == det2_by_obj.end()) continue;
        paired.triples.push_back({det, *it->second, q.det_index});
      }
    } else if (mode == Mode::baseline_project) {
      for (std::size_t i = 0; i < det3.size(); ++i) {
        const auto projected = project_box3d(calib_noisy, det3[i],
                                             frame.image_width,
                                             frame.image_height);
        if (!projected) {
          ++dropped;
          continue;
        }
        paired.triples.push_back(
            {det3[i], *projected, static_cast<std::int64_t>(i)});
      }
    } else {  // baseline_match
      const std::vector<Box2D> det2 = simulate_detections_2d(frame, spec2);
      std::vector<Box2D> projected;
      std::vector<int> det_index;
      for (std::size_t i = 0; i < det3.size(); ++i) {
        const auto p = project_box3d(calib_noisy, det3[i], frame.image_width,
                                     frame.image_height);
        if (!p) {
          ++dropped;
          continue;
        }
        projected.push_back(*p);
        det_index.push_back(static_cast<int>(i));
      }
      const Assignment matched =
          gate_assignment(hungarian(build_cost_matrix_2d(projected, det2)),
                          1.0 - config.match_min_iou2d);
      for (const auto& pair : matched.pairs) {
        const int i3 = det_index[pair.det_index];
        paired.triples.push_back(
            {det3[i3], det2[pair.gt_index], static_cast<std::int64_t>(i3)});
      }
    }

    result.paired[fi] = std::move(paired);
    result.det3d[fi] = std::move(det3);
  });

  result.dropped_unprojectable = dropped.load();
  return result;
}

std::vector<PairedFrame> run_consistency(const std::vector<Frame>& frames,
                                         const RunConfig& config) {
  return run_mode(frames, config, Mode::consistency, config.noise.front())
      .paired;
}

std::vector<PairedFrame> run_baseline_project(const std::vector<Frame>& frames,
                                              const RunConfig& config) {
  return run_mode(frames, config, Mode::baseline_project, config.noise.front())
      .paired;
}

std::vector<PairedFrame> run_baseline_match(const std::vector<Frame>& frames,
                                            const RunConfig& config) {
  return run_mode(frames, config, Mode::baseline_match, config.noise.front())
      .paired;
}

Evaluation evaluate_mode(const std::vector<Frame>& frames,
                         const ModeResult& result, const RunConfig& config) {
  Evaluation eval;
  eval.report.config = config.eval;

  std::vector<std::vector<std::pair<Box3D, Difficulty>>> gt3(frames.size());
  std::vector<std::vector<std::pair<Box2D, Difficulty>>> gt2(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& gt : frames[f].gts) {
      if (gt.class_id == kDontCare) continue;
      const Difficulty d = assign_difficulty(gt);
      gt3[f].emplace_back(gt.box3d, d);
      gt2[f].emplace_back(gt.box2d, d);
    }
  }

  std::vector<std::vector<Box2D>> det2(result.paired.size());
  for (std::size_t f = 0; f < result.paired.size(); ++f) {
    for (const auto& triple : result.paired[f].triples)
      det2[f].push_back(triple.box2);
  }

  const auto iou3 = [](const Box3D& a, const Box3D& b) { return iou_3d(a, b); };
  const auto iou2 = [](const Box2D& a, const Box2D& b) { return iou_2d(a, b); };

  for (int class_id : {kCar, kPedestrian, kCyclist}) {
    const double threshold = config.eval.iou_threshold(class_id);
    const auto d3 = filter_class(result.det3d, class_id);
    const auto g3 = filter_class_gt(gt3, class_id);
    const auto d2 = filter_class(det2, class_id);
    const auto g2 = filter_class_gt(gt2, class_id);
    for (Difficulty diff :
         {Difficulty::easy, Difficulty::moderate, Difficulty::hard}) {
      const ApResult ap3 = ap_r11(d3, g3, iou3, threshold, diff,
                                  config.eval.recall_points);
      eval.report.ap_rows.push_back(
          {class_id, diff, Modality::box3d, ap3.ap, ap3.empty});
      const ApResult ap2 = ap_r11(d2, g2, iou2, threshold, diff,
                                  config.eval.recall_points);
      eval.report.ap_rows.push_back(
          {class_id, diff, Modality::bbox, ap2.ap, ap2.empty});
    }
  }

  eval.report.cp = consistency_precision(result.paired, frames, config.eval);

  double iou_sum = 0.0;
  int iou_count = 0;
  for (std::size_t f = 0; f < result.paired.size(); ++f) {
    const auto& gts = frames[f].gts;
    for (const auto& triple : result.paired[f].triples) {
      const std::int64_t obj = triple.box3.obj_id;
      if (obj < 0 || obj >= static_cast<std::int64_t>(gts.size())) continue;
      if (gts[obj].class_id == kDontCare) continue;
      iou_sum += iou_2d(triple.box2, gts[obj].box2d);
      ++iou_count;
    }
  }
  eval.mean_iou2d_vs_gt = iou_count > 0 ? iou_sum / iou_count : 0.0;
  eval.iou2d_samples = iou_count;
  return eval;
}

std::string SweepTable::to_csv() const {
  std::ostringstream out;
  out << "# cod noise sweep\n";
  out << "mode,rot_variance,trans_variance,metric,class,difficulty,modality,"
         "value\n";
  for (const auto& row : rows) {
    const std::string prefix = std::string(mode_name(row.mode)) + ',' +
                               fixed6(row.noise.rot_variance) + ',' +
                               fixed6(row.noise.trans_variance) + ',';
    for (const auto& ap : row.evaluation.report.ap_rows) {
      out << prefix << "AP," << class_name(ap.class_id) << ','
          << difficulty_name(ap.difficulty) << ','
          << (ap.modality == Modality::box3d ? "3D" : "Bbox") << ','
          << fixed6(ap.ap) << "\n";
    }
    for (const auto& [class_id, value] : row.evaluation.report.cp) {
      out << prefix << "CP," << class_name(class_id) << ",,," << fixed6(value)
          << "\n";
    }
    out << prefix << "mean_iou2d,all,,," << fixed6(row.evaluation.mean_iou2d_vs_gt)
        << "\n";
  }
  return out.str();
}

SweepTable noise_sweep(const std::vector<Frame>& frames,
                       const RunConfig& config) {
  if (config.noise.empty()) throw SchemaError("sweep requires a noise point");

  std::vector<Mode> modes = config.sweep_modes;
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());

  std::vector<NoiseSpec> points = config.noise;
  std::sort(points.begin(), points.end(),
            [](const NoiseSpec& a, const NoiseSpec& b) {
              if (a.rot_variance != b.rot_variance)
                return a.rot_variance < b.rot_variance;
              return a.trans_variance < b.trans_variance;
            });

  SweepTable table;
  for (Mode mode : modes) {
    for (const auto& noise : points) {
      SweepRow row;
      row.mode = mode;
      row.noise = noise;
      const ModeResult result = run_mode(frames, config, mode, noise);
      row.evaluation = evaluate_mode(frames, result, config);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string sweep_svg(const SweepTable& table) {
  // one polyline per (mode, series) over the sweep points in row order
  struct Series {
    std::string label;
    std::vector<double> values;  // in [0, 1]
  };
  std::map<std::string, Series> series;
  std::size_t max_points = 0;
  for (const auto& row : table.rows) {
    const std::string mode = mode_name(row.mode);
    auto& iou = series[mode + " mean IoU2D"];
    iou.label = mode + " mean IoU2D";
    iou.values.push_back(row.evaluation.mean_iou2d_vs_gt);
    double cp_sum = 0.0;
    for (const auto& [cls, v] : row.evaluation.report.cp) cp_sum += v;
    auto& cp = series[mode + " mean CP"];
    cp.label = mode + " mean CP";
    cp.values.push_back(row.evaluation.report.cp.empty()
                            ? 0.0
                            : cp_sum / (100.0 * row.evaluation.report.cp.size()));
    max_points = std::max(max_points, iou.values.size());
  }

  const double width = 720.0, height = 420.0, margin = 60.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\" font-size=\"12\">sweep point</text>\n";
  out << "<text x=\"18\" y=\"" << height / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 18 " << height / 2
      << ")\" text-anchor=\"middle\">CP / IoU (fraction)</text>\n";

  const std::vector<std::string> colors = {"#d62728", "#1f77b4", "#2ca02c",
                                           "#ff7f0e", "#9467bd", "#8c564b"};
  int idx = 0;
  for (const auto& [key, s] : series) {
    (void)key;
    const std::string& color = colors[idx % colors.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const double x =
          margin + (max_points > 1
                        ? (width - 2 * margin) * i / (max_points - 1)
                        : 0.5 * (width - 2 * margin));
      const double y = height - margin -
                       (height - 2 * margin) * std::clamp(s.values[i], 0.0, 1.0);
      out << x << ',' << y << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - margin + 4 << "\" y=\""
        << margin + 16 * idx << "\" font-size=\"10\" fill=\"" << color << "\">"
        << s.label << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

DetectionSet export_detections(const std::vector<Frame>& frames,
                               const RunConfig& config,
                               const NoiseSpec& noise) {
  const ModeResult result =
      run_mode(frames, config, Mode::consistency, noise);
  const DetectorSpec spec2 = derive_detector(config.detector2d, config.seed, 2);

  DetectionSet set;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    DetectionFrame frame;
    frame.frame_id = frames[f].frame_id;
    frame.image_width = frames[f].image_width;
    frame.image_height = frames[f].image_height;
    frame.has_calib = true;
    frame.calib = frames[f].calib;
    frame.det3d = result.det3d[f];
    frame.det2d = simulate_detections_2d(frames[f], spec2);

    std::unordered_map<std::int64_t, int> det2_index;
    for (std::size_t i = 0; i < frame.det2d.size(); ++i) {
      if (frame.det2d[i].obj_id >= 0)
        det2_index.emplace(frame.det2d[i].obj_id, static_cast<int>(i));
    }
    for (const auto& triple : result.paired[f].triples) {
      const auto it = det2_index.find(triple.box3.obj_id);
      if (it == det2_index.end()) continue;
      frame.pairs.emplace_back(static_cast<int>(triple.shared_id), it->second);
    }
    set.frames.push_back(std::move(frame));
  }
  return set;
}

}  // namespace cod
