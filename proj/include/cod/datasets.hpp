#pragma once

#include "cod/geometry.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cod {

// class ids follow the KITTI vocabulary; DontCare is the sentinel
inline constexpr int kCar = 0;
inline constexpr int kPedestrian = 1;
inline constexpr int kCyclist = 2;
inline constexpr int kVan = 3;
inline constexpr int kTruck = 4;
inline constexpr int kPersonSitting = 5;
inline constexpr int kTram = 6;
inline constexpr int kMisc = 7;
inline constexpr int kDontCare = -1;

const std::string& class_name(int class_id);
std::optional<int> class_id_from_name(const std::string& name);

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line, int field)
      : std::runtime_error(what), line(line), field(field) {}
  int line;
  int field;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Difficulty { easy = 0, moderate = 1, hard = 2, ignored = 3 };

const char* difficulty_name(Difficulty d);

struct GroundTruthObject {
  int class_id = kCar;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;  // observation angle, kept for round-trips
  Box2D box2d;
  Box3D box3d;  // camera frame as parsed; loaders may convert to lidar
  std::int64_t obj_id = 0;
  bool has_score = false;
  double score = 0.0;
};

struct Frame {
  std::string frame_id;
  int image_width = 1242;
  int image_height = 375;
  bool has_calib = true;
  CalibrationChain calib;
  std::vector<GroundTruthObject> gts;
};

/// KITTI object label lines (15 or 16 whitespace-separated fields).
/// DontCare lines are retained with class_id = kDontCare. The label's
/// (h, w, l) + bottom-center location is converted to Box3D's
/// (l, w, h) + centroid convention, camera frame.
std::vector<GroundTruthObject> parse_kitti_label(const std::string& text);
std::string serialize_kitti_label(const std::vector<GroundTruthObject>& gts);

/// KITTI calib file: `KEY: v1 v2 ...` lines. P2, R0_rect and Tr_velo_to_cam
/// are consumed; a rotation off orthonormal by more than 1e-3 is warned
/// about and projected back onto SO(3).
CalibrationChain parse_kitti_calib(const std::string& text);
std::string serialize_kitti_calib(const CalibrationChain& calib);

struct DifficultyThresholds {
  double min_height[3] = {40.0, 25.0, 25.0};
  int max_occlusion[3] = {0, 1, 2};
  double max_truncation[3] = {0.15, 0.30, 0.50};
};

Difficulty assign_difficulty(const GroundTruthObject& gt,
                             const DifficultyThresholds& thresholds = {});

/// Reads <label_dir>/<id>.txt + <calib_dir>/<id>.txt pairs into Frames,
/// converting GT 3D boxes to the lidar frame. Frames are keyed by file stem
/// and returned sorted by frame_id.
std::vector<Frame> load_kitti_frames(const std::string& label_dir,
                                     const std::string& calib_dir,
                                     int image_width, int image_height);

}  // namespace cod
