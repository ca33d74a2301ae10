#pragma once

#include "cod/datasets.hpp"
#include "cod/geometry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cod {

inline constexpr int kExchangeSchemaVersion = 1;

/// One frame of a detection-exchange document: independent 3D and 2D
/// detection lists plus explicit (idx3d, idx2d) pairings.
struct DetectionFrame {
  std::string frame_id;
  int image_width = 0;
  int image_height = 0;
  bool has_calib = false;
  CalibrationChain calib;
  std::vector<Box3D> det3d;
  std::vector<Box2D> det2d;
  std::vector<std::pair<int, int>> pairs;
};

struct DetectionSet {
  int schema_version = kExchangeSchemaVersion;
  std::vector<DetectionFrame> frames;
};

DetectionSet parse_detections(const std::string& json_text);
DetectionSet load_detections(const std::string& path);

/// `keep_obj_ids = false` strips source object ids so evaluation cannot read
/// ground-truth identity out of the file.
std::string serialize_detections(const DetectionSet& set,
                                 bool keep_obj_ids = false);
void save_detections(const DetectionSet& set, const std::string& path,
                     bool keep_obj_ids = false);

}  // namespace cod
