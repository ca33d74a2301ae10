#include "cod/exchange.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cod {

namespace {

using nlohmann::json;

json calib_to_json(const CalibrationChain& calib) {
  json j;
  auto& p2 = j["intrinsic_projection"] = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) p2.push_back(calib.intrinsic_projection(r, c));
  auto& r0 = j["rectification"] = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) r0.push_back(calib.rectification(r, c));
  auto& tr = j["lidar_to_cam"] = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) tr.push_back(calib.lidar_to_cam(r, c));
  return j;
}

CalibrationChain calib_from_json(const json& j) {
  CalibrationChain calib;
  const auto& p2 = j.at("intrinsic_projection");
  if (p2.size() != 12) throw SchemaError("intrinsic_projection needs 12 values");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      calib.intrinsic_projection(r, c) = p2[r * 4 + c].get<double>();
  const auto& r0 = j.at("rectification");
  if (r0.size() != 9) throw SchemaError("rectification needs 9 values");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      calib.rectification(r, c) = r0[r * 3 + c].get<double>();
  const auto& tr = j.at("lidar_to_cam");
  if (tr.size() != 16) throw SchemaError("lidar_to_cam needs 16 values");
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      calib.lidar_to_cam(r, c) = tr[r * 4 + c].get<double>();
  return calib;
}

json box3d_to_json(const Box3D& b, bool keep_obj_ids) {
  json j;
  j["center"] = {b.center.x(), b.center.y(), b.center.z()};
  j["dims"] = {b.dims.x(), b.dims.y(), b.dims.z()};
  j["yaw"] = b.yaw;
  j["class_id"] = b.class_id;
  j["score"] = b.score;
  j["frame"] = b.frame == FrameTag::lidar ? "lidar" : "camera";
  if (keep_obj_ids) j["obj_id"] = b.obj_id;
  return j;
}

Box3D box3d_from_json(const json& j) {
  Box3D b;
  const auto& c = j.at("center");
  b.center = {c.at(0).get<double>(), c.at(1).get<double>(),
              c.at(2).get<double>()};
  const auto& d = j.at("dims");
  b.dims = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
  b.yaw = j.at("yaw").get<double>();
  b.class_id = j.at("class_id").get<int>();
  b.score = j.at("score").get<double>();
  if (j.contains("frame"))
    b.frame = j["frame"] == "camera" ? FrameTag::camera : FrameTag::lidar;
  if (j.contains("obj_id")) b.obj_id = j["obj_id"].get<std::int64_t>();
  return b;
}

json box2d_to_json(const Box2D& b, bool keep_obj_ids) {
  json j;
  j["box"] = {b.left, b.top, b.right, b.bottom};
  j["class_id"] = b.class_id;
  j["score"] = b.score;
  if (keep_obj_ids) j["obj_id"] = b.obj_id;
  return j;
}

Box2D box2d_from_json(const json& j) {
  Box2D b;
  const auto& v = j.at("box");
  b.left = v.at(0).get<double>();
  b.top = v.at(1).get<double>();
  b.right = v.at(2).get<double>();
  b.bottom = v.at(3).get<double>();
  b.class_id = j.at("class_id").get<int>();
  b.score = j.at("score").get<double>();
  if (j.contains("obj_id")) b.obj_id = j["obj_id"].get<std::int64_t>();
  return b;
}

}  // namespace

DetectionSet parse_detections(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("detection file is not valid JSON: ") +
                      e.what());
  }
  try {
    DetectionSet set;
    set.schema_version = j.at("schema_version").get<int>();
    if (set.schema_version != kExchangeSchemaVersion)
      throw SchemaError("unsupported schema_version " +
                        std::to_string(set.schema_version));
    for (const auto& jf : j.at("frames")) {
      DetectionFrame frame;
      frame.frame_id = jf.at("frame_id").get<std::string>();
      frame.image_width = jf.at("image_size").at(0).get<int>();
      frame.image_height = jf.at("image_size").at(1).get<int>();
      if (jf.contains("calib")) {
        frame.has_calib = true;
        frame.calib = calib_from_json(jf["calib"]);
      }
      for (const auto& jb : jf.at("det3d"))
        frame.det3d.push_back(box3d_from_json(jb));
      for (const auto& jb : jf.at("det2d"))
        frame.det2d.push_back(box2d_from_json(jb));
      for (const auto& jp : jf.at("pairs")) {
        const int i3 = jp.at(0).get<int>();
        const int i2 = jp.at(1).get<int>();
        if (i3 < 0 || i3 >= static_cast<int>(frame.det3d.size()) || i2 < 0 ||
            i2 >= static_cast<int>(frame.det2d.size())) {
          throw SchemaError("frame " + frame.frame_id +
                            ": pairing references missing detection (" +
                            std::to_string(i3) + ", " + std::to_string(i2) +
                            ")");
        }
        frame.pairs.emplace_back(i3, i2);
      }
      set.frames.push_back(std::move(frame));
    }
    return set;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed detection document: ") + e.what());
  }
}

DetectionSet load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open detection file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_detections(ss.str());
}

std::string serialize_detections(const DetectionSet& set, bool keep_obj_ids) {
  json j;
  j["schema_version"] = set.schema_version;
  auto& frames = j["frames"] = json::array();
  for (const auto& frame : set.frames) {
    json jf;
    jf["frame_id"] = frame.frame_id;
    jf["image_size"] = {frame.image_width, frame.image_height};
    if (frame.has_calib) jf["calib"] = calib_to_json(frame.calib);
    auto& d3 = jf["det3d"] = json::array();
    for (const auto& b : frame.det3d) d3.push_back(box3d_to_json(b, keep_obj_ids));
    auto& d2 = jf["det2d"] = json::array();
    for (const auto& b : frame.det2d) d2.push_back(box2d_to_json(b, keep_obj_ids));
    auto& pairs = jf["pairs"] = json::array();
    for (const auto& [i3, i2] : frame.pairs) pairs.push_back({i3, i2});
    frames.push_back(std::move(jf));
  }
  return j.dump(2) + "\n";
}

void save_detections(const DetectionSet& set, const std::string& path,
                     bool keep_obj_ids) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write detection file: " + path);
  out << serialize_detections(set, keep_obj_ids);
}

}  // namespace cod
