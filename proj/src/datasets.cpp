#include "cod/datasets.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cod {

namespace {

const std::vector<std::string> kClassNames = {
    "Car", "Pedestrian", "Cyclist", "Van", "Truck", "Person_sitting", "Tram",
    "Misc"};

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line, int field) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + " field " +
                         std::to_string(field) + ": not a number: '" + tok + "'",
                     line, field);
  }
  if (pos != tok.size()) {
    throw ParseError("line " + std::to_string(line) + " field " +
                         std::to_string(field) + ": trailing junk in '" + tok +
                         "'",
                     line, field);
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::string& class_name(int class_id) {
  static const std::string dont_care = "DontCare";
  if (class_id == kDontCare) return dont_care;
  if (class_id < 0 || class_id >= static_cast<int>(kClassNames.size()))
    throw SchemaError("unknown class id " + std::to_string(class_id));
  return kClassNames[class_id];
}

std::optional<int> class_id_from_name(const std::string& name) {
  if (name == "DontCare") return kDontCare;
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

const char* difficulty_name(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::moderate: return "moderate";
    case Difficulty::hard: return "hard";
    default: return "ignored";
  }
}

std::vector<GroundTruthObject> parse_kitti_label(const std::string& text) {
  std::vector<GroundTruthObject> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() < 15 || fields.size() > 16) {
      const int missing = fields.size() < 15 ? static_cast<int>(fields.size()) + 1 : 17;
      throw ParseError("line " + std::to_string(line_no) + ": expected 15 or 16 fields, got " +
                           std::to_string(fields.size()),
                       line_no, missing);
    }

    GroundTruthObject gt;
    const auto cid = class_id_from_name(fields[0]);
    if (!cid) {
      throw ParseError("line " + std::to_string(line_no) +
                           " field 1: unknown class '" + fields[0] + "'",
                       line_no, 1);
    }
    gt.class_id = *cid;
    const bool dont_care = gt.class_id == kDontCare;

    const double trunc = parse_double(fields[1], line_no, 2);
    const double occ = parse_double(fields[2], line_no, 3);
    gt.alpha = parse_double(fields[3], line_no, 4);
    gt.box2d.left = parse_double(fields[4], line_no, 5);
    gt.box2d.top = parse_double(fields[5], line_no, 6);
    gt.box2d.right = parse_double(fields[6], line_no, 7);
    gt.box2d.bottom = parse_double(fields[7], line_no, 8);
    const double h = parse_double(fields[8], line_no, 9);
    const double w = parse_double(fields[9], line_no, 10);
    const double l = parse_double(fields[10], line_no, 11);
    const double x = parse_double(fields[11], line_no, 12);
    const double y = parse_double(fields[12], line_no, 13);
    const double z = parse_double(fields[13], line_no, 14);
    const double ry = parse_double(fields[14], line_no, 15);
    if (fields.size() == 16) {
      gt.has_score = true;
      gt.score = parse_double(fields[15], line_no, 16);
    }

    if (dont_care) {
      // DontCare carries -1 placeholders in the 3D columns; keep a valid
      // default Box3D so downstream invariants hold.
      gt.truncation = 0.0;
      gt.occlusion = 0;
      gt.box3d = Box3D{};
      gt.box3d.frame = FrameTag::camera;
    } else {
      if (trunc < 0.0 || trunc > 1.0)
        throw ParseError("line " + std::to_string(line_no) +
                             " field 2: truncation out of [0,1]",
                         line_no, 2);
      const int occ_i = static_cast<int>(occ);
      if (occ_i < 0 || occ_i > 3)
        throw ParseError("line " + std::to_string(line_no) +
                             " field 3: occlusion out of {0..3}",
                         line_no, 3);
      if (h <= 0.0 || w <= 0.0 || l <= 0.0)
        throw ParseError("line " + std::to_string(line_no) +
                             " field 9: non-positive box dimensions",
                         line_no, 9);
      gt.truncation = trunc;
      gt.occlusion = occ_i;
      gt.box3d.frame = FrameTag::camera;
      gt.box3d.dims = {l, w, h};
      // label location is the bottom-face center; camera y points down
      gt.box3d.center = {x, y - 0.5 * h, z};
      gt.box3d.yaw = normalize_angle(ry);
      gt.box3d.class_id = gt.class_id;
    }
    if (!gt.box2d.valid())
      throw ParseError("line " + std::to_string(line_no) +
                           " field 5: degenerate 2D box",
                       line_no, 5);
    gt.box2d.class_id = gt.class_id;
    gt.obj_id = static_cast<std::int64_t>(out.size());
    gt.box3d.obj_id = gt.obj_id;
    gt.box2d.obj_id = gt.obj_id;
    out.push_back(gt);
  }
  return out;
}

std::string serialize_kitti_label(const std::vector<GroundTruthObject>& gts) {
  std::ostringstream out;
  for (const auto& gt : gts) {
    const bool dont_care = gt.class_id == kDontCare;
    out << class_name(gt.class_id) << ' ';
    if (dont_care) {
      out << "-1 -1 " << fmt(gt.alpha) << ' ';
    } else {
      out << fmt(gt.truncation) << ' ' << gt.occlusion << ' ' << fmt(gt.alpha)
          << ' ';
    }
    out << fmt(gt.box2d.left) << ' ' << fmt(gt.box2d.top) << ' '
        << fmt(gt.box2d.right) << ' ' << fmt(gt.box2d.bottom) << ' ';
    if (dont_care) {
      out << "-1 -1 -1 -1000 -1000 -1000 -10";
    } else {
      const double h = gt.box3d.dims.z();
      out << fmt(h) << ' ' << fmt(gt.box3d.dims.y()) << ' '
          << fmt(gt.box3d.dims.x()) << ' ' << fmt(gt.box3d.center.x()) << ' '
          << fmt(gt.box3d.center.y() + 0.5 * h) << ' '
          << fmt(gt.box3d.center.z()) << ' ' << fmt(gt.box3d.yaw);
    }
    if (gt.has_score) out << ' ' << fmt(gt.score);
    out << '\n';
  }
  return out.str();
}

CalibrationChain parse_kitti_calib(const std::string& text) {
  std::map<std::string, std::vector<double>> entries;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::vector<double> values;
    for (const auto& tok : split_ws(line.substr(colon + 1))) {
      values.push_back(
          parse_double(tok, line_no, static_cast<int>(values.size()) + 1));
    }
    entries[key] = values;
  }

  auto require = [&](const std::string& key, std::size_t count) {
    auto it = entries.find(key);
    if (it == entries.end()) throw SchemaError("missing calib key: " + key);
    if (it->second.size() != count)
      throw SchemaError("calib key " + key + " expects " +
                        std::to_string(count) + " values, got " +
                        std::to_string(it->second.size()));
    return it->second;
  };

  CalibrationChain calib;
  const auto p2 = require("P2", 12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      calib.intrinsic_projection(r, c) = p2[r * 4 + c];

  const auto r0 = require("R0_rect", 9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) calib.rectification(r, c) = r0[r * 3 + c];

  const auto tr = require("Tr_velo_to_cam", 12);
  calib.lidar_to_cam = Eigen::Matrix4d::Identity();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) calib.lidar_to_cam(r, c) = tr[r * 4 + c];

  const double err = calib.rotation_error();
  if (err > 1e-3) {
    std::fprintf(stderr,
                 "warning: Tr_velo_to_cam rotation off SO(3) by %.3g, "
                 "re-orthonormalizing\n",
                 err);
    calib.lidar_to_cam.topLeftCorner<3, 3>() =
        nearest_rotation(calib.lidar_to_cam.topLeftCorner<3, 3>());
  } else if (err > 1e-9) {
    calib.lidar_to_cam.topLeftCorner<3, 3>() =
        nearest_rotation(calib.lidar_to_cam.topLeftCorner<3, 3>());
  }
  return calib;
}

std::string serialize_kitti_calib(const CalibrationChain& calib) {
  std::ostringstream out;
  out << "P2:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      out << ' ' << fmt(calib.intrinsic_projection(r, c));
  out << "\nR0_rect:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << ' ' << fmt(calib.rectification(r, c));
  out << "\nTr_velo_to_cam:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) out << ' ' << fmt(calib.lidar_to_cam(r, c));
  out << '\n';
  return out.str();
}

Difficulty assign_difficulty(const GroundTruthObject& gt,
                             const DifficultyThresholds& thresholds) {
  if (gt.class_id == kDontCare) return Difficulty::ignored;
  const double height = gt.box2d.height();
  for (int level = 0; level < 3; ++level) {
    if (height >= thresholds.min_height[level] &&
        gt.occlusion <= thresholds.max_occlusion[level] &&
        gt.truncation <= thresholds.max_truncation[level]) {
      return static_cast<Difficulty>(level);
    }
  }
  return Difficulty::ignored;
}

std::vector<Frame> load_kitti_frames(const std::string& label_dir,
                                     const std::string& calib_dir,
                                     int image_width, int image_height) {
  namespace fs = std::filesystem;
  std::vector<Frame> frames;
  std::vector<fs::path> label_files;
  for (const auto& entry : fs::directory_iterator(label_dir)) {
    if (entry.path().extension() == ".txt") label_files.push_back(entry.path());
  }
  std::sort(label_files.begin(), label_files.end());

  for (const auto& label_path : label_files) {
    Frame frame;
    frame.frame_id = label_path.stem().string();
    frame.image_width = image_width;
    frame.image_height = image_height;
    frame.calib = parse_kitti_calib(
        read_file(fs::path(calib_dir) / label_path.filename()));
    frame.gts = parse_kitti_label(read_file(label_path));
    for (auto& gt : frame.gts) {
      if (gt.class_id == kDontCare) continue;
      gt.box3d = box3d_camera_to_lidar(gt.box3d, frame.calib);
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace cod
