#include "cod/datasets.hpp"

#include "cod/exchange.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace cod;

namespace {

const char* kCarLine =
    "Car 0.00 0 -1.58 587 156 615 225 1.48 1.60 3.69 1.84 1.47 8.41 -1.56";

std::string sample_calib() {
  std::ostringstream out;
  out << "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n";
  out << "P2: 721.5377 0 609.5593 44.85728 0 721.5377 172.854 0.2163791 "
         "0 0 1 0.002745884\n";
  out << "R0_rect: 0.9999239 0.00983776 -0.007445048 -0.009869795 0.9999421 "
         "-0.004278459 0.007402527 0.004351614 0.9999631\n";
  out << "Tr_velo_to_cam: 0.007533745 -0.9999714 -0.000616602 -0.004069766 "
         "0.01480249 0.0007280733 -0.9998902 -0.07631618 0.9998621 "
         "0.00752379 0.01480755 -0.2717806\n";
  return out.str();
}

}  // namespace

TEST_CASE("parse_kitti_label") {
  SUBCASE("empty text yields an empty list") {
    CHECK(parse_kitti_label("").empty());
    CHECK(parse_kitti_label("\n\n").empty());
  }
  SUBCASE("hand-written Car line") {
    const auto gts = parse_kitti_label(kCarLine);
    REQUIRE(gts.size() == 1);
    const auto& gt = gts[0];
    CHECK(gt.class_id == kCar);
    CHECK(gt.truncation == doctest::Approx(0.0));
    CHECK(gt.occlusion == 0);
    CHECK(gt.alpha == doctest::Approx(-1.58));
    CHECK(gt.box2d.left == doctest::Approx(587.0));
    CHECK(gt.box2d.top == doctest::Approx(156.0));
    CHECK(gt.box2d.right == doctest::Approx(615.0));
    CHECK(gt.box2d.bottom == doctest::Approx(225.0));
    // label order is h w l; Box3D stores (l, w, h)
    CHECK(gt.box3d.dims.x() == doctest::Approx(3.69));
    CHECK(gt.box3d.dims.y() == doctest::Approx(1.60));
    CHECK(gt.box3d.dims.z() == doctest::Approx(1.48));
    // label location is the bottom face center; Box3D keeps the centroid
    CHECK(gt.box3d.center.x() == doctest::Approx(1.84));
    CHECK(gt.box3d.center.y() == doctest::Approx(1.47 - 1.48 / 2));
    CHECK(gt.box3d.center.z() == doctest::Approx(8.41));
    CHECK(gt.box3d.yaw == doctest::Approx(-1.56));
    CHECK(gt.box3d.frame == FrameTag::camera);
    CHECK_FALSE(gt.has_score);
  }
  SUBCASE("16th field is the score") {
    const auto gts = parse_kitti_label(std::string(kCarLine) + " 0.87");
    REQUIRE(gts.size() == 1);
    CHECK(gts[0].has_score);
    CHECK(gts[0].score == doctest::Approx(0.87));
  }
  SUBCASE("14-field line errors at field 15") {
    const std::string truncated =
        "Car 0.00 0 -1.58 587 156 615 225 1.48 1.60 3.69 1.84 1.47 8.41";
    try {
      parse_kitti_label(truncated);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
      CHECK(e.field == 15);
    }
  }
  SUBCASE("garbage numeric field names its position") {
    try {
      parse_kitti_label("Car 0.00 0 oops 587 156 615 225 1 1 1 0 0 8 0");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
      CHECK(e.field == 4);
    }
  }
  SUBCASE("DontCare lines are retained with the sentinel class") {
    const auto gts = parse_kitti_label(
        "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 "
        "-1000 -10");
    REQUIRE(gts.size() == 1);
    CHECK(gts[0].class_id == kDontCare);
  }
  SUBCASE("obj_id is the line index") {
    const auto gts =
        parse_kitti_label(std::string(kCarLine) + "\n" + kCarLine);
    REQUIRE(gts.size() == 2);
    CHECK(gts[0].obj_id == 0);
    CHECK(gts[1].obj_id == 1);
  }
}

TEST_CASE("label round-trips on fuzz-generated files") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 7);
  std::uniform_int_distribution<int> occ(0, 3);
  std::uniform_int_distribution<int> count(0, 6);

  for (int file = 0; file < 100; ++file) {
    std::vector<GroundTruthObject> gts;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      GroundTruthObject gt;
      gt.class_id = file % 7 == 0 ? kDontCare : cls(rng);
      // DontCare lines carry placeholder truncation/occlusion
      gt.truncation = gt.class_id == kDontCare ? 0.0 : u(rng);
      gt.occlusion = gt.class_id == kDontCare ? 0 : occ(rng);
      gt.alpha = (u(rng) - 0.5) * 2 * kPi;
      gt.box2d = {600 * u(rng), 150 * u(rng), 600 + 600 * u(rng),
                  150 + 200 * u(rng)};
      if (gt.class_id != kDontCare) {
        gt.box3d.center = {20 * (u(rng) - 0.5), 2 * (u(rng) - 0.5),
                           5 + 40 * u(rng)};
        gt.box3d.dims = {1 + 4 * u(rng), 0.5 + 2 * u(rng), 1 + u(rng)};
        gt.box3d.yaw = normalize_angle((u(rng) - 0.5) * 2 * kPi);
        gt.box3d.frame = FrameTag::camera;
      }
      gt.obj_id = i;
      if (u(rng) < 0.5) {
        gt.has_score = true;
        gt.score = u(rng);
      }
      gts.push_back(gt);
    }
    const std::string once = serialize_kitti_label(gts);
    const auto reparsed = parse_kitti_label(once);
    const std::string twice = serialize_kitti_label(reparsed);
    CHECK(once == twice);
    REQUIRE(reparsed.size() == gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) {
      CHECK(reparsed[i].class_id == gts[i].class_id);
      CHECK(reparsed[i].truncation == doctest::Approx(gts[i].truncation));
      CHECK(reparsed[i].has_score == gts[i].has_score);
    }
  }
}

TEST_CASE("parse_kitti_calib") {
  SUBCASE("identity-valued synthetic file") {
    const std::string text =
        "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
        "R0_rect: 1 0 0 0 1 0 0 0 1\n"
        "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n";
    const auto calib = parse_kitti_calib(text);
    CHECK(calib.rectification.isIdentity(0.0));
    CHECK(calib.lidar_to_cam.isIdentity(0.0));
    CHECK(calib.intrinsic_projection ==
          Eigen::Matrix<double, 3, 4>::Identity());
  }
  SUBCASE("missing R0_rect names the key") {
    const std::string text =
        "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
        "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n";
    try {
      parse_kitti_calib(text);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("R0_rect") != std::string::npos);
    }
  }
  SUBCASE("realistic file round-trips through the serializer") {
    const auto calib = parse_kitti_calib(sample_calib());
    CHECK(calib.intrinsic_projection(0, 0) == doctest::Approx(721.5377));
    CHECK(calib.rotation_error() < 1e-9);
    const auto again = parse_kitti_calib(serialize_kitti_calib(calib));
    CHECK((again.intrinsic_projection - calib.intrinsic_projection)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((again.lidar_to_cam - calib.lidar_to_cam).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("bit-exact round-trip of an already-orthonormal chain") {
    CalibrationChain calib;
    calib.intrinsic_projection(0, 0) = 700.0;
    calib.intrinsic_projection(1, 1) = 700.0;
    calib.intrinsic_projection(0, 2) = 600.0;
    calib.intrinsic_projection(1, 2) = 180.0;
    calib.lidar_to_cam(0, 3) = 0.25;
    const auto again = parse_kitti_calib(serialize_kitti_calib(calib));
    CHECK(again.intrinsic_projection == calib.intrinsic_projection);
    CHECK(again.rectification == calib.rectification);
    CHECK(again.lidar_to_cam == calib.lidar_to_cam);
  }
}

TEST_CASE("assign_difficulty") {
  GroundTruthObject gt;
  gt.box2d = {0, 0, 30, 50};  // height 50

  SUBCASE("devkit threshold cases") {
    gt.occlusion = 0;
    gt.truncation = 0.0;
    CHECK(assign_difficulty(gt) == Difficulty::easy);

    gt.box2d.bottom = 10;  // height 10
    CHECK(assign_difficulty(gt) == Difficulty::ignored);

    gt.box2d.bottom = 30;  // height 30
    gt.occlusion = 1;
    gt.truncation = 0.2;
    CHECK(assign_difficulty(gt) == Difficulty::moderate);

    gt.occlusion = 2;
    gt.truncation = 0.5;
    CHECK(assign_difficulty(gt) == Difficulty::hard);

    gt.truncation = 0.6;
    CHECK(assign_difficulty(gt) == Difficulty::ignored);
  }
  SUBCASE("relaxing height, occlusion or truncation never hurts") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      GroundTruthObject a;
      a.box2d = {0, 0, 30, 60 * u(rng)};
      a.occlusion = static_cast<int>(4 * u(rng));
      a.truncation = u(rng);
      GroundTruthObject b = a;
      b.box2d.bottom += 10 * u(rng);
      b.occlusion = std::max(0, b.occlusion - (u(rng) < 0.5 ? 1 : 0));
      b.truncation = std::max(0.0, b.truncation - 0.3 * u(rng));
      CHECK(static_cast<int>(assign_difficulty(b)) <=
            static_cast<int>(assign_difficulty(a)));
    }
  }
}

TEST_CASE("detection exchange format") {
  SUBCASE("empty document with a valid header") {
    const auto set = parse_detections("{\"schema_version\":1,\"frames\":[]}");
    CHECK(set.frames.empty());
  }
  SUBCASE("round-trip is structurally identical") {
    DetectionSet set;
    DetectionFrame frame;
    frame.frame_id = "000042";
    frame.image_width = 1242;
    frame.image_height = 375;
    Box3D b3;
    b3.center = {10, 2, -0.5};
    b3.dims = {4, 2, 1.5};
    b3.yaw = 0.3;
    b3.class_id = kCar;
    b3.score = 0.91;
    b3.obj_id = 7;
    frame.det3d.push_back(b3);
    frame.det2d.push_back({100, 50, 200, 120, kCar, 0.88, 7});
    frame.pairs.emplace_back(0, 0);
    set.frames.push_back(frame);

    const auto again = parse_detections(serialize_detections(set, true));
    REQUIRE(again.frames.size() == 1);
    const auto& f = again.frames[0];
    CHECK(f.frame_id == "000042");
    REQUIRE(f.det3d.size() == 1);
    CHECK(f.det3d[0].center.x() == doctest::Approx(10.0));
    CHECK(f.det3d[0].obj_id == 7);
    CHECK(f.det2d[0].left == doctest::Approx(100.0));
    REQUIRE(f.pairs.size() == 1);
    CHECK(f.pairs[0] == std::make_pair(0, 0));
    // second serialization is byte-identical
    CHECK(serialize_detections(again, true) ==
          serialize_detections(set, true));
  }
  SUBCASE("dangling pair index raises a schema error naming the frame") {
    const std::string text =
        "{\"schema_version\":1,\"frames\":[{\"frame_id\":\"bad_frame\","
        "\"image_size\":[100,100],\"det3d\":[],\"det2d\":[],"
        "\"pairs\":[[0,99]]}]}";
    try {
      parse_detections(text);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("bad_frame") != std::string::npos);
    }
  }
  SUBCASE("obj_ids are stripped unless explicitly kept") {
    DetectionSet set;
    DetectionFrame frame;
    frame.frame_id = "f";
    Box3D b3;
    b3.obj_id = 12;
    frame.det3d.push_back(b3);
    set.frames.push_back(frame);
    const auto hidden = parse_detections(serialize_detections(set, false));
    CHECK(hidden.frames[0].det3d[0].obj_id == -1);
    const auto kept = parse_detections(serialize_detections(set, true));
    CHECK(kept.frames[0].det3d[0].obj_id == 12);
  }
}
