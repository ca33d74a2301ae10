#include "cod/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cod;

namespace {

Box3D lidar_box(double x, double y, int class_id = kCar, double score = 0.9) {
  Box3D box;
  box.center = {x, y, -0.5};
  box.dims = {4, 2, 1.5};
  box.class_id = class_id;
  box.score = score;
  return box;
}

double iou3(const Box3D& a, const Box3D& b) { return iou_3d(a, b); }

using GtFrame = std::vector<std::pair<Box3D, Difficulty>>;

Frame gt_frame(const std::string& id, const std::vector<Box3D>& boxes) {
  Frame frame;
  frame.frame_id = id;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    GroundTruthObject gt;
    gt.class_id = boxes[i].class_id;
    gt.box3d = boxes[i];
    gt.box2d = {100.0 + 100.0 * i, 100.0, 160.0 + 100.0 * i, 160.0};
    gt.box2d.class_id = gt.class_id;
    gt.obj_id = static_cast<std::int64_t>(i);
    frame.gts.push_back(gt);
  }
  return frame;
}

}  // namespace

TEST_CASE("ap_r11 trivial endpoints") {
  const std::vector<Box3D> gts{lidar_box(10, 0), lidar_box(20, 3),
                               lidar_box(30, -3)};
  const std::vector<GtFrame> gt_frames{
      {{gts[0], Difficulty::easy},
       {gts[1], Difficulty::easy},
       {gts[2], Difficulty::easy}}};

  SUBCASE("perfect detections give exactly 100") {
    const auto r = ap_r11<Box3D>({gts}, gt_frames, iou3, 0.7, Difficulty::hard);
    CHECK(r.ap == 100.0);
    CHECK_FALSE(r.empty);
  }
  SUBCASE("zero detections give exactly 0") {
    const auto r = ap_r11<Box3D>({{}}, gt_frames, iou3, 0.7, Difficulty::hard);
    CHECK(r.ap == 0.0);
  }
  SUBCASE("zero admissible ground truth is flagged empty") {
    const auto r = ap_r11<Box3D>(
        {{}}, {GtFrame{{gts[0], Difficulty::ignored}}}, iou3, 0.7,
        Difficulty::hard);
    CHECK(r.empty);
    CHECK(r.ap == 0.0);
  }
}

TEST_CASE("ap_r11 hand-executed 2-GT/3-detection case") {
  // score .9 true positive, .8 false positive, .7 true positive:
  // precision envelope is 1 for recall <= 0.5 and 2/3 beyond, so the
  // 11-point mean is (6*1 + 5*2/3)/11 = 28/33.
  const Box3D gt_a = lidar_box(10, 0);
  const Box3D gt_b = lidar_box(20, 3);
  Box3D tp_a = gt_a;
  tp_a.score = 0.9;
  Box3D fp = lidar_box(40, -5);
  fp.score = 0.8;
  Box3D tp_b = gt_b;
  tp_b.score = 0.7;

  const std::vector<GtFrame> gt_frames{
      {{gt_a, Difficulty::easy}, {gt_b, Difficulty::easy}}};
  const auto r = ap_r11<Box3D>({{tp_a, fp, tp_b}}, gt_frames, iou3, 0.7,
                               Difficulty::hard);
  CHECK(std::abs(r.ap - 100.0 * 28.0 / 33.0) < 1e-9);
}

TEST_CASE("ap_r11 is invariant to monotone score rescaling") {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<Box3D>> dets(5);
  std::vector<GtFrame> gt_frames(5);
  for (int f = 0; f < 5; ++f) {
    for (int i = 0; i < 4; ++i) {
      const Box3D gt = lidar_box(8.0 + 9.0 * i, 6.0 * u(rng) - 3.0);
      gt_frames[f].push_back({gt, Difficulty::easy});
      if (u(rng) < 0.8) {
        Box3D det = gt;
        det.center.x() += 0.4 * (u(rng) - 0.5);
        det.score = u(rng);
        dets[f].push_back(det);
      }
    }
    if (u(rng) < 0.7) {
      Box3D stray = lidar_box(60.0 + 10.0 * u(rng), 15.0);
      stray.score = u(rng);
      dets[f].push_back(stray);
    }
  }
  const double base =
      ap_r11<Box3D>(dets, gt_frames, iou3, 0.7, Difficulty::hard).ap;
  auto rescaled = dets;
  for (auto& frame : rescaled)
    for (auto& det : frame) det.score = 0.2 + 0.5 * std::tanh(det.score);
  const double moved =
      ap_r11<Box3D>(rescaled, gt_frames, iou3, 0.7, Difficulty::hard).ap;
  CHECK(base == doctest::Approx(moved).epsilon(1e-12));
}

TEST_CASE("ignored GTs absorb detections without counting as recall") {
  const Box3D easy_gt = lidar_box(10, 0);
  const Box3D hard_gt = lidar_box(25, 4);
  const std::vector<GtFrame> gt_frames{
      {{easy_gt, Difficulty::easy}, {hard_gt, Difficulty::ignored}}};
  Box3D det_easy = easy_gt;
  det_easy.score = 0.9;
  Box3D det_hard = hard_gt;  // overlaps only the ignored GT
  det_hard.score = 0.8;
  const auto r = ap_r11<Box3D>({{det_easy, det_hard}}, gt_frames, iou3, 0.7,
                               Difficulty::hard);
  CHECK(r.ap == 100.0);  // the ignored GT's detection is neither TP nor FP
}

TEST_CASE("consistency_precision") {
  EvalConfig config;
  const std::vector<Box3D> boxes{lidar_box(10, 0), lidar_box(20, 3),
                                 lidar_box(30, -3), lidar_box(40, 5)};
  const Frame frame = gt_frame("cp_0", boxes);

  SUBCASE("all triples exact copies of GT give 100") {
    PairedFrame paired;
    paired.frame_id = "cp_0";
    for (std::size_t i = 0; i < boxes.size(); ++i)
      paired.triples.push_back(
          {boxes[i], frame.gts[i].box2d, static_cast<std::int64_t>(i)});
    const auto cp = consistency_precision({paired}, {frame}, config);
    CHECK(cp.at(kCar) == 100.0);
  }
  SUBCASE("4 GTs, 2 fully consistent triples give exactly 50") {
    PairedFrame paired;
    paired.frame_id = "cp_0";
    paired.triples.push_back({boxes[0], frame.gts[0].box2d, 0});
    paired.triples.push_back({boxes[2], frame.gts[2].box2d, 1});
    const auto cp = consistency_precision({paired}, {frame}, config);
    CHECK(cp.at(kCar) == 50.0);
  }
  SUBCASE("2D box matching a different GT contributes nothing") {
    PairedFrame paired;
    paired.frame_id = "cp_0";
    // 3D matches GT 0 but the 2D box is GT 1's
    paired.triples.push_back({boxes[0], frame.gts[1].box2d, 0});
    const auto cp = consistency_precision({paired}, {frame}, config);
    CHECK(cp.at(kCar) == 0.0);
  }
  SUBCASE("a GT is creditable at most once") {
    PairedFrame paired;
    paired.frame_id = "cp_0";
    paired.triples.push_back({boxes[0], frame.gts[0].box2d, 0});
    paired.triples.push_back({boxes[0], frame.gts[0].box2d, 1});
    const auto cp = consistency_precision({paired}, {frame}, config);
    CHECK(cp.at(kCar) == 25.0);
  }
  SUBCASE("order of triples within a frame does not matter") {
    PairedFrame fwd, rev;
    fwd.frame_id = rev.frame_id = "cp_0";
    for (std::size_t i = 0; i < boxes.size(); ++i)
      fwd.triples.push_back(
          {boxes[i], frame.gts[i].box2d, static_cast<std::int64_t>(i)});
    rev.triples.assign(fwd.triples.rbegin(), fwd.triples.rend());
    CHECK(consistency_precision({fwd}, {frame}, config) ==
          consistency_precision({rev}, {frame}, config));
  }
  SUBCASE("classes are scored independently") {
    std::vector<Box3D> mixed{lidar_box(10, 0, kCar),
                             lidar_box(20, 3, kPedestrian)};
    mixed[1].dims = {0.8, 0.6, 1.7};
    const Frame f = gt_frame("cp_1", mixed);
    PairedFrame paired;
    paired.frame_id = "cp_1";
    paired.triples.push_back({mixed[0], f.gts[0].box2d, 0});
    const auto cp = consistency_precision({paired}, {f}, config);
    CHECK(cp.at(kCar) == 100.0);
    CHECK(cp.at(kPedestrian) == 0.0);
  }
}

TEST_CASE("combine_losses") {
  CHECK(combine_losses(1.0, 2.0, 1.0) == 3.0);
  CHECK(combine_losses(4.2, 0.0, 7.0) == 4.2);
  CHECK(combine_losses(0.0, 3.0, 2.0) == 6.0);
}

TEST_CASE("aggregate_map") {
  CHECK(aggregate_map({0.0, 0.0, 0.0}) == 0.0);
  CHECK(aggregate_map({42.0, 42.0, 42.0}) == doctest::Approx(42.0));
  // published per-class columns reproduce their own mAP column
  CHECK(aggregate_map({72.06, 46.40, 54.46}) ==
        doctest::Approx(57.64).epsilon(0.0002));
  CHECK(aggregate_map({64.50, 41.51, 38.61}) ==
        doctest::Approx(48.20).epsilon(0.0002));
}

TEST_CASE("EvalReport serializes config and rows to CSV") {
  EvalReport report;
  report.ap_rows.push_back(
      {kCar, Difficulty::easy, Modality::box3d, 72.06, false});
  report.cp[kCar] = 88.5;
  const std::string csv = report.to_csv();
  CHECK(csv.find("Car") != std::string::npos);
  CHECK(csv.find("72.06") != std::string::npos);
  CHECK(csv.find("88.5") != std::string::npos);
  CHECK(csv[0] == '#');  // config echo header
}
