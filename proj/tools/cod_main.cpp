#include "cod/datasets.hpp"
#include "cod/exchange.hpp"
#include "cod/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cod::SchemaError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw cod::SchemaError("cannot write file: " + path);
  out << content;
}

std::string output_path(const std::string& explicit_path,
                        const std::string& output_dir,
                        const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  std::string dir = output_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("COD_OUTPUT_DIR")) dir = env;
  }
  if (dir.empty()) return default_name;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / default_name).string();
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  std::string output_dir;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config = true) {
  auto* config =
      cmd->add_option("--config", opts.config_path, "run configuration file");
  if (needs_config) config->required();
  cmd->add_option("--set", opts.overrides,
                  "config override key=value (dotted path)");
  cmd->add_option("--out", opts.output, "output file path");
  cmd->add_option("--output-dir", opts.output_dir,
                  "output directory (default: $COD_OUTPUT_DIR or cwd)");
  cmd->add_option("--jobs", opts.jobs, "worker thread cap");
}

cod::RunConfig load_config(const CommonOptions& opts) {
  cod::RunConfig config = cod::load_run_config(opts.config_path, opts.overrides);
  if (opts.jobs > 0) config.jobs = opts.jobs;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consistency-detection toolkit for LiDAR-camera detections"};
  app.require_subcommand(1);

  CommonOptions eval_opts, sweep_opts, sim_opts, match_opts, report_opts;
  bool sim_oracle = false;
  std::string validate_input, project_calib, project_labels, report_sweep_csv;
  std::pair<int, int> project_size{1242, 375};

  auto* eval_cmd =
      app.add_subcommand("eval", "run one mode at the first noise point and "
                                 "write the evaluation report CSV");
  add_common(eval_cmd, eval_opts);

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "evaluate every configured mode x noise point, write sweep CSV");
  add_common(sweep_cmd, sweep_opts);

  auto* sim_cmd = app.add_subcommand(
      "simulate", "write simulated detections in the exchange format");
  add_common(sim_cmd, sim_opts);
  sim_cmd->add_flag("--oracle", sim_oracle,
                    "keep source object ids in the output");

  auto* match_cmd = app.add_subcommand(
      "match", "run the project-then-match baseline and write paired triples");
  add_common(match_cmd, match_opts);

  auto* project_cmd = app.add_subcommand(
      "project", "project KITTI label boxes through a calibration file");
  project_cmd->add_option("--calib", project_calib, "KITTI calib file")
      ->required();
  project_cmd->add_option("--labels", project_labels, "KITTI label file")
      ->required();
  project_cmd->add_option("--image-size", project_size, "width height");

  auto* report_cmd = app.add_subcommand(
      "report", "render a sweep CSV as a static SVG chart");
  add_common(report_cmd, report_opts, false);
  report_cmd->add_option("--sweep", report_sweep_csv,
                         "existing sweep CSV produced by `sweep`");

  auto* validate_cmd =
      app.add_subcommand("validate", "check a detection-exchange file");
  validate_cmd->add_option("--input", validate_input, "detection file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eval_cmd->parsed()) {
      const cod::RunConfig config = load_config(eval_opts);
      const auto frames = cod::load_frames(config);
      const auto result =
          cod::run_mode(frames, config, config.mode, config.noise.front());
      const auto evaluation = cod::evaluate_mode(frames, result, config);
      const std::string path =
          output_path(eval_opts.output, eval_opts.output_dir, "report.csv");
      write_file(path, evaluation.report.to_csv());
      std::cerr << "wrote " << path << "\n";
    } else if (sweep_cmd->parsed()) {
      const cod::RunConfig config = load_config(sweep_opts);
      const auto frames = cod::load_frames(config);
      const auto table = cod::noise_sweep(frames, config);
      const std::string path =
          output_path(sweep_opts.output, sweep_opts.output_dir, "sweep.csv");
      write_file(path, table.to_csv());
      std::cerr << "wrote " << path << "\n";
    } else if (sim_cmd->parsed()) {
      const cod::RunConfig config = load_config(sim_opts);
      const auto frames = cod::load_frames(config);
      const auto set =
          cod::export_detections(frames, config, config.noise.front());
      const std::string path = output_path(sim_opts.output, sim_opts.output_dir,
                                           "detections.json");
      cod::save_detections(set, path, sim_oracle);
      std::cerr << "wrote " << path << "\n";
    } else if (match_cmd->parsed()) {
      const cod::RunConfig config = load_config(match_opts);
      const auto frames = cod::load_frames(config);
      const auto paired = cod::run_baseline_match(frames, config);
      std::ostringstream out;
      out << "frame_id,shared_id,class,score,left,top,right,bottom\n";
      for (const auto& frame : paired) {
        for (const auto& t : frame.triples) {
          out << frame.frame_id << ',' << t.shared_id << ','
              << cod::class_name(t.box3.class_id) << ',' << t.box3.score << ','
              << t.box2.left << ',' << t.box2.top << ',' << t.box2.right << ','
              << t.box2.bottom << "\n";
        }
      }
      const std::string path =
          output_path(match_opts.output, match_opts.output_dir, "pairs.csv");
      write_file(path, out.str());
      std::cerr << "wrote " << path << "\n";
    } else if (project_cmd->parsed()) {
      const auto calib = cod::parse_kitti_calib(read_file(project_calib));
      const auto gts = cod::parse_kitti_label(read_file(project_labels));
      std::cout << "obj_id,class,left,top,right,bottom\n";
      for (const auto& gt : gts) {
        if (gt.class_id == cod::kDontCare) continue;
        const auto lidar_box = cod::box3d_camera_to_lidar(gt.box3d, calib);
        const auto projected = cod::project_box3d(
            calib, lidar_box, project_size.first, project_size.second);
        if (!projected) continue;
        std::cout << gt.obj_id << ',' << cod::class_name(gt.class_id) << ','
                  << projected->left << ',' << projected->top << ','
                  << projected->right << ',' << projected->bottom << "\n";
      }
    } else if (report_cmd->parsed()) {
      cod::SweepTable table;
      if (!report_sweep_csv.empty()) {
        // rebuild the chart inputs from the sweep CSV
        std::istringstream in(read_file(report_sweep_csv));
        std::string line;
        std::map<std::string, cod::SweepRow> rows;
        std::vector<std::string> order;
        while (std::getline(in, line)) {
          if (line.empty() || line[0] == '#' || line.rfind("mode,", 0) == 0)
            continue;
          std::vector<std::string> cells;
          std::istringstream ls(line);
          std::string cell;
          while (std::getline(ls, cell, ',')) cells.push_back(cell);
          if (cells.size() < 8) continue;
          const std::string key = cells[0] + '|' + cells[1] + '|' + cells[2];
          if (!rows.count(key)) {
            cod::SweepRow row;
            row.mode = cod::mode_from_name(cells[0]);
            row.noise.rot_variance = std::stod(cells[1]);
            row.noise.trans_variance = std::stod(cells[2]);
            rows.emplace(key, std::move(row));
            order.push_back(key);
          }
          auto& row = rows.at(key);
          if (cells[3] == "mean_iou2d") {
            row.evaluation.mean_iou2d_vs_gt = std::stod(cells[7]);
          } else if (cells[3] == "CP") {
            const auto cid = cod::class_id_from_name(cells[4]);
            if (cid) row.evaluation.report.cp[*cid] = std::stod(cells[7]);
          }
        }
        for (const auto& key : order) table.rows.push_back(rows.at(key));
      } else {
        if (report_opts.config_path.empty())
          throw cod::SchemaError("report needs --sweep or --config");
        const cod::RunConfig config = load_config(report_opts);
        const auto frames = cod::load_frames(config);
        table = cod::noise_sweep(frames, config);
      }
      const std::string path = output_path(report_opts.output,
                                           report_opts.output_dir, "sweep.svg");
      write_file(path, cod::sweep_svg(table));
      std::cerr << "wrote " << path << "\n";
    } else if (validate_cmd->parsed()) {
      const auto set = cod::load_detections(validate_input);
      std::cerr << "valid: " << set.frames.size() << " frames\n";
    }
  } catch (const cod::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const cod::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
