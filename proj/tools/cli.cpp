#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "croprow/config.hpp"
#include "croprow/eval.hpp"
#include "croprow/io.hpp"
#include "croprow/mask.hpp"
#include "croprow/sim.hpp"
#include "croprow/synth_field.hpp"
#include "croprow/triangle_scan.hpp"

namespace fs = std::filesystem;

namespace croprow {

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

// Thrown for bad inputs that are not config keys (mismatched frames, etc).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "flat key=value config file");
  cmd->add_option("-s,--set", c.overrides, "override, e.g. scan.s=0.2 (repeatable)");
  cmd->add_option("-j,--threads", c.threads, "worker threads (0 = all cores)");
}

SimSetup load_setup(const Common& c) {
  SimSetup setup;
  if (!c.config.empty()) apply_config_file(setup, c.config);
  for (const auto& o : c.overrides) apply_override(setup, o);
  return setup;
}

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// ---- detect ---------------------------------------------------------------

struct DetectArgs {
  Common common;
  std::vector<std::string> masks;
  std::string out;
};

int cmd_detect(const DetectArgs& args) {
  const auto setup = load_setup(args.common);
  setup.scan.validate();

  struct Outcome {
    std::optional<Detection> det;
    int width = 0;
    std::string error;
  };
  std::vector<Outcome> results(args.masks.size());
  parallel_for(args.masks.size(), args.common.threads, [&](std::size_t i) {
    try {
      const Mask mask = load_mask(args.masks[i]);
      results[i].width = mask.width();
      results[i].det = detect(mask, setup.scan);
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });

  CsvWriter csv({"frame", "file", "anchor_x", "n", "pr_x", "b_x", "c_x", "delta_theta", "delta_p", "line_score",
                 "no_detection"});
  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.det) {
      ++failures;
      std::cerr << "error: " << args.masks[i] << ": " << r.error << "\n";
      continue;
    }
    csv.add(static_cast<int>(i)).add(args.masks[i]);
    if (r.det->found()) {
      const auto& row = *r.det->row;
      csv.add(row.anchor.x).add(r.det->anchor.n).add(row.p_r.x).add(row.b_x).add(row.c_x);
      csv.add(r.det->error->delta_theta).add(r.det->error->delta_p).add(row.line_score).add(false);
    } else {
      csv.add(std::string()).add(r.det->anchor.n);
      for (int k = 0; k < 6; ++k) csv.add(std::string());
      csv.add(true);
    }
    csv.end_row();
  }
  if (args.out.empty() || args.out == "-")
    std::cout << csv.str();
  else
    write_file_atomic(args.out, csv.str());
  if (failures > 0) {
    std::cerr << failures << " of " << results.size() << " inputs could not be read\n";
    return kIo;
  }
  return kOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
};

int cmd_simulate(const SimulateArgs& args) {
  auto setup = load_setup(args.common);
  if (args.seed) setup.trial.seed = *args.seed;
  if (args.trials) setup.trial.trials = *args.trials;
  setup.field.validate();
  setup.camera.validate();
  setup.scan.validate();
  setup.controller.validate();
  setup.exit.validate();
  setup.trial.validate();

  const fs::path dir = args.out;
  make_dir(dir);
  const auto batch = run_batch(setup, args.common.threads);
  for (const auto& log : batch.logs) {
    char name[32];
    std::snprintf(name, sizeof name, "trial_%03d.csv", log.trial);
    write_file_atomic(dir / name, trial_csv(log));
  }
  write_file_atomic(dir / "summary.json", summary_json(batch, setup));
  write_file_atomic(dir / "config.txt", dump_config(setup));

  const auto& s = batch.summary;
  std::cout << "trials " << s.trials << ", aborted " << s.aborted << ", exits " << s.exits << "\n";
  std::cout << "mean eps first 10 frames " << fmt6(s.mean_start_eps) << ", last 10 frames " << fmt6(s.mean_end_eps)
            << "\n";
  std::cout << "settled (eps >= " << fmt6(s.settle_eps) << " before frame " << s.settle_frames << ") " << s.settled
            << "/" << s.trials << "\n";
  if (s.exits > 0) {
    std::cout << "terminal heading offset deg mean " << fmt6(s.mean_heading_offset_deg) << " max "
              << fmt6(s.max_heading_offset_deg) << "\n";
    std::cout << "terminal displacement cm mean " << fmt6(s.mean_displacement_cm) << " max "
              << fmt6(s.max_displacement_cm) << "\n";
  }
  for (const auto& log : batch.logs)
    if (!log.failure.empty()) std::cerr << "trial " << log.trial << ": " << log.failure << "\n";
  return kOk;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string out;
  std::string poses;
  int count = 10;
  double step = 0.2;
};

std::vector<RobotPose> read_poses(const std::string& path) {
  const auto table = read_csv(path);
  for (const char* col : {"x", "y", "theta_deg"})
    if (table.column(col) < 0) throw ValidationError(path + ": missing column '" + col + "'");
  std::vector<RobotPose> poses;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto num = [&](const char* col) {
      const auto& cell = table.cell(r, col);
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
        return v;
      } catch (const std::exception&) {
        throw ValidationError(path + ": row " + std::to_string(r + 1) + ": bad " + col + " '" + cell + "'");
      }
    };
    poses.push_back({num("x"), num("y"), num("theta_deg") * std::numbers::pi / 180.0});
  }
  return poses;
}

int cmd_generate(const GenerateArgs& args) {
  const auto setup = load_setup(args.common);
  setup.field.validate();
  setup.camera.validate();

  std::vector<RobotPose> poses;
  if (!args.poses.empty()) {
    poses = read_poses(args.poses);
  } else {
    if (args.count < 1) throw ValidationError("--count must be >= 1");
    for (int i = 0; i < args.count; ++i)
      poses.push_back({setup.trial.start_x + i * args.step, setup.trial.start_y, 0.0});
  }

  const fs::path dir = args.out;
  make_dir(dir);
  const Field field = generate_field(setup.field);
  std::vector<GroundTruthRow> truths(poses.size());
  std::vector<std::string> names(poses.size());
  parallel_for(poses.size(), args.common.threads, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "mask_%04zu.pgm", i);
    names[i] = name;
    const auto render = render_mask(field, poses[i], setup.camera);
    save_mask(render.mask, dir / name);
    truths[i] = render.truth;
  });

  CsvWriter csv({"frame", "mask", "x", "y", "theta_deg", "anchor_x_gt", "pr_x_gt", "visible", "eor_y_gt",
                 "delta_theta_gt", "delta_p_gt"});
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto& gt = truths[i];
    csv.add(static_cast<int>(i)).add(names[i]).add(poses[i].x).add(poses[i].y);
    csv.add(poses[i].theta * 180.0 / std::numbers::pi);
    csv.add(gt.anchor_x_gt).add(gt.pr_x_gt).add(gt.visible);
    csv.add(gt.eor_y_gt ? fmt6(*gt.eor_y_gt) : std::string());
    csv.add(gt.delta_theta_gt).add(gt.delta_p_gt);
    csv.end_row();
  }
  write_file_atomic(dir / "ground_truth.csv", csv.str());
  std::cout << "wrote " << poses.size() << " masks to " << dir.string() << "\n";
  return kOk;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string detections;
  std::string truth;
  std::string labels;
  std::string out;
  std::string mode = "dataset-max";
  double theta_max = 20.0;
  std::optional<double> p_max;
  int image_width = 512;
  bool lenient = false;
};

double parse_cell(const std::string& path, const std::string& frame, const char* col, const std::string& cell) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(path + ": frame " + frame + ": bad " + col + " '" + cell + "'");
}

void require_columns(const CsvTable& t, const std::string& path, std::initializer_list<const char*> cols) {
  for (const char* c : cols)
    if (t.column(c) < 0) throw ValidationError(path + ": missing column '" + std::string(c) + "'");
}

std::map<std::string, std::size_t> index_frames(const CsvTable& t, const std::string& path) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (!idx.emplace(t.cell(r, "frame"), r).second)
      throw ValidationError(path + ": duplicate frame '" + t.cell(r, "frame") + "'");
  return idx;
}

int cmd_evaluate(const EvaluateArgs& args) {
  EpsilonMode mode;
  if (args.mode == "fixed")
    mode = EpsilonMode::fixed(args.theta_max, args.p_max.value_or(args.image_width / 2.0));
  else if (args.mode != "dataset-max")
    throw ValidationError("unknown mode '" + args.mode + "' (dataset-max or fixed)");

  const auto det = read_csv(args.detections);
  const auto gt = read_csv(args.truth);
  require_columns(det, args.detections, {"frame", "delta_theta", "pr_x", "no_detection"});
  require_columns(gt, args.truth, {"frame", "delta_theta_gt", "pr_x_gt"});
  const auto gt_idx = index_frames(gt, args.truth);
  const auto det_idx = index_frames(det, args.detections);
  for (std::size_t r = 0; r < det.rows.size(); ++r)
    if (!gt_idx.count(det.cell(r, "frame")))
      throw ValidationError("frame '" + det.cell(r, "frame") + "' has no ground truth");
  for (std::size_t r = 0; r < gt.rows.size(); ++r)
    if (!det_idx.count(gt.cell(r, "frame")))
      throw ValidationError("frame '" + gt.cell(r, "frame") + "' has no detection");

  std::optional<CsvTable> labels;
  std::map<std::string, std::size_t> label_idx;
  if (!args.labels.empty()) {
    labels = read_csv(args.labels);
    require_columns(*labels, args.labels, {"frame"});
    if (labels->column("categories") < 0) {
      if (!args.lenient) throw ValidationError(args.labels + ": missing column 'categories'");
    }
    label_idx = index_frames(*labels, args.labels);
  }

  std::vector<FrameError> frames;
  std::size_t skipped = 0;
  for (std::size_t r = 0; r < det.rows.size(); ++r) {
    const auto& key = det.cell(r, "frame");
    const std::size_t g = gt_idx.at(key);
    if (gt.column("visible") >= 0 && gt.cell(g, "visible") == "0") {
      ++skipped;
      continue;
    }
    FrameError f;
    if (det.cell(r, "no_detection") == "1") {
      f.failed = true;
    } else {
      f.delta_theta_abs = std::abs(parse_cell(args.detections, key, "delta_theta", det.cell(r, "delta_theta")) -
                                   parse_cell(args.truth, key, "delta_theta_gt", gt.cell(g, "delta_theta_gt")));
      f.delta_p_abs = std::abs(parse_cell(args.detections, key, "pr_x", det.cell(r, "pr_x")) -
                               parse_cell(args.truth, key, "pr_x_gt", gt.cell(g, "pr_x_gt")));
    }
    if (labels) {
      const auto it = label_idx.find(key);
      if (it == label_idx.end()) {
        if (!args.lenient) throw ValidationError("frame '" + key + "' has no label");
      } else {
        if (labels->column("categories") >= 0)
          for (const auto& c : split(labels->cell(it->second, "categories"), ';'))
            if (!trim(c).empty()) f.categories.emplace_back(trim(c));
        if (labels->column("class_id") >= 0 && !labels->cell(it->second, "class_id").empty())
          f.class_id = static_cast<int>(
              parse_cell(args.labels, key, "class_id", labels->cell(it->second, "class_id")));
      }
    }
    frames.push_back(std::move(f));
  }
  if (frames.empty()) throw ValidationError("no frames to evaluate");

  std::optional<CategoryTable> table;
  EpsilonReport overall;
  if (labels) {
    table = per_category_report(frames, mode, !args.lenient);
    overall = table->overall;
  } else {
    overall = epsilon(frames, mode);
  }

  const fs::path dir = args.out;
  make_dir(dir);
  std::size_t failed = 0;
  for (const auto& f : frames) failed += f.failed ? 1 : 0;

  CsvWriter ov({"mode", "frames", "failed", "skipped_invisible", "theta_max", "p_max", "epsilon"});
  ov.add(overall.mode).add(static_cast<long long>(overall.n)).add(static_cast<long long>(failed));
  ov.add(static_cast<long long>(skipped)).add(overall.theta_max_used).add(overall.p_max_used).add(overall.epsilon);
  ov.end_row();
  write_file_atomic(dir / "overall.csv", ov.str());

  nlohmann::ordered_json j;
  auto num = [](double v) { return nlohmann::ordered_json::parse(fmt6(v)); };
  j["schema_version"] = 1;
  j["mode"] = overall.mode;
  j["frames"] = overall.n;
  j["failed"] = failed;
  j["skipped_invisible"] = skipped;
  j["theta_max"] = num(overall.theta_max_used);
  j["p_max"] = num(overall.p_max_used);
  j["epsilon"] = num(overall.epsilon);

  if (table) {
    CsvWriter pc({"class", "frames", "categories", "epsilon"});
    for (const auto& c : table->classes) {
      std::string cats;
      for (std::size_t i = 0; i < c.categories.size(); ++i) cats += (i ? ";" : "") + c.categories[i];
      pc.add(c.key).add(static_cast<long long>(c.frames)).add(cats).add(c.epsilon);
      pc.end_row();
      j["per_class"][c.key] = num(c.epsilon);
    }
    CsvWriter pk({"category", "classes", "epsilon"});
    for (const auto& c : table->categories) {
      pk.add(c.category).add(static_cast<long long>(c.classes)).add(c.epsilon);
      pk.end_row();
      j["per_category"][c.category] = num(c.epsilon);
    }
    write_file_atomic(dir / "per_class.csv", pc.str());
    write_file_atomic(dir / "per_category.csv", pk.str());
  }
  write_file_atomic(dir / "summary.json", j.dump(2) + "\n");
  std::cout << "epsilon " << fmt6(overall.epsilon) << " over " << overall.n << " frames (" << overall.mode << ")\n";
  return kOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Crop-row detection, simulation and evaluation toolkit", "croprow"};
  app.require_subcommand(1);

  DetectArgs detect_args;
  auto* detect_cmd = app.add_subcommand("detect", "detect the central crop row in binary mask files");
  add_common(detect_cmd, detect_args.common);
  detect_cmd->add_option("masks", detect_args.masks, "PGM mask files")->required();
  detect_cmd->add_option("-o,--out", detect_args.out, "output CSV (default stdout)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "closed-loop row following and end-of-row exit trials");
  add_common(sim_cmd, sim_args.common);
  sim_cmd->add_option("-o,--out", sim_args.out, "output directory")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "master seed (trial.seed)");
  sim_cmd->add_option("--trials", sim_args.trials, "number of trials (trial.trials)");

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "render synthetic masks and ground truth");
  add_common(gen_cmd, gen_args.common);
  gen_cmd->add_option("-o,--out", gen_args.out, "output directory")->required();
  gen_cmd->add_option("--poses", gen_args.poses, "CSV with x,y,theta_deg columns");
  gen_cmd->add_option("--count", gen_args.count, "poses along the middle row when --poses is absent");
  gen_cmd->add_option("--step", gen_args.step, "spacing of those poses, m");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "score detections against ground truth");
  eval_cmd->add_option("-d,--detections", eval_args.detections, "detect output CSV")->required();
  eval_cmd->add_option("-g,--truth", eval_args.truth, "ground truth CSV")->required();
  eval_cmd->add_option("-l,--labels", eval_args.labels, "labels CSV: frame,categories,class_id");
  eval_cmd->add_option("-o,--out", eval_args.out, "output directory")->required();
  eval_cmd->add_option("--mode", eval_args.mode, "dataset-max or fixed");
  eval_cmd->add_option("--theta-max", eval_args.theta_max, "fixed-mode angle normalizer, degrees");
  eval_cmd->add_option("--p-max", eval_args.p_max, "fixed-mode offset normalizer, px (default W/2)");
  eval_cmd->add_option("--image-width", eval_args.image_width, "W used for the default --p-max");
  eval_cmd->add_flag("--lenient", eval_args.lenient, "allow frames without labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*detect_cmd) return cmd_detect(detect_args);
    if (*sim_cmd) return cmd_simulate(sim_args);
    if (*gen_cmd) return cmd_generate(gen_args);
    if (*eval_cmd) return cmd_evaluate(eval_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const MaskLoadError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const MaskWriteError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace croprow
