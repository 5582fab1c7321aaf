#include "croprow/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "croprow/eval.hpp"
#include "croprow/io.hpp"

namespace croprow {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

void TrialConfig::validate() const {
  if (frames_max < 1) throw std::invalid_argument("trial frames_max must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("trial dt must be positive");
  if (trials < 1) throw std::invalid_argument("trial count must be >= 1");
  if (!(initial_heading_range_deg >= 0.0)) throw std::invalid_argument("initial heading range must be >= 0");
  if (abort_after < 1) throw std::invalid_argument("abort_after must be >= 1");
  if (!(eor_beta >= 0.0 && eor_beta < 1.0)) throw std::invalid_argument("eor_beta must lie in [0, 1)");
  if (!(eps_theta_max > 0.0)) throw std::invalid_argument("eps_theta_max must be positive");
  if (eps_p_max && !(*eps_p_max > 0.0)) throw std::invalid_argument("eps_p_max must be positive");
}

RobotPose step_kinematics(const RobotPose& pose, double v, double omega, double dt) {
  return {pose.x + v * std::cos(pose.theta) * dt, pose.y + v * std::sin(pose.theta) * dt,
          wrap_pi(pose.theta + omega * dt)};
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Track: return "track";
    case Phase::Exit: return "exit";
    case Phase::Halt: return "halt";
  }
  return "?";
}

std::vector<const FrameRecord*> TrialLog::tracking() const {
  std::vector<const FrameRecord*> out;
  for (const auto& f : frames)
    if (f.phase == Phase::Track) out.push_back(&f);
  return out;
}

TrialLog run_trial(const SimSetup& setup, int trial_index) {
  setup.field.validate();
  setup.camera.validate();
  setup.scan.validate();
  setup.controller.validate();
  setup.exit.validate();
  setup.trial.validate();
  const auto& trial = setup.trial;
  const auto& ctrl = setup.controller;
  const int W = setup.camera.image_w;
  const double p_max = trial.eps_p_max.value_or(W / 2.0);

  TrialLog log;
  log.trial = trial_index;
  log.seed = trial.seed;
  log.field_seed = setup.field.seed;
  const Field field = generate_field(setup.field);

  std::mt19937_64 rng(trial.seed);
  std::uniform_real_distribution<double> heading(-trial.initial_heading_range_deg, trial.initial_heading_range_deg);
  log.initial_heading_deg = trial.initial_heading_deg.value_or(heading(rng));

  RobotPose pose{trial.start_x, trial.start_y, wrap_pi(log.initial_heading_deg * kDegToRad)};
  EorState eor;
  eor.beta = trial.eor_beta;
  double omega = 0.0;
  int misses = 0;
  bool triggered = false;
  const int h = roi_height(setup.scan, setup.camera.image_h);

  int frame = 0;
  for (; frame < trial.frames_max; ++frame) {
    FrameRecord rec;
    rec.frame = frame;
    rec.t = frame * trial.dt;
    rec.pose = pose;
    rec.v = ctrl.v;

    const auto render = render_mask(field, pose, setup.camera);
    const auto det = detect(render.mask, setup.scan);
    rec.truth = render.truth;
    rec.anchor = det.anchor;
    rec.detected = det.found();

    if (det.found()) {
      rec.row = det.row;
      rec.error = *det.error;
      omega = steer(*det.error, ctrl);
      misses = 0;
      rec.eps_track = frame_epsilon(std::abs(det.error->delta_theta), std::abs(det.error->delta_p),
                                    trial.eps_theta_max, p_max);
      if (render.truth.visible)
        rec.eps_detect = frame_epsilon(std::abs(det.error->delta_theta - render.truth.delta_theta_gt),
                                       std::abs(det.row->p_r.x - render.truth.pr_x_gt), trial.eps_theta_max, p_max);
    } else if (++misses >= trial.abort_after) {
      rec.omega = omega;
      log.frames.push_back(rec);
      log.aborted = true;
      log.failure = "no detection for " + std::to_string(misses) + " consecutive frames at frame " +
                    std::to_string(frame);
      return log;
    }
    rec.omega = omega;

    // End-of-row scanning starts once the anchor ROI has shifted; it scans the
    // ROI the anchor settled in (one past the last when the anchor is lost).
    const bool shifted = det.anchor.valid && det.anchor.n >= 1;
    const bool lost_after_shift = !det.anchor.valid && eor.filtered_y.has_value();
    if (shifted || lost_after_shift) {
      const int roi = det.anchor.valid ? det.anchor.n + 1 : setup.scan.n_max + 1;
      rec.eor_measurement = eor_scan(render.mask, roi, h);
      if (rec.eor_measurement) eor = update(eor, *rec.eor_measurement, h);
      eor.last_n = det.anchor.n;
    }
    rec.eor_filtered = eor.filtered_y;
    rec.eor_triggered = eor.triggered;
    log.frames.push_back(rec);

    if (trial.exit_enabled && eor.triggered) {
      triggered = true;
      log.followed_row = render.truth.row;
      break;
    }
    pose = step_kinematics(pose, ctrl.v, -omega, trial.dt);
  }
  if (!triggered) return log;

  ExitConfig exit = setup.exit;
  exit.omega_eor = omega;
  log.omega_eor = omega;
  log.exit_executed = true;
  const double t0 = frame * trial.dt;
  const long halt_steps = static_cast<long>(std::ceil(exit.t_e / trial.dt - 1e-9));
  for (long k = 0;; ++k) {
    const double t = k >= halt_steps ? exit.t_e : k * trial.dt;
    const auto cmd = exit_omega(t, exit);
    FrameRecord rec;
    rec.frame = frame + 1 + static_cast<int>(k);
    rec.t = t0 + t;
    rec.t_exit = t;
    rec.pose = pose;
    rec.phase = cmd.halt ? Phase::Halt : Phase::Exit;
    rec.omega = cmd.omega;
    rec.v = cmd.halt ? 0.0 : ctrl.v;
    rec.eor_filtered = eor.filtered_y;
    rec.eor_triggered = true;
    log.frames.push_back(rec);
    if (cmd.halt) {
      log.halt_time = t;
      break;
    }
    pose = step_kinematics(pose, ctrl.v, -cmd.omega, trial.dt);
  }

  const int row = log.followed_row >= 0 ? log.followed_row : field.middle_row();
  const auto [lateral, dheading] = field.offset_from_row(row, pose);
  log.terminal_displacement_cm = lateral * 100.0;
  log.terminal_heading_deg = dheading * kRadToDeg;
  return log;
}

double window_eps(const TrialLog& log, int count, bool from_end) {
  const auto track = log.tracking();
  if (track.empty() || count < 1) return 0.0;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(count), track.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += track[from_end ? track.size() - n + i : i]->eps_track;
  return sum / static_cast<double>(n);
}

int settle_frame(const TrialLog& log, double threshold) {
  const auto track = log.tracking();
  int settle = -1;
  for (const auto* rec : track) {
    if (rec->eps_track >= threshold) {
      if (settle < 0) settle = rec->frame;
    } else {
      settle = -1;
    }
  }
  return settle;
}

BatchSummary summarize(const std::vector<TrialLog>& logs, double settle_eps, int settle_frames) {
  BatchSummary s;
  s.trials = static_cast<int>(logs.size());
  s.settle_eps = settle_eps;
  s.settle_frames = settle_frames;
  double heading_sum = 0.0, disp_sum = 0.0;
  for (const auto& log : logs) {
    if (log.aborted) ++s.aborted;
    s.mean_start_eps += window_eps(log, 10, false);
    s.mean_end_eps += window_eps(log, 10, true);
    const int settle = settle_frame(log, settle_eps);
    if (settle >= 0 && settle < settle_frames) ++s.settled;
    if (log.terminal_heading_deg && log.terminal_displacement_cm) {
      ++s.exits;
      const double hd = std::abs(*log.terminal_heading_deg), dc = std::abs(*log.terminal_displacement_cm);
      heading_sum += hd;
      disp_sum += dc;
      s.max_heading_offset_deg = std::max(s.max_heading_offset_deg, hd);
      s.max_displacement_cm = std::max(s.max_displacement_cm, dc);
    }
  }
  if (s.trials > 0) {
    s.mean_start_eps /= s.trials;
    s.mean_end_eps /= s.trials;
  }
  if (s.exits > 0) {
    s.mean_heading_offset_deg = heading_sum / s.exits;
    s.mean_displacement_cm = disp_sum / s.exits;
  }
  return s;
}

BatchResult run_batch(const SimSetup& setup, unsigned threads) {
  setup.trial.validate();
  const int n = setup.trial.trials;
  BatchResult result;
  result.logs.resize(static_cast<std::size_t>(n));

  std::vector<SimSetup> setups(static_cast<std::size_t>(n), setup);
  for (int i = 0; i < n; ++i) {
    auto& s = setups[static_cast<std::size_t>(i)];
    s.trial.seed = splitmix64(setup.trial.seed ^ (0x5851f42d4c957f2dULL * static_cast<std::uint64_t>(i + 1)));
    if (setup.trial.vary_field_seed) s.field.seed = splitmix64(s.trial.seed);
  }

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      const auto& s = setups[static_cast<std::size_t>(i)];
      try {
        result.logs[static_cast<std::size_t>(i)] = run_trial(s, i);
      } catch (const std::exception& e) {
        auto& log = result.logs[static_cast<std::size_t>(i)];
        log.trial = i;
        log.seed = s.trial.seed;
        log.field_seed = s.field.seed;
        log.aborted = true;
        log.failure = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  result.summary = summarize(result.logs);
  return result;
}

std::string trial_csv(const TrialLog& log) {
  CsvWriter csv({"frame", "phase", "t", "x", "y", "theta_deg", "detected", "anchor_x", "n", "pr_x", "b_x", "c_x",
                 "delta_theta", "delta_p", "gt_anchor_x", "gt_pr_x", "gt_delta_theta", "gt_delta_p", "eps_track",
                 "eps_detect", "omega", "v", "eor_y", "eor_filtered", "eor_triggered"});
  for (const auto& f : log.frames) {
    const bool tracking = f.phase == Phase::Track;
    csv.add(f.frame).add(std::string(phase_name(f.phase))).add(f.t).add(f.pose.x).add(f.pose.y);
    csv.add(f.pose.theta * kRadToDeg).add(f.detected);
    if (f.row) {
      csv.add(f.row->anchor.x).add(f.anchor.n).add(f.row->p_r.x).add(f.row->b_x).add(f.row->c_x);
      csv.add(f.error.delta_theta).add(f.error.delta_p);
    } else {
      for (int i = 0; i < 7; ++i) csv.add(std::string());
    }
    if (tracking && f.truth.visible) {
      csv.add(f.truth.anchor_x_gt).add(f.truth.pr_x_gt).add(f.truth.delta_theta_gt).add(f.truth.delta_p_gt);
    } else {
      for (int i = 0; i < 4; ++i) csv.add(std::string());
    }
    if (tracking)
      csv.add(f.eps_track).add(f.eps_detect);
    else
      csv.add(std::string()).add(std::string());
    csv.add(f.omega).add(f.v);
    csv.add(f.eor_measurement ? std::to_string(*f.eor_measurement) : std::string());
    csv.add(f.eor_filtered ? fmt6(*f.eor_filtered) : std::string());
    csv.add(f.eor_triggered);
    csv.end_row();
  }
  return csv.str();
}

std::string summary_json(const BatchResult& batch, const SimSetup& setup) {
  using nlohmann::ordered_json;
  // Numbers pass through fmt6 so the file is byte-stable across platforms.
  auto num = [](double v) { return ordered_json::parse(fmt6(v)); };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : ordered_json(nullptr); };

  ordered_json j;
  j["schema_version"] = 1;
  j["master_seed"] = setup.trial.seed;
  j["trials"] = batch.summary.trials;
  const auto& s = batch.summary;
  j["summary"] = {
      {"aborted", s.aborted},
      {"exits", s.exits},
      {"mean_start_eps", num(s.mean_start_eps)},
      {"mean_end_eps", num(s.mean_end_eps)},
      {"settled", s.settled},
      {"settle_eps", num(s.settle_eps)},
      {"settle_frames", s.settle_frames},
      {"mean_heading_offset_deg", num(s.mean_heading_offset_deg)},
      {"max_heading_offset_deg", num(s.max_heading_offset_deg)},
      {"mean_displacement_cm", num(s.mean_displacement_cm)},
      {"max_displacement_cm", num(s.max_displacement_cm)},
  };
  ordered_json trials = ordered_json::array();
  for (const auto& log : batch.logs) {
    trials.push_back({
        {"trial", log.trial},
        {"seed", log.seed},
        {"field_seed", log.field_seed},
        {"initial_heading_deg", num(log.initial_heading_deg)},
        {"frames", log.frames.size()},
        {"aborted", log.aborted},
        {"failure", log.failure},
        {"exit_executed", log.exit_executed},
        {"omega_eor", num(log.omega_eor)},
        {"halt_time", opt(log.halt_time)},
        {"start_eps", num(window_eps(log, 10, false))},
        {"end_eps", num(window_eps(log, 10, true))},
        {"settle_frame", settle_frame(log, s.settle_eps)},
        {"terminal_heading_deg", opt(log.terminal_heading_deg)},
        {"terminal_displacement_cm", opt(log.terminal_displacement_cm)},
    });
  }
  j["trials_detail"] = trials;
  return j.dump(2) + "\n";
}

}  // namespace croprow
