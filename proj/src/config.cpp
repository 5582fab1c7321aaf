#include "croprow/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <variant>

#include "croprow/io.hpp"

namespace croprow {

namespace {

using Target = std::variant<double*, int*, std::uint64_t*, bool*, std::optional<double>*, TieBreak*>;

struct Entry {
  const char* key;
  std::function<Target(SimSetup&)> target;
};

#define CROPROW_KEY(name, member) Entry{name, [](SimSetup& s) -> Target { return &s.member; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      CROPROW_KEY("field.num_rows", field.num_rows),
      CROPROW_KEY("field.row_spacing", field.row_spacing),
      CROPROW_KEY("field.row_length", field.row_length),
      CROPROW_KEY("field.curvature", field.curvature),
      CROPROW_KEY("field.gap_rate", field.gap_rate),
      CROPROW_KEY("field.gap_length", field.gap_length),
      CROPROW_KEY("field.weed_density", field.weed_density),
      CROPROW_KEY("field.width_min", field.width_min),
      CROPROW_KEY("field.width_max", field.width_max),
      CROPROW_KEY("field.width_chunk", field.width_chunk),
      CROPROW_KEY("field.weed_radius_min", field.weed_radius_min),
      CROPROW_KEY("field.weed_radius_max", field.weed_radius_max),
      CROPROW_KEY("field.seed", field.seed),
      CROPROW_KEY("cam.height_m", camera.height_m),
      CROPROW_KEY("cam.tilt_deg", camera.tilt_deg),
      CROPROW_KEY("cam.focal_px", camera.focal_px),
      CROPROW_KEY("cam.image_w", camera.image_w),
      CROPROW_KEY("cam.image_h", camera.image_h),
      CROPROW_KEY("scan.s", scan.s),
      CROPROW_KEY("scan.anchor_x_min_frac", scan.anchor_x_min_frac),
      CROPROW_KEY("scan.anchor_x_max_frac", scan.anchor_x_max_frac),
      CROPROW_KEY("scan.anchor_threshold_frac", scan.anchor_threshold_frac),
      CROPROW_KEY("scan.n_max", scan.n_max),
      CROPROW_KEY("scan.pr_offset_frac", scan.pr_offset_frac),
      CROPROW_KEY("scan.pr_min_frac", scan.pr_min_frac),
      CROPROW_KEY("scan.pr_max_frac", scan.pr_max_frac),
      CROPROW_KEY("scan.tie_break", scan.tie_break),
      CROPROW_KEY("ctrl.alpha", controller.alpha),
      CROPROW_KEY("ctrl.w1", controller.w1),
      CROPROW_KEY("ctrl.w2", controller.w2),
      CROPROW_KEY("ctrl.v", controller.v),
      CROPROW_KEY("ctrl.omega_limit", controller.omega_limit),
      CROPROW_KEY("exit.lambda", exit.lambda),
      CROPROW_KEY("exit.t_e", exit.t_e),
      CROPROW_KEY("trial.frames_max", trial.frames_max),
      CROPROW_KEY("trial.dt", trial.dt),
      CROPROW_KEY("trial.initial_heading_range_deg", trial.initial_heading_range_deg),
      CROPROW_KEY("trial.initial_heading_deg", trial.initial_heading_deg),
      CROPROW_KEY("trial.start_x", trial.start_x),
      CROPROW_KEY("trial.start_y", trial.start_y),
      CROPROW_KEY("trial.trials", trial.trials),
      CROPROW_KEY("trial.seed", trial.seed),
      CROPROW_KEY("trial.abort_after", trial.abort_after),
      CROPROW_KEY("trial.eor_beta", trial.eor_beta),
      CROPROW_KEY("trial.eps_theta_max", trial.eps_theta_max),
      CROPROW_KEY("trial.eps_p_max", trial.eps_p_max),
      CROPROW_KEY("trial.exit_enabled", trial.exit_enabled),
      CROPROW_KEY("trial.vary_field_seed", trial.vary_field_seed),
  };
  return table;
}

#undef CROPROW_KEY

const Entry& find(std::string_view key) {
  for (const auto& e : entries())
    if (key == e.key) return e;
  throw ConfigError(std::string(key), "unknown config key '" + std::string(key) + "'");
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(std::string(key), "invalid number for '" + std::string(key) + "': '" + std::string(v) + "'");
  return out;
}

template <typename I>
I parse_integer(std::string_view key, std::string_view v) {
  I out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(std::string(key), "invalid integer for '" + std::string(key) + "': '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError(std::string(key), "invalid boolean for '" + std::string(key) + "': '" + std::string(v) + "'");
}

}  // namespace

void apply_setting(SimSetup& setup, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  const auto& entry = find(key);
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          *p = parse_double(key, value);
        } else if constexpr (std::is_same_v<T, int>) {
          *p = parse_integer<int>(key, value);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          *p = parse_integer<std::uint64_t>(key, value);
        } else if constexpr (std::is_same_v<T, bool>) {
          *p = parse_bool(key, value);
        } else if constexpr (std::is_same_v<T, TieBreak>) {
          if (value == "centre")
            *p = TieBreak::PlateauCentre;
          else if (value == "smallest")
            *p = TieBreak::Smallest;
          else
            throw ConfigError(std::string(key), "invalid value for '" + std::string(key) + "': '" +
                                                    std::string(value) + "' (centre or smallest)");
        } else {
          if (value.empty() || value == "none")
            p->reset();
          else
            *p = parse_double(key, value);
        }
      },
      entry.target(setup));
}

void apply_override(SimSetup& setup, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(std::string(trim(assignment)), "override '" + std::string(assignment) + "' is not key=value");
  apply_setting(setup, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void apply_config_text(SimSetup& setup, std::string_view text) {
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.find('=') == std::string_view::npos)
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + ": expected key=value");
    apply_override(setup, line);
  }
}

void apply_config_file(SimSetup& setup, const std::filesystem::path& path) {
  apply_config_text(setup, read_file(path));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

std::string dump_config(const SimSetup& setup) {
  SimSetup copy = setup;
  std::string out;
  for (const auto& e : entries()) {
    out += e.key;
    out += '=';
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>) {
            out += std::isinf(*p) ? std::string("inf") : fmt6(*p);
          } else if constexpr (std::is_same_v<T, bool>) {
            out += *p ? "true" : "false";
          } else if constexpr (std::is_same_v<T, std::optional<double>>) {
            out += *p ? fmt6(**p) : std::string("none");
          } else if constexpr (std::is_same_v<T, TieBreak>) {
            out += *p == TieBreak::Smallest ? "smallest" : "centre";
          } else {
            out += std::to_string(*p);
          }
        },
        e.target(copy));
    out += '\n';
  }
  return out;
}

}  // namespace croprow
