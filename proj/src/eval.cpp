#include "croprow/eval.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace croprow {

namespace {

struct Normalizers {
  double theta = 1.0;
  double p = 1.0;
};

Normalizers resolve(const std::vector<FrameError>& frames, const EpsilonMode& mode) {
  if (mode.kind == EpsilonMode::Kind::Fixed) {
    if (!(mode.theta_max > 0.0 && mode.p_max > 0.0))
      throw std::invalid_argument("fixed epsilon normalizers must be positive");
    return {mode.theta_max, mode.p_max};
  }
  Normalizers n{0.0, 0.0};
  for (const auto& f : frames) {
    if (f.failed) continue;
    n.theta = std::max(n.theta, f.delta_theta_abs);
    n.p = std::max(n.p, f.delta_p_abs);
  }
  if (n.theta == 0.0) n.theta = 1.0;
  if (n.p == 0.0) n.p = 1.0;
  return n;
}

double score(const std::vector<const FrameError*>& frames, Normalizers norm) {
  std::vector<double> terms;
  terms.reserve(frames.size() * 2);
  for (const auto* f : frames) {
    if (f->failed) {
      terms.push_back(1.0);
      terms.push_back(1.0);
      continue;
    }
    if (f->delta_theta_abs < 0.0 || f->delta_p_abs < 0.0)
      throw std::invalid_argument("frame errors must be non-negative");
    terms.push_back(std::min(1.0, f->delta_theta_abs / norm.theta));
    terms.push_back(std::min(1.0, f->delta_p_abs / norm.p));
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  const double eps = 1.0 - sum / (2.0 * static_cast<double>(frames.size()));
  return std::clamp(eps, 0.0, 1.0);
}

std::string class_key(const FrameError& f) {
  if (f.class_id) {
    // Zero-padded so lexical order matches numeric order for ids below 10^4.
    std::string id = std::to_string(*f.class_id);
    if (*f.class_id >= 0 && id.size() < 4) id.insert(0, 4 - id.size(), '0');
    return id;
  }
  auto labels = f.categories;
  std::sort(labels.begin(), labels.end());
  std::string key = "~";
  for (std::size_t i = 0; i < labels.size(); ++i) key += (i ? ";" : "") + labels[i];
  return key;
}

}  // namespace

EpsilonReport epsilon(const std::vector<FrameError>& frames, const EpsilonMode& mode) {
  if (frames.empty()) throw std::invalid_argument("epsilon requires at least one frame");
  const auto norm = resolve(frames, mode);
  std::vector<const FrameError*> ptrs;
  ptrs.reserve(frames.size());
  for (const auto& f : frames) ptrs.push_back(&f);

  EpsilonReport report;
  report.epsilon = score(ptrs, norm);
  report.n = frames.size();
  report.theta_max_used = norm.theta;
  report.p_max_used = norm.p;
  report.mode = mode.name();
  return report;
}

double frame_epsilon(double delta_theta_abs, double delta_p_abs, double theta_max, double p_max) {
  FrameError f;
  f.delta_theta_abs = delta_theta_abs;
  f.delta_p_abs = delta_p_abs;
  return score({&f}, {theta_max, p_max});
}

CategoryTable per_category_report(const std::vector<FrameError>& frames, const EpsilonMode& mode, bool strict) {
  CategoryTable table;
  table.overall = epsilon(frames, mode);
  const Normalizers norm{table.overall.theta_max_used, table.overall.p_max_used};

  std::map<std::string, std::vector<const FrameError*>> by_class;
  std::map<std::string, std::set<std::string>> class_labels;
  for (const auto& f : frames) {
    if (f.categories.empty()) {
      if (strict) throw std::invalid_argument("frame without a category label in strict mode");
      continue;
    }
    const auto key = class_key(f);
    by_class[key].push_back(&f);
    class_labels[key].insert(f.categories.begin(), f.categories.end());
  }

  std::map<std::string, std::vector<double>> by_category;
  for (const auto& [key, members] : by_class) {
    ClassScore cs;
    cs.key = key;
    cs.frames = members.size();
    cs.epsilon = score(members, norm);
    cs.categories.assign(class_labels[key].begin(), class_labels[key].end());
    for (const auto& c : cs.categories) by_category[c].push_back(cs.epsilon);
    table.overall.per_class[key] = cs.epsilon;
    table.classes.push_back(std::move(cs));
  }

  for (auto& [category, scores] : by_category) {
    std::sort(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores) sum += s;
    CategoryScore cat{category, scores.size(), sum / static_cast<double>(scores.size())};
    table.overall.per_category[category] = cat.epsilon;
    table.categories.push_back(cat);
  }
  return table;
}

}  // namespace croprow
