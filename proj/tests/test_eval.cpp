#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "croprow/eval.hpp"

using namespace croprow;

namespace {

FrameError fe(double t, double p, std::vector<std::string> cats = {}, std::optional<int> cls = {}) {
  FrameError f;
  f.delta_theta_abs = t;
  f.delta_p_abs = p;
  f.categories = std::move(cats);
  f.class_id = cls;
  return f;
}

// Plain transcription of the score, no capping or sorting.
double reference(const std::vector<FrameError>& fs, double tmax, double pmax) {
  double s = 0;
  for (const auto& f : fs) s += f.failed ? 2.0 : f.delta_theta_abs / tmax + f.delta_p_abs / pmax;
  return 1.0 - s / (2.0 * static_cast<double>(fs.size()));
}

std::vector<FrameError> random_frames(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> t(0, 30), p(0, 300), u(0, 1);
  std::vector<FrameError> fs;
  for (int i = 0; i < n; ++i) {
    auto f = fe(t(rng), p(rng));
    f.failed = u(rng) < 0.05;
    fs.push_back(f);
  }
  return fs;
}

}  // namespace

TEST(Epsilon, WorkedExamples) {
  EXPECT_EQ(epsilon({fe(0, 0), fe(0, 0)}, EpsilonMode::dataset_max()).epsilon, 1.0);
  EXPECT_EQ(epsilon({fe(20, 256), fe(20, 256)}, EpsilonMode::fixed(20, 256)).epsilon, 0.0);
  const auto r = epsilon({fe(10, 0), fe(20, 50)}, EpsilonMode::dataset_max());
  EXPECT_EQ(r.epsilon, 0.375);
  EXPECT_EQ(r.theta_max_used, 20.0);
  EXPECT_EQ(r.p_max_used, 50.0);
  EXPECT_EQ(r.n, 2u);
  EXPECT_EQ(r.mode, "dataset-max");
}

TEST(Epsilon, EmptyInputRejected) {
  EXPECT_THROW(epsilon({}, EpsilonMode::dataset_max()), std::invalid_argument);
  EXPECT_THROW(epsilon({fe(1, 1)}, EpsilonMode::fixed(0, 1)), std::invalid_argument);
}

TEST(Epsilon, FailedFramesScoreAtMaxima) {
  FrameError failed;
  failed.failed = true;
  EXPECT_EQ(epsilon({failed}, EpsilonMode::dataset_max()).epsilon, 0.0);
  EXPECT_DOUBLE_EQ(epsilon({fe(0, 0), failed}, EpsilonMode::fixed(20, 256)).epsilon, 0.5);
}

TEST(Epsilon, MatchesReferenceAndBounded) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    auto fs = random_frames(rng, 1 + static_cast<int>(rng() % 40));
    const auto r = epsilon(fs, EpsilonMode::dataset_max());
    EXPECT_GE(r.epsilon, 0.0);
    EXPECT_LE(r.epsilon, 1.0);
    EXPECT_NEAR(r.epsilon, reference(fs, r.theta_max_used, r.p_max_used), 1e-12);
  }
}

TEST(Epsilon, ReorderInvariantBitExact) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    auto fs = random_frames(rng, 2 + static_cast<int>(rng() % 50));
    const double a = epsilon(fs, EpsilonMode::dataset_max()).epsilon;
    const double fa = epsilon(fs, EpsilonMode::fixed(20, 256)).epsilon;
    std::shuffle(fs.begin(), fs.end(), rng);
    EXPECT_EQ(epsilon(fs, EpsilonMode::dataset_max()).epsilon, a);
    EXPECT_EQ(epsilon(fs, EpsilonMode::fixed(20, 256)).epsilon, fa);
  }
}

TEST(Epsilon, ScaleInvariantInDatasetMax) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    auto fs = random_frames(rng, 10);
    for (auto& f : fs) f.failed = false;
    const double base = epsilon(fs, EpsilonMode::dataset_max()).epsilon;
    auto scaled = fs;
    for (auto& f : scaled) f.delta_theta_abs *= 3.5;
    EXPECT_NEAR(epsilon(scaled, EpsilonMode::dataset_max()).epsilon, base, 1e-12);
    for (auto& f : scaled) f.delta_p_abs *= 0.25;
    EXPECT_NEAR(epsilon(scaled, EpsilonMode::dataset_max()).epsilon, base, 1e-12);
  }
}

TEST(Epsilon, OneIffZeroErrors) {
  EXPECT_LT(epsilon({fe(0, 0), fe(0, 1e-6)}, EpsilonMode::fixed(20, 256)).epsilon, 1.0);
  EXPECT_EQ(epsilon({fe(0, 0), fe(0, 0)}, EpsilonMode::fixed(20, 256)).epsilon, 1.0);
}

TEST(Epsilon, AddingPerfectFrameIncreasesFixedScore) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    auto fs = random_frames(rng, 5);
    const double before = epsilon(fs, EpsilonMode::fixed(20, 256)).epsilon;
    fs.push_back(fe(0, 0));
    const double after = epsilon(fs, EpsilonMode::fixed(20, 256)).epsilon;
    if (before < 1.0) EXPECT_GT(after, before);
  }
}

TEST(Epsilon, FixedModeCapsTerms) {
  EXPECT_EQ(epsilon({fe(100, 1000)}, EpsilonMode::fixed(20, 256)).epsilon, 0.0);
  EXPECT_EQ(frame_epsilon(10, 128, 20, 256), 0.5);
}

TEST(PerCategory, SingleClass) {
  const std::vector<FrameError> fs{fe(10, 0, {"a"}, 1), fe(20, 50, {"a"}, 1)};
  const auto t = per_category_report(fs, EpsilonMode::dataset_max());
  ASSERT_EQ(t.classes.size(), 1u);
  ASSERT_EQ(t.categories.size(), 1u);
  EXPECT_EQ(t.categories[0].epsilon, t.classes[0].epsilon);
  EXPECT_EQ(t.classes[0].epsilon, 0.375);
}

TEST(PerCategory, HandComputedAverages) {
  // Fixed normalizers 10 deg / 100 px make every class score easy to state.
  const auto mode = EpsilonMode::fixed(10, 100);
  const std::vector<FrameError> fs{
      fe(0, 0, {"e"}, 1),                 // class 1: 1.0
      fe(5, 50, {"e", "f"}, 2),           // class 2: 1 - (0.5 + 0.5) / 2 = 0.5
      fe(10, 0, {"f"}, 3), fe(0, 0, {"f"}, 3),  // class 3: 1 - 1 / 4 = 0.75
  };
  const auto t = per_category_report(fs, mode);
  ASSERT_EQ(t.classes.size(), 3u);
  EXPECT_EQ(t.classes[0].key, "0001");
  EXPECT_DOUBLE_EQ(t.classes[1].epsilon, 0.5);
  EXPECT_DOUBLE_EQ(t.classes[2].epsilon, 0.75);
  ASSERT_EQ(t.categories.size(), 2u);
  EXPECT_EQ(t.categories[0].category, "e");
  EXPECT_DOUBLE_EQ(t.categories[0].epsilon, (1.0 + 0.5) / 2);
  EXPECT_EQ(t.categories[0].classes, 2u);
  EXPECT_DOUBLE_EQ(t.categories[1].epsilon, (0.5 + 0.75) / 2);
  EXPECT_DOUBLE_EQ(t.overall.per_category.at("f"), 0.625);
}

TEST(PerCategory, LabelSetsFormClassesWithoutIds) {
  const std::vector<FrameError> fs{fe(0, 0, {"b", "a"}), fe(10, 100, {"a", "b"}), fe(0, 0, {"a"})};
  const auto t = per_category_report(fs, EpsilonMode::fixed(10, 100));
  ASSERT_EQ(t.classes.size(), 2u);
  EXPECT_EQ(t.classes[0].key, "~a");
  EXPECT_EQ(t.classes[1].key, "~a;b");
  EXPECT_DOUBLE_EQ(t.classes[1].epsilon, 0.5);
}

TEST(PerCategory, StrictModeRequiresLabels) {
  const std::vector<FrameError> fs{fe(0, 0, {"a"}), fe(1, 1)};
  EXPECT_THROW(per_category_report(fs, EpsilonMode::dataset_max()), std::invalid_argument);
  const auto t = per_category_report(fs, EpsilonMode::dataset_max(), false);
  EXPECT_EQ(t.overall.n, 2u);
  EXPECT_EQ(t.classes.size(), 1u);
}
