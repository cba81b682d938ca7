#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "vcl/util.hpp"
#include "vcl/curriculum.hpp"
#include "vcl/model.hpp"

namespace {

using namespace vcl;

ClassifierSpec external(const std::string& args = "") {
  ClassifierSpec s;
  s.kind = ClassifierKind::External;
  s.command = std::string(VCL_FAKE_MODEL) + args;
  return s;
}

TEST(External, TrainPredictEvaluate) {
  auto c = new_classifier(external());
  const auto data = test::toy_dataset(5);
  EXPECT_EQ(c->predict(data[0]).p, 0.5);
  const auto r = c->train(data, 10, {});
  EXPECT_EQ(r.epochs_run, 2u);
  EXPECT_EQ(evaluate(*c, data).f1, 1.0);
  EXPECT_EQ(c->fine_tune(data, 3).epochs_run, 3u);
}

TEST(External, SnapshotRoundTrip) {
  auto c = new_classifier(external());
  const auto data = test::toy_dataset(3);
  c->train(data, 1, {});
  ASSERT_TRUE(c->supports_snapshot());
  const auto restored = restore_classifier(external(), c->snapshot());
  for (const auto& s : data) EXPECT_EQ(restored->predict(s).p, c->predict(s).p);
}

TEST(External, NoSnapshotCapability) {
  auto c = new_classifier(external(" --no-snapshot"));
  EXPECT_FALSE(c->supports_snapshot());
  EXPECT_THROW(c->snapshot(), UnsupportedError);
}

TEST(External, LaunchFailures) {
  ClassifierSpec s;
  s.kind = ClassifierKind::External;
  s.command = "/nonexistent/model-binary";
  EXPECT_THROW(new_classifier(s), BridgeError);
  EXPECT_THROW(new_classifier(external(" --fail-handshake")), BridgeError);
  s.command = "";
  EXPECT_THROW(new_classifier(s), ConfigError);
}

TEST(External, CurriculumRuns) {
  const auto data = test::toy_dataset(12);
  std::vector<DifficultyScore> scores;
  for (const auto& s : data) scores.push_back({s.id, 0.0, Strategy::Code, std::nullopt});
  TrainingOptions o;
  o.augment = true;
  const auto r = run_curriculum(plan(scores, 3), data, data, external(), o);
  EXPECT_EQ(r.manifest.stages.size(), 3u);
  EXPECT_EQ(r.manifest.valid_metrics->f1, 1.0);
}

}  // namespace
