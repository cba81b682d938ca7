#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "vcl/util.hpp"
#include "vcl/difficulty.hpp"
#include "vcl/metrics.hpp"

namespace {

using namespace vcl;

// Returns a fixed probability for every sample.
class Fixed final : public Classifier {
 public:
  explicit Fixed(double p) : p_(p) {}
  TrainReport train(const Dataset&, std::size_t, const ConvergencePolicy&) override { return {}; }
  TrainReport fine_tune(const Dataset&, std::size_t) override { return {}; }
  Prediction predict(const FunctionSample&) const override { return {p_}; }
  ModelState snapshot() const override { throw UnsupportedError("fixed"); }
  void restore(const ModelState&) override {}

 private:
  double p_;
};

// Straight-loop evaluation of the difficulty formula.
double oracle_ds(int label, std::size_t owner, const std::vector<double>& pos_rate,
                 const std::vector<double>& neg_rate, const std::vector<double>& p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == owner) continue;
    if (label == 1)
      sum += pos_rate[i] * (p[i] - 0.5);
    else
      sum += neg_rate[i] * (0.5 - p[i]);
  }
  return -sum;
}

std::vector<Submodel> fixed_submodels(const std::vector<SubmodelStats>& stats,
                                      const std::vector<double>& p) {
  std::vector<Submodel> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    out.push_back({std::make_unique<Fixed>(p[i]), Dataset(), stats[i]});
  return out;
}

SubmodelStats with_rates(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  SubmodelStats s;
  s.tp = tp;
  s.fp = fp;
  s.tn = tn;
  s.fn = fn;
  return s;
}

TEST(SubmodelStats, WorkedCorrectRate) {
  const auto s = with_rates(800, 300, 700, 200);
  EXPECT_NEAR(*s.pos_rate(), 0.727, 5e-4);
  EXPECT_DOUBLE_EQ(*s.pos_rate(), 800.0 / 1100.0);
  EXPECT_EQ(s.total(), 2000u);
}

TEST(SubmodelStats, AllPositivePredictions) {
  const std::vector<FunctionSample> v{{"a", "x;", 1, {}}, {"b", "x;", 1, {}}, {"c", "x;", 0, {}},
                                      {"d", "x;", 0, {}}};
  const Dataset d("d", v);
  const std::vector<Prediction> preds(4, Prediction{0.9});
  const auto s = confusion_stats(preds, d);
  EXPECT_EQ(s.tp, 2u);
  EXPECT_EQ(s.fp, 2u);
  EXPECT_DOUBLE_EQ(*s.pos_rate(), 0.5);
  EXPECT_FALSE(s.neg_rate());
  EXPECT_EQ(effective_rate(s, 0), 0.0);
}

TEST(ModelDifficulty, WorkedExamples) {
  // label 1, owner 0, r+ = (., 0.8, 0.6), p = (., 0.9, 0.7)
  const std::vector<SubmodelStats> stats{with_rates(1, 0, 1, 0), with_rates(4, 1, 0, 0),
                                         with_rates(3, 2, 0, 0)};
  const auto subs = fixed_submodels(stats, {0.99, 0.9, 0.7});
  const auto ds = model_difficulty({"s", "x;", 1, {}}, 0, subs);
  EXPECT_NEAR(ds.value, -0.44, 1e-12);
  EXPECT_EQ(ds.m, std::optional<std::size_t>(3));
  EXPECT_EQ(ds.strategy, Strategy::Model);

  // label 0, r- = (., 0.8, 0.6), p = (., 0.1, 0.3)
  const std::vector<SubmodelStats> neg{with_rates(0, 0, 1, 0), with_rates(0, 0, 4, 1),
                                       with_rates(0, 0, 3, 2)};
  const auto subs0 = fixed_submodels(neg, {0.01, 0.1, 0.3});
  EXPECT_NEAR(model_difficulty({"s", "x;", 0, {}}, 0, subs0).value, -0.44, 1e-12);
}

TEST(ModelDifficulty, ZeroConfidenceIsZero) {
  const std::vector<SubmodelStats> stats(4, with_rates(3, 1, 2, 2));
  const auto subs = fixed_submodels(stats, {0.5, 0.5, 0.5, 0.5});
  for (int label : {0, 1})
    for (std::size_t owner = 0; owner < 4; ++owner)
      EXPECT_EQ(model_difficulty({"s", "x;", label, {}}, owner, subs).value, 0.0);
}

TEST(ModelDifficulty, OwnerExcluded) {
  const std::vector<SubmodelStats> stats(3, with_rates(1, 0, 1, 0));
  const auto a = fixed_submodels(stats, {0.0, 0.9, 0.9});
  const auto b = fixed_submodels(stats, {1.0, 0.9, 0.9});
  EXPECT_EQ(model_difficulty({"s", "x;", 1, {}}, 0, a).value,
            model_difficulty({"s", "x;", 1, {}}, 0, b).value);
}

TEST(ModelDifficulty, BruteForceOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + uniform_below(rng, 9);
    std::vector<SubmodelStats> stats;
    std::vector<double> p, pos, neg;
    for (std::size_t i = 0; i < m; ++i) {
      stats.push_back(with_rates(uniform_below(rng, 5), uniform_below(rng, 5),
                                 uniform_below(rng, 5), uniform_below(rng, 5)));
      pos.push_back(effective_rate(stats.back(), 1));
      neg.push_back(effective_rate(stats.back(), 0));
      p.push_back(uniform_unit(rng));
    }
    const int label = int(uniform_below(rng, 2));
    const std::size_t owner = uniform_below(rng, m);
    const auto subs = fixed_submodels(stats, p);
    EXPECT_NEAR(model_difficulty({"s", "x;", label, {}}, owner, subs).value,
                oracle_ds(label, owner, pos, neg, p), 1e-12);
  }
}

TEST(ModelDifficulty, SignAndMonotonicity) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 3 + uniform_below(rng, 5);
    std::vector<SubmodelStats> stats;
    std::vector<double> p;
    for (std::size_t i = 0; i < m; ++i) {
      stats.push_back(with_rates(1 + uniform_below(rng, 5), uniform_below(rng, 5),
                                 1 + uniform_below(rng, 5), uniform_below(rng, 5)));
      p.push_back(0.55 + 0.4 * uniform_unit(rng));
    }
    const FunctionSample pos{"s", "x;", 1, {}}, neg{"s", "x;", 0, {}};
    const auto subs = fixed_submodels(stats, p);
    // confident and right is easy, confident and wrong is hard
    EXPECT_LT(model_difficulty(pos, 0, subs).value, 0.0);
    EXPECT_GT(model_difficulty(neg, 0, subs).value, 0.0);

    const std::size_t i = 1 + uniform_below(rng, m - 1);
    auto raised = p;
    raised[i] = std::min(1.0, p[i] + 0.01);
    EXPECT_LT(model_difficulty(pos, 0, fixed_submodels(stats, raised)).value,
              model_difficulty(pos, 0, subs).value);
  }
}

TEST(SortScores, TieBreakById) {
  std::vector<DifficultyScore> s{{"b", 1.0, Strategy::Code, {}}, {"a", 1.0, Strategy::Code, {}},
                                 {"c", -1.0, Strategy::Code, {}}};
  sort_scores(s);
  EXPECT_EQ(s[0].sample_id, "c");
  EXPECT_EQ(s[1].sample_id, "a");
  EXPECT_EQ(s[2].sample_id, "b");
}

DifficultyOptions options(std::size_t m) {
  DifficultyOptions o;
  o.m = m;
  o.spec.feature_dim = 1024;
  o.spec.seed = 5;
  o.seed = 9;
  o.max_epochs = 3;
  return o;
}

TEST(TrainSubmodels, CountsConserved) {
  const auto data = test::toy_dataset(6);
  const auto subs = train_submodels(data, options(3));
  ASSERT_EQ(subs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(subs[i].stats.total(), 4u);
    EXPECT_EQ(subs[i].stats.subset_index, i);
    EXPECT_EQ(subs[i].subset.size(), 4u);
  }
}

TEST(TrainSubmodels, SingleClassSubsetRejected) {
  std::vector<FunctionSample> v;
  for (int i = 0; i < 6; ++i) v.push_back({"s" + std::to_string(i), "x;", i == 0 ? 1 : 0, {}});
  EXPECT_THROW(train_submodels(Dataset("d", v), options(3)), DataError);
}

TEST(ScoreDataset, ModelStrategyMatchesOracle) {
  const auto data = test::toy_dataset(9, 2);
  const auto o = options(3);
  std::vector<SubmodelStats> stats;
  const auto scores = score_dataset(data, Strategy::Model, o, &stats);
  ASSERT_EQ(scores.size(), data.size());

  // Independent recomputation: same partition, same submodel seeds.
  const auto parts = partition_uniform(data, 3, o.seed, o.stratify);
  std::vector<std::unique_ptr<Classifier>> models;
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < 3; ++i) {
    models.push_back(new_classifier(o.spec.with_seed(derive_seed(o.spec.seed, i))));
    models.back()->train(parts[i], o.max_epochs, o.policy);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& s : parts[i]) {
      const bool hit = models.back()->predict(s).p > 0.5;
      tp += hit && s.label == 1;
      fp += hit && s.label == 0;
      tn += !hit && s.label == 0;
      fn += !hit && s.label == 1;
    }
    EXPECT_EQ(stats[i].tp, tp);
    EXPECT_EQ(stats[i].fp, fp);
    pos.push_back(tp + fp ? double(tp) / double(tp + fp) : 0.0);
    neg.push_back(tn + fn ? double(tn) / double(tn + fn) : 0.0);
  }
  std::map<std::string, double> want;
  for (std::size_t j = 0; j < 3; ++j)
    for (const auto& s : parts[j]) {
      std::vector<double> p;
      for (const auto& m : models) p.push_back(m->predict(s).p);
      want[s.id] = oracle_ds(s.label, j, pos, neg, p);
    }
  for (std::size_t k = 0; k < scores.size(); ++k) {
    EXPECT_NEAR(scores[k].value, want.at(scores[k].sample_id), 1e-12);
    if (k) EXPECT_LE(scores[k - 1].value, scores[k].value);
  }
}

TEST(ScoreDataset, CodeStrategy) {
  const auto data = test::toy_dataset(5);
  auto o = options(3);
  EXPECT_THROW(score_dataset(data, Strategy::Code, o), ConfigError);
  o.m.reset();
  EXPECT_THROW(score_dataset(data, Strategy::Model, o), ConfigError);
  const auto scores = score_dataset(data, Strategy::Code, o);
  for (const auto& s : scores)
    EXPECT_EQ(s.value, code_difficulty(*data.find(s.sample_id)).value);
  for (std::size_t k = 1; k < scores.size(); ++k)
    EXPECT_TRUE(scores[k - 1].value < scores[k].value ||
                (scores[k - 1].value == scores[k].value &&
                 scores[k - 1].sample_id < scores[k].sample_id));
}

TEST(Strategy, Parse) {
  EXPECT_EQ(parse_strategy("code"), Strategy::Code);
  EXPECT_EQ(parse_strategy("model"), Strategy::Model);
  EXPECT_THROW(parse_strategy("random"), ConfigError);
}

}  // namespace
