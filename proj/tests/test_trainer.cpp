#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "gcfc/corpus.hpp"
#include "gcfc/model.hpp"
#include "gcfc/trainer.hpp"

using namespace gcfc;

namespace {

Corpus small_corpus(int dialogues, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.dialogues = dialogues;
  cfg.len_min = 2;
  cfg.len_max = 4;
  cfg.dim_t = cfg.dim_a = cfg.dim_v = 4;
  return generate_synthetic(cfg, seed);
}

TrainConfig small_train(const Corpus& c) {
  TrainConfig t;
  t.model.num_classes = static_cast<int>(c.header.labels.size());
  t.model.dim_t = c.header.dim_t;
  t.model.dim_a = c.header.dim_a;
  t.model.dim_v = c.header.dim_v;
  t.model.max_speakers = c.max_speakers();
  t.model.d = 6;
  t.model.lstm_hidden = 3;
  t.model.heads = 1;
  t.model.layers_per_stage = 1;
  t.model.window = {1, 1};
  t.model.dropout = 0.0;
  t.epochs = 3;
  t.batch_size = 4;
  return t;
}

}  // namespace

TEST_CASE("metrics from a worked confusion matrix") {
  // truth x prediction:   A predicted A twice, B once; B predicted A once,
  // B six times.  acc = 8/10, F1_A = 2/3, F1_B = 6/7, wF1 = .3*2/3 + .7*6/7.
  Metrics m = Metrics::from_confusion({{2, 1}, {1, 6}}, {"A", "B"});
  CHECK(m.total == 10);
  CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
  REQUIRE(m.per_class.size() == 2);
  CHECK(m.per_class[0].label == "A");
  CHECK(m.per_class[0].support == 3);
  CHECK(m.per_class[0].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.per_class[0].recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.per_class[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.per_class[1].f1 == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(m.weighted_f1 ==
        doctest::Approx(0.3 * 2.0 / 3.0 + 0.7 * 6.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("metrics guard degenerate denominators") {
  // Class B never occurs and is never predicted: all of its stats are 0.
  Metrics m = Metrics::from_confusion({{4, 0}, {0, 0}}, {"A", "B"});
  CHECK(m.accuracy == doctest::Approx(1.0));
  CHECK(m.per_class[1].precision == 0.0);
  CHECK(m.per_class[1].recall == 0.0);
  CHECK(m.per_class[1].f1 == 0.0);
  CHECK(m.per_class[1].support == 0);
  CHECK(m.weighted_f1 == doctest::Approx(1.0));  // weights ignore empty classes

  // Predicted but never true: precision 0 for that column's class.
  Metrics p = Metrics::from_confusion({{3, 1}, {0, 0}}, {"A", "B"});
  CHECK(p.per_class[1].precision == 0.0);
  CHECK(p.per_class[1].f1 == 0.0);

  Metrics empty = Metrics::from_confusion({{0, 0}, {0, 0}}, {"A", "B"});
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.weighted_f1 == 0.0);
  CHECK(empty.total == 0);
}

TEST_CASE("train config validation") {
  Corpus c = small_corpus(10, 1);
  TrainConfig t = small_train(c);
  CHECK_NOTHROW(t.validate());
  TrainConfig bad = t;
  bad.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = t;
  bad.patience = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = t;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = t;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = t;
  bad.weight_decay = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("evaluation is independent of dialogue order") {
  Corpus c = small_corpus(8, 3);
  TrainConfig t = small_train(c);
  GraphCfcModel model(t.model, 1);
  std::vector<const Dialogue*> fwd;
  for (const auto& d : c.dialogues) fwd.push_back(&d);
  auto rev = fwd;
  std::reverse(rev.begin(), rev.end());
  Metrics a = evaluate_model(model, fwd, c.header.labels);
  Metrics b = evaluate_model(model, rev, c.header.labels);
  CHECK(a.confusion == b.confusion);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.weighted_f1 == b.weighted_f1);
  Metrics whole = evaluate_model(model, c);
  CHECK(whole.confusion == a.confusion);
}

TEST_CASE("training is bitwise deterministic") {
  Corpus c = small_corpus(12, 5);
  SplitResult split = split_corpus(c, SplitScheme::Sequential, 0);
  TrainConfig t = small_train(c);
  t.epochs = 2;

  GraphCfcModel m1(t.model, t.seed);
  TrainResult r1 = train_model(m1, split, t);
  GraphCfcModel m2(t.model, t.seed);
  TrainResult r2 = train_model(m2, split, t);

  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
    CHECK(r1.history[i].valid_wf1 == r2.history[i].valid_wf1);
  }
  CHECK(r1.best_epoch == r2.best_epoch);
  for (std::size_t i = 0; i < m1.params().count(); ++i) {
    const auto& [n1, v1] = m1.params().items()[i];
    const auto& [n2, v2] = m2.params().items()[i];
    CHECK(n1 == n2);
    CHECK(v1->data == v2->data);
  }
}

TEST_CASE("history bookkeeping and early stopping") {
  Corpus c = small_corpus(12, 7);
  SplitResult split = split_corpus(c, SplitScheme::Sequential, 0);
  TrainConfig t = small_train(c);
  t.epochs = 40;
  t.patience = 3;
  t.lr = 1e-12;  // effectively frozen: validation wF1 never improves
  GraphCfcModel model(t.model, 0);
  TrainResult r = train_model(model, split, t);
  // Epoch 1 sets the baseline; patience epochs without improvement stop it.
  CHECK(r.history.size() == 1 + static_cast<std::size_t>(t.patience));
  CHECK(r.best_epoch == 1);
  for (std::size_t i = 0; i < r.history.size(); ++i)
    CHECK(r.history[i].epoch == static_cast<int>(i) + 1);
  CHECK(r.best_valid_wf1 == r.history[0].valid_wf1);
  CHECK(r.valid.weighted_f1 == doctest::Approx(r.best_valid_wf1));
  CHECK(r.test.total > 0);
}

TEST_CASE("short real training run improves on its first epoch") {
  Corpus c = small_corpus(24, 9);
  SplitResult split = split_corpus(c, SplitScheme::Sequential, 0);
  TrainConfig t = small_train(c);
  t.model.d = 8;
  t.epochs = 6;
  t.lr = 5e-3;
  GraphCfcModel model(t.model, 0);
  TrainResult r = train_model(model, split, t);
  REQUIRE(!r.history.empty());
  CHECK(r.history.back().train_loss < r.history.front().train_loss);
  CHECK(r.best_epoch >= 1);
  CHECK(r.best_epoch <= static_cast<int>(r.history.size()));
}

TEST_CASE("ablation studies are enumerable and reject unknown names") {
  const auto& names = ablation_studies();
  CHECK(std::find(names.begin(), names.end(), "modality_subsets") != names.end());
  CHECK(std::find(names.begin(), names.end(), "skip_vs_depth") != names.end());
  Corpus c = small_corpus(10, 11);
  TrainConfig t = small_train(c);
  AblationOptions opts;
  try {
    run_ablation("bogus_study", c, t, opts);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("bogus_study") != std::string::npos);
    CHECK(msg.find("modality_subsets") != std::string::npos);  // lists choices
  }
}

TEST_CASE("modality subset ablation produces the full ladder") {
  Corpus c = small_corpus(10, 13);
  TrainConfig t = small_train(c);
  t.epochs = 1;
  AblationOptions opts;
  opts.seeds = {0};
  AblationReport r = run_ablation("modality_subsets", c, t, opts);
  CHECK(r.study == "modality_subsets");
  REQUIRE(r.rows.size() == 7);
  std::vector<std::string> want = {"a", "v", "t", "av", "at", "vt", "avt"};
  std::vector<std::string> got;
  for (const auto& row : r.rows) got.push_back(row.label);
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  CHECK(got == want);
  CHECK(r.columns == std::vector<std::string>{"test_accuracy", "test_wf1",
                                              "valid_wf1"});
  for (const auto& row : r.rows) {
    REQUIRE(row.values.size() == r.columns.size());
    for (double v : row.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  std::string csv = r.csv();
  CHECK(csv.find("variant") != std::string::npos);
  CHECK(csv.find("avt") != std::string::npos);
  auto j = r.to_json();
  CHECK(j["study"] == "modality_subsets");
  CHECK(j["rows"].size() == 7);
}

TEST_CASE("three-emotion ablation coarsens fine labels") {
  GeneratorConfig gc;
  gc.dialogues = 10;
  gc.len_min = 2;
  gc.len_max = 4;
  gc.dim_t = gc.dim_a = gc.dim_v = 4;
  gc.labels = GeneratorConfig::Labels::Iemocap6;
  Corpus c = generate_synthetic(gc, 15);
  TrainConfig t = small_train(c);
  t.epochs = 1;
  AblationOptions opts;
  opts.seeds = {0};
  AblationReport r = run_ablation("three_emotion", c, t, opts);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].label == "6way");
  CHECK(r.rows[1].label == "3way");
  bool mapping_note = false;
  for (const auto& n : r.notes)
    if (n.find("Happy") != std::string::npos &&
        n.find("Positive") != std::string::npos)
      mapping_note = true;
  CHECK(mapping_note);
}

TEST_CASE("skip-depth and window ablations cover their grids") {
  Corpus c = small_corpus(10, 17);
  TrainConfig t = small_train(c);
  t.epochs = 1;
  AblationOptions opts;
  opts.seeds = {0};
  opts.depths = {1, 2};
  opts.windows = {0, 1};

  AblationReport sd = run_ablation("skip_vs_depth", c, t, opts);
  std::vector<std::string> labels;
  for (const auto& row : sd.rows) labels.push_back(row.label);
  CHECK(std::find(labels.begin(), labels.end(), "depth1_skip") != labels.end());
  CHECK(std::find(labels.begin(), labels.end(), "depth2_noskip") != labels.end());
  CHECK(sd.rows.size() == 4);
  CHECK(!sd.notes.empty());  // always summarizes the max-depth comparison

  AblationReport ws = run_ablation("window_sweep", c, t, opts);
  REQUIRE(ws.rows.size() == 2);
  CHECK(ws.rows[0].label == "window0");
  CHECK(ws.rows[1].label == "window1");

  AblationReport gm = run_ablation("gatmlp_components", c, t, opts);
  CHECK(gm.rows.size() == 4);
  AblationReport sl = run_ablation("subspace_losses", c, t, opts);
  CHECK(sl.rows.size() == 4);
  AblationReport em = run_ablation("embeddings", c, t, opts);
  CHECK(em.rows.size() == 4);
}
