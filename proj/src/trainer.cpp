#include "gcfc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gcfc/errors.hpp"
#include "gcfc/optim.hpp"
#include "gcfc/rng.hpp"

namespace gcfc {

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw ValidationError("train: lr must be positive and finite");
  if (weight_decay < 0.0 || !std::isfinite(weight_decay))
    throw ValidationError("train: weight_decay must be >= 0 and finite");
  if (patience < 1) throw ValidationError("train: patience must be >= 1");
}

Metrics evaluate_model(GraphCfcModel& model,
                       const std::vector<const Dialogue*>& dialogues,
                       const std::vector<std::string>& labels) {
  int c = static_cast<int>(labels.size());
  std::vector<std::vector<long>> confusion(c, std::vector<long>(c, 0));
  for (const Dialogue* d : dialogues) {
    std::vector<int> pred = model.predict(*d);
    for (std::size_t i = 0; i < d->utterances.size(); ++i)
      confusion[d->utterances[i].label][pred[i]] += 1;
  }
  return Metrics::from_confusion(confusion, labels);
}

Metrics evaluate_model(GraphCfcModel& model, const Corpus& corpus) {
  std::vector<const Dialogue*> ptrs;
  ptrs.reserve(corpus.dialogues.size());
  for (const Dialogue& d : corpus.dialogues) ptrs.push_back(&d);
  return evaluate_model(model, ptrs, corpus.header.labels);
}

TrainResult train_model(GraphCfcModel& model, const SplitResult& split,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.dialogues.empty() || split.valid.dialogues.empty() ||
      split.test.dialogues.empty())
    throw ValidationError("train: all three splits must be non-empty");

  AdamW::Config oc;
  oc.lr = cfg.lr;
  oc.weight_decay = cfg.weight_decay;
  AdamW opt(model.params(), oc);
  Rng shuffle_rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ull);

  std::vector<const Dialogue*> train;
  for (const Dialogue& d : split.train.dialogues) train.push_back(&d);

  TrainResult result;
  ParamStore::Snapshot best = model.params().snapshot();
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates on the dialogue order, one shared stream across epochs.
    for (std::size_t i = train.size(); i > 1; --i) {
      int j = shuffle_rng.uniform_int(static_cast<int>(i));
      std::swap(train[i - 1], train[static_cast<std::size_t>(j)]);
    }

    double loss_sum = 0.0;
    long utt_sum = 0;
    int step = 0;
    for (std::size_t at = 0; at < train.size(); at += cfg.batch_size) {
      ++step;
      std::vector<const Dialogue*> batch(
          train.begin() + at,
          train.begin() + std::min(at + cfg.batch_size, train.size()));
      long batch_utts = 0;
      for (const Dialogue* d : batch)
        batch_utts += static_cast<long>(d->utterances.size());
      try {
        model.params().zero_grads();
        auto losses = model.batch_loss(batch, /*train=*/true);
        backward(losses.total);
        opt.step();
        loss_sum += losses.total->data[0] * static_cast<double>(batch_utts);
        utt_sum += batch_utts;
      } catch (const NumericError& e) {
        throw NumericError("train: diverged at epoch " + std::to_string(epoch) +
                           " step " + std::to_string(step) + ": " + e.what());
      }
    }

    Metrics vm = evaluate_model(model, split.valid);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = utt_sum > 0 ? loss_sum / static_cast<double>(utt_sum) : 0.0;
    rec.valid_accuracy = vm.accuracy;
    rec.valid_wf1 = vm.weighted_f1;
    result.history.push_back(rec);
    if (cfg.verbose) {
      std::cout << "epoch " << std::setw(3) << epoch << "  train_loss "
                << std::fixed << std::setprecision(4) << rec.train_loss
                << "  valid_acc " << rec.valid_accuracy << "  valid_wf1 "
                << rec.valid_wf1 << "\n"
                << std::defaultfloat << std::setprecision(6);
    }

    if (result.best_epoch == 0 || rec.valid_wf1 > result.best_valid_wf1) {
      result.best_epoch = epoch;
      result.best_valid_wf1 = rec.valid_wf1;
      best = model.params().snapshot();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  model.params().restore(best);
  result.valid = evaluate_model(model, split.valid);
  result.test = evaluate_model(model, split.test);
  return result;
}

// ---------------------------------------------------------------------------
// Ablation studies.

namespace {

struct Variant {
  std::string label;
  TrainConfig cfg;
};

struct VariantOutcome {
  double test_accuracy = 0.0;
  double test_wf1 = 0.0;
  double valid_wf1 = 0.0;
};

// Trains one fresh model per seed and averages the outcome.
VariantOutcome run_variant(const Corpus& corpus, const TrainConfig& cfg,
                           const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ValidationError("ablate: seed list is empty");
  SplitResult split = split_corpus(corpus, cfg.split, cfg.split_seed);
  VariantOutcome mean;
  for (std::uint64_t seed : seeds) {
    TrainConfig run = cfg;
    run.seed = seed;
    ModelConfig mc = run.model;
    mc.num_classes = static_cast<int>(corpus.header.labels.size());
    mc.dim_t = corpus.header.dim_t;
    mc.dim_a = corpus.header.dim_a;
    mc.dim_v = corpus.header.dim_v;
    mc.max_speakers = corpus.max_speakers();
    run.model = mc;
    GraphCfcModel model(mc, seed);
    TrainResult r = train_model(model, split, run);
    mean.test_accuracy += r.test.accuracy;
    mean.test_wf1 += r.test.weighted_f1;
    mean.valid_wf1 += r.best_valid_wf1;
  }
  double n = static_cast<double>(seeds.size());
  mean.test_accuracy /= n;
  mean.test_wf1 /= n;
  mean.valid_wf1 /= n;
  return mean;
}

AblationReport grid_report(const std::string& study, const Corpus& corpus,
                           const std::vector<Variant>& variants,
                           const std::vector<std::uint64_t>& seeds) {
  AblationReport rep;
  rep.study = study;
  rep.columns = {"test_accuracy", "test_wf1", "valid_wf1"};
  for (const Variant& v : variants) {
    VariantOutcome o = run_variant(corpus, v.cfg, seeds);
    rep.rows.push_back({v.label, {o.test_accuracy, o.test_wf1, o.valid_wf1}});
  }
  return rep;
}

TrainConfig with_epochs(TrainConfig cfg, int epochs_override) {
  if (epochs_override > 0) cfg.epochs = epochs_override;
  return cfg;
}

}  // namespace

const std::vector<std::string>& ablation_studies() {
  static const std::vector<std::string> names = {
      "modality_subsets", "gatmlp_components", "subspace_losses", "embeddings",
      "skip_vs_depth",    "window_sweep",      "three_emotion"};
  return names;
}

AblationReport run_ablation(const std::string& study, const Corpus& corpus,
                            const TrainConfig& base, const AblationOptions& opts) {
  const auto& names = ablation_studies();
  if (std::find(names.begin(), names.end(), study) == names.end()) {
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    throw ValidationError("ablate: unknown study '" + study + "' (expected one of " +
                          all + ")");
  }
  TrainConfig cfg = with_epochs(base, opts.epochs_override);

  if (study == "modality_subsets") {
    std::vector<Variant> variants;
    for (const char* mods : {"a", "v", "t", "av", "at", "vt", "avt"}) {
      Variant v{mods, cfg};
      v.cfg.model.modalities = parse_modalities(mods);
      variants.push_back(std::move(v));
    }
    return grid_report(study, corpus, variants, opts.seeds);
  }

  if (study == "gatmlp_components") {
    std::vector<Variant> variants;
    variants.push_back({"full", cfg});
    variants.push_back({"no_multigat", cfg});
    variants.back().cfg.model.use_multigat = false;
    variants.push_back({"no_feedforward", cfg});
    variants.back().cfg.model.use_feedforward = false;
    variants.push_back({"no_skip", cfg});
    variants.back().cfg.model.skip_connection = false;
    return grid_report(study, corpus, variants, opts.seeds);
  }

  if (study == "subspace_losses") {
    std::vector<Variant> variants;
    for (bool shr : {true, false})
      for (bool sep : {true, false}) {
        std::string label = std::string(shr ? "shared" : "noshared") + "_" +
                            (sep ? "separate" : "noseparate");
        Variant v{label, cfg};
        v.cfg.model.shared_loss = shr;
        v.cfg.model.separate_loss = sep;
        variants.push_back(std::move(v));
      }
    return grid_report(study, corpus, variants, opts.seeds);
  }

  if (study == "embeddings") {
    std::vector<Variant> variants;
    for (bool spk : {true, false})
      for (bool et : {true, false}) {
        std::string label = std::string(spk ? "speaker" : "nospeaker") + "_" +
                            (et ? "edgetype" : "noedgetype");
        Variant v{label, cfg};
        v.cfg.model.speaker_embedding = spk;
        v.cfg.model.edge_type_embedding = et;
        variants.push_back(std::move(v));
      }
    return grid_report(study, corpus, variants, opts.seeds);
  }

  if (study == "skip_vs_depth") {
    std::vector<Variant> variants;
    for (int depth : opts.depths)
      for (bool skip : {true, false}) {
        std::string label = "depth" + std::to_string(depth) + "_" +
                            (skip ? "skip" : "noskip");
        Variant v{label, cfg};
        v.cfg.model.layers_per_stage = depth;
        v.cfg.model.skip_connection = skip;
        variants.push_back(std::move(v));
      }
    AblationReport rep = grid_report(study, corpus, variants, opts.seeds);
    int max_depth = *std::max_element(opts.depths.begin(), opts.depths.end());
    double with_skip = 0.0, without = 0.0;
    for (const auto& row : rep.rows) {
      if (row.label == "depth" + std::to_string(max_depth) + "_skip")
        with_skip = row.values[2];
      if (row.label == "depth" + std::to_string(max_depth) + "_noskip")
        without = row.values[2];
    }
    std::ostringstream note;
    note << "at depth " << max_depth << ": mean valid_wf1 with skip "
         << std::fixed << std::setprecision(4) << with_skip << ", without "
         << without;
    rep.notes.push_back(note.str());
    if (with_skip < without)
      rep.notes.push_back(
          "warning: skip connections did not help at the maximum depth");
    return rep;
  }

  if (study == "window_sweep") {
    std::vector<Variant> variants;
    for (int w : opts.windows) {
      Variant v{"window" + std::to_string(w), cfg};
      v.cfg.model.window = Window{w, w};
      variants.push_back(std::move(v));
    }
    return grid_report(study, corpus, variants, opts.seeds);
  }

  // three_emotion: the corpus is coarsened onto the matching three-way
  // scheme and the same configuration is trained on both versions.
  LabelScheme scheme = LabelScheme::for_labels(corpus.header.labels);
  Corpus coarse = coarsen_labels(corpus, scheme);
  AblationReport rep;
  rep.study = study;
  rep.columns = {"test_accuracy", "test_wf1", "valid_wf1"};
  std::string fine_label = std::to_string(corpus.header.labels.size()) + "way";
  VariantOutcome fo = run_variant(corpus, cfg, opts.seeds);
  rep.rows.push_back({fine_label, {fo.test_accuracy, fo.test_wf1, fo.valid_wf1}});
  VariantOutcome co = run_variant(coarse, cfg, opts.seeds);
  rep.rows.push_back(
      {std::to_string(scheme.coarse.size()) + "way",
       {co.test_accuracy, co.test_wf1, co.valid_wf1}});
  for (const std::string& fine : corpus.header.labels)
    rep.notes.push_back("mapping: " + fine + " -> " + scheme.to_coarse.at(fine));
  return rep;
}

std::string AblationReport::csv() const {
  std::size_t lw = std::string("variant").size();
  for (const Row& r : rows) lw = std::max(lw, r.label.size());
  std::vector<std::size_t> cw(columns.size());
  std::vector<std::vector<std::string>> cells(rows.size());
  for (std::size_t c = 0; c < columns.size(); ++c) cw[c] = columns[c].size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].values.size(); ++c) {
      std::ostringstream ss;
      ss << std::fixed << std::setprecision(6) << rows[i].values[c];
      cells[i].push_back(ss.str());
      cw[c] = std::max(cw[c], cells[i][c].size());
    }
  }
  std::ostringstream out;
  out << "variant" << std::string(lw - 7, ' ');
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << ", " << std::string(cw[c] - columns[c].size(), ' ') << columns[c];
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].label << std::string(lw - rows[i].label.size(), ' ');
    for (std::size_t c = 0; c < cells[i].size(); ++c)
      out << ", " << std::string(cw[c] - cells[i][c].size(), ' ') << cells[i][c];
    out << "\n";
  }
  return out.str();
}

nlohmann::json AblationReport::to_json() const {
  nlohmann::json j;
  j["study"] = study;
  j["columns"] = columns;
  j["rows"] = nlohmann::json::array();
  for (const Row& r : rows) {
    nlohmann::json row;
    row["variant"] = r.label;
    for (std::size_t c = 0; c < columns.size() && c < r.values.size(); ++c)
      row[columns[c]] = r.values[c];
    j["rows"].push_back(row);
  }
  j["notes"] = notes;
  return j;
}

}  // namespace gcfc
