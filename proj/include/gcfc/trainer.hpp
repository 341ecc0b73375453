#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "gcfc/corpus.hpp"
#include "gcfc/metrics.hpp"
#include "gcfc/model.hpp"

namespace gcfc {

struct TrainConfig {
  ModelConfig model;

  int epochs = 50;
  int batch_size = 8;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::uint64_t seed = 0;  // parameter init, dropout, and batch shuffling
  int patience = 15;       // epochs without validation improvement before stopping
  SplitScheme split = SplitScheme::Sequential;
  std::uint64_t split_seed = 0;
  bool verbose = false;  // per-epoch progress lines on stdout

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;           // 1-based
  double train_loss = 0.0; // utterance-weighted mean total loss
  double valid_accuracy = 0.0;
  double valid_wf1 = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 1-based epoch of the best validation weighted F1
  double best_valid_wf1 = 0.0;
  Metrics valid;  // best snapshot on the validation split
  Metrics test;   // best snapshot on the test split
};

// Mini-batch training loop with early stopping on validation weighted F1.
// The model's parameters end up restored to the best-validation snapshot,
// which is what the returned valid/test metrics are computed from. Numeric
// divergence rethrows with the epoch and step attached.
TrainResult train_model(GraphCfcModel& model, const SplitResult& split,
                        const TrainConfig& cfg);

Metrics evaluate_model(GraphCfcModel& model,
                       const std::vector<const Dialogue*>& dialogues,
                       const std::vector<std::string>& labels);
Metrics evaluate_model(GraphCfcModel& model, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Ablation studies. Each study trains fresh models over a grid of config
// variants (averaged over opts.seeds) on the given corpus and collects one
// report row per variant.

struct AblationOptions {
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int epochs_override = -1;  // < 0 keeps the base config's epoch count
  std::vector<int> depths = {2, 4, 8};    // skip_vs_depth
  std::vector<int> windows = {0, 2, 4, 6};  // window_sweep (past = future = w)
};

struct AblationReport {
  std::string study;
  std::vector<std::string> columns;  // value column names
  struct Row {
    std::string label;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::vector<std::string> notes;

  std::string csv() const;  // header + aligned comma-separated rows
  nlohmann::json to_json() const;
};

// Study names accepted by run_ablation.
const std::vector<std::string>& ablation_studies();

AblationReport run_ablation(const std::string& study, const Corpus& corpus,
                            const TrainConfig& base, const AblationOptions& opts);

}  // namespace gcfc
