#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcfc/corpus.hpp"
#include "gcfc/encoders.hpp"
#include "gcfc/gatmlp.hpp"
#include "gcfc/graph.hpp"
#include "gcfc/nn.hpp"
#include "gcfc/params.hpp"

namespace gcfc {

// Modality handles in fusion order: visual and acoustic pair up first, text
// joins second, the shared representation last.
enum class Mod { V = 0, A = 1, T = 2 };

char mod_char(Mod m);
// Parses subset strings like "avt", "at", "v"; result is in fusion order.
std::vector<Mod> parse_modalities(const std::string& s);
std::string modalities_str(const std::vector<Mod>& mods);

struct ModelConfig {
  int num_classes = 0;
  int dim_t = 0, dim_a = 0, dim_v = 0;
  int max_speakers = 0;

  int d = 64;  // single model width: d_enc = d_att = d_et = d
  int lstm_hidden = 32;
  int heads = 2;
  int layers_per_stage = 2;
  Window window{2, 2};
  DirectionMode direction = DirectionMode::FutureAsInEdge;
  double mu = 1.0;
  double dropout = 0.1;
  std::vector<Mod> modalities = {Mod::V, Mod::A, Mod::T};

  bool skip_connection = true;
  bool edge_type_embedding = true;
  bool speaker_embedding = true;
  bool use_multigat = true;
  bool use_feedforward = true;
  NormPosition norm = NormPosition::Post;
  HeadMerge head_merge = HeadMerge::Average;

  double lambda_l2 = 1e-5;  // on classification-head parameters only
  bool shared_loss = true;
  bool separate_loss = true;

  void validate() const;
};

// Pairwise cross-modal complementation model. Each stage stacks the features
// of its two inputs into one 2n-node graph (fresh modality slots, own edge
// type table and embeddings), runs the GAT-MLP layers, then splits the two
// blocks and projects their per-utterance concatenation back to width d.
// Cascade: (v, a) -> H1; (H1, t) -> H2; (H2, shared) -> H'. Runs with a
// single modality use one intra-only stage and skip the shared mapping
// entirely; two-modality runs use one pair stage plus the shared stage.
class GraphCfcModel {
 public:
  GraphCfcModel(const ModelConfig& cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  void seed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

  struct Forward {
    ValuePtr main_logits;    // n x C
    ValuePtr shared_logits;  // null when the shared head is absent
    std::vector<std::pair<Mod, ValuePtr>> sep_logits;
  };
  Forward forward(const Dialogue& d, bool train);

  // Multi-task objective over a batch of dialogues. Each component is the
  // mean cross-entropy over all utterances in the batch plus lambda times
  // the squared L2 norm of its head's own parameters. Auxiliary components
  // enter the total through learnable log-variance weights:
  //   total = L_cls + sum_i (exp(-s_i) L_i + s_i)
  struct Losses {
    ValuePtr total;
    ValuePtr cls;
    ValuePtr shr;  // null when absent
    std::vector<std::pair<Mod, ValuePtr>> sep;
  };
  Losses batch_loss(const std::vector<const Dialogue*>& batch, bool train);

  // Eval-mode argmax predictions, ties resolved to the lowest class index.
  std::vector<int> predict(const Dialogue& d);

  bool has_shared_path() const { return cfg_.modalities.size() >= 2; }

 private:
  struct Stage {
    int m = 0;  // modality slots in this stage's graph (1 or 2)
    EdgeTypeTable table;
    std::vector<GatMlpLayerParams> layers;
    LinearParams proj;  // 2d -> d, only when m == 2
  };
  struct ClsHead {
    LinearParams l0, l1;
  };

  ValuePtr encode_modality(Mod m, const Dialogue& d);
  ValuePtr run_stage(Stage& st, const ValuePtr& x_p, const ValuePtr& x_q,
                     const std::vector<int>& speakers, bool train);
  ValuePtr head_logits(const ClsHead& h, const ValuePtr& x);
  ValuePtr head_l2(const ClsHead& h) const;

  ModelConfig cfg_;
  ParamStore params_;
  Rng dropout_rng_;

  TextEncoderParams text_enc_;
  LinearParams a_enc_, v_enc_;
  ValuePtr s_emb_;
  SubspaceMapParams shr_map_;
  LinearParams shr_fuse_;
  std::map<Mod, SubspaceMapParams> sep_map_;
  std::vector<Stage> stages_;
  ClsHead head_main_;
  std::optional<ClsHead> head_shr_;
  std::map<Mod, ClsHead> head_sep_;
  ValuePtr s_shr_;
  std::map<Mod, ValuePtr> s_sep_;
};

}  // namespace gcfc
