#pragma once

#include <string>
#include <vector>

#include "gcfc/nn.hpp"
#include "gcfc/params.hpp"
#include "gcfc/value.hpp"

namespace gcfc {

// Text encoder: single-layer bidirectional LSTM over the utterance sequence,
// per-step forward/backward hidden states concatenated (2h) and projected to
// the model width. Gates are kept as separate matrices per direction.
struct LstmDirParams {
  ValuePtr wi, ui, bi;
  ValuePtr wf, uf, bf;
  ValuePtr wg, ug, bg;
  ValuePtr wo, uo, bo;
};

struct TextEncoderParams {
  LstmDirParams fwd, bwd;
  LinearParams proj;  // 2h -> d
  int hidden = 0;
};

LstmDirParams make_lstm_dir(ParamStore& store, const std::string& prefix, int in,
                            int hidden, Rng& rng);
TextEncoderParams make_text_encoder(ParamStore& store, const std::string& prefix, int in,
                                    int hidden, int d, Rng& rng);
// feats: (n, dim_t) -> (n, d)
ValuePtr encode_text(const ValuePtr& feats, const TextEncoderParams& p);

// Acoustic/visual encoder: per-utterance affine map plus ReLU. Rows are
// independent, so utterance order cannot leak into the output.
ValuePtr encode_ff(const ValuePtr& feats, const LinearParams& p);

// X_spk[i] = mu * S_emb[speaker(i)] + X[i]
ValuePtr inject_speaker(const ValuePtr& x, const std::vector<int>& speakers, double mu,
                        const ValuePtr& s_emb);

// Subspace extractor map: Lin -> ReLU -> Drop -> Lin -> Drop -> LayerNorm.
// The shared extractor is one such map applied to every modality (aliased
// parameters, so gradients from all uses land in one accumulator); separate
// extractors are per-modality instances.
struct SubspaceMapParams {
  LinearParams l0, l1;
  ValuePtr gamma, beta;
};

SubspaceMapParams make_subspace_map(ParamStore& store, const std::string& prefix, int in,
                                    int out, Rng& rng);
ValuePtr subspace_map(const ValuePtr& x, const SubspaceMapParams& p, double dropout_rate,
                      bool train, Rng* rng);

}  // namespace gcfc
