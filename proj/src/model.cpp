#include "gcfc/model.hpp"

#include <algorithm>
#include <cmath>

#include "gcfc/errors.hpp"

namespace gcfc {

char mod_char(Mod m) {
  switch (m) {
    case Mod::V: return 'v';
    case Mod::A: return 'a';
    case Mod::T: return 't';
  }
  throw ContractError("mod_char: bad modality");
}

std::vector<Mod> parse_modalities(const std::string& s) {
  bool have[3] = {false, false, false};
  for (char c : s) {
    switch (c) {
      case 'v': have[0] = true; break;
      case 'a': have[1] = true; break;
      case 't': have[2] = true; break;
      default:
        throw ValidationError("modalities: unknown character '" + std::string(1, c) +
                              "' (use subsets of \"avt\")");
    }
  }
  std::vector<Mod> out;
  if (have[0]) out.push_back(Mod::V);
  if (have[1]) out.push_back(Mod::A);
  if (have[2]) out.push_back(Mod::T);
  if (out.empty()) throw ValidationError("modalities: empty set");
  return out;
}

std::string modalities_str(const std::vector<Mod>& mods) {
  std::string s;
  for (Mod m : mods) s += mod_char(m);
  return s;
}

void ModelConfig::validate() const {
  if (num_classes < 2) throw ValidationError("model: num_classes must be >= 2");
  if (dim_t < 1 || dim_a < 1 || dim_v < 1)
    throw ValidationError("model: modality dims must be positive");
  if (max_speakers < 1) throw ValidationError("model: max_speakers must be >= 1");
  if (d < 1) throw ValidationError("model: width d must be positive");
  if (lstm_hidden < 1) throw ValidationError("model: lstm_hidden must be positive");
  if (heads < 1) throw ValidationError("model: need at least one attention head");
  if (layers_per_stage < 1) throw ValidationError("model: need at least one layer per stage");
  if (window.past < 0 || window.future < 0)
    throw ValidationError("model: window sides must be non-negative");
  if (mu < 0.0) throw ValidationError("model: speaker ratio mu must be non-negative");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ValidationError("model: dropout must be in [0,1)");
  if (modalities.empty()) throw ValidationError("model: modality set is empty");
  if (lambda_l2 < 0.0) throw ValidationError("model: lambda_l2 must be non-negative");
}

GraphCfcModel::GraphCfcModel(const ModelConfig& cfg, std::uint64_t init_seed)
    : cfg_(cfg), dropout_rng_(init_seed ^ 0x9e3779b97f4a7c15ULL) {
  cfg_.validate();
  Rng rng(init_seed);
  const int d = cfg_.d;
  const int d_et = cfg_.edge_type_embedding ? d : 0;

  // Encoders, fusion order.
  for (Mod m : cfg_.modalities) {
    switch (m) {
      case Mod::V:
        v_enc_ = make_linear(params_, "enc.v", cfg_.dim_v, d, rng);
        break;
      case Mod::A:
        a_enc_ = make_linear(params_, "enc.a", cfg_.dim_a, d, rng);
        break;
      case Mod::T:
        text_enc_ = make_text_encoder(params_, "enc.t", cfg_.dim_t, cfg_.lstm_hidden, d, rng);
        break;
    }
  }
  if (cfg_.speaker_embedding)
    s_emb_ = params_.add("spk.emb", {cfg_.max_speakers, d}, Init::Normal, rng, 0.1);

  // Subspace extractors. The shared map is a single parameter set reused for
  // every modality; the fusion projection takes the concatenation of the
  // shared outputs in fusion order.
  const int n_mods = static_cast<int>(cfg_.modalities.size());
  if (n_mods >= 2) {
    shr_map_ = make_subspace_map(params_, "sub.shr", d, d, rng);
    shr_fuse_ = make_linear(params_, "sub.shr_fuse", n_mods * d, d, rng);
  }
  for (Mod m : cfg_.modalities)
    sep_map_[m] = make_subspace_map(params_, std::string("sub.sep.") + mod_char(m), d, d,
                                    rng);

  // PairCC stages.
  auto add_stage = [&](const std::string& name, int m_slots) {
    Stage st;
    st.m = m_slots;
    st.table = enumerate_edge_types(cfg_.max_speakers, m_slots);
    for (int l = 0; l < cfg_.layers_per_stage; ++l)
      st.layers.push_back(make_gat_mlp_layer(params_, name + ".l" + std::to_string(l), d,
                                             cfg_.heads, d_et, st.table.total(),
                                             cfg_.head_merge, rng));
    if (m_slots == 2)
      st.proj = make_linear(params_, name + ".proj", 2 * d, d, rng);
    stages_.push_back(std::move(st));
  };
  if (n_mods == 1) {
    add_stage("stage0", 1);
  } else {
    // First stage pairs the first two modalities, each later modality joins
    // the running fusion, and the shared representation enters last.
    add_stage("stage0", 2);
    for (int i = 2; i < n_mods; ++i) add_stage("stage" + std::to_string(i - 1), 2);
    add_stage("stage" + std::to_string(n_mods - 1), 2);
  }

  // Classification heads: hidden ReLU layer then class logits.
  auto make_head = [&](const std::string& prefix) {
    ClsHead h;
    h.l0 = make_linear(params_, prefix + ".l0", d, d, rng);
    h.l1 = make_linear(params_, prefix + ".l1", d, cfg_.num_classes, rng);
    return h;
  };
  head_main_ = make_head("head.main");
  if (n_mods >= 2 && cfg_.shared_loss) {
    head_shr_ = make_head("head.shr");
    s_shr_ = params_.add("loss.s_shr", {1}, Init::Zeros, rng);
  }
  if (cfg_.separate_loss)
    for (Mod m : cfg_.modalities) {
      head_sep_[m] = make_head(std::string("head.sep.") + mod_char(m));
      s_sep_[m] = params_.add(std::string("loss.s_") + mod_char(m), {1}, Init::Zeros, rng);
    }
}

ValuePtr GraphCfcModel::encode_modality(Mod m, const Dialogue& d) {
  const int n = static_cast<int>(d.utterances.size());
  auto feats = [&](int dim, auto pick) {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(n) * dim);
    for (const auto& u : d.utterances) {
      const std::vector<double>& f = pick(u);
      if (static_cast<int>(f.size()) != dim)
        throw ValidationError("dialogue '" + d.id + "': feature width " +
                              std::to_string(f.size()) + " != configured " +
                              std::to_string(dim));
      flat.insert(flat.end(), f.begin(), f.end());
    }
    return Value::constant({n, dim}, std::move(flat));
  };
  switch (m) {
    case Mod::T:
      return encode_text(feats(cfg_.dim_t, [](const Utterance& u) -> const auto& { return u.t; }),
                         text_enc_);
    case Mod::A:
      return encode_ff(feats(cfg_.dim_a, [](const Utterance& u) -> const auto& { return u.a; }),
                       a_enc_);
    case Mod::V:
      return encode_ff(feats(cfg_.dim_v, [](const Utterance& u) -> const auto& { return u.v; }),
                       v_enc_);
  }
  throw ContractError("encode_modality: bad modality");
}

ValuePtr GraphCfcModel::run_stage(Stage& st, const ValuePtr& x_p, const ValuePtr& x_q,
                                  const std::vector<int>& speakers, bool train) {
  const int n = static_cast<int>(speakers.size());
  ValuePtr x = x_q ? concat({x_p, x_q}, 0) : x_p;
  DialogueGraph g =
      build_graph(n, speakers, st.m, cfg_.window, cfg_.direction, st.table);
  GatMlpOptions opt;
  opt.skip_connection = cfg_.skip_connection;
  opt.norm = cfg_.norm;
  opt.merge = cfg_.head_merge;
  opt.use_multigat = cfg_.use_multigat;
  opt.use_feedforward = cfg_.use_feedforward;
  opt.dropout = cfg_.dropout;
  Rng* rng = train ? &dropout_rng_ : nullptr;
  for (auto& layer : st.layers) x = gat_mlp_layer(x, g, layer, opt, train, rng);
  if (st.m == 2) {
    ValuePtr hp = slice_rows(x, 0, n);
    ValuePtr hq = slice_rows(x, n, 2 * n);
    x = linear(concat({hp, hq}, 1), st.proj);
  }
  return x;
}

ValuePtr GraphCfcModel::head_logits(const ClsHead& h, const ValuePtr& x) {
  return linear(relu(linear(x, h.l0)), h.l1);
}

ValuePtr GraphCfcModel::head_l2(const ClsHead& h) const {
  ValuePtr acc = add(sum_squares(h.l0.w), sum_squares(h.l0.b));
  acc = add(acc, sum_squares(h.l1.w));
  return add(acc, sum_squares(h.l1.b));
}

GraphCfcModel::Forward GraphCfcModel::forward(const Dialogue& d, bool train) {
  if (d.utterances.empty())
    throw ValidationError("forward: dialogue '" + d.id + "' has no utterances");
  std::vector<int> speakers;
  speakers.reserve(d.utterances.size());
  for (const auto& u : d.utterances) {
    if (u.speaker < 0 || u.speaker >= cfg_.max_speakers)
      throw ValidationError("forward: dialogue '" + d.id + "': speaker " +
                            std::to_string(u.speaker) + " out of range [0," +
                            std::to_string(cfg_.max_speakers) + ")");
    speakers.push_back(u.speaker);
  }
  Rng* rng = train ? &dropout_rng_ : nullptr;

  std::map<Mod, ValuePtr> enc;
  for (Mod m : cfg_.modalities) {
    ValuePtr x = encode_modality(m, d);
    if (cfg_.speaker_embedding) x = inject_speaker(x, speakers, cfg_.mu, s_emb_);
    enc[m] = x;
  }

  std::map<Mod, ValuePtr> sep;
  for (Mod m : cfg_.modalities)
    sep[m] = subspace_map(enc[m], sep_map_[m], cfg_.dropout, train, rng);

  ValuePtr shr_fused;
  if (has_shared_path()) {
    std::vector<ValuePtr> shr_outs;
    for (Mod m : cfg_.modalities)
      shr_outs.push_back(subspace_map(enc[m], shr_map_, cfg_.dropout, train, rng));
    shr_fused = linear(concat(shr_outs, 1), shr_fuse_);
  }

  ValuePtr h;
  if (cfg_.modalities.size() == 1) {
    h = run_stage(stages_[0], sep[cfg_.modalities[0]], nullptr, speakers, train);
  } else {
    h = run_stage(stages_[0], sep[cfg_.modalities[0]], sep[cfg_.modalities[1]], speakers,
                  train);
    size_t next_stage = 1;
    for (size_t i = 2; i < cfg_.modalities.size(); ++i, ++next_stage)
      h = run_stage(stages_[next_stage], h, sep[cfg_.modalities[i]], speakers, train);
    h = run_stage(stages_[next_stage], h, shr_fused, speakers, train);
  }

  Forward out;
  out.main_logits = head_logits(head_main_, h);
  if (head_shr_) out.shared_logits = head_logits(*head_shr_, shr_fused);
  for (Mod m : cfg_.modalities)
    if (head_sep_.count(m))
      out.sep_logits.emplace_back(m, head_logits(head_sep_[m], sep[m]));
  return out;
}

namespace {

// -sum_i log softmax(logits)_i,label_i via a one-hot mask.
ValuePtr ce_sum(const ValuePtr& logits, const std::vector<int>& labels, int num_classes) {
  const int n = logits->shape[0];
  if (static_cast<int>(labels.size()) != n)
    throw ShapeError("ce_sum: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " logit rows");
  std::vector<double> hot(static_cast<size_t>(n) * num_classes, 0.0);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw ValidationError("ce_sum: label " + std::to_string(labels[i]) +
                            " out of range [0," + std::to_string(num_classes) + ")");
    hot[static_cast<size_t>(i) * num_classes + labels[i]] = 1.0;
  }
  ValuePtr mask = Value::constant({n, num_classes}, std::move(hot));
  return affine(sum(mul(log(softmax(logits)), mask)), -1.0, 0.0);
}

}  // namespace

GraphCfcModel::Losses GraphCfcModel::batch_loss(const std::vector<const Dialogue*>& batch,
                                                bool train) {
  if (batch.empty()) throw ValidationError("batch_loss: empty batch");
  long total_utts = 0;
  for (const Dialogue* d : batch) total_utts += static_cast<long>(d->utterances.size());

  ValuePtr ce_cls, ce_shr;
  std::map<Mod, ValuePtr> ce_sep;
  auto accumulate = [](ValuePtr& acc, const ValuePtr& term) {
    acc = acc ? add(acc, term) : term;
  };

  for (const Dialogue* d : batch) {
    Forward f = forward(*d, train);
    std::vector<int> labels;
    labels.reserve(d->utterances.size());
    for (const auto& u : d->utterances) labels.push_back(u.label);
    accumulate(ce_cls, ce_sum(f.main_logits, labels, cfg_.num_classes));
    if (f.shared_logits)
      accumulate(ce_shr, ce_sum(f.shared_logits, labels, cfg_.num_classes));
    for (const auto& [m, logits] : f.sep_logits)
      accumulate(ce_sep[m], ce_sum(logits, labels, cfg_.num_classes));
  }

  const double inv_total = 1.0 / static_cast<double>(total_utts);
  auto component = [&](const ValuePtr& ce, const ClsHead& head) {
    ValuePtr l = affine(ce, inv_total, 0.0);
    if (cfg_.lambda_l2 > 0.0) l = add(l, affine(head_l2(head), cfg_.lambda_l2, 0.0));
    return l;
  };

  Losses out;
  out.cls = component(ce_cls, head_main_);
  out.total = out.cls;
  auto weighted = [&](const ValuePtr& l, const ValuePtr& s) {
    // exp(-s) * L + s
    return add(mul(exp(affine(s, -1.0, 0.0)), l), s);
  };
  if (ce_shr && head_shr_) {
    out.shr = component(ce_shr, *head_shr_);
    out.total = add(out.total, weighted(out.shr, s_shr_));
  }
  for (Mod m : cfg_.modalities) {
    if (ce_sep.count(m)) {
      ValuePtr l = component(ce_sep[m], head_sep_.at(m));
      out.sep.emplace_back(m, l);
      out.total = add(out.total, weighted(l, s_sep_.at(m)));
    }
  }
  return out;
}

std::vector<int> GraphCfcModel::predict(const Dialogue& d) {
  Forward f = forward(d, false);
  const int n = f.main_logits->shape[0];
  const int c = f.main_logits->shape[1];
  std::vector<int> out(n, 0);
  for (int i = 0; i < n; ++i) {
    const double* row = f.main_logits->data.data() + static_cast<long>(i) * c;
    int best = 0;
    for (int j = 1; j < c; ++j)
      if (row[j] > row[best]) best = j;
    out[i] = best;
  }
  return out;
}

}  // namespace gcfc
