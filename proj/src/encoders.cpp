#include "gcfc/encoders.hpp"

#include "gcfc/errors.hpp"

namespace gcfc {

LstmDirParams make_lstm_dir(ParamStore& store, const std::string& prefix, int in,
                            int hidden, Rng& rng) {
  LstmDirParams p;
  p.wi = store.add(prefix + ".wi", {in, hidden}, Init::Xavier, rng);
  p.ui = store.add(prefix + ".ui", {hidden, hidden}, Init::Xavier, rng);
  p.bi = store.add(prefix + ".bi", {hidden}, Init::Zeros, rng);
  p.wf = store.add(prefix + ".wf", {in, hidden}, Init::Xavier, rng);
  p.uf = store.add(prefix + ".uf", {hidden, hidden}, Init::Xavier, rng);
  p.bf = store.add(prefix + ".bf", {hidden}, Init::Zeros, rng);
  p.wg = store.add(prefix + ".wg", {in, hidden}, Init::Xavier, rng);
  p.ug = store.add(prefix + ".ug", {hidden, hidden}, Init::Xavier, rng);
  p.bg = store.add(prefix + ".bg", {hidden}, Init::Zeros, rng);
  p.wo = store.add(prefix + ".wo", {in, hidden}, Init::Xavier, rng);
  p.uo = store.add(prefix + ".uo", {hidden, hidden}, Init::Xavier, rng);
  p.bo = store.add(prefix + ".bo", {hidden}, Init::Zeros, rng);
  return p;
}

TextEncoderParams make_text_encoder(ParamStore& store, const std::string& prefix, int in,
                                    int hidden, int d, Rng& rng) {
  TextEncoderParams p;
  p.fwd = make_lstm_dir(store, prefix + ".fwd", in, hidden, rng);
  p.bwd = make_lstm_dir(store, prefix + ".bwd", in, hidden, rng);
  p.proj = make_linear(store, prefix + ".proj", 2 * hidden, d, rng);
  p.hidden = hidden;
  return p;
}

namespace {

struct LstmState {
  ValuePtr h, c;
};

LstmState lstm_step(const ValuePtr& x_t, const LstmState& s, const LstmDirParams& p) {
  ValuePtr i = sigmoid(add(add(matmul(x_t, p.wi), matmul(s.h, p.ui)), p.bi));
  ValuePtr f = sigmoid(add(add(matmul(x_t, p.wf), matmul(s.h, p.uf)), p.bf));
  ValuePtr g = tanh(add(add(matmul(x_t, p.wg), matmul(s.h, p.ug)), p.bg));
  ValuePtr o = sigmoid(add(add(matmul(x_t, p.wo), matmul(s.h, p.uo)), p.bo));
  ValuePtr c = add(mul(f, s.c), mul(i, g));
  ValuePtr h = mul(o, tanh(c));
  return {h, c};
}

std::vector<ValuePtr> lstm_run(const ValuePtr& feats, const LstmDirParams& p, int hidden,
                               bool reversed) {
  const int n = feats->shape[0];
  std::vector<ValuePtr> hs(n);
  LstmState s{Value::zeros({1, hidden}), Value::zeros({1, hidden})};
  for (int step = 0; step < n; ++step) {
    const int t = reversed ? n - 1 - step : step;
    ValuePtr x_t = slice_rows(feats, t, t + 1);
    s = lstm_step(x_t, s, p);
    hs[t] = s.h;
  }
  return hs;
}

}  // namespace

ValuePtr encode_text(const ValuePtr& feats, const TextEncoderParams& p) {
  if (feats->rank() != 2)
    throw ShapeError("encode_text: features must be (n, dim), got " +
                     shape_str(feats->shape));
  std::vector<ValuePtr> hf = lstm_run(feats, p.fwd, p.hidden, false);
  std::vector<ValuePtr> hb = lstm_run(feats, p.bwd, p.hidden, true);
  const int n = feats->shape[0];
  std::vector<ValuePtr> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = concat({hf[i], hb[i]}, 1);
  return linear(concat(rows, 0), p.proj);
}

ValuePtr encode_ff(const ValuePtr& feats, const LinearParams& p) {
  return relu(linear(feats, p));
}

ValuePtr inject_speaker(const ValuePtr& x, const std::vector<int>& speakers, double mu,
                        const ValuePtr& s_emb) {
  if (x->rank() != 2 || x->shape[0] != static_cast<int>(speakers.size()))
    throw ShapeError("inject_speaker: x " + shape_str(x->shape) + " vs " +
                     std::to_string(speakers.size()) + " speakers");
  if (s_emb->shape[1] != x->shape[1])
    throw ShapeError("inject_speaker: embedding width " + shape_str(s_emb->shape) +
                     " != feature width " + shape_str(x->shape));
  return add(x, affine(embedding(s_emb, speakers), mu, 0.0));
}

SubspaceMapParams make_subspace_map(ParamStore& store, const std::string& prefix, int in,
                                    int out, Rng& rng) {
  SubspaceMapParams p;
  p.l0 = make_linear(store, prefix + ".l0", in, out, rng);
  p.l1 = make_linear(store, prefix + ".l1", out, out, rng);
  p.gamma = store.add(prefix + ".ln.gamma", {out}, Init::Ones, rng);
  p.beta = store.add(prefix + ".ln.beta", {out}, Init::Zeros, rng);
  return p;
}

ValuePtr subspace_map(const ValuePtr& x, const SubspaceMapParams& p, double dropout_rate,
                      bool train, Rng* rng) {
  ValuePtr h = relu(linear(x, p.l0));
  h = dropout(h, dropout_rate, train, rng);
  h = linear(h, p.l1);
  h = dropout(h, dropout_rate, train, rng);
  return layer_norm(h, p.gamma, p.beta);
}

}  // namespace gcfc
