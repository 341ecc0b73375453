#include "gcfc/gatmlp.hpp"

#include "gcfc/errors.hpp"

namespace gcfc {

GatHeadParams make_gat_head(ParamStore& store, const std::string& prefix, int d,
                            int d_att, int d_et, int num_edge_types, Rng& rng) {
  GatHeadParams p;
  const bool with_et = d_et > 0;
  p.att_w = store.add(prefix + ".att_w", {2 * d + (with_et ? d_et : 0), d_att},
                      Init::Xavier, rng);
  p.att_a = store.add(prefix + ".att_a", {d_att, 1}, Init::Xavier, rng);
  p.w_agg = store.add(prefix + ".w_agg", {d, d}, Init::Xavier, rng);
  p.gru_fwd = make_gru(store, prefix + ".gru_f", d, d, rng);
  p.gru_rev = make_gru(store, prefix + ".gru_r", d, d, rng);
  if (with_et)
    p.et_emb = store.add(prefix + ".et_emb", {num_edge_types, d_et}, Init::Normal, rng, 0.1);
  return p;
}

GatMlpLayerParams make_gat_mlp_layer(ParamStore& store, const std::string& prefix, int d,
                                     int heads, int d_et, int num_edge_types,
                                     HeadMerge merge, Rng& rng) {
  if (heads < 1) throw ValidationError("make_gat_mlp_layer: need at least one head");
  GatMlpLayerParams p;
  for (int h = 0; h < heads; ++h)
    p.heads.push_back(make_gat_head(store, prefix + ".h" + std::to_string(h), d, d, d_et,
                                    num_edge_types, rng));
  if (merge == HeadMerge::ConcatProject)
    p.head_proj_w = store.add(prefix + ".head_proj.w", {heads * d, d}, Init::Xavier, rng);
  p.ff0 = make_linear(store, prefix + ".ff0", d, d, rng);
  p.ff1 = make_linear(store, prefix + ".ff1", d, d, rng);
  p.ln1_gamma = store.add(prefix + ".ln1.gamma", {d}, Init::Ones, rng);
  p.ln1_beta = store.add(prefix + ".ln1.beta", {d}, Init::Zeros, rng);
  p.ln2_gamma = store.add(prefix + ".ln2.gamma", {d}, Init::Ones, rng);
  p.ln2_beta = store.add(prefix + ".ln2.beta", {d}, Init::Zeros, rng);
  return p;
}

ValuePtr attention_weights(const ValuePtr& x_i, const std::vector<ValuePtr>& neighbors,
                           const std::vector<ValuePtr>& edge_feats,
                           const GatHeadParams& p, double leaky_slope) {
  if (neighbors.empty())
    throw ContractError("attention_weights: empty neighborhood has no weights");
  const bool with_et = static_cast<bool>(p.et_emb);
  if (with_et && edge_feats.size() != neighbors.size())
    throw ShapeError("attention_weights: " + std::to_string(neighbors.size()) +
                     " neighbors but " + std::to_string(edge_feats.size()) +
                     " edge features");
  ValuePtr xi_row = x_i->rank() == 1 ? reshape(x_i, {1, x_i->shape[0]}) : x_i;
  std::vector<ValuePtr> rows;
  rows.reserve(neighbors.size());
  for (size_t j = 0; j < neighbors.size(); ++j) {
    ValuePtr xj = neighbors[j]->rank() == 1
                      ? reshape(neighbors[j], {1, neighbors[j]->shape[0]})
                      : neighbors[j];
    std::vector<ValuePtr> parts = {xi_row, xj};
    if (with_et) {
      ValuePtr et = edge_feats[j]->rank() == 1
                        ? reshape(edge_feats[j], {1, edge_feats[j]->shape[0]})
                        : edge_feats[j];
      parts.push_back(et);
    }
    rows.push_back(concat(parts, 1));
  }
  ValuePtr scores =
      matmul(leaky_relu(matmul(concat(rows, 0), p.att_w), leaky_slope), p.att_a);
  return softmax(reshape(scores, {static_cast<int>(neighbors.size())}));
}

ValuePtr gat_head(const ValuePtr& x, const DialogueGraph& g, const GatHeadParams& p,
                  double leaky_slope, std::vector<std::vector<double>>* alphas_out) {
  const int n = g.node_count();
  if (x->rank() != 2 || x->shape[0] != n)
    throw ShapeError("gat_head: x " + shape_str(x->shape) + " vs " + std::to_string(n) +
                     " graph nodes");
  const int d = x->shape[1];
  const bool with_et = static_cast<bool>(p.et_emb);
  if (alphas_out) alphas_out->assign(n, {});

  if (g.edges.empty()) {
    // No neighborhoods at all: aggregate is zero everywhere.
    ValuePtr x_agg = Value::zeros({n, d});
    return add(gru_cell(x, x_agg, p.gru_fwd), gru_cell(x_agg, x, p.gru_rev));
  }

  InEdgeIndex idx = in_edges_by_dst(g);
  const int e = static_cast<int>(g.edges.size());
  std::vector<int> dst_ids(e);
  for (int node = 0; node < n; ++node)
    for (int s = idx.offsets[node]; s < idx.offsets[node + 1]; ++s) dst_ids[s] = node;

  // Batched attention inputs, one row per edge, grouped by destination.
  ValuePtr xi = embedding(x, dst_ids);
  ValuePtr xj = embedding(x, idx.src);
  ValuePtr pair_rows = with_et
                           ? concat({xi, xj, embedding(p.et_emb, idx.type)}, 1)
                           : concat({xi, xj}, 1);
  ValuePtr scores = matmul(leaky_relu(matmul(pair_rows, p.att_w), leaky_slope), p.att_a);
  ValuePtr values = embedding(matmul(x, p.w_agg), idx.src);  // (E, d) of x_j W_agg

  std::vector<ValuePtr> agg_rows(n);
  for (int node = 0; node < n; ++node) {
    const int b = idx.offsets[node], t = idx.offsets[node + 1];
    if (b == t) {
      agg_rows[node] = Value::zeros({1, d});
      continue;
    }
    ValuePtr alpha = softmax(reshape(slice_rows(scores, b, t), {t - b}));
    if (alphas_out) (*alphas_out)[node] = alpha->data;
    agg_rows[node] = matmul(reshape(alpha, {1, t - b}), slice_rows(values, b, t));
  }
  ValuePtr x_agg = concat(agg_rows, 0);
  return add(gru_cell(x, x_agg, p.gru_fwd), gru_cell(x_agg, x, p.gru_rev));
}

ValuePtr multi_gat(const ValuePtr& x, const DialogueGraph& g,
                   const GatMlpLayerParams& p, const GatMlpOptions& opt) {
  if (p.heads.empty()) throw ContractError("multi_gat: no heads");
  std::vector<ValuePtr> outs;
  outs.reserve(p.heads.size());
  for (const auto& head : p.heads) outs.push_back(gat_head(x, g, head, opt.leaky_slope));
  if (outs.size() == 1 && opt.merge == HeadMerge::Average) return outs[0];
  if (opt.merge == HeadMerge::Average) {
    ValuePtr acc = outs[0];
    for (size_t h = 1; h < outs.size(); ++h) acc = add(acc, outs[h]);
    return affine(acc, 1.0 / static_cast<double>(outs.size()), 0.0);
  }
  if (!p.head_proj_w)
    throw ContractError("multi_gat: concat merge needs a head projection");
  return matmul(concat(outs, 1), p.head_proj_w);
}

ValuePtr gat_mlp_layer(const ValuePtr& x, const DialogueGraph& g,
                       const GatMlpLayerParams& p, const GatMlpOptions& opt, bool train,
                       Rng* rng) {
  auto feed_forward = [&](const ValuePtr& h) {
    ValuePtr f = dropout(relu(linear(h, p.ff0)), opt.dropout, train, rng);
    return dropout(linear(f, p.ff1), opt.dropout, train, rng);
  };

  ValuePtr x_gat = x;
  if (opt.use_multigat) {
    if (opt.norm == NormPosition::Post) {
      ValuePtr m = multi_gat(x, g, p, opt);
      x_gat = layer_norm(opt.skip_connection ? add(m, x) : m, p.ln1_gamma, p.ln1_beta);
    } else {
      ValuePtr m = multi_gat(layer_norm(x, p.ln1_gamma, p.ln1_beta), g, p, opt);
      x_gat = opt.skip_connection ? add(m, x) : m;
    }
  }

  ValuePtr x_out = x_gat;
  if (opt.use_feedforward) {
    if (opt.norm == NormPosition::Post) {
      ValuePtr f = feed_forward(x_gat);
      x_out = layer_norm(opt.skip_connection ? add(f, x_gat) : f, p.ln2_gamma, p.ln2_beta);
    } else {
      ValuePtr f = feed_forward(layer_norm(x_gat, p.ln2_gamma, p.ln2_beta));
      x_out = opt.skip_connection ? add(f, x_gat) : f;
    }
  }
  return x_out;
}

}  // namespace gcfc
