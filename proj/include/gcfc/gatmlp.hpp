#pragma once

#include <string>
#include <vector>

#include "gcfc/graph.hpp"
#include "gcfc/nn.hpp"
#include "gcfc/params.hpp"
#include "gcfc/value.hpp"

namespace gcfc {

// One attention head. Attention scores follow the GATv2 pattern with the
// edge-type embedding appended to the pair features:
//   e_ij = a^T LeakyReLU(W_att [x_i || x_j || et_ij])
//   alpha_i = softmax over i's in-neighborhood
// Aggregation x_agg,i = sum_j alpha_ij (x_j W_agg); an empty neighborhood
// yields a zero aggregate. The head output fuses both reading directions:
//   x_com = GRU_fwd(input=x_i, hidden=x_agg) + GRU_rev(input=x_agg, hidden=x_i)
struct GatHeadParams {
  ValuePtr att_w;  // (2d + d_et) x d_att, or 2d x d_att without edge features
  ValuePtr att_a;  // d_att x 1
  ValuePtr w_agg;  // d x d
  GruCellParams gru_fwd, gru_rev;
  ValuePtr et_emb;  // DM x d_et; null when edge-type features are disabled
};

struct GatMlpLayerParams {
  std::vector<GatHeadParams> heads;
  ValuePtr head_proj_w;  // (K d) x d, only for the concat merge mode
  LinearParams ff0, ff1;
  ValuePtr ln1_gamma, ln1_beta;
  ValuePtr ln2_gamma, ln2_beta;
};

enum class NormPosition { Post, Pre };
enum class HeadMerge { Average, ConcatProject };

struct GatMlpOptions {
  bool skip_connection = true;
  NormPosition norm = NormPosition::Post;
  HeadMerge merge = HeadMerge::Average;
  bool use_multigat = true;
  bool use_feedforward = true;
  double leaky_slope = 0.2;
  double dropout = 0.0;
};

GatHeadParams make_gat_head(ParamStore& store, const std::string& prefix, int d,
                            int d_att, int d_et, int num_edge_types, Rng& rng);
GatMlpLayerParams make_gat_mlp_layer(ParamStore& store, const std::string& prefix, int d,
                                     int heads, int d_et, int num_edge_types,
                                     HeadMerge merge, Rng& rng);

// Attention weights for one destination node given its in-neighbor features
// (and matching edge-type embeddings unless the head runs without them).
// Returns the simplex alpha as a length-|neighbors| vector.
ValuePtr attention_weights(const ValuePtr& x_i, const std::vector<ValuePtr>& neighbors,
                           const std::vector<ValuePtr>& edge_feats,
                           const GatHeadParams& p, double leaky_slope = 0.2);

// Full head over a graph. x: (N, d) with N = g.node_count(). When alphas_out
// is given it receives one attention row per node (empty for isolated nodes),
// in in_edges_by_dst slot order.
ValuePtr gat_head(const ValuePtr& x, const DialogueGraph& g, const GatHeadParams& p,
                  double leaky_slope = 0.2,
                  std::vector<std::vector<double>>* alphas_out = nullptr);

ValuePtr multi_gat(const ValuePtr& x, const DialogueGraph& g,
                   const GatMlpLayerParams& p, const GatMlpOptions& opt);

// One GAT-MLP layer. Post-norm (default):
//   X_gat = Norm(MultiGAT(X) + X); X_out = Norm(FF(X_gat) + X_gat)
// Pre-norm:
//   X_gat = MultiGAT(Norm(X)) + X; X_out = FF(Norm(X_gat)) + X_gat
// skip_connection=false drops the "+ X" terms; use_multigat/use_feedforward
// disable the respective sublayer entirely.
ValuePtr gat_mlp_layer(const ValuePtr& x, const DialogueGraph& g,
                       const GatMlpLayerParams& p, const GatMlpOptions& opt, bool train,
                       Rng* rng);

}  // namespace gcfc
