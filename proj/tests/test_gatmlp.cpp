#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "gcfc/gatmlp.hpp"
#include "gcfc/gradcheck.hpp"
#include "gcfc/rng.hpp"

using namespace gcfc;

namespace {

ValuePtr random_matrix(Rng& rng, int r, int c, double sd = 0.8) {
  std::vector<double> v(static_cast<std::size_t>(r) * c);
  for (double& x : v) x = rng.normal(0.0, sd);
  return Value::constant({r, c}, v);
}

DialogueGraph past_chain(int n, const EdgeTypeTable& t) {
  std::vector<int> spk(n);
  for (int i = 0; i < n; ++i) spk[i] = i % t.speakers;
  return build_graph(n, spk, 1, {1, 0}, DirectionMode::FutureAsInEdge, t);
}

}  // namespace

TEST_CASE("a single neighbor always gets weight one") {
  ParamStore ps;
  Rng rng(3);
  GatHeadParams p = make_gat_head(ps, "h", 4, 4, 2, 6, rng);
  auto xi = random_matrix(rng, 1, 4);
  auto xj = random_matrix(rng, 1, 4);
  auto et = random_matrix(rng, 1, 2);
  auto alpha = attention_weights(xi, {xj}, {et}, p);
  CHECK(alpha->shape == Shape{1});
  CHECK(alpha->data[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("attention rows are simplexes for random neighborhoods") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore ps;
    GatHeadParams p = make_gat_head(ps, "h", 5, 5, 3, 8, rng);
    int k = 1 + static_cast<int>(rng.uniform01() * 6);
    auto xi = random_matrix(rng, 1, 5);
    std::vector<ValuePtr> nbrs, ets;
    for (int j = 0; j < k; ++j) {
      nbrs.push_back(random_matrix(rng, 1, 5));
      ets.push_back(random_matrix(rng, 1, 3));
    }
    auto alpha = attention_weights(xi, nbrs, ets, p);
    double s = 0;
    for (double a : alpha->data) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      s += a;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  ParamStore ps;
  GatHeadParams p = make_gat_head(ps, "h", 5, 5, 3, 8, rng);
  CHECK_THROWS_AS(attention_weights(random_matrix(rng, 1, 5), {}, {}, p), ContractError);
  CHECK_THROWS_AS(attention_weights(random_matrix(rng, 1, 5),
                                    {random_matrix(rng, 1, 5)}, {}, p),
                  ShapeError);
}

TEST_CASE("zeroed edge features reduce to the plain pair computation") {
  const int d = 4, d_et = 3;
  ParamStore psa, psb;
  Rng ra(5), rb(6);
  GatHeadParams a = make_gat_head(psa, "a", d, d, d_et, 6, ra);
  GatHeadParams b = make_gat_head(psb, "b", d, d, 0, 6, rb);
  // b's attention matrix is the top 2d rows of a's (the rows an all-zero
  // edge feature multiplies are irrelevant).
  for (int r = 0; r < 2 * d; ++r)
    for (int c = 0; c < d; ++c)
      b.att_w->data[r * d + c] = a.att_w->data[r * d + c];
  b.att_a->data = a.att_a->data;

  Rng rx(9);
  auto xi = random_matrix(rx, 1, d);
  std::vector<ValuePtr> nbrs = {random_matrix(rx, 1, d), random_matrix(rx, 1, d),
                                random_matrix(rx, 1, d)};
  std::vector<ValuePtr> zero_ets = {Value::zeros({1, d_et}), Value::zeros({1, d_et}),
                                    Value::zeros({1, d_et})};
  auto alpha_a = attention_weights(xi, nbrs, zero_ets, a);
  auto alpha_b = attention_weights(xi, nbrs, {}, b);
  for (int j = 0; j < 3; ++j)
    CHECK(alpha_a->data[j] == doctest::Approx(alpha_b->data[j]).epsilon(1e-12));
}

TEST_CASE("edge types influence the scores") {
  ParamStore ps;
  Rng rng(21);
  GatHeadParams p = make_gat_head(ps, "h", 4, 4, 3, 6, rng);
  auto xi = random_matrix(rng, 1, 4);
  std::vector<ValuePtr> nbrs = {random_matrix(rng, 1, 4), random_matrix(rng, 1, 4)};
  auto et0 = embedding(p.et_emb, {0, 0});
  auto et1 = embedding(p.et_emb, {0, 3});
  auto a0 = attention_weights(xi, nbrs, {slice_rows(et0, 0, 1), slice_rows(et0, 1, 2)}, p);
  auto a1 = attention_weights(xi, nbrs, {slice_rows(et1, 0, 1), slice_rows(et1, 1, 2)}, p);
  CHECK(a0->data[0] != a1->data[0]);
}

TEST_CASE("head output only depends on the in-neighborhood") {
  const int d = 4, n = 5;
  EdgeTypeTable t = enumerate_edge_types(2, 1);
  DialogueGraph g = past_chain(n, t);  // i-1 -> i, nothing else
  ParamStore ps;
  Rng rng(8);
  GatHeadParams p = make_gat_head(ps, "h", d, d, 2, t.total(), rng);

  Rng rx(4);
  auto x1 = random_matrix(rx, n, d);
  std::vector<double> bumped = x1->data;
  for (int c = 0; c < d; ++c) bumped[c] += 1.0;  // change row 0 only
  auto x2 = Value::constant({n, d}, bumped);

  auto y1 = gat_head(x1, g, p);
  auto y2 = gat_head(x2, g, p);
  for (int c = 0; c < d; ++c) {
    CHECK(y1->data[0 * d + c] != y2->data[0 * d + c]);  // its own row moved
    CHECK(y1->data[1 * d + c] != y2->data[1 * d + c]);  // row 0 is 1's neighbor
    CHECK(y1->data[2 * d + c] == y2->data[2 * d + c]);  // out of reach
    CHECK(y1->data[3 * d + c] == y2->data[3 * d + c]);
    CHECK(y1->data[4 * d + c] == y2->data[4 * d + c]);
  }
}

TEST_CASE("node relabeling is an equivariance of the head") {
  const int d = 4, n = 5;
  EdgeTypeTable t = enumerate_edge_types(2, 1);
  std::vector<int> spk = {0, 1, 0, 1, 0};
  DialogueGraph g1 = build_graph(n, spk, 1, {2, 1}, DirectionMode::FutureAsInEdge, t);
  std::vector<int> perm = {3, 0, 4, 1, 2};  // new id of old node i
  DialogueGraph g2;
  g2.n_utts = n;
  g2.n_mods = 1;
  for (const auto& e : g1.edges)
    g2.edges.push_back({perm[e.src], perm[e.dst], e.type});

  ParamStore ps;
  Rng rng(31);
  GatHeadParams p = make_gat_head(ps, "h", d, d, 3, t.total(), rng);
  Rng rx(12);
  auto x1 = random_matrix(rx, n, d);
  std::vector<double> x2d(x1->data.size());
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) x2d[perm[i] * d + c] = x1->data[i * d + c];
  auto x2 = Value::constant({n, d}, x2d);

  std::vector<std::vector<double>> al1, al2;
  auto y1 = gat_head(x1, g1, p, 0.2, &al1);
  auto y2 = gat_head(x2, g2, p, 0.2, &al2);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c)
      CHECK(std::abs(y2->data[perm[i] * d + c] - y1->data[i * d + c]) <= 1e-10);
    // Per-node attention rows carry over as multisets of weights.
    std::vector<double> s1 = al1[i], s2 = al2[perm[i]];
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    REQUIRE(s1.size() == s2.size());
    for (std::size_t j = 0; j < s1.size(); ++j)
      CHECK(std::abs(s1[j] - s2[j]) <= 1e-10);
  }
}

TEST_CASE("attention rows from a full head are simplexes") {
  const int d = 4;
  EdgeTypeTable t = enumerate_edge_types(2, 2);
  std::vector<int> spk = {0, 1, 1, 0, 0, 1};
  DialogueGraph g = build_graph(6, spk, 2, {2, 2}, DirectionMode::FutureAsInEdge, t);
  ParamStore ps;
  Rng rng(2);
  GatHeadParams p = make_gat_head(ps, "h", d, d, 2, t.total(), rng);
  Rng rx(3);
  auto x = random_matrix(rx, g.node_count(), d);
  std::vector<std::vector<double>> alphas;
  gat_head(x, g, p, 0.2, &alphas);
  REQUIRE(alphas.size() == static_cast<std::size_t>(g.node_count()));
  InEdgeIndex idx = in_edges_by_dst(g);
  for (int i = 0; i < g.node_count(); ++i) {
    REQUIRE(static_cast<int>(alphas[i].size()) == idx.offsets[i + 1] - idx.offsets[i]);
    if (alphas[i].empty()) continue;
    double s = 0;
    for (double a : alphas[i]) {
      CHECK(a >= 0.0);
      s += a;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("multi-head merging") {
  const int d = 4, n = 4;
  EdgeTypeTable t = enumerate_edge_types(2, 1);
  DialogueGraph g = past_chain(n, t);
  Rng rx(7);
  auto x = random_matrix(rx, n, d);
  GatMlpOptions opt;

  SUBCASE("one head averages to itself") {
    ParamStore ps;
    Rng rng(5);
    GatMlpLayerParams layer = make_gat_mlp_layer(ps, "l", d, 1, d, t.total(),
                                                 HeadMerge::Average, rng);
    auto merged = multi_gat(x, g, layer, opt);
    auto single = gat_head(x, g, layer.heads[0], opt.leaky_slope);
    for (std::size_t i = 0; i < merged->data.size(); ++i)
      CHECK(merged->data[i] == doctest::Approx(single->data[i]).epsilon(1e-15));
  }
  SUBCASE("identical heads average to the common output") {
    ParamStore ps;
    Rng rng(6);
    GatMlpLayerParams layer = make_gat_mlp_layer(ps, "l", d, 3, d, t.total(),
                                                 HeadMerge::Average, rng);
    for (int h = 1; h < 3; ++h) {
      auto copy = [&](const char* field) {
        ps.get("l.h" + std::to_string(h) + field)->data = ps.get("l.h0" + std::string(field))->data;
      };
      for (const char* f :
           {".att_w", ".att_a", ".w_agg", ".et_emb", ".gru_f.wz", ".gru_f.uz",
            ".gru_f.bz", ".gru_f.wr", ".gru_f.ur", ".gru_f.br", ".gru_f.wn",
            ".gru_f.un", ".gru_f.bn", ".gru_r.wz", ".gru_r.uz", ".gru_r.bz",
            ".gru_r.wr", ".gru_r.ur", ".gru_r.br", ".gru_r.wn", ".gru_r.un",
            ".gru_r.bn"})
        copy(f);
    }
    auto merged = multi_gat(x, g, layer, opt);
    auto single = gat_head(x, g, layer.heads[0], opt.leaky_slope);
    for (std::size_t i = 0; i < merged->data.size(); ++i)
      CHECK(merged->data[i] == doctest::Approx(single->data[i]).epsilon(1e-12));
  }
  SUBCASE("concat-project merge uses the projection") {
    ParamStore ps;
    Rng rng(7);
    GatMlpLayerParams layer = make_gat_mlp_layer(ps, "l", d, 2, d, t.total(),
                                                 HeadMerge::ConcatProject, rng);
    REQUIRE(layer.head_proj_w);
    CHECK(layer.head_proj_w->shape == Shape{2 * d, d});
    GatMlpOptions copt;
    copt.merge = HeadMerge::ConcatProject;
    auto merged = multi_gat(x, g, layer, copt);
    CHECK(merged->shape == Shape{n, d});
  }
}

TEST_CASE("zero parameters halve the features through the gru fusion") {
  const int d = 3;
  EdgeTypeTable t = enumerate_edge_types(1, 1);
  // Two nodes, no edges: every neighborhood is empty.
  DialogueGraph g = build_graph(2, {0, 0}, 1, {0, 0}, DirectionMode::FutureAsInEdge, t);
  CHECK(g.edges.empty());
  ParamStore ps;
  Rng rng(3);
  GatHeadParams p = make_gat_head(ps, "h", d, d, 2, t.total(), rng);
  for (auto& [name, v] : ps.items()) std::fill(v->data.begin(), v->data.end(), 0.0);
  auto x = Value::constant({2, d}, {1, -2, 3, 4, 0.5, -1});
  auto y = gat_head(x, g, p);
  for (std::size_t i = 0; i < x->data.size(); ++i)
    CHECK(y->data[i] == doctest::Approx(0.5 * x->data[i]).epsilon(1e-12));

  // Same collapse when edges exist: zero w_agg kills the aggregate.
  DialogueGraph g2 = past_chain(2, t);
  auto y2 = gat_head(x, g2, p);
  for (std::size_t i = 0; i < x->data.size(); ++i)
    CHECK(y2->data[i] == doctest::Approx(0.5 * x->data[i]).epsilon(1e-12));
}

TEST_CASE("layer options change the function") {
  const int d = 4, n = 5;
  EdgeTypeTable t = enumerate_edge_types(2, 1);
  DialogueGraph g = past_chain(n, t);
  ParamStore ps;
  Rng rng(19);
  GatMlpLayerParams layer =
      make_gat_mlp_layer(ps, "l", d, 2, d, t.total(), HeadMerge::Average, rng);
  Rng rx(2);
  auto x = random_matrix(rx, n, d);

  GatMlpOptions post, pre, noskip, nogat, noff, bare;
  pre.norm = NormPosition::Pre;
  noskip.skip_connection = false;
  nogat.use_multigat = false;
  noff.use_feedforward = false;
  bare.use_multigat = false;
  bare.use_feedforward = false;

  auto run = [&](const GatMlpOptions& o) { return gat_mlp_layer(x, g, layer, o, false, nullptr); };
  auto y_post = run(post);
  CHECK(y_post->shape == Shape{n, d});
  CHECK(y_post->data != run(pre)->data);
  CHECK(y_post->data != run(noskip)->data);
  CHECK(y_post->data != run(nogat)->data);
  CHECK(y_post->data != run(noff)->data);
  CHECK(run(bare)->data == x->data);  // both sublayers disabled: identity

  // Stacking five layers keeps the shape and stays finite.
  ValuePtr h = x;
  for (int i = 0; i < 5; ++i) h = gat_mlp_layer(h, g, layer, post, false, nullptr);
  CHECK(h->shape == Shape{n, d});
  for (double v : h->data) CHECK(std::isfinite(v));
}

TEST_CASE("gat-mlp layer gradients pass finite differences") {
  const int d = 4;
  EdgeTypeTable t = enumerate_edge_types(2, 2);
  std::vector<int> spk = {0, 1, 0};
  DialogueGraph g = build_graph(3, spk, 2, {1, 1}, DirectionMode::FutureAsInEdge, t);
  ParamStore ps;
  Rng rng(23);
  GatMlpLayerParams layer =
      make_gat_mlp_layer(ps, "l", d, 2, d, t.total(), HeadMerge::Average, rng);
  auto x = ps.add("x", {6, d}, Init::Normal, rng, 0.7);
  GatMlpOptions opt;
  auto fn = [&] { return sum_squares(gat_mlp_layer(x, g, layer, opt, false, nullptr)); };
  double err = finite_diff_check(fn, ps);
  INFO("max rel err ", err);
  CHECK(err < 1e-4);
}
