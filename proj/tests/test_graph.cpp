#include <algorithm>
#include <set>

#include "doctest.h"

#include "gcfc/errors.hpp"
#include "gcfc/graph.hpp"

using namespace gcfc;

namespace {

std::vector<int> round_robin_speakers(int n, int d) {
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) s[i] = i % d;
  return s;
}

}  // namespace

TEST_CASE("edge type table sizes match the closed form and brute force") {
  CHECK(enumerate_edge_types(3, 1).total() == 6);
  CHECK(enumerate_edge_types(2, 3).total() == 12);
  CHECK(enumerate_edge_types(3, 3).total() == 21);
  for (int d = 1; d <= 5; ++d)
    for (int m = 1; m <= 3; ++m) {
      EdgeTypeTable t = enumerate_edge_types(d, m);
      // Brute force: distinct (modality, unordered speaker pair) plus
      // distinct unordered modality pairs.
      std::set<std::vector<int>> intra;
      for (int mod = 0; mod < m; ++mod)
        for (int s1 = 0; s1 < d; ++s1)
          for (int s2 = 0; s2 < d; ++s2)
            intra.insert({mod, std::min(s1, s2), std::max(s1, s2)});
      std::set<std::pair<int, int>> inter;
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          if (p != q) inter.insert({std::min(p, q), std::max(p, q)});
      CHECK(t.intra_count() == static_cast<int>(intra.size()));
      CHECK(t.inter_count() == static_cast<int>(inter.size()));
      CHECK(t.total() == m * (d * d + d + m - 1) / 2);

      // Ids are a bijection onto [0, total).
      std::set<int> ids;
      for (const auto& key : intra) ids.insert(t.intra_id(key[0], key[1], key[2]));
      for (const auto& pq : inter) ids.insert(t.inter_id(pq.first, pq.second));
      CHECK(static_cast<int>(ids.size()) == t.total());
      CHECK(*ids.begin() == 0);
      CHECK(*ids.rbegin() == t.total() - 1);
      // Intra ids come first, symmetric in the argument order.
      for (const auto& key : intra) {
        CHECK(t.intra_id(key[0], key[1], key[2]) < t.intra_count());
        CHECK(t.intra_id(key[0], key[2], key[1]) == t.intra_id(key[0], key[1], key[2]));
      }
      for (const auto& pq : inter)
        CHECK(t.inter_id(pq.second, pq.first) >= t.intra_count());
    }
}

TEST_CASE("worked graph examples") {
  EdgeTypeTable t1 = enumerate_edge_types(2, 1);
  std::vector<int> spk = round_robin_speakers(4, 2);

  SUBCASE("n=4 j=2 k=2 M=1, future folded into in-edges") {
    DialogueGraph g = build_graph(4, spk, 1, {2, 2}, DirectionMode::FutureAsInEdge, t1);
    CHECK(g.node_count() == 4);
    CHECK(g.edges.size() == 10);
    // In-degree per node: window clipped at the sequence ends.
    InEdgeIndex idx = in_edges_by_dst(g);
    std::vector<int> indeg;
    for (int i = 0; i < 4; ++i) indeg.push_back(idx.offsets[i + 1] - idx.offsets[i]);
    CHECK(indeg == std::vector<int>{2, 3, 3, 2});
  }
  SUBCASE("literal mode collapses to past-only width max(j,k)") {
    DialogueGraph g = build_graph(4, spk, 1, {2, 2}, DirectionMode::Literal, t1);
    CHECK(g.edges.size() == 5);
    for (const auto& e : g.edges) {
      GraphNode s = g.node_of(e.src), d = g.node_of(e.dst);
      CHECK(s.utt < d.utt);  // every edge points earlier -> later
      CHECK(d.utt - s.utt <= 2);
    }
  }
  SUBCASE("inter edges appear once per ordered modality pair per utterance") {
    EdgeTypeTable t3 = enumerate_edge_types(2, 3);
    DialogueGraph g = build_graph(4, spk, 3, {0, 0}, DirectionMode::FutureAsInEdge, t3);
    CHECK(g.edges.size() == 4 * 3 * 2);  // n * M * (M-1)
    for (const auto& e : g.edges) {
      GraphNode s = g.node_of(e.src), d = g.node_of(e.dst);
      CHECK(s.utt == d.utt);
      CHECK(s.mod != d.mod);
      CHECK(e.type >= t3.intra_count());
    }
  }
}

TEST_CASE("edge counts agree with the brute-force oracle over a grid") {
  for (int n = 1; n <= 6; ++n) {
    std::vector<int> spk = round_robin_speakers(n, 2);
    for (int j = 0; j <= 3; ++j)
      for (int k = 0; k <= 3; ++k)
        for (int m = 1; m <= 3; ++m)
          for (DirectionMode mode :
               {DirectionMode::FutureAsInEdge, DirectionMode::Literal}) {
            EdgeTypeTable t = enumerate_edge_types(2, m);
            DialogueGraph g = build_graph(n, spk, m, {j, k}, mode, t);
            auto [intra, inter] = count_edges_oracle(n, j, k, m, mode);
            long got_intra = 0, got_inter = 0;
            std::set<std::pair<int, int>> seen;
            for (const auto& e : g.edges) {
              CHECK(e.src != e.dst);
              CHECK(e.type >= 0);
              CHECK(e.type < t.total());
              CHECK(seen.insert({e.src, e.dst}).second);  // no duplicate arcs
              (e.type < t.intra_count() ? got_intra : got_inter) += 1;
              // Every edge re-derives its type from its endpoints.
              CHECK(edge_type_of(g.node_of(e.src), g.node_of(e.dst), spk, t) == e.type);
            }
            CHECK(got_intra == intra);
            CHECK(got_inter == inter);
          }
  }
}

TEST_CASE("canonical edge order is deterministic") {
  std::vector<int> spk = round_robin_speakers(5, 3);
  EdgeTypeTable t = enumerate_edge_types(3, 2);
  DialogueGraph a = build_graph(5, spk, 2, {2, 1}, DirectionMode::FutureAsInEdge, t);
  DialogueGraph b = build_graph(5, spk, 2, {2, 1}, DirectionMode::FutureAsInEdge, t);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].src == b.edges[i].src);
    CHECK(a.edges[i].dst == b.edges[i].dst);
    CHECK(a.edges[i].type == b.edges[i].type);
  }
}

TEST_CASE("in-edge index groups by destination in canonical order") {
  std::vector<int> spk = round_robin_speakers(5, 2);
  EdgeTypeTable t = enumerate_edge_types(2, 2);
  DialogueGraph g = build_graph(5, spk, 2, {2, 2}, DirectionMode::FutureAsInEdge, t);
  InEdgeIndex idx = in_edges_by_dst(g);
  REQUIRE(idx.offsets.size() == static_cast<std::size_t>(g.node_count() + 1));
  CHECK(idx.offsets.front() == 0);
  CHECK(idx.offsets.back() == static_cast<int>(g.edges.size()));
  for (int dst = 0; dst < g.node_count(); ++dst) {
    std::vector<std::pair<int, int>> expect;  // (src, type) in edge-list order
    for (const auto& e : g.edges)
      if (e.dst == dst) expect.push_back({e.src, e.type});
    int lo = idx.offsets[dst], hi = idx.offsets[dst + 1];
    REQUIRE(hi - lo == static_cast<int>(expect.size()));
    for (int s = lo; s < hi; ++s) {
      CHECK(idx.src[s] == expect[s - lo].first);
      CHECK(idx.type[s] == expect[s - lo].second);
    }
  }
}

TEST_CASE("graph construction validates its inputs") {
  EdgeTypeTable t = enumerate_edge_types(2, 2);
  CHECK_THROWS_AS(build_graph(3, {0, 1, 2}, 2, {1, 1},  // speaker 2 out of range
                              DirectionMode::FutureAsInEdge, t),
                  ValidationError);
  CHECK_THROWS_AS(build_graph(3, {0, 1}, 2, {1, 1},  // speaker list length
                              DirectionMode::FutureAsInEdge, t),
                  ValidationError);
  CHECK_THROWS_AS(build_graph(0, {}, 2, {1, 1}, DirectionMode::FutureAsInEdge, t),
                  ValidationError);
  CHECK_THROWS_AS(build_graph(3, {0, 1, 0}, 0, {1, 1}, DirectionMode::FutureAsInEdge, t),
                  ValidationError);
  CHECK_THROWS_AS(build_graph(3, {0, 1, 0}, 2, {-1, 1}, DirectionMode::FutureAsInEdge, t),
                  ValidationError);

  // Single node, single modality: a valid graph with no edges at all.
  EdgeTypeTable t1 = enumerate_edge_types(1, 1);
  DialogueGraph g = build_graph(1, {0}, 1, {2, 2}, DirectionMode::FutureAsInEdge, t1);
  CHECK(g.edges.empty());
  CHECK(g.node_count() == 1);

  // Type classification errors.
  std::vector<int> spk = {0, 1};
  CHECK_THROWS_AS(edge_type_of({0, 0}, {0, 0}, spk, t), ValidationError);  // self loop
  CHECK_THROWS_AS(edge_type_of({0, 0}, {1, 1}, spk, t), ValidationError);  // diag move
  CHECK(edge_type_of({0, 0}, {1, 0}, spk, t) == t.intra_id(0, 0, 1));
  CHECK(edge_type_of({1, 0}, {1, 1}, spk, t) == t.inter_id(0, 1));
}
