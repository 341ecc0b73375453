#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gcfc {

// Directed multimodal dialogue graph. One node per (utterance, modality
// slot); node ids are modality-major: node = mod * n_utts + utt.
//
// Intra edges connect a node to its own-modality context inside the
// inclusive window: past sources [i-j, i-1] and future positions [i+1, i+k].
// How the future clause is wired depends on the direction mode:
//   FutureAsInEdge (default): future utterances feed i as in-edges, so every
//     node attends over both sides of its window.
//   Literal: the future clause emits out-edges i -> t instead; combined with
//     the past clause this collapses to past-only in-neighborhoods of width
//     max(j, k), with duplicates removed.
// Inter edges run both directions between distinct modality slots of the
// same utterance.

struct GraphNode {
  int utt = 0;
  int mod = 0;
};

struct TypedEdge {
  int src = 0;
  int dst = 0;
  int type = 0;
};

struct Window {
  int past = 0;    // j
  int future = 0;  // k
};

enum class DirectionMode { FutureAsInEdge, Literal };

// Deterministic edge-type id table: all intra types first, ordered
// lexicographically by (modality slot, unordered speaker pair), then the
// inter types ordered by unordered modality pair. Intra speaker pairs are
// unordered so (s1, s2) and (s2, s1) share an id; same for inter pairs.
struct EdgeTypeTable {
  int speakers = 0;    // D
  int modalities = 0;  // M

  int intra_count() const { return modalities * speakers * (speakers + 1) / 2; }
  int inter_count() const { return modalities * (modalities - 1) / 2; }
  // DM = M (D^2 + D + M - 1) / 2
  int total() const { return intra_count() + inter_count(); }

  int intra_id(int mod, int s1, int s2) const;
  int inter_id(int mod1, int mod2) const;
};

EdgeTypeTable enumerate_edge_types(int speakers, int modalities);

// Classifies one edge given endpoint nodes and the per-utterance speaker
// ids. Throws ValidationError when the endpoints fit neither the intra nor
// the inter pattern (e.g. a self-loop, or distinct utterance and modality).
int edge_type_of(const GraphNode& src, const GraphNode& dst,
                 const std::vector<int>& speakers, const EdgeTypeTable& table);

struct DialogueGraph {
  int n_utts = 0;
  int n_mods = 0;
  std::vector<TypedEdge> edges;  // canonical deterministic order

  int node_count() const { return n_utts * n_mods; }
  int node_id(int utt, int mod) const { return mod * n_utts + utt; }
  GraphNode node_of(int id) const { return {id % n_utts, id / n_utts}; }
};

// speakers[i] is the speaker of utterance i; ids must lie in
// [0, table.speakers).
DialogueGraph build_graph(int n_utts, const std::vector<int>& speakers, int n_mods,
                          Window window, DirectionMode mode, const EdgeTypeTable& table);

// Naive reference count of (intra, inter) edges, written as direct loops over
// the definition with none of build_graph's machinery. Test oracle only.
std::pair<long, long> count_edges_oracle(int n_utts, int j, int k, int n_mods,
                                         DirectionMode mode);

// In-edge adjacency grouped by destination, for attention. Edge slots are
// sorted by destination node id, ties kept in canonical edge order.
struct InEdgeIndex {
  std::vector<int> offsets;  // size node_count + 1
  std::vector<int> src;      // size edges
  std::vector<int> type;     // size edges
};

InEdgeIndex in_edges_by_dst(const DialogueGraph& g);

}  // namespace gcfc
