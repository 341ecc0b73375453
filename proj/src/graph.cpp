#include "gcfc/graph.hpp"

#include <algorithm>
#include <set>

#include "gcfc/errors.hpp"

namespace gcfc {

int EdgeTypeTable::intra_id(int mod, int s1, int s2) const {
  if (mod < 0 || mod >= modalities)
    throw ValidationError("EdgeTypeTable: modality slot " + std::to_string(mod) +
                          " out of range [0," + std::to_string(modalities) + ")");
  if (s1 < 0 || s1 >= speakers || s2 < 0 || s2 >= speakers)
    throw ValidationError("EdgeTypeTable: speaker id out of range [0," +
                          std::to_string(speakers) + ")");
  int a = std::min(s1, s2), b = std::max(s1, s2);
  // Index of (a, b), a <= b, in lexicographic order over unordered pairs.
  const int pair_idx = a * speakers - a * (a - 1) / 2 + (b - a);
  return mod * speakers * (speakers + 1) / 2 + pair_idx;
}

int EdgeTypeTable::inter_id(int mod1, int mod2) const {
  if (mod1 == mod2)
    throw ValidationError("EdgeTypeTable: inter type needs distinct modality slots");
  if (mod1 < 0 || mod1 >= modalities || mod2 < 0 || mod2 >= modalities)
    throw ValidationError("EdgeTypeTable: modality slot out of range [0," +
                          std::to_string(modalities) + ")");
  int p = std::min(mod1, mod2), q = std::max(mod1, mod2);
  const int pair_idx = p * modalities - p * (p + 1) / 2 + (q - p - 1);
  return intra_count() + pair_idx;
}

EdgeTypeTable enumerate_edge_types(int speakers, int modalities) {
  if (speakers < 1) throw ValidationError("enumerate_edge_types: need at least 1 speaker");
  if (modalities < 1)
    throw ValidationError("enumerate_edge_types: need at least 1 modality");
  return EdgeTypeTable{speakers, modalities};
}

int edge_type_of(const GraphNode& src, const GraphNode& dst,
                 const std::vector<int>& speakers, const EdgeTypeTable& table) {
  auto speaker_of = [&](int utt) {
    if (utt < 0 || utt >= static_cast<int>(speakers.size()))
      throw ValidationError("edge_type_of: utterance " + std::to_string(utt) +
                            " outside speaker list of length " +
                            std::to_string(speakers.size()));
    return speakers[utt];
  };
  if (src.mod == dst.mod && src.utt != dst.utt)
    return table.intra_id(src.mod, speaker_of(src.utt), speaker_of(dst.utt));
  if (src.mod != dst.mod && src.utt == dst.utt) {
    speaker_of(src.utt);
    return table.inter_id(src.mod, dst.mod);
  }
  throw ValidationError("edge_type_of: endpoints (utt " + std::to_string(src.utt) +
                        ", mod " + std::to_string(src.mod) + ") -> (utt " +
                        std::to_string(dst.utt) + ", mod " + std::to_string(dst.mod) +
                        ") fit neither the intra nor the inter pattern");
}

DialogueGraph build_graph(int n_utts, const std::vector<int>& speakers, int n_mods,
                          Window window, DirectionMode mode, const EdgeTypeTable& table) {
  if (n_utts < 1) throw ValidationError("build_graph: need at least 1 utterance");
  if (static_cast<int>(speakers.size()) != n_utts)
    throw ValidationError("build_graph: speaker list length " +
                          std::to_string(speakers.size()) + " != utterance count " +
                          std::to_string(n_utts));
  if (n_mods < 1 || n_mods > table.modalities)
    throw ValidationError("build_graph: modality count " + std::to_string(n_mods) +
                          " incompatible with table (M=" + std::to_string(table.modalities) +
                          ")");
  if (window.past < 0 || window.future < 0)
    throw ValidationError("build_graph: window sides must be non-negative");
  for (int s : speakers)
    if (s < 0 || s >= table.speakers)
      throw ValidationError("build_graph: speaker id " + std::to_string(s) +
                            " out of range [0," + std::to_string(table.speakers) + ")");

  DialogueGraph g;
  g.n_utts = n_utts;
  g.n_mods = n_mods;

  // The literal direction mode can emit the same directed pair from both
  // window clauses; keep the first occurrence only.
  std::set<std::pair<int, int>> seen;
  auto push = [&](int src_utt, int dst_utt, int mod) {
    const int s = g.node_id(src_utt, mod), d = g.node_id(dst_utt, mod);
    if (mode == DirectionMode::Literal && !seen.insert({s, d}).second) return;
    g.edges.push_back({s, d, table.intra_id(mod, speakers[src_utt], speakers[dst_utt])});
  };

  for (int m = 0; m < n_mods; ++m) {
    for (int i = 0; i < n_utts; ++i) {
      for (int t = std::max(0, i - window.past); t <= i - 1; ++t) push(t, i, m);
      for (int t = i + 1; t <= std::min(n_utts - 1, i + window.future); ++t) {
        if (mode == DirectionMode::FutureAsInEdge)
          push(t, i, m);
        else
          push(i, t, m);
      }
    }
  }

  for (int i = 0; i < n_utts; ++i)
    for (int m1 = 0; m1 < n_mods; ++m1)
      for (int m2 = m1 + 1; m2 < n_mods; ++m2) {
        const int a = g.node_id(i, m1), b = g.node_id(i, m2);
        const int ty = table.inter_id(m1, m2);
        g.edges.push_back({a, b, ty});
        g.edges.push_back({b, a, ty});
      }

  return g;
}

std::pair<long, long> count_edges_oracle(int n_utts, int j, int k, int n_mods,
                                         DirectionMode mode) {
  // Deliberately brute force: test every ordered node pair against the
  // definition clauses. Keeps this independent of build_graph's loops.
  long intra = 0;
  for (int m = 0; m < n_mods; ++m) {
    for (int src = 0; src < n_utts; ++src) {
      for (int dst = 0; dst < n_utts; ++dst) {
        if (src == dst) continue;
        bool present = false;
        if (mode == DirectionMode::FutureAsInEdge) {
          // src -> dst exists when src sits in dst's past window or in dst's
          // future window.
          if (src >= dst - j && src <= dst - 1) present = true;
          if (src >= dst + 1 && src <= dst + k) present = true;
        } else {
          // Past clause: src in [dst-j, dst-1]. Future clause emits
          // out-edges, so src -> dst also exists when dst in [src+1, src+k].
          if (src >= dst - j && src <= dst - 1) present = true;
          if (dst >= src + 1 && dst <= src + k) present = true;
        }
        if (present) ++intra;
      }
    }
  }
  long inter = static_cast<long>(n_utts) * n_mods * (n_mods - 1);
  return {intra, inter};
}

InEdgeIndex in_edges_by_dst(const DialogueGraph& g) {
  const int n = g.node_count();
  InEdgeIndex idx;
  idx.offsets.assign(n + 1, 0);
  for (const auto& e : g.edges) ++idx.offsets[e.dst + 1];
  for (int i = 0; i < n; ++i) idx.offsets[i + 1] += idx.offsets[i];
  idx.src.resize(g.edges.size());
  idx.type.resize(g.edges.size());
  std::vector<int> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
  for (const auto& e : g.edges) {
    const int slot = cursor[e.dst]++;
    idx.src[slot] = e.src;
    idx.type[slot] = e.type;
  }
  return idx;
}

}  // namespace gcfc
