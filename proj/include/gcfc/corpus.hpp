#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gcfc {

// One conversational turn. Modality features are raw doubles; labels are
// indices into the owning corpus header's label list.
struct Utterance {
  int speaker = 0;
  int label = 0;
  std::vector<double> t, a, v;
};

struct Dialogue {
  std::string id;
  int speakers = 0;  // number of distinct speaker slots; ids are [0, speakers)
  std::vector<Utterance> utterances;
};

struct CorpusHeader {
  std::vector<std::string> labels;
  int dim_t = 0, dim_a = 0, dim_v = 0;
};

struct Corpus {
  CorpusHeader header;
  std::vector<Dialogue> dialogues;

  int max_speakers() const;
  long total_utterances() const;
  int label_index(const std::string& name) const;  // -1 when absent
};

// JSONL: a header line then one line per dialogue. Doubles survive the
// round-trip bit-exactly (serialized with max_digits10 precision).
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

// Synthetic conversations with a planted cross-modal rule. Per utterance two
// latent bits are drawn; coordinate 0 of t carries b1, of a carries b2, and
// of v carries b1 XOR b2, each as +-signal. Remaining coordinates are
// N(0, noise^2) distractors. Labels: b1=0 -> Neutral, b1=1 & b2=1 -> Positive,
// b1=1 & b2=0 -> Negative. Any single modality therefore caps below 80%
// accuracy (75% for t, 50% for a or v) while any two modalities determine the
// label exactly.
struct GeneratorConfig {
  int dialogues = 200;
  int len_min = 8;
  int len_max = 12;
  int speakers = 2;
  int dim_t = 24, dim_a = 24, dim_v = 24;
  double noise = 0.5;
  double signal = 2.0;
  // coarse3 emits {Neutral, Positive, Negative}; iemocap6 refines those into
  // the six-way scheme (Positive -> Happy/Excited, Negative ->
  // Sad/Angry/Frustrated, round-robin) so label coarsening can be exercised.
  enum class Labels { Coarse3, Iemocap6 };
  Labels labels = Labels::Coarse3;

  void validate() const;
};

Corpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed);

// Label coarsening. A scheme maps fine label names onto coarse ones; the
// coarse label list keeps the order Positive, Negative, Neutral.
struct LabelScheme {
  std::vector<std::string> coarse;                // ordered coarse label names
  std::map<std::string, std::string> to_coarse;   // fine name -> coarse name

  static LabelScheme iemocap6();
  static LabelScheme meld7();
  static LabelScheme identity3();
  // Picks the scheme matching the given label set; ValidationError if none.
  static LabelScheme for_labels(const std::vector<std::string>& labels);
};

Corpus coarsen_labels(const Corpus& corpus, const LabelScheme& scheme);

// Splits act on whole dialogues. Sequential: first floor(0.8 N) dialogues
// feed train+valid, of which the first floor(0.9 * that) are train and the
// rest valid; the tail is test. RatioRandom shuffles dialogue order with the
// given seed and applies the same boundaries.
enum class SplitScheme { Sequential, RatioRandom };

struct SplitResult {
  Corpus train, valid, test;
};

SplitResult split_corpus(const Corpus& corpus, SplitScheme scheme, std::uint64_t seed);

}  // namespace gcfc
