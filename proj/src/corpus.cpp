#include "gcfc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gcfc/errors.hpp"
#include "gcfc/rng.hpp"

namespace gcfc {

using nlohmann::json;

int Corpus::max_speakers() const {
  int d = 0;
  for (const auto& dlg : dialogues) d = std::max(d, dlg.speakers);
  return d;
}

long Corpus::total_utterances() const {
  long n = 0;
  for (const auto& dlg : dialogues) n += static_cast<long>(dlg.utterances.size());
  return n;
}

int Corpus::label_index(const std::string& name) const {
  for (size_t i = 0; i < header.labels.size(); ++i)
    if (header.labels[i] == name) return static_cast<int>(i);
  return -1;
}

// ---- JSONL ------------------------------------------------------------------

static std::vector<double> parse_feature_array(const json& arr, int want_dim,
                                               const std::string& where) {
  if (!arr.is_array())
    throw ValidationError(where + ": feature field is not an array");
  if (static_cast<int>(arr.size()) != want_dim)
    throw ValidationError(where + ": expected " + std::to_string(want_dim) +
                          " values, got " + std::to_string(arr.size()));
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number())
      throw ValidationError(where + ": non-numeric feature value");
    double v = x.get<double>();
    if (!std::isfinite(v))
      throw ValidationError(where + ": non-finite feature value");
    out.push_back(v);
  }
  return out;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);

  Corpus corpus;
  std::string line;
  long line_no = 0;

  // Header line.
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  ++line_no;
  json hdr;
  try {
    hdr = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(path + " line 1: bad JSON: " + e.what());
  }
  if (hdr.value("format", "") != "gcfc-corpus-v1")
    throw ValidationError(path + " line 1: missing or wrong format tag, want gcfc-corpus-v1");
  if (!hdr.contains("labels") || !hdr["labels"].is_array() || hdr["labels"].empty())
    throw ValidationError(path + " line 1: header needs a non-empty labels array");
  for (const auto& l : hdr["labels"]) corpus.header.labels.push_back(l.get<std::string>());
  {
    std::vector<std::string> sorted = corpus.header.labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError(path + " line 1: duplicate label name");
  }
  if (!hdr.contains("dims") || !hdr["dims"].is_object())
    throw ValidationError(path + " line 1: header needs a dims object");
  corpus.header.dim_t = hdr["dims"].value("t", 0);
  corpus.header.dim_a = hdr["dims"].value("a", 0);
  corpus.header.dim_v = hdr["dims"].value("v", 0);
  if (corpus.header.dim_t <= 0 || corpus.header.dim_a <= 0 || corpus.header.dim_v <= 0)
    throw ValidationError(path + " line 1: dims.t/a/v must all be positive");

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json d;
    try {
      d = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(path + " line " + std::to_string(line_no) + ": bad JSON: " +
                            e.what());
    }
    const std::string where = path + " line " + std::to_string(line_no);
    Dialogue dlg;
    if (!d.contains("id") || !d["id"].is_string())
      throw ValidationError(where + ": dialogue needs a string id");
    dlg.id = d["id"].get<std::string>();
    if (!d.contains("speakers") || !d["speakers"].is_number_integer())
      throw ValidationError(where + ": dialogue '" + dlg.id + "' needs integer speakers");
    dlg.speakers = d["speakers"].get<int>();
    if (dlg.speakers <= 0)
      throw ValidationError(where + ": dialogue '" + dlg.id + "': speakers must be positive");
    if (!d.contains("utterances") || !d["utterances"].is_array() || d["utterances"].empty())
      throw ValidationError(where + ": dialogue '" + dlg.id +
                            "' needs a non-empty utterances array");
    int ui = 0;
    for (const auto& u : d["utterances"]) {
      const std::string uwhere = where + ", dialogue '" + dlg.id + "', utterance " +
                                 std::to_string(ui);
      Utterance utt;
      if (!u.contains("speaker") || !u["speaker"].is_number_integer())
        throw ValidationError(uwhere + ": missing integer speaker");
      utt.speaker = u["speaker"].get<int>();
      if (utt.speaker < 0 || utt.speaker >= dlg.speakers)
        throw ValidationError(uwhere + ": speaker " + std::to_string(utt.speaker) +
                              " out of range [0," + std::to_string(dlg.speakers) + ")");
      if (!u.contains("label") || !u["label"].is_string())
        throw ValidationError(uwhere + ": missing string label");
      const std::string lname = u["label"].get<std::string>();
      utt.label = corpus.label_index(lname);
      if (utt.label < 0)
        throw ValidationError(uwhere + ": label '" + lname + "' not in header labels");
      for (const char* f : {"t", "a", "v"})
        if (!u.contains(f))
          throw ValidationError(uwhere + ": missing field '" + std::string(f) + "'");
      utt.t = parse_feature_array(u["t"], corpus.header.dim_t, uwhere + " field t");
      utt.a = parse_feature_array(u["a"], corpus.header.dim_a, uwhere + " field a");
      utt.v = parse_feature_array(u["v"], corpus.header.dim_v, uwhere + " field v");
      dlg.utterances.push_back(std::move(utt));
      ++ui;
    }
    corpus.dialogues.push_back(std::move(dlg));
  }
  if (corpus.dialogues.empty())
    throw ValidationError(path + ": corpus has no dialogues");
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path);
  json hdr = {{"format", "gcfc-corpus-v1"},
              {"labels", corpus.header.labels},
              {"dims",
               {{"t", corpus.header.dim_t}, {"a", corpus.header.dim_a},
                {"v", corpus.header.dim_v}}}};
  out << hdr.dump() << "\n";
  for (const auto& dlg : corpus.dialogues) {
    json utts = json::array();
    for (const auto& u : dlg.utterances) {
      utts.push_back({{"speaker", u.speaker},
                      {"label", corpus.header.labels.at(u.label)},
                      {"t", u.t},
                      {"a", u.a},
                      {"v", u.v}});
    }
    json d = {{"id", dlg.id}, {"speakers", dlg.speakers}, {"utterances", std::move(utts)}};
    out << d.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---- synthetic generator -------------------------------------------------------

void GeneratorConfig::validate() const {
  if (dialogues <= 0) throw ValidationError("generator: dialogues must be positive");
  if (len_min <= 0 || len_max < len_min)
    throw ValidationError("generator: need 0 < len_min <= len_max");
  if (speakers <= 0) throw ValidationError("generator: speakers must be positive");
  if (dim_t < 1 || dim_a < 1 || dim_v < 1)
    throw ValidationError("generator: every modality needs at least 1 dim");
  if (noise < 0.0) throw ValidationError("generator: noise must be non-negative");
  if (signal <= 0.0) throw ValidationError("generator: signal must be positive");
}

static const char* kCoarse3[] = {"Neutral", "Positive", "Negative"};
static const char* kIemocap6[] = {"Happy", "Sad", "Neutral", "Angry", "Excited",
                                  "Frustrated"};

Corpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  Corpus corpus;
  corpus.header.dim_t = cfg.dim_t;
  corpus.header.dim_a = cfg.dim_a;
  corpus.header.dim_v = cfg.dim_v;
  const bool fine = cfg.labels == GeneratorConfig::Labels::Iemocap6;
  if (fine)
    for (const char* l : kIemocap6) corpus.header.labels.push_back(l);
  else
    for (const char* l : kCoarse3) corpus.header.labels.push_back(l);

  // Round-robin counters for refining coarse labels into the six-way scheme.
  long pos_count = 0, neg_count = 0;

  auto fill_features = [&](std::vector<double>& dst, int dim, int bit) {
    dst.resize(dim);
    dst[0] = (bit ? 1.0 : -1.0) * cfg.signal;
    for (int i = 1; i < dim; ++i) dst[i] = rng.normal(0.0, cfg.noise);
  };

  for (int di = 0; di < cfg.dialogues; ++di) {
    Dialogue dlg;
    char buf[32];
    std::snprintf(buf, sizeof buf, "synthetic-%04d", di);
    dlg.id = buf;
    dlg.speakers = cfg.speakers;
    const int len = cfg.len_min + rng.uniform_int(cfg.len_max - cfg.len_min + 1);
    for (int ui = 0; ui < len; ++ui) {
      Utterance utt;
      utt.speaker = rng.uniform_int(cfg.speakers);
      const int b1 = rng.bernoulli(0.5) ? 1 : 0;
      const int b2 = rng.bernoulli(0.5) ? 1 : 0;
      fill_features(utt.t, cfg.dim_t, b1);
      fill_features(utt.a, cfg.dim_a, b2);
      fill_features(utt.v, cfg.dim_v, b1 ^ b2);
      std::string label;
      if (b1 == 0) {
        label = "Neutral";
      } else if (b2 == 1) {
        if (fine) {
          label = pos_count % 2 == 0 ? "Happy" : "Excited";
          ++pos_count;
        } else {
          label = "Positive";
        }
      } else {
        if (fine) {
          label = neg_count % 3 == 0 ? "Sad" : neg_count % 3 == 1 ? "Angry" : "Frustrated";
          ++neg_count;
        } else {
          label = "Negative";
        }
      }
      utt.label = corpus.label_index(label);
      dlg.utterances.push_back(std::move(utt));
    }
    corpus.dialogues.push_back(std::move(dlg));
  }
  return corpus;
}

// ---- label coarsening ------------------------------------------------------------

LabelScheme LabelScheme::iemocap6() {
  LabelScheme s;
  s.coarse = {"Positive", "Negative", "Neutral"};
  s.to_coarse = {{"Happy", "Positive"},   {"Excited", "Positive"},
                 {"Sad", "Negative"},     {"Angry", "Negative"},
                 {"Frustrated", "Negative"}, {"Neutral", "Neutral"}};
  return s;
}

LabelScheme LabelScheme::meld7() {
  LabelScheme s;
  s.coarse = {"Positive", "Negative", "Neutral"};
  s.to_coarse = {{"Joy", "Positive"},     {"Surprise", "Positive"},
                 {"Sadness", "Negative"}, {"Anger", "Negative"},
                 {"Disgust", "Negative"}, {"Fear", "Negative"},
                 {"Neutral", "Neutral"}};
  return s;
}

LabelScheme LabelScheme::identity3() {
  LabelScheme s;
  s.coarse = {"Positive", "Negative", "Neutral"};
  s.to_coarse = {{"Positive", "Positive"},
                 {"Negative", "Negative"},
                 {"Neutral", "Neutral"}};
  return s;
}

LabelScheme LabelScheme::for_labels(const std::vector<std::string>& labels) {
  for (const LabelScheme& s : {iemocap6(), meld7(), identity3()}) {
    bool all = true;
    for (const auto& l : labels)
      if (!s.to_coarse.count(l)) {
        all = false;
        break;
      }
    if (all) return s;
  }
  std::string joined;
  for (const auto& l : labels) joined += (joined.empty() ? "" : ", ") + l;
  throw ValidationError("no coarsening scheme covers label set {" + joined + "}");
}

Corpus coarsen_labels(const Corpus& corpus, const LabelScheme& scheme) {
  Corpus out;
  out.header.dim_t = corpus.header.dim_t;
  out.header.dim_a = corpus.header.dim_a;
  out.header.dim_v = corpus.header.dim_v;
  out.header.labels = scheme.coarse;

  // Precompute old label index -> new label index.
  std::vector<int> remap(corpus.header.labels.size(), -1);
  for (size_t i = 0; i < corpus.header.labels.size(); ++i) {
    auto it = scheme.to_coarse.find(corpus.header.labels[i]);
    if (it == scheme.to_coarse.end())
      throw ValidationError("coarsen_labels: label '" + corpus.header.labels[i] +
                            "' not covered by scheme");
    remap[i] = out.label_index(it->second);
    if (remap[i] < 0)
      throw ContractError("coarsen_labels: scheme maps onto unknown coarse label '" +
                          it->second + "'");
  }

  out.dialogues = corpus.dialogues;
  for (auto& dlg : out.dialogues)
    for (auto& u : dlg.utterances) u.label = remap[u.label];
  return out;
}

// ---- splits ------------------------------------------------------------------------

SplitResult split_corpus(const Corpus& corpus, SplitScheme scheme, std::uint64_t seed) {
  const long n = static_cast<long>(corpus.dialogues.size());
  const long n_trainval = static_cast<long>(std::floor(0.8 * static_cast<double>(n)));
  const long n_train = static_cast<long>(std::floor(0.9 * static_cast<double>(n_trainval)));
  const long n_valid = n_trainval - n_train;
  const long n_test = n - n_trainval;
  if (n_train < 1 || n_valid < 1 || n_test < 1)
    throw ValidationError("split_corpus: " + std::to_string(n) +
                          " dialogues cannot fill train/valid/test (need >= 3)");

  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (scheme == SplitScheme::RatioRandom) {
    Rng rng(seed);
    // Fisher-Yates from our own stream so the permutation is reproducible.
    for (long i = n - 1; i > 0; --i) {
      long j = rng.uniform_int(static_cast<int>(i + 1));
      std::swap(idx[i], idx[j]);
    }
  }

  SplitResult res;
  res.train.header = res.valid.header = res.test.header = corpus.header;
  for (long i = 0; i < n; ++i) {
    const Dialogue& d = corpus.dialogues[idx[i]];
    if (i < n_train)
      res.train.dialogues.push_back(d);
    else if (i < n_trainval)
      res.valid.dialogues.push_back(d);
    else
      res.test.dialogues.push_back(d);
  }
  return res;
}

}  // namespace gcfc
