#include "gcfc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gcfc/errors.hpp"

namespace gcfc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string section_of(const std::string& key) {
  std::size_t dot = key.find('.');
  return dot == std::string::npos ? std::string() : key.substr(0, dot);
}

}  // namespace

FlatConfig::FlatConfig() {
  add("data.corpus", "", "corpus file path (required by train/eval/ablate)");

  add("gen.dialogues", "200", "number of dialogues to generate");
  add("gen.len_min", "8", "minimum utterances per dialogue");
  add("gen.len_max", "12", "maximum utterances per dialogue");
  add("gen.speakers", "2", "speakers per dialogue");
  add("gen.dim_t", "24", "text feature width");
  add("gen.dim_a", "24", "audio feature width");
  add("gen.dim_v", "24", "visual feature width");
  add("gen.noise", "0.5", "noise sigma on non-signal coordinates");
  add("gen.signal", "2.0", "magnitude of the signal coordinate");
  add("gen.labels", "coarse3", "label scheme: coarse3 | iemocap6");
  add("gen.seed", "0", "generator seed");

  add("model.modalities", "avt", "modality subset, e.g. avt, at, v");
  add("model.d", "64", "model width (encoder, attention, edge-type width)");
  add("model.lstm_hidden", "32", "per-direction text LSTM hidden width");
  add("model.heads", "2", "attention heads per GAT block");
  add("model.layers_per_stage", "2", "GAT-MLP layers per complementation stage");
  add("model.window_past", "2", "intra-modal past context window");
  add("model.window_future", "2", "intra-modal future context window");
  add("model.direction_mode", "future_as_in_edge",
      "future edge handling: future_as_in_edge | literal");
  add("model.mu", "1.0", "speaker embedding injection weight");
  add("model.dropout", "0.1", "dropout rate in feed-forward and subspace maps");
  add("model.skip_connection", "true", "residual connections around sublayers");
  add("model.edge_type_embedding", "true", "learnable edge-type features in attention");
  add("model.speaker_embedding", "true", "add speaker embeddings after encoding");
  add("model.use_multigat", "true", "enable the graph attention sublayer");
  add("model.use_feedforward", "true", "enable the feed-forward sublayer");
  add("model.norm_position", "post", "layer norm placement: post | pre");
  add("model.head_merge", "average", "multi-head merge: average | concat_project");

  add("train.epochs", "50", "maximum training epochs");
  add("train.batch_size", "8", "dialogues per optimizer step");
  add("train.lr", "0.001", "AdamW learning rate");
  add("train.weight_decay", "1e-05", "AdamW decoupled weight decay");
  add("train.lambda_l2", "1e-05", "L2 penalty on classification-head weights");
  add("train.seed", "0", "training seed (init, dropout, shuffling)");
  add("train.patience", "15", "early stopping patience in epochs");
  add("train.split", "sequential", "dialogue split scheme: sequential | ratio_random");
  add("train.split_seed", "0", "shuffle seed for the ratio_random split");
  add("train.shared_loss", "true", "auxiliary loss on the shared-subspace head");
  add("train.separate_loss", "true", "auxiliary losses on per-modality heads");

  add("ablate.seeds", "0,1,2", "comma-separated seeds averaged per variant");
  add("ablate.epochs", "-1", "epoch override for ablation runs; -1 keeps train.epochs");
  add("ablate.depths", "2,4,8", "layer depths for the skip_vs_depth study");
  add("ablate.windows", "0,2,4,6", "window sizes for the window_sweep study");
}

void FlatConfig::add(const std::string& key, const std::string& def,
                     const std::string& doc) {
  order_.push_back(key);
  map_[key] = Entry{def, def, doc};
}

const FlatConfig::Entry& FlatConfig::entry(const std::string& key) const {
  auto it = map_.find(key);
  if (it == map_.end()) throw ValidationError("unknown config key '" + key + "'");
  return it->second;
}

bool FlatConfig::has(const std::string& key) const { return map_.count(key) > 0; }

void FlatConfig::set(const std::string& key, const std::string& value) {
  auto it = map_.find(key);
  if (it == map_.end()) throw ValidationError("unknown config key '" + key + "'");
  it->second.value = trim(value);
}

const std::string& FlatConfig::get(const std::string& key) const {
  return entry(key).value;
}

int FlatConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not an integer");
  }
}

std::uint64_t FlatConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    unsigned long long out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint64_t>(out);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + v +
                          "' is not an unsigned integer");
  }
}

double FlatConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not a number");
  }
}

bool FlatConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<int> FlatConfig::get_int_list(const std::string& key) const {
  const std::string& v = get(key);
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': '" + item +
                            "' is not an integer");
    }
  }
  if (out.empty())
    throw ValidationError("config key '" + key + "': empty list");
  return out;
}

std::vector<std::uint64_t> FlatConfig::get_u64_list(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (int x : get_int_list(key)) {
    if (x < 0)
      throw ValidationError("config key '" + key + "': negative entry");
    out.push_back(static_cast<std::uint64_t>(x));
  }
  return out;
}

void FlatConfig::apply_env_seed() {
  const char* env = std::getenv("GCFC_SEED");
  if (!env) return;
  std::string v = trim(env);
  if (v.empty()) return;
  try {
    std::size_t pos = 0;
    (void)std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ValidationError("GCFC_SEED: '" + v + "' is not an unsigned integer");
  }
  set("gen.seed", v);
  set("train.seed", v);
  set("train.split_seed", v);
}

void FlatConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw ValidationError("config: " + path + ":" + std::to_string(lineno) +
                            ": " + msg);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (key.find('.') == std::string::npos && !section.empty())
      key = section + "." + key;
    try {
      set(key, value);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }
}

std::string FlatConfig::render() const {
  std::ostringstream out;
  std::string section;
  for (const auto& key : order_) {
    std::string sec = section_of(key);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << key.substr(sec.size() + 1) << " = " << map_.at(key).value << "\n";
  }
  return out.str();
}

std::string FlatConfig::reference_page() {
  FlatConfig defaults;
  std::size_t kw = 0, dw = 0;
  for (const auto& key : defaults.order_) {
    kw = std::max(kw, key.size());
    dw = std::max(dw, defaults.map_.at(key).def.size());
  }
  std::ostringstream out;
  out << "Configuration keys (key = default  description):\n";
  std::string section;
  for (const auto& key : defaults.order_) {
    std::string sec = section_of(key);
    if (sec != section) {
      out << "\n";
      section = sec;
    }
    const Entry& e = defaults.map_.at(key);
    out << "  " << key << std::string(kw - key.size(), ' ') << " = " << e.def
        << std::string(dw - e.def.size(), ' ') << "  " << e.doc << "\n";
  }
  return out.str();
}

GeneratorConfig FlatConfig::gen_config() const {
  GeneratorConfig g;
  g.dialogues = get_int("gen.dialogues");
  g.len_min = get_int("gen.len_min");
  g.len_max = get_int("gen.len_max");
  g.speakers = get_int("gen.speakers");
  g.dim_t = get_int("gen.dim_t");
  g.dim_a = get_int("gen.dim_a");
  g.dim_v = get_int("gen.dim_v");
  g.noise = get_double("gen.noise");
  g.signal = get_double("gen.signal");
  const std::string& labels = get("gen.labels");
  if (labels == "coarse3")
    g.labels = GeneratorConfig::Labels::Coarse3;
  else if (labels == "iemocap6")
    g.labels = GeneratorConfig::Labels::Iemocap6;
  else
    throw ValidationError("config key 'gen.labels': '" + labels +
                          "' is not one of coarse3 | iemocap6");
  g.validate();
  return g;
}

std::uint64_t FlatConfig::gen_seed() const { return get_u64("gen.seed"); }

ModelConfig FlatConfig::model_config() const {
  ModelConfig m;
  m.modalities = parse_modalities(get("model.modalities"));
  m.d = get_int("model.d");
  m.lstm_hidden = get_int("model.lstm_hidden");
  m.heads = get_int("model.heads");
  m.layers_per_stage = get_int("model.layers_per_stage");
  m.window.past = get_int("model.window_past");
  m.window.future = get_int("model.window_future");
  const std::string& dir = get("model.direction_mode");
  if (dir == "future_as_in_edge")
    m.direction = DirectionMode::FutureAsInEdge;
  else if (dir == "literal")
    m.direction = DirectionMode::Literal;
  else
    throw ValidationError("config key 'model.direction_mode': '" + dir +
                          "' is not one of future_as_in_edge | literal");
  m.mu = get_double("model.mu");
  m.dropout = get_double("model.dropout");
  m.skip_connection = get_bool("model.skip_connection");
  m.edge_type_embedding = get_bool("model.edge_type_embedding");
  m.speaker_embedding = get_bool("model.speaker_embedding");
  m.use_multigat = get_bool("model.use_multigat");
  m.use_feedforward = get_bool("model.use_feedforward");
  const std::string& norm = get("model.norm_position");
  if (norm == "post")
    m.norm = NormPosition::Post;
  else if (norm == "pre")
    m.norm = NormPosition::Pre;
  else
    throw ValidationError("config key 'model.norm_position': '" + norm +
                          "' is not one of post | pre");
  const std::string& merge = get("model.head_merge");
  if (merge == "average")
    m.head_merge = HeadMerge::Average;
  else if (merge == "concat_project")
    m.head_merge = HeadMerge::ConcatProject;
  else
    throw ValidationError("config key 'model.head_merge': '" + merge +
                          "' is not one of average | concat_project");
  m.lambda_l2 = get_double("train.lambda_l2");
  m.shared_loss = get_bool("train.shared_loss");
  m.separate_loss = get_bool("train.separate_loss");
  return m;
}

TrainConfig FlatConfig::train_config() const {
  TrainConfig t;
  t.model = model_config();
  t.epochs = get_int("train.epochs");
  t.batch_size = get_int("train.batch_size");
  t.lr = get_double("train.lr");
  t.weight_decay = get_double("train.weight_decay");
  t.seed = get_u64("train.seed");
  t.patience = get_int("train.patience");
  const std::string& split = get("train.split");
  if (split == "sequential")
    t.split = SplitScheme::Sequential;
  else if (split == "ratio_random")
    t.split = SplitScheme::RatioRandom;
  else
    throw ValidationError("config key 'train.split': '" + split +
                          "' is not one of sequential | ratio_random");
  t.split_seed = get_u64("train.split_seed");
  return t;
}

AblationOptions FlatConfig::ablate_options() const {
  AblationOptions o;
  o.seeds = get_u64_list("ablate.seeds");
  o.epochs_override = get_int("ablate.epochs");
  o.depths = get_int_list("ablate.depths");
  o.windows = get_int_list("ablate.windows");
  for (int d : o.depths)
    if (d < 1)
      throw ValidationError("config key 'ablate.depths': depths must be >= 1");
  for (int w : o.windows)
    if (w < 0)
      throw ValidationError("config key 'ablate.windows': windows must be >= 0");
  return o;
}

}  // namespace gcfc
