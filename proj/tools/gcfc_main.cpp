// Command-line front end: gen-data, train, eval, ablate, inspect-graph.
//
// Every run resolves its configuration from, in order of rising precedence,
// built-in defaults, the GCFC_SEED environment variable (seed keys only), an
// optional --config file, and repeated --set key=value overrides. Commands
// with an --out directory write resolved_config.txt there before doing any
// real work, and error.log when they fail. Exit codes: 0 success, 1 invalid
// input or data (validation, IO, numeric divergence), 2 usage or internal.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "gcfc/checkpoint.hpp"
#include "gcfc/config.hpp"
#include "gcfc/corpus.hpp"
#include "gcfc/errors.hpp"
#include "gcfc/graph.hpp"
#include "gcfc/metrics.hpp"
#include "gcfc/model.hpp"
#include "gcfc/trainer.hpp"

namespace fs = std::filesystem;
using gcfc::FlatConfig;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_required) {
  cmd->add_option("--config", args.config_path, "configuration file");
  cmd->add_option("--set", args.sets, "override, e.g. --set model.d=32")
      ->take_all();
  auto* out = cmd->add_option("--out", args.out, "output directory");
  if (out_required) out->required();
}

// Defaults -> GCFC_SEED -> config file -> --set overrides.
FlatConfig resolve_config(const CommonArgs& args) {
  FlatConfig cfg;
  cfg.apply_env_seed();
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const std::string& kv : args.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw gcfc::ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw gcfc::IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw gcfc::IoError("short write to '" + path.string() + "'");
}

nlohmann::json config_json(const FlatConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const std::string& key : cfg.keys()) j[key] = cfg.get(key);
  return j;
}

nlohmann::json metrics_json(const gcfc::Metrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["weighted_f1"] = m.weighted_f1;
  j["total"] = m.total;
  j["per_class"] = nlohmann::json::array();
  for (const auto& pc : m.per_class) {
    nlohmann::json c;
    c["label"] = pc.label;
    c["precision"] = pc.precision;
    c["recall"] = pc.recall;
    c["f1"] = pc.f1;
    c["support"] = pc.support;
    j["per_class"].push_back(c);
  }
  j["confusion"] = m.confusion;
  return j;
}

void print_metrics(const std::string& name, const gcfc::Metrics& m) {
  std::cout << name << ": accuracy " << m.accuracy << "  weighted_f1 "
            << m.weighted_f1 << "  (" << m.total << " utterances)\n";
}

gcfc::Corpus load_required_corpus(const FlatConfig& cfg) {
  const std::string& path = cfg.get("data.corpus");
  if (path.empty())
    throw gcfc::ValidationError(
        "data.corpus is required (set it in a config file or with --set)");
  return gcfc::load_corpus(path);
}

gcfc::ModelConfig model_config_for(const FlatConfig& cfg, const gcfc::Corpus& corpus) {
  gcfc::ModelConfig mc = cfg.model_config();
  mc.num_classes = static_cast<int>(corpus.header.labels.size());
  mc.dim_t = corpus.header.dim_t;
  mc.dim_a = corpus.header.dim_a;
  mc.dim_v = corpus.header.dim_v;
  mc.max_speakers = corpus.max_speakers();
  mc.validate();
  return mc;
}

int cmd_gen_data(const CommonArgs& args) {
  FlatConfig cfg = resolve_config(args);
  write_text(fs::path(args.out) / "resolved_config.txt", cfg.render());
  gcfc::GeneratorConfig gen = cfg.gen_config();
  gcfc::Corpus corpus = gcfc::generate_synthetic(gen, cfg.gen_seed());
  fs::path path = fs::path(args.out) / "corpus.jsonl";
  gcfc::save_corpus(corpus, path.string());
  std::cout << "wrote " << path.string() << ": " << corpus.dialogues.size()
            << " dialogues, " << corpus.total_utterances() << " utterances, "
            << corpus.header.labels.size() << " labels\n";
  return 0;
}

int cmd_train(const CommonArgs& args, bool verbose) {
  FlatConfig cfg = resolve_config(args);
  write_text(fs::path(args.out) / "resolved_config.txt", cfg.render());
  gcfc::Corpus corpus = load_required_corpus(cfg);
  gcfc::TrainConfig tc = cfg.train_config();
  tc.model = model_config_for(cfg, corpus);
  tc.verbose = verbose;
  gcfc::SplitResult split = gcfc::split_corpus(corpus, tc.split, tc.split_seed);
  gcfc::GraphCfcModel model(tc.model, tc.seed);
  gcfc::TrainResult result = gcfc::train_model(model, split, tc);

  std::ostringstream hist;
  hist << "epoch,train_loss,valid_accuracy,valid_wf1\n";
  for (const auto& rec : result.history)
    hist << rec.epoch << "," << rec.train_loss << "," << rec.valid_accuracy
         << "," << rec.valid_wf1 << "\n";
  write_text(fs::path(args.out) / "history.csv", hist.str());

  nlohmann::json mj;
  mj["best_epoch"] = result.best_epoch;
  mj["best_valid_wf1"] = result.best_valid_wf1;
  mj["valid"] = metrics_json(result.valid);
  mj["test"] = metrics_json(result.test);
  write_text(fs::path(args.out) / "metrics.json", mj.dump(2) + "\n");

  fs::path ckpt = fs::path(args.out) / "model.gcfc";
  gcfc::save_checkpoint(ckpt.string(), config_json(cfg), model.params());

  std::cout << "trained " << result.history.size() << " epochs, best epoch "
            << result.best_epoch << " (valid weighted_f1 "
            << result.best_valid_wf1 << ")\n";
  print_metrics("valid", result.valid);
  print_metrics("test", result.test);
  std::cout << "checkpoint " << ckpt.string() << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path,
             const std::string& on) {
  FlatConfig cfg = resolve_config(args);
  write_text(fs::path(args.out) / "resolved_config.txt", cfg.render());
  gcfc::Corpus corpus = load_required_corpus(cfg);

  // The checkpoint's stored configuration defines the model architecture;
  // the current configuration picks the corpus and split.
  nlohmann::json stored = gcfc::read_checkpoint_config(ckpt_path);
  FlatConfig model_cfg;
  for (auto it = stored.begin(); it != stored.end(); ++it)
    model_cfg.set(it.key(), it.value().get<std::string>());
  gcfc::ModelConfig mc = model_config_for(model_cfg, corpus);
  gcfc::GraphCfcModel model(mc, /*init_seed=*/0);
  gcfc::load_checkpoint(ckpt_path, model.params());

  gcfc::Metrics m;
  if (on == "all") {
    m = gcfc::evaluate_model(model, corpus);
  } else {
    gcfc::TrainConfig tc = cfg.train_config();
    gcfc::SplitResult split = gcfc::split_corpus(corpus, tc.split, tc.split_seed);
    const gcfc::Corpus* part = on == "train"   ? &split.train
                               : on == "valid" ? &split.valid
                                               : &split.test;
    m = gcfc::evaluate_model(model, *part);
  }
  nlohmann::json mj;
  mj["split"] = on;
  mj["metrics"] = metrics_json(m);
  write_text(fs::path(args.out) / "metrics.json", mj.dump(2) + "\n");
  print_metrics(on, m);
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& study) {
  FlatConfig cfg = resolve_config(args);
  write_text(fs::path(args.out) / "resolved_config.txt", cfg.render());
  gcfc::Corpus corpus = load_required_corpus(cfg);
  gcfc::TrainConfig tc = cfg.train_config();
  tc.model = model_config_for(cfg, corpus);
  gcfc::AblationReport rep =
      gcfc::run_ablation(study, corpus, tc, cfg.ablate_options());
  write_text(fs::path(args.out) / "report.json", rep.to_json().dump(2) + "\n");
  write_text(fs::path(args.out) / "report.csv", rep.csv());
  std::cout << rep.csv();
  for (const std::string& note : rep.notes) std::cout << note << "\n";
  return 0;
}

int cmd_inspect_graph(const CommonArgs& args, int dialogue_idx, bool full_edges) {
  FlatConfig cfg = resolve_config(args);
  if (!args.out.empty())
    write_text(fs::path(args.out) / "resolved_config.txt", cfg.render());
  gcfc::Corpus corpus = load_required_corpus(cfg);
  if (dialogue_idx < 0 ||
      dialogue_idx >= static_cast<int>(corpus.dialogues.size()))
    throw gcfc::ValidationError(
        "inspect-graph: dialogue index " + std::to_string(dialogue_idx) +
        " out of range (corpus has " + std::to_string(corpus.dialogues.size()) +
        " dialogues)");
  const gcfc::Dialogue& d = corpus.dialogues[dialogue_idx];
  gcfc::ModelConfig mc = model_config_for(cfg, corpus);

  int n = static_cast<int>(d.utterances.size());
  int m = static_cast<int>(mc.modalities.size());
  gcfc::EdgeTypeTable table =
      gcfc::enumerate_edge_types(corpus.max_speakers(), m);
  std::vector<int> speakers;
  for (const auto& u : d.utterances) speakers.push_back(u.speaker);
  gcfc::DialogueGraph g =
      gcfc::build_graph(n, speakers, m, mc.window, mc.direction, table);

  long intra = 0, inter = 0;
  std::map<int, long> per_type;
  for (const auto& e : g.edges) {
    per_type[e.type] += 1;
    (e.type < table.intra_count() ? intra : inter) += 1;
  }
  std::cout << "dialogue " << dialogue_idx << " id=" << d.id << " utterances=" << n
            << " speakers=" << corpus.max_speakers() << "\n";
  std::cout << "modalities=" << gcfc::modalities_str(mc.modalities) << " window="
            << mc.window.past << "," << mc.window.future << " direction="
            << (mc.direction == gcfc::DirectionMode::FutureAsInEdge
                    ? "future_as_in_edge"
                    : "literal")
            << "\n";
  std::cout << "nodes=" << g.node_count() << " edges=" << g.edges.size()
            << " intra=" << intra << " inter=" << inter << "\n";
  std::cout << "edge_types=" << table.total() << " intra_types="
            << table.intra_count() << " inter_types=" << table.inter_count()
            << "\n";
  std::cout << "type_histogram:";
  for (const auto& [type, count] : per_type)
    std::cout << " " << type << ":" << count;
  std::cout << "\n";
  if (full_edges) {
    for (const auto& e : g.edges) {
      gcfc::GraphNode s = g.node_of(e.src), t = g.node_of(e.dst);
      std::cout << "edge " << e.src << "->" << e.dst << " type=" << e.type
                << "  (" << gcfc::mod_char(mc.modalities[s.mod]) << s.utt
                << " -> " << gcfc::mod_char(mc.modalities[t.mod]) << t.utt
                << ")\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed-graph cross-modal conversation classifier"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, ablate_args, inspect_args;
  bool train_verbose = false;
  std::string eval_ckpt, eval_on = "test", ablate_study;
  int inspect_dialogue = 0;
  bool inspect_edges = false;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  add_common(gen, gen_args, /*out_required=*/true);

  auto* train = app.add_subcommand("train", "train a model on a corpus");
  add_common(train, train_args, /*out_required=*/true);
  train->add_flag("--verbose", train_verbose, "per-epoch progress lines");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, eval_args, /*out_required=*/true);
  eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval->add_option("--on", eval_on, "split: train | valid | test | all")
      ->check(CLI::IsMember({"train", "valid", "test", "all"}));

  auto* ablate = app.add_subcommand("ablate", "run an ablation study");
  add_common(ablate, ablate_args, /*out_required=*/true);
  ablate->add_option("--study", ablate_study, "study name")->required();

  auto* inspect =
      app.add_subcommand("inspect-graph", "print one dialogue's graph");
  add_common(inspect, inspect_args, /*out_required=*/false);
  inspect->add_option("--dialogue", inspect_dialogue, "dialogue index");
  inspect->add_flag("--edges", inspect_edges, "list every edge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const CommonArgs* active = nullptr;
  if (gen->parsed()) active = &gen_args;
  if (train->parsed()) active = &train_args;
  if (eval->parsed()) active = &eval_args;
  if (ablate->parsed()) active = &ablate_args;
  if (inspect->parsed()) active = &inspect_args;

  try {
    if (active && !active->out.empty()) fs::create_directories(active->out);
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (train->parsed()) return cmd_train(train_args, train_verbose);
    if (eval->parsed()) return cmd_eval(eval_args, eval_ckpt, eval_on);
    if (ablate->parsed()) return cmd_ablate(ablate_args, ablate_study);
    if (inspect->parsed())
      return cmd_inspect_graph(inspect_args, inspect_dialogue, inspect_edges);
    std::cerr << "no command\n";
    return 2;
  } catch (const gcfc::GcfcError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (active && !active->out.empty()) {
      std::error_code ec;
      fs::create_directories(active->out, ec);
      std::ofstream log(fs::path(active->out) / "error.log", std::ios::trunc);
      log << e.what() << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
