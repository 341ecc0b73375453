#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nlohmann/json.hpp"

#include "gcfc/checkpoint.hpp"
#include "gcfc/config.hpp"
#include "gcfc/corpus.hpp"
#include "gcfc/model.hpp"

using namespace gcfc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gcfc-io-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() { static int c = 0; return c; }
};

ModelConfig demo_model(int d) {
  ModelConfig m;
  m.num_classes = 3;
  m.dim_t = m.dim_a = m.dim_v = 4;
  m.max_speakers = 2;
  m.d = d;
  m.lstm_hidden = 3;
  m.heads = 1;
  m.layers_per_stage = 1;
  m.dropout = 0.0;
  return m;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("checkpoints round-trip bitwise") {
  TempDir tmp;
  GraphCfcModel model(demo_model(6), 3);
  nlohmann::json cfg = {{"model.d", "6"}, {"train.lr", "0.001"}};
  std::string path = tmp.file("model.gcfc");
  save_checkpoint(path, cfg, model.params());

  GraphCfcModel fresh(demo_model(6), 99);  // different init, same shapes
  load_checkpoint(path, fresh.params());
  REQUIRE(fresh.params().count() == model.params().count());
  for (std::size_t i = 0; i < model.params().count(); ++i)
    CHECK(fresh.params().items()[i].second->data ==
          model.params().items()[i].second->data);

  nlohmann::json stored = read_checkpoint_config(path);
  CHECK(stored == cfg);
}

TEST_CASE("checkpoint shape and coverage validation") {
  TempDir tmp;
  GraphCfcModel model(demo_model(6), 0);
  std::string path = tmp.file("model.gcfc");
  save_checkpoint(path, nlohmann::json::object(), model.params());

  SUBCASE("different width fails with the tensor named") {
    GraphCfcModel wider(demo_model(8), 0);
    std::string msg =
        error_of([&] { load_checkpoint(path, wider.params()); });
    CHECK(msg.find("shape") != std::string::npos);
    CHECK(msg.find("enc.") != std::string::npos);  // first mismatching tensor
  }
  SUBCASE("stored tensor absent from the model") {
    ModelConfig fewer = demo_model(6);
    fewer.separate_loss = false;  // drops head.sep.* and loss.s_* tensors
    GraphCfcModel small(fewer, 0);
    std::string msg =
        error_of([&] { load_checkpoint(path, small.params()); });
    CHECK(msg.find("does not exist in the current model") != std::string::npos);
  }
  SUBCASE("model tensor absent from the file") {
    ModelConfig fewer = demo_model(6);
    fewer.separate_loss = false;
    GraphCfcModel small(fewer, 0);
    std::string small_path = tmp.file("small.gcfc");
    save_checkpoint(small_path, nlohmann::json::object(), small.params());
    GraphCfcModel full(demo_model(6), 0);
    std::string msg =
        error_of([&] { load_checkpoint(small_path, full.params()); });
    CHECK(msg.find("is missing from the file") != std::string::npos);
  }
}

TEST_CASE("corrupt checkpoints raise io errors") {
  TempDir tmp;
  GraphCfcModel model(demo_model(6), 0);
  std::string path = tmp.file("model.gcfc");
  save_checkpoint(path, nlohmann::json::object(), model.params());

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_checkpoint_config(tmp.file("absent.gcfc")), IoError);
  }
  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXXX", 5);
    f.close();
    CHECK_THROWS_AS(read_checkpoint_config(path), IoError);
  }
  SUBCASE("truncated blob") {
    auto size = fs::file_size(path);
    fs::resize_file(path, size - 16);
    GraphCfcModel fresh(demo_model(6), 1);
    CHECK_THROWS_AS(load_checkpoint(path, fresh.params()), IoError);
  }
}

TEST_CASE("config registry: defaults, typed getters, unknown keys") {
  FlatConfig c;
  CHECK(c.get("model.modalities") == "avt");
  CHECK(c.get_int("model.d") == 64);
  CHECK(c.get_double("train.lr") == doctest::Approx(1e-3));
  CHECK(c.get_bool("model.skip_connection"));
  CHECK(c.get_int_list("ablate.depths") == std::vector<int>{2, 4, 8});

  std::string msg = error_of([&] { c.set("nope.key", "1"); });
  CHECK(msg.find("unknown config key") != std::string::npos);
  CHECK(msg.find("nope.key") != std::string::npos);

  c.set("model.d", "12x");
  msg = error_of([&] { (void)c.get_int("model.d"); });
  CHECK(msg.find("model.d") != std::string::npos);
  c.set("train.lr", "fast");
  msg = error_of([&] { (void)c.get_double("train.lr"); });
  CHECK(msg.find("train.lr") != std::string::npos);
  c.set("model.skip_connection", "maybe");
  msg = error_of([&] { (void)c.get_bool("model.skip_connection"); });
  CHECK(msg.find("model.skip_connection") != std::string::npos);
}

TEST_CASE("typed views mirror the struct defaults") {
  FlatConfig c;
  GeneratorConfig g = c.gen_config();
  GeneratorConfig def;
  CHECK(g.dialogues == 200);
  CHECK(g.len_min == def.len_min);
  CHECK(g.dim_t == def.dim_t);

  ModelConfig m = c.model_config();
  ModelConfig mdef;
  CHECK(m.d == mdef.d);
  CHECK(m.heads == mdef.heads);
  CHECK(m.window.past == mdef.window.past);
  CHECK(m.norm == NormPosition::Post);
  CHECK(m.head_merge == HeadMerge::Average);
  CHECK(m.direction == DirectionMode::FutureAsInEdge);
  CHECK(m.num_classes == 0);  // corpus-derived fields stay unset

  TrainConfig t = c.train_config();
  TrainConfig tdef;
  CHECK(t.epochs == tdef.epochs);
  CHECK(t.lr == tdef.lr);
  CHECK(t.patience == tdef.patience);
  CHECK(t.split == SplitScheme::Sequential);

  c.set("model.norm_position", "pre");
  c.set("model.head_merge", "concat_project");
  c.set("model.direction_mode", "literal");
  c.set("train.split", "ratio_random");
  m = c.model_config();
  CHECK(m.norm == NormPosition::Pre);
  CHECK(m.head_merge == HeadMerge::ConcatProject);
  CHECK(m.direction == DirectionMode::Literal);
  CHECK(c.train_config().split == SplitScheme::RatioRandom);

  c.set("model.norm_position", "sideways");
  std::string msg = error_of([&] { (void)c.model_config(); });
  CHECK(msg.find("model.norm_position") != std::string::npos);
}

TEST_CASE("render round-trips through load_file") {
  TempDir tmp;
  FlatConfig a;
  a.set("model.d", "48");
  a.set("train.lr", "0.01");
  a.set("gen.labels", "iemocap6");
  std::string path = tmp.file("resolved_config.txt");
  std::ofstream(path) << a.render();

  FlatConfig b;
  b.load_file(path);
  for (const auto& k : a.keys()) CHECK(b.get(k) == a.get(k));
}

TEST_CASE("config files: sections, comments, and error locations") {
  TempDir tmp;
  std::string path = tmp.file("run.conf");
  std::ofstream(path) << "# comment\n"
                         "[model]\n"
                         "d = 32\n"
                         "heads = 4\n"
                         "\n"
                         "[train]\n"
                         "lr = 0.005\n"
                         "gen.noise = 0.25\n";  // qualified key under a section
  FlatConfig c;
  c.load_file(path);
  CHECK(c.get_int("model.d") == 32);
  CHECK(c.get_int("model.heads") == 4);
  CHECK(c.get_double("train.lr") == doctest::Approx(0.005));
  CHECK(c.get_double("gen.noise") == doctest::Approx(0.25));

  std::string bad = tmp.file("bad.conf");
  std::ofstream(bad) << "[model]\n"
                        "no_such_option = 3\n";
  FlatConfig d;
  std::string msg = error_of([&] { d.load_file(bad); });
  CHECK(msg.find("bad.conf") != std::string::npos);
  CHECK(msg.find(":2") != std::string::npos);

  std::string junk = tmp.file("junk.conf");
  std::ofstream(junk) << "just words\n";
  msg = error_of([&] { d.load_file(junk); });
  CHECK(msg.find("junk.conf") != std::string::npos);
  CHECK(msg.find(":1") != std::string::npos);

  CHECK_THROWS_AS(d.load_file(tmp.file("absent.conf")), IoError);
}

TEST_CASE("environment seed sits below files and explicit sets") {
  ::setenv("GCFC_SEED", "777", 1);
  FlatConfig c;
  c.apply_env_seed();
  CHECK(c.get_u64("gen.seed") == 777);
  CHECK(c.get_u64("train.seed") == 777);
  CHECK(c.get_u64("train.split_seed") == 777);
  c.set("train.seed", "5");
  CHECK(c.get_u64("train.seed") == 5);
  CHECK(c.get_u64("gen.seed") == 777);
  ::unsetenv("GCFC_SEED");

  FlatConfig d;
  d.apply_env_seed();  // no variable: defaults stay
  CHECK(d.get_u64("gen.seed") == 0);
}

TEST_CASE("reference page lists every key with its default") {
  std::string page = FlatConfig::reference_page();
  FlatConfig c;
  for (const auto& k : c.keys()) CHECK(page.find(k) != std::string::npos);
  CHECK(page.find("avt") != std::string::npos);
}

TEST_CASE("render includes every key once") {
  FlatConfig c;
  std::string text = c.render();
  for (const auto& k : c.keys()) {
    std::string bare = k.substr(k.find('.') + 1);
    CHECK(text.find(bare + " = ") != std::string::npos);
  }
}
