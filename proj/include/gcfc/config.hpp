#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcfc/corpus.hpp"
#include "gcfc/trainer.hpp"

namespace gcfc {

// Flat key/value configuration with a fixed registry of known keys. Values
// are stored as strings and converted on demand; unknown keys and malformed
// values raise ValidationError naming the key. Precedence, lowest first:
// built-in default < GCFC_SEED environment variable (seeds only) < config
// file < command-line --set overrides, achieved by applying them in order.
class FlatConfig {
 public:
  FlatConfig();

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key) const;

  // Seeds every *.seed / *.split_seed key from GCFC_SEED when the variable is
  // set; call before load_file/set so later sources win.
  void apply_env_seed();

  // INI-style file: [section] headers scope bare keys; fully qualified
  // "section.key" lines work with or without a section; '#' starts a comment.
  void load_file(const std::string& path);

  // Resolved snapshot in file syntax (what resolved_config.txt contains).
  std::string render() const;
  // Every key with its default and description.
  static std::string reference_page();

  // Typed views. model_config() leaves the corpus-derived fields
  // (num_classes, feature dims, max_speakers) at zero for the caller.
  GeneratorConfig gen_config() const;
  std::uint64_t gen_seed() const;
  ModelConfig model_config() const;
  TrainConfig train_config() const;
  AblationOptions ablate_options() const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  struct Entry {
    std::string value;
    std::string def;
    std::string doc;
  };
  void add(const std::string& key, const std::string& def, const std::string& doc);
  const Entry& entry(const std::string& key) const;

  std::vector<std::string> order_;
  std::map<std::string, Entry> map_;
};

}  // namespace gcfc
