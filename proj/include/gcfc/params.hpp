#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gcfc/rng.hpp"
#include "gcfc/value.hpp"

namespace gcfc {

enum class Init { Zeros, Ones, Xavier, Normal, Const };

// Named registry of trainable leaves. Registration order is the canonical
// parameter order everywhere (optimizer state, checkpoints, gradient maps),
// so model construction must register parameters deterministically.
class ParamStore {
 public:
  // arg: stddev for Normal, fill value for Const, ignored otherwise.
  ValuePtr add(const std::string& name, Shape shape, Init init, Rng& rng, double arg = 0.0);
  ValuePtr get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::pair<std::string, ValuePtr>>& items() const { return items_; }
  size_t count() const { return items_.size(); }
  long total_coordinates() const;

  void zero_grads();
  // Gradient view after backward(); zero arrays for untouched parameters.
  std::map<std::string, std::vector<double>> grad_map() const;

  using Snapshot = std::vector<std::pair<std::string, std::vector<double>>>;
  Snapshot snapshot() const;
  void restore(const Snapshot& snap);

 private:
  std::vector<std::pair<std::string, ValuePtr>> items_;
  std::map<std::string, size_t> index_;
};

}  // namespace gcfc
