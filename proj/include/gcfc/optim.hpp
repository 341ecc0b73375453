#pragma once

#include <vector>

#include "gcfc/params.hpp"

namespace gcfc {

// AdamW with decoupled weight decay: the decay shrinks the parameter directly
// (p -= lr * wd * p) before the bias-corrected Adam update is applied, so
// decay never flows through the moment estimates.
class AdamW {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-5;
  };

  AdamW(ParamStore& params, Config cfg);

  // Consumes the gradients currently stored on the parameters. Throws
  // NumericError on any non-finite gradient before mutating anything.
  void step();

  long step_count() const { return t_; }
  Config& config() { return cfg_; }

 private:
  ParamStore* store_;
  Config cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace gcfc
