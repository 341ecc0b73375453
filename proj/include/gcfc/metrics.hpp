#pragma once

#include <string>
#include <vector>

namespace gcfc {

// Classification metrics from a confusion matrix (rows = truth, cols =
// prediction). Degenerate denominators fall back to 0 rather than NaN.
struct Metrics {
  struct PerClass {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
  };

  std::vector<std::vector<long>> confusion;
  std::vector<PerClass> per_class;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  long total = 0;

  static Metrics from_confusion(const std::vector<std::vector<long>>& confusion,
                                const std::vector<std::string>& labels);
};

}  // namespace gcfc
