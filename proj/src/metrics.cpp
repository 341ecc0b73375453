#include "gcfc/metrics.hpp"

#include "gcfc/errors.hpp"

namespace gcfc {

Metrics Metrics::from_confusion(const std::vector<std::vector<long>>& confusion,
                                const std::vector<std::string>& labels) {
  const size_t c = labels.size();
  if (confusion.size() != c)
    throw ShapeError("metrics: confusion has " + std::to_string(confusion.size()) +
                     " rows for " + std::to_string(c) + " labels");
  for (const auto& row : confusion) {
    if (row.size() != c)
      throw ShapeError("metrics: confusion matrix is not square");
    for (long v : row)
      if (v < 0) throw ValidationError("metrics: negative confusion count");
  }

  Metrics m;
  m.confusion = confusion;
  long correct = 0;
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < c; ++j) m.total += confusion[i][j];
    correct += confusion[i][i];
  }
  m.accuracy = m.total > 0 ? static_cast<double>(correct) / m.total : 0.0;

  double weighted = 0.0;
  long support_total = 0;
  for (size_t i = 0; i < c; ++i) {
    PerClass pc;
    pc.label = labels[i];
    long tp = confusion[i][i];
    long fn = 0, fp = 0;
    for (size_t j = 0; j < c; ++j) {
      if (j != i) {
        fn += confusion[i][j];
        fp += confusion[j][i];
      }
    }
    pc.support = tp + fn;
    pc.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    pc.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    pc.f1 = (pc.precision + pc.recall) > 0.0
                ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                : 0.0;
    weighted += static_cast<double>(pc.support) * pc.f1;
    support_total += pc.support;
    m.per_class.push_back(pc);
  }
  m.weighted_f1 = support_total > 0 ? weighted / support_total : 0.0;
  return m;
}

}  // namespace gcfc
