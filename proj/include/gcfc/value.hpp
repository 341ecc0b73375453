#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gcfc/errors.hpp"
#include "gcfc/rng.hpp"

namespace gcfc {

// Shapes are rank 1 or rank 2; scalars use {1}. Data is row-major.
using Shape = std::vector<int>;

long numel(const Shape& s);
std::string shape_str(const Shape& s);

class Value;
using ValuePtr = std::shared_ptr<Value>;

// One node of the reverse-mode differentiation graph: a dense double array
// plus the provenance needed to push gradients back to its inputs. Nodes are
// created through the primitive functions below; data is treated as immutable
// once a node exists (the optimizer only rewrites leaf data between graphs).
class Value {
 public:
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated for leaves at creation, for interior
                             // nodes by backward()
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<ValuePtr> inputs;
  std::function<void()> backward_fn;

  static ValuePtr leaf(Shape shape, std::vector<double> data, bool requires_grad);
  static ValuePtr constant(Shape shape, std::vector<double> data);
  static ValuePtr zeros(Shape shape, bool requires_grad = false);
  static ValuePtr full(Shape shape, double v, bool requires_grad = false);
  static ValuePtr scalar(double v, bool requires_grad = false);

  bool is_leaf() const { return inputs.empty(); }
  int rank() const { return static_cast<int>(shape.size()); }
  // Row/column view: rank-1 arrays count as a single row.
  int rows() const { return rank() == 2 ? shape[0] : 1; }
  int cols() const { return rank() == 2 ? shape[1] : shape[0]; }
  long size() const { return static_cast<long>(data.size()); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// ---- primitives ------------------------------------------------------------
// Each checks shapes up front (ShapeError names the primitive and the
// offending shapes) and verifies the output is finite (NumericError).

ValuePtr matmul(const ValuePtr& a, const ValuePtr& b);
// Same-shape elementwise add, or rank-2 + rank-1 row broadcast (bias add).
ValuePtr add(const ValuePtr& a, const ValuePtr& b);
// Elementwise x * mul_c + add_c with scalar constants.
ValuePtr affine(const ValuePtr& x, double mul_c, double add_c);
ValuePtr mul(const ValuePtr& a, const ValuePtr& b);
// axis 0 stacks rows (or elements for rank 1); axis 1 joins features.
ValuePtr concat(const std::vector<ValuePtr>& xs, int axis);
// Rows [begin, end) for rank 2, elements [begin, end) for rank 1.
ValuePtr slice_rows(const ValuePtr& x, int begin, int end);
ValuePtr reshape(const ValuePtr& x, Shape shape);
ValuePtr relu(const ValuePtr& x);
ValuePtr leaky_relu(const ValuePtr& x, double slope);
ValuePtr sigmoid(const ValuePtr& x);
ValuePtr tanh(const ValuePtr& x);
// Softmax over the last axis (per row for rank 2).
ValuePtr softmax(const ValuePtr& x);
ValuePtr log(const ValuePtr& x);
ValuePtr exp(const ValuePtr& x);
// Row gather: out[i] = table[ids[i]]. Also used as the embedding lookup.
ValuePtr embedding(const ValuePtr& table, const std::vector<int>& ids);
// Inverted dropout. Identity in eval mode or at rate 0 (returns x itself).
ValuePtr dropout(const ValuePtr& x, double rate, bool train, Rng* rng);
// Normalization over the last axis, eps 1e-5.
ValuePtr layer_norm(const ValuePtr& x, const ValuePtr& gamma, const ValuePtr& beta);
ValuePtr sum(const ValuePtr& x);
ValuePtr mean(const ValuePtr& x);
ValuePtr sum_squares(const ValuePtr& x);

// Reverse pass from a scalar loss. Interior gradients are recomputed from
// scratch on every call; leaf gradients accumulate until explicitly zeroed,
// so repeated backward calls implement gradient summation.
void backward(const ValuePtr& loss);

}  // namespace gcfc
