#include "gcfc/value.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>
#include <utility>

namespace gcfc {

long numel(const Shape& s) {
  long n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

static void check_shape_ok(const char* op, const Shape& s) {
  if (s.empty() || s.size() > 2)
    throw ShapeError(std::string(op) + ": rank must be 1 or 2, got " + shape_str(s));
  for (int d : s)
    if (d <= 0) throw ShapeError(std::string(op) + ": non-positive dim in " + shape_str(s));
}

static ValuePtr make_node(const char* op, Shape shape, std::vector<ValuePtr> inputs) {
  check_shape_ok(op, shape);
  auto v = std::make_shared<Value>();
  v->op = op;
  v->shape = std::move(shape);
  v->data.assign(numel(v->shape), 0.0);
  v->inputs = std::move(inputs);
  for (const auto& in : v->inputs)
    if (in->requires_grad) v->requires_grad = true;
  return v;
}

// NaN/Inf anywhere is an error state: fail at the primitive that produced it
// rather than letting it propagate into the loss.
static void check_finite(const Value& v) {
  for (double x : v.data)
    if (!std::isfinite(x))
      throw NumericError(std::string(v.op) + ": non-finite value in output of shape " +
                         shape_str(v.shape));
}

ValuePtr Value::leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  check_shape_ok("leaf", shape);
  if (static_cast<long>(data.size()) != numel(shape))
    throw ShapeError("leaf: data has " + std::to_string(data.size()) +
                     " entries, shape " + shape_str(shape) + " wants " +
                     std::to_string(numel(shape)));
  auto v = std::make_shared<Value>();
  v->shape = std::move(shape);
  v->data = std::move(data);
  v->requires_grad = requires_grad;
  check_finite(*v);
  if (requires_grad) v->ensure_grad();
  return v;
}

ValuePtr Value::constant(Shape shape, std::vector<double> data) {
  return leaf(std::move(shape), std::move(data), false);
}

ValuePtr Value::zeros(Shape shape, bool requires_grad) {
  return leaf(std::move(shape), std::vector<double>(numel(shape), 0.0), requires_grad);
}

ValuePtr Value::full(Shape shape, double v, bool requires_grad) {
  return leaf(std::move(shape), std::vector<double>(numel(shape), v), requires_grad);
}

ValuePtr Value::scalar(double v, bool requires_grad) {
  return leaf({1}, {v}, requires_grad);
}

// ---- matmul ----------------------------------------------------------------

ValuePtr matmul(const ValuePtr& a, const ValuePtr& b) {
  if (a->rank() != 2 || b->rank() != 2)
    throw ShapeError("matmul: both operands must be rank 2, got " + shape_str(a->shape) +
                     " and " + shape_str(b->shape));
  const int m = a->shape[0], k = a->shape[1], k2 = b->shape[0], n = b->shape[1];
  if (k != k2)
    throw ShapeError("matmul: inner dims disagree: " + shape_str(a->shape) + " x " +
                     shape_str(b->shape));
  auto out = make_node("matmul", {m, n}, {a, b});
  const double* A = a->data.data();
  const double* B = b->data.data();
  double* O = out->data.data();
  for (int i = 0; i < m; ++i) {
    const double* ai = A + static_cast<long>(i) * k;
    double* oi = O + static_cast<long>(i) * n;
    for (int l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const double* bl = B + static_cast<long>(l) * n;
      for (int j = 0; j < n; ++j) oi[j] += ail * bl[j];
    }
  }
  if (out->requires_grad) {
    Value* av = a.get();
    Value* bv = b.get();
    Value* ov = out.get();
    out->backward_fn = [av, bv, ov, m, k, n]() {
      const double* G = ov->grad.data();
      if (av->requires_grad) {
        double* dA = av->grad.data();
        const double* B = bv->data.data();
        for (int i = 0; i < m; ++i) {
          const double* gi = G + static_cast<long>(i) * n;
          double* dai = dA + static_cast<long>(i) * k;
          for (int l = 0; l < k; ++l) {
            const double* bl = B + static_cast<long>(l) * n;
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += gi[j] * bl[j];
            dai[l] += acc;
          }
        }
      }
      if (bv->requires_grad) {
        double* dB = bv->grad.data();
        const double* A = av->data.data();
        for (int i = 0; i < m; ++i) {
          const double* gi = G + static_cast<long>(i) * n;
          const double* ai = A + static_cast<long>(i) * k;
          for (int l = 0; l < k; ++l) {
            const double ail = ai[l];
            if (ail == 0.0) continue;
            double* dbl_ = dB + static_cast<long>(l) * n;
            for (int j = 0; j < n; ++j) dbl_[j] += ail * gi[j];
          }
        }
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- add -------------------------------------------------------------------

ValuePtr add(const ValuePtr& a, const ValuePtr& b) {
  const bool same = a->shape == b->shape;
  const bool bias = a->rank() == 2 && b->rank() == 1 && a->shape[1] == b->shape[0];
  if (!same && !bias)
    throw ShapeError("add: incompatible shapes " + shape_str(a->shape) + " and " +
                     shape_str(b->shape));
  auto out = make_node("add", a->shape, {a, b});
  const long n = a->size();
  if (same) {
    for (long i = 0; i < n; ++i) out->data[i] = a->data[i] + b->data[i];
  } else {
    const int rows = a->shape[0], cols = a->shape[1];
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        out->data[static_cast<long>(i) * cols + j] =
            a->data[static_cast<long>(i) * cols + j] + b->data[j];
  }
  if (out->requires_grad) {
    Value* av = a.get();
    Value* bv = b.get();
    Value* ov = out.get();
    out->backward_fn = [av, bv, ov, same]() {
      const double* G = ov->grad.data();
      const long n = ov->size();
      if (av->requires_grad) {
        double* dA = av->grad.data();
        for (long i = 0; i < n; ++i) dA[i] += G[i];
      }
      if (bv->requires_grad) {
        double* dB = bv->grad.data();
        if (same) {
          for (long i = 0; i < n; ++i) dB[i] += G[i];
        } else {
          const int rows = ov->shape[0], cols = ov->shape[1];
          for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) dB[j] += G[static_cast<long>(i) * cols + j];
        }
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- affine (scalar scale and shift) ----------------------------------------

ValuePtr affine(const ValuePtr& x, double mul_c, double add_c) {
  if (!std::isfinite(mul_c) || !std::isfinite(add_c))
    throw NumericError("affine: non-finite coefficient");
  auto out = make_node("affine", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i) out->data[i] = x->data[i] * mul_c + add_c;
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov, mul_c]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += mul_c * ov->grad[i];
    };
  }
  check_finite(*out);
  return out;
}

// ---- elementwise multiply ----------------------------------------------------

ValuePtr mul(const ValuePtr& a, const ValuePtr& b) {
  if (a->shape != b->shape)
    throw ShapeError("mul: shapes differ: " + shape_str(a->shape) + " vs " +
                     shape_str(b->shape));
  auto out = make_node("mul", a->shape, {a, b});
  const long n = a->size();
  for (long i = 0; i < n; ++i) out->data[i] = a->data[i] * b->data[i];
  if (out->requires_grad) {
    Value* av = a.get();
    Value* bv = b.get();
    Value* ov = out.get();
    out->backward_fn = [av, bv, ov]() {
      const long n = ov->size();
      const double* G = ov->grad.data();
      if (av->requires_grad)
        for (long i = 0; i < n; ++i) av->grad[i] += bv->data[i] * G[i];
      if (bv->requires_grad)
        for (long i = 0; i < n; ++i) bv->grad[i] += av->data[i] * G[i];
    };
  }
  check_finite(*out);
  return out;
}

// ---- concat ------------------------------------------------------------------

ValuePtr concat(const std::vector<ValuePtr>& xs, int axis) {
  if (xs.empty()) throw ShapeError("concat: empty input list");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  const int rank = xs[0]->rank();
  for (const auto& x : xs)
    if (x->rank() != rank)
      throw ShapeError("concat: mixed ranks in input list");
  if (axis == 1 && rank != 2)
    throw ShapeError("concat: axis 1 requires rank-2 inputs");

  Shape out_shape;
  if (rank == 1) {
    int total = 0;
    for (const auto& x : xs) total += x->shape[0];
    out_shape = {total};
  } else if (axis == 0) {
    const int cols = xs[0]->shape[1];
    int rows = 0;
    for (const auto& x : xs) {
      if (x->shape[1] != cols)
        throw ShapeError("concat: axis 0 needs equal col counts, got " +
                         shape_str(xs[0]->shape) + " vs " + shape_str(x->shape));
      rows += x->shape[0];
    }
    out_shape = {rows, cols};
  } else {
    const int rows = xs[0]->shape[0];
    int cols = 0;
    for (const auto& x : xs) {
      if (x->shape[0] != rows)
        throw ShapeError("concat: axis 1 needs equal row counts, got " +
                         shape_str(xs[0]->shape) + " vs " + shape_str(x->shape));
      cols += x->shape[1];
    }
    out_shape = {rows, cols};
  }

  auto out = make_node("concat", out_shape, xs);
  if (rank == 1 || axis == 0) {
    long off = 0;
    for (const auto& x : xs) {
      std::copy(x->data.begin(), x->data.end(), out->data.begin() + off);
      off += x->size();
    }
  } else {
    const int rows = out_shape[0], out_cols = out_shape[1];
    int col_off = 0;
    for (const auto& x : xs) {
      const int c = x->shape[1];
      for (int i = 0; i < rows; ++i)
        std::copy(x->data.begin() + static_cast<long>(i) * c,
                  x->data.begin() + static_cast<long>(i + 1) * c,
                  out->data.begin() + static_cast<long>(i) * out_cols + col_off);
      col_off += c;
    }
  }
  if (out->requires_grad) {
    std::vector<Value*> parts;
    parts.reserve(xs.size());
    for (const auto& x : xs) parts.push_back(x.get());
    Value* ov = out.get();
    const bool flat = (rank == 1 || axis == 0);
    out->backward_fn = [parts, ov, flat]() {
      if (flat) {
        long off = 0;
        for (Value* p : parts) {
          if (p->requires_grad) {
            const long n = p->size();
            for (long i = 0; i < n; ++i) p->grad[i] += ov->grad[off + i];
          }
          off += p->size();
        }
      } else {
        const int rows = ov->shape[0], out_cols = ov->shape[1];
        int col_off = 0;
        for (Value* p : parts) {
          const int c = p->shape[1];
          if (p->requires_grad)
            for (int i = 0; i < rows; ++i)
              for (int j = 0; j < c; ++j)
                p->grad[static_cast<long>(i) * c + j] +=
                    ov->grad[static_cast<long>(i) * out_cols + col_off + j];
          col_off += c;
        }
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- slice -------------------------------------------------------------------

ValuePtr slice_rows(const ValuePtr& x, int begin, int end) {
  const int rows = x->rank() == 2 ? x->shape[0] : x->shape[0];
  if (begin < 0 || end > rows || begin >= end)
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + shape_str(x->shape));
  Shape out_shape = x->rank() == 2 ? Shape{end - begin, x->shape[1]} : Shape{end - begin};
  auto out = make_node("slice", out_shape, {x});
  const int cols = x->rank() == 2 ? x->shape[1] : 1;
  std::copy(x->data.begin() + static_cast<long>(begin) * cols,
            x->data.begin() + static_cast<long>(end) * cols, out->data.begin());
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov, begin, cols]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      const long off = static_cast<long>(begin) * cols;
      for (long i = 0; i < n; ++i) xv->grad[off + i] += ov->grad[i];
    };
  }
  check_finite(*out);
  return out;
}

// ---- reshape -----------------------------------------------------------------

ValuePtr reshape(const ValuePtr& x, Shape shape) {
  if (numel(shape) != x->size())
    throw ShapeError("reshape: " + shape_str(x->shape) + " to " + shape_str(shape) +
                     " changes element count");
  auto out = make_node("reshape", std::move(shape), {x});
  out->data = x->data;
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += ov->grad[i];
    };
  }
  return out;
}

// ---- elementwise nonlinearities ------------------------------------------------

ValuePtr relu(const ValuePtr& x) {
  auto out = make_node("relu", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i) out->data[i] = x->data[i] > 0.0 ? x->data[i] : 0.0;
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i)
        if (xv->data[i] > 0.0) xv->grad[i] += ov->grad[i];
    };
  }
  check_finite(*out);
  return out;
}

ValuePtr leaky_relu(const ValuePtr& x, double slope) {
  if (!std::isfinite(slope)) throw NumericError("leaky_relu: non-finite slope");
  auto out = make_node("leaky_relu", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i)
    out->data[i] = x->data[i] > 0.0 ? x->data[i] : slope * x->data[i];
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov, slope]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i)
        xv->grad[i] += (xv->data[i] > 0.0 ? 1.0 : slope) * ov->grad[i];
    };
  }
  check_finite(*out);
  return out;
}

ValuePtr sigmoid(const ValuePtr& x) {
  auto out = make_node("sigmoid", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i) out->data[i] = 1.0 / (1.0 + std::exp(-x->data[i]));
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) {
        const double y = ov->data[i];
        xv->grad[i] += y * (1.0 - y) * ov->grad[i];
      }
    };
  }
  check_finite(*out);
  return out;
}

ValuePtr tanh(const ValuePtr& x) {
  auto out = make_node("tanh", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i) out->data[i] = std::tanh(x->data[i]);
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) {
        const double y = ov->data[i];
        xv->grad[i] += (1.0 - y * y) * ov->grad[i];
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- softmax (last axis) -------------------------------------------------------

ValuePtr softmax(const ValuePtr& x) {
  auto out = make_node("softmax", x->shape, {x});
  const int rows = x->rows(), cols = x->cols();
  for (int i = 0; i < rows; ++i) {
    const double* xi = x->data.data() + static_cast<long>(i) * cols;
    double* oi = out->data.data() + static_cast<long>(i) * cols;
    double mx = xi[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, xi[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) {
      oi[j] = std::exp(xi[j] - mx);
      z += oi[j];
    }
    for (int j = 0; j < cols; ++j) oi[j] /= z;
  }
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const int rows = ov->rows(), cols = ov->cols();
      for (int i = 0; i < rows; ++i) {
        const double* y = ov->data.data() + static_cast<long>(i) * cols;
        const double* g = ov->grad.data() + static_cast<long>(i) * cols;
        double* dx = xv->grad.data() + static_cast<long>(i) * cols;
        double dot = 0.0;
        for (int j = 0; j < cols; ++j) dot += g[j] * y[j];
        for (int j = 0; j < cols; ++j) dx[j] += y[j] * (g[j] - dot);
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- log / exp -----------------------------------------------------------------

ValuePtr log(const ValuePtr& x) {
  auto out = make_node("log", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i) out->data[i] = std::log(x->data[i]);
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += ov->grad[i] / xv->data[i];
    };
  }
  check_finite(*out);
  return out;
}

ValuePtr exp(const ValuePtr& x) {
  auto out = make_node("exp", x->shape, {x});
  const long n = x->size();
  for (long i = 0; i < n; ++i) out->data[i] = std::exp(x->data[i]);
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += ov->data[i] * ov->grad[i];
    };
  }
  check_finite(*out);
  return out;
}

// ---- embedding lookup / row gather ----------------------------------------------

ValuePtr embedding(const ValuePtr& table, const std::vector<int>& ids) {
  if (table->rank() != 2)
    throw ShapeError("embedding: table must be rank 2, got " + shape_str(table->shape));
  if (ids.empty()) throw ShapeError("embedding: empty id list");
  const int v = table->shape[0], d = table->shape[1];
  for (int id : ids)
    if (id < 0 || id >= v)
      throw ValidationError("embedding: index " + std::to_string(id) +
                            " out of range [0," + std::to_string(v) + ")");
  auto out = make_node("embedding", {static_cast<int>(ids.size()), d}, {table});
  for (size_t i = 0; i < ids.size(); ++i)
    std::copy(table->data.begin() + static_cast<long>(ids[i]) * d,
              table->data.begin() + static_cast<long>(ids[i] + 1) * d,
              out->data.begin() + static_cast<long>(i) * d);
  if (out->requires_grad) {
    Value* tv = table.get();
    Value* ov = out.get();
    std::vector<int> idv = ids;
    out->backward_fn = [tv, ov, idv]() {
      if (!tv->requires_grad) return;
      const int d = ov->shape[1];
      for (size_t i = 0; i < idv.size(); ++i) {
        double* dst = tv->grad.data() + static_cast<long>(idv[i]) * d;
        const double* g = ov->grad.data() + static_cast<long>(i) * d;
        for (int j = 0; j < d; ++j) dst[j] += g[j];
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- dropout --------------------------------------------------------------------

ValuePtr dropout(const ValuePtr& x, double rate, bool train, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ValidationError("dropout: rate must be in [0,1), got " + std::to_string(rate));
  if (!train || rate == 0.0) return x;
  if (!rng) throw ContractError("dropout: train mode needs an RNG");
  auto out = make_node("dropout", x->shape, {x});
  const long n = x->size();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(n);
  for (long i = 0; i < n; ++i) {
    mask[i] = rng->uniform01() >= rate ? keep_scale : 0.0;
    out->data[i] = x->data[i] * mask[i];
  }
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov, mask = std::move(mask)]() {
      if (!xv->requires_grad) return;
      const long n = ov->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += mask[i] * ov->grad[i];
    };
  }
  check_finite(*out);
  return out;
}

// ---- layer norm -------------------------------------------------------------------

static constexpr double kLayerNormEps = 1e-5;

ValuePtr layer_norm(const ValuePtr& x, const ValuePtr& gamma, const ValuePtr& beta) {
  const int cols = x->cols();
  if (gamma->rank() != 1 || gamma->shape[0] != cols)
    throw ShapeError("layer_norm: gamma " + shape_str(gamma->shape) + " does not match x " +
                     shape_str(x->shape));
  if (beta->rank() != 1 || beta->shape[0] != cols)
    throw ShapeError("layer_norm: beta " + shape_str(beta->shape) + " does not match x " +
                     shape_str(x->shape));
  auto out = make_node("layer_norm", x->shape, {x, gamma, beta});
  const int rows = x->rows();
  for (int i = 0; i < rows; ++i) {
    const double* xi = x->data.data() + static_cast<long>(i) * cols;
    double* oi = out->data.data() + static_cast<long>(i) * cols;
    double mu = 0.0;
    for (int j = 0; j < cols; ++j) mu += xi[j];
    mu /= cols;
    double var = 0.0;
    for (int j = 0; j < cols; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= cols;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int j = 0; j < cols; ++j)
      oi[j] = (xi[j] - mu) * inv * gamma->data[j] + beta->data[j];
  }
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* gv = gamma.get();
    Value* bv = beta.get();
    Value* ov = out.get();
    out->backward_fn = [xv, gv, bv, ov]() {
      const int rows = ov->rows(), cols = ov->cols();
      for (int i = 0; i < rows; ++i) {
        const double* xi = xv->data.data() + static_cast<long>(i) * cols;
        const double* g = ov->grad.data() + static_cast<long>(i) * cols;
        double mu = 0.0;
        for (int j = 0; j < cols; ++j) mu += xi[j];
        mu /= cols;
        double var = 0.0;
        for (int j = 0; j < cols; ++j) var += (xi[j] - mu) * (xi[j] - mu);
        var /= cols;
        const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
        if (gv->requires_grad || bv->requires_grad) {
          for (int j = 0; j < cols; ++j) {
            const double xhat = (xi[j] - mu) * inv;
            if (gv->requires_grad) gv->grad[j] += g[j] * xhat;
            if (bv->requires_grad) bv->grad[j] += g[j];
          }
        }
        if (xv->requires_grad) {
          // dx = (h - mean(h) - xhat * mean(h .* xhat)) / s with h = g .* gamma
          double m1 = 0.0, m2 = 0.0;
          for (int j = 0; j < cols; ++j) {
            const double h = g[j] * gv->data[j];
            const double xhat = (xi[j] - mu) * inv;
            m1 += h;
            m2 += h * xhat;
          }
          m1 /= cols;
          m2 /= cols;
          double* dx = xv->grad.data() + static_cast<long>(i) * cols;
          for (int j = 0; j < cols; ++j) {
            const double h = g[j] * gv->data[j];
            const double xhat = (xi[j] - mu) * inv;
            dx[j] += (h - m1 - xhat * m2) * inv;
          }
        }
      }
    };
  }
  check_finite(*out);
  return out;
}

// ---- reductions ---------------------------------------------------------------------

ValuePtr sum(const ValuePtr& x) {
  auto out = make_node("sum", {1}, {x});
  double acc = 0.0;
  for (double v : x->data) acc += v;
  out->data[0] = acc;
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const double g = ov->grad[0];
      const long n = xv->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += g;
    };
  }
  check_finite(*out);
  return out;
}

ValuePtr mean(const ValuePtr& x) {
  auto out = make_node("mean", {1}, {x});
  double acc = 0.0;
  for (double v : x->data) acc += v;
  out->data[0] = acc / static_cast<double>(x->size());
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const long n = xv->size();
      const double g = ov->grad[0] / static_cast<double>(n);
      for (long i = 0; i < n; ++i) xv->grad[i] += g;
    };
  }
  check_finite(*out);
  return out;
}

ValuePtr sum_squares(const ValuePtr& x) {
  auto out = make_node("sum_squares", {1}, {x});
  double acc = 0.0;
  for (double v : x->data) acc += v * v;
  out->data[0] = acc;
  if (out->requires_grad) {
    Value* xv = x.get();
    Value* ov = out.get();
    out->backward_fn = [xv, ov]() {
      if (!xv->requires_grad) return;
      const double g = ov->grad[0];
      const long n = xv->size();
      for (long i = 0; i < n; ++i) xv->grad[i] += 2.0 * xv->data[i] * g;
    };
  }
  check_finite(*out);
  return out;
}

// ---- backward engine ------------------------------------------------------------------

void backward(const ValuePtr& loss) {
  if (!loss) throw ContractError("backward: null loss");
  if (numel(loss->shape) != 1)
    throw ContractError("backward: loss must be scalar-shaped, got " + shape_str(loss->shape));
  if (!loss->requires_grad) return;

  // Iterative post-order DFS over the requires_grad subgraph.
  std::vector<Value*> order;
  std::unordered_set<Value*> visited;
  struct Frame {
    Value* node;
    size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.get(), 0});
  visited.insert(loss.get());
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next < top.node->inputs.size()) {
      Value* in = top.node->inputs[top.next++].get();
      if (in->requires_grad && !visited.count(in)) {
        visited.insert(in);
        stack.push_back({in, 0});
      }
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }

  // Interior gradients start from zero on every call; leaf gradients keep
  // accumulating so separate backward passes sum.
  for (Value* v : order) {
    if (v->is_leaf())
      v->ensure_grad();
    else
      v->grad.assign(v->data.size(), 0.0);
  }
  loss->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn();
}

}  // namespace gcfc
