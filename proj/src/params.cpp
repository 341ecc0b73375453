#include "gcfc/params.hpp"

#include <cmath>

#include "gcfc/errors.hpp"

namespace gcfc {

ValuePtr ParamStore::add(const std::string& name, Shape shape, Init init, Rng& rng,
                         double arg) {
  if (index_.count(name))
    throw ContractError("ParamStore: duplicate parameter '" + name + "'");
  const long n = numel(shape);
  std::vector<double> data(n, 0.0);
  switch (init) {
    case Init::Zeros:
      break;
    case Init::Ones:
      data.assign(n, 1.0);
      break;
    case Init::Const:
      data.assign(n, arg);
      break;
    case Init::Normal: {
      for (long i = 0; i < n; ++i) data[i] = rng.normal(0.0, arg);
      break;
    }
    case Init::Xavier: {
      // fan_in x fan_out read off the shape; rank-1 tensors use their length
      // for both fans.
      double fan_in = shape.size() == 2 ? shape[0] : shape[0];
      double fan_out = shape.size() == 2 ? shape[1] : shape[0];
      const double a = std::sqrt(6.0 / (fan_in + fan_out));
      for (long i = 0; i < n; ++i) data[i] = rng.uniform(-a, a);
      break;
    }
  }
  auto v = Value::leaf(std::move(shape), std::move(data), true);
  index_[name] = items_.size();
  items_.emplace_back(name, v);
  return v;
}

ValuePtr ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return items_[it->second].second;
}

long ParamStore::total_coordinates() const {
  long n = 0;
  for (const auto& [name, v] : items_) n += v->size();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& [name, v] : items_) {
    v->ensure_grad();
    std::fill(v->grad.begin(), v->grad.end(), 0.0);
  }
}

std::map<std::string, std::vector<double>> ParamStore::grad_map() const {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, v] : items_)
    out[name] = v->grad.empty() ? std::vector<double>(v->size(), 0.0) : v->grad;
  return out;
}

ParamStore::Snapshot ParamStore::snapshot() const {
  Snapshot snap;
  snap.reserve(items_.size());
  for (const auto& [name, v] : items_) snap.emplace_back(name, v->data);
  return snap;
}

void ParamStore::restore(const Snapshot& snap) {
  if (snap.size() != items_.size())
    throw ContractError("ParamStore::restore: snapshot has " + std::to_string(snap.size()) +
                        " entries, store has " + std::to_string(items_.size()));
  for (size_t i = 0; i < snap.size(); ++i) {
    const auto& [name, data] = snap[i];
    auto& [have_name, v] = items_[i];
    if (name != have_name)
      throw ContractError("ParamStore::restore: name mismatch at slot " + std::to_string(i) +
                          ": '" + name + "' vs '" + have_name + "'");
    if (data.size() != v->data.size())
      throw ShapeError("ParamStore::restore: size mismatch for '" + name + "'");
    v->data = data;
  }
}

}  // namespace gcfc
