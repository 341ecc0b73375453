#include "gcfc/optim.hpp"

#include <cmath>

#include "gcfc/errors.hpp"

namespace gcfc {

AdamW::AdamW(ParamStore& params, Config cfg) : store_(&params), cfg_(cfg) {
  m_.reserve(params.count());
  v_.reserve(params.count());
  for (const auto& [name, p] : params.items()) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void AdamW::step() {
  const auto& items = store_->items();
  if (items.size() != m_.size())
    throw ContractError("AdamW: parameter set changed after construction");

  for (const auto& [name, p] : items) {
    p->ensure_grad();
    for (double g : p->grad)
      if (!std::isfinite(g))
        throw NumericError("adamw: non-finite gradient in '" + name + "'");
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < items.size(); ++k) {
    Value& p = *items[k].second;
    std::vector<double>& m = m_[k];
    std::vector<double>& v = v_[k];
    const long n = p.size();
    for (long i = 0; i < n; ++i) {
      const double g = p.grad[i];
      p.data[i] -= cfg_.lr * cfg_.weight_decay * p.data[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace gcfc
