#include "gcfc/nn.hpp"

#include "gcfc/errors.hpp"

namespace gcfc {

LinearParams make_linear(ParamStore& store, const std::string& prefix, int in, int out,
                         Rng& rng, bool bias) {
  LinearParams p;
  p.w = store.add(prefix + ".w", {in, out}, Init::Xavier, rng);
  if (bias) p.b = store.add(prefix + ".b", {out}, Init::Zeros, rng);
  return p;
}

ValuePtr linear(const ValuePtr& x, const LinearParams& p) {
  ValuePtr h = matmul(x, p.w);
  return p.b ? add(h, p.b) : h;
}

GruCellParams make_gru(ParamStore& store, const std::string& prefix, int in, int hidden,
                       Rng& rng) {
  GruCellParams p;
  p.wz = store.add(prefix + ".wz", {in, hidden}, Init::Xavier, rng);
  p.uz = store.add(prefix + ".uz", {hidden, hidden}, Init::Xavier, rng);
  p.bz = store.add(prefix + ".bz", {hidden}, Init::Zeros, rng);
  p.wr = store.add(prefix + ".wr", {in, hidden}, Init::Xavier, rng);
  p.ur = store.add(prefix + ".ur", {hidden, hidden}, Init::Xavier, rng);
  p.br = store.add(prefix + ".br", {hidden}, Init::Zeros, rng);
  p.wn = store.add(prefix + ".wn", {in, hidden}, Init::Xavier, rng);
  p.un = store.add(prefix + ".un", {hidden, hidden}, Init::Xavier, rng);
  p.bn = store.add(prefix + ".bn", {hidden}, Init::Zeros, rng);
  return p;
}

ValuePtr gru_cell(const ValuePtr& x, const ValuePtr& h, const GruCellParams& p) {
  const bool vec = x->rank() == 1;
  if (vec != (h->rank() == 1))
    throw ShapeError("gru_cell: x and h must have the same rank, got " +
                     shape_str(x->shape) + " and " + shape_str(h->shape));
  ValuePtr xm = vec ? reshape(x, {1, x->shape[0]}) : x;
  ValuePtr hm = vec ? reshape(h, {1, h->shape[0]}) : h;
  if (xm->shape[0] != hm->shape[0])
    throw ShapeError("gru_cell: row counts differ: " + shape_str(x->shape) + " vs " +
                     shape_str(h->shape));

  ValuePtr z = sigmoid(add(add(matmul(xm, p.wz), matmul(hm, p.uz)), p.bz));
  ValuePtr r = sigmoid(add(add(matmul(xm, p.wr), matmul(hm, p.ur)), p.br));
  ValuePtr n = tanh(add(add(matmul(xm, p.wn), mul(r, matmul(hm, p.un))), p.bn));
  ValuePtr out = add(mul(affine(z, -1.0, 1.0), n), mul(z, hm));
  return vec ? reshape(out, h->shape) : out;
}

}  // namespace gcfc
