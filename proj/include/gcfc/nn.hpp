#pragma once

#include <string>

#include "gcfc/params.hpp"
#include "gcfc/value.hpp"

namespace gcfc {

// Weight layout convention throughout: matrices are (in, out) so application
// is x @ w with x holding rows of inputs; no transposes needed anywhere.
struct LinearParams {
  ValuePtr w;  // in x out
  ValuePtr b;  // out, may be null for bias-free layers
};

LinearParams make_linear(ParamStore& store, const std::string& prefix, int in, int out,
                         Rng& rng, bool bias = true);
ValuePtr linear(const ValuePtr& x, const LinearParams& p);

// Gated recurrent unit with the candidate's reset gate applied to the hidden
// projection only:
//   z = sig(x Wz + h Uz + bz)
//   r = sig(x Wr + h Ur + br)
//   n = tanh(x Wn + r * (h Un) + bn)
//   h' = (1 - z) * n + z * h
// With all weights and biases zero this collapses to h' = 0.5 * h.
struct GruCellParams {
  ValuePtr wz, uz, bz;
  ValuePtr wr, ur, br;
  ValuePtr wn, un, bn;
};

GruCellParams make_gru(ParamStore& store, const std::string& prefix, int in, int hidden,
                       Rng& rng);
// x: (N, in) or (in); h: (N, hidden) or (hidden). Output matches h's shape.
ValuePtr gru_cell(const ValuePtr& x, const ValuePtr& h, const GruCellParams& p);

}  // namespace gcfc
