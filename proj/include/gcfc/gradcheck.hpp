#pragma once

#include <functional>

#include "gcfc/params.hpp"

namespace gcfc {

// Central-difference gradient check. scalar_fn must rebuild its graph from
// the parameters' current data on every call and return a scalar; it is run
// twice up front and an OracleError is thrown if the two evaluations differ
// (a stochastic function cannot be finite-differenced).
//
// Returns the max over all parameter coordinates of
//   |analytic - fd| / max(1e-12, |analytic| + |fd|).
double finite_diff_check(const std::function<ValuePtr()>& scalar_fn, ParamStore& params,
                         double eps = 1e-5);

}  // namespace gcfc
