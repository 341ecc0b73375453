#include "gcfc/rng.hpp"

#include <cmath>

#include "gcfc/errors.hpp"

namespace gcfc {

double Rng::normal() {
  // u1 in [0,1) so 1-u1 is in (0,1] and the log is safe.
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(6.283185307179586476925286766559 * u2);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw ContractError("Rng::uniform_int: n must be positive");
  int v = static_cast<int>(uniform01() * n);
  return v >= n ? n - 1 : v;
}

}  // namespace gcfc
