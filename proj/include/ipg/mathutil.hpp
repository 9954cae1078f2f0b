#pragma once

#include <cmath>
#include <limits>

namespace ipg {

// Numerically stable logistic, clamped to the open interval (0,1) so
// probability contracts survive extreme logits.
inline double sigmoid(double x) {
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double ex = std::exp(x);
    p = ex / (1.0 + ex);
  }
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  if (p >= 1.0) p = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return p;
}

}  // namespace ipg
