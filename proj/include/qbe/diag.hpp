#pragma once

#include <cmath>

namespace qbe {

/// One row of time-series diagnostics. Y is the Ericksen-limit error
/// functional and is NaN for runs that do not track it.
struct DiagRecord {
  double t = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double linf_Q = 0.0;
  double kinetic = 0.0;
  double free_energy = 0.0;
  double max_gradQ = 0.0;
  double Y = std::nan("");
  bool resolved = true;
};

}  // namespace qbe
