#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "ciflab/integrand.hpp"

namespace cif::testing {

// Central difference step per coordinate: cbrt(eps) scaled by the coordinate
// magnitude, capped by the distance to the boundary.
inline double fd_step(double zi, double clearance) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon());
  double scale = std::max(std::abs(zi), 1.0);
  if (std::isfinite(clearance)) scale = std::min(scale, 0.5 * clearance);
  return h * scale;
}

template <class F>
Vec central_difference(const F& f, std::span<const double> z, const DomainSpec& dom) {
  Vec g(z.size());
  Vec p(z.begin(), z.end());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double h = fd_step(z[i], dom.coordinate_clearance(z, i));
    p[i] = z[i] + h;
    const double fp = f(p);
    p[i] = z[i] - h;
    const double fm = f(p);
    p[i] = z[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace cif::testing
