#include "ciflab/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace cif {
namespace {

void window(double lo, double hi, double reach, double& a, double& b) {
  a = lo;
  b = hi;
  if (!std::isfinite(a) && !std::isfinite(b)) {
    a = -reach;
    b = reach;
  } else if (!std::isfinite(a)) {
    a = b - reach;
  } else if (!std::isfinite(b)) {
    b = a + reach;
  }
}

}  // namespace

Vec sample_interior(const DomainSpec& dom, std::mt19937_64& rng, double margin, double reach) {
  const std::size_t d = dom.dimension();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec z(d);
  switch (dom.kind()) {
    case DomainSpec::Kind::kAllSpace:
    case DomainSpec::Kind::kOpenBox:
    case DomainSpec::Kind::kClosedBox:
      for (std::size_t i = 0; i < d; ++i) {
        double a, b;
        window(dom.lo()[i], dom.hi()[i], reach, a, b);
        const double w = b - a;
        if (std::isfinite(dom.lo()[i])) a += margin * w;
        if (std::isfinite(dom.hi()[i])) b -= margin * w;
        z[i] = a + (b - a) * unit(rng);
      }
      return z;
    case DomainSpec::Kind::kOpenUnitBall:
      while (true) {
        for (double& v : z) v = -1.0 + 2.0 * unit(rng);
        if (norm2(z) < 1.0 - margin) return z;
      }
    case DomainSpec::Kind::kPositiveDefiniteCone: {
      const std::size_t k = dom.side();
      Vec a(k * k), m(k * k, 0.0);
      for (double& v : a) v = -1.0 + 2.0 * unit(rng);
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) {
          double s = 0.0;
          for (std::size_t t = 0; t < k; ++t) s += a[r * k + t] * a[c * k + t];
          m[r * k + c] = s / static_cast<double>(k) + (r == c ? 100.0 * margin : 0.0);
        }
      Vec flat = svec(m, k);
      if (dom.is_negated())
        for (double& v : flat) v = -v;
      return flat;
    }
  }
  throw std::logic_error("unhandled domain kind");
}

Vec sample_domain(const DomainSpec& dom, std::mt19937_64& rng, double face_probability, double margin, double reach) {
  Vec z = sample_interior(dom, rng, margin, reach);
  if (dom.kind() != DomainSpec::Kind::kClosedBox) return z;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (unit(rng) >= face_probability) continue;
    const bool lo_ok = std::isfinite(dom.lo()[i]);
    const bool hi_ok = std::isfinite(dom.hi()[i]);
    if (lo_ok && (!hi_ok || unit(rng) < 0.5)) z[i] = dom.lo()[i];
    else if (hi_ok) z[i] = dom.hi()[i];
  }
  return z;
}

}  // namespace cif
