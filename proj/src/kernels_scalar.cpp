#include <atomic>

#include "ciflab/kernels.hpp"

namespace cif::kernels {

ReciprocalSums reciprocal_sums_scalar(const double* gap, const double* cosv, const double* weight, std::size_t n,
                                      double base, double scale) {
  ReciprocalSums r;
  for (std::size_t k = 0; k < n; ++k) {
    const double q = weight[k] / (base + scale * gap[k]);
    r.s0 += q;
    r.s1 += q * cosv[k];
  }
  return r;
}

bool avx2_available() {
#if defined(CIFLAB_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {
// -1 = auto, otherwise static_cast<int>(Isa)
std::atomic<int> g_forced{-1};
}  // namespace

Isa active_isa() {
  const int f = g_forced.load(std::memory_order_relaxed);
  if (f == static_cast<int>(Isa::kScalar)) return Isa::kScalar;
  return avx2_available() ? Isa::kAvx2 : Isa::kScalar;
}

void force_isa(std::optional<Isa> isa) { g_forced.store(isa ? static_cast<int>(*isa) : -1); }

std::string isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

ReciprocalSums reciprocal_sums(const double* gap, const double* cosv, const double* weight, std::size_t n,
                               double base, double scale) {
#if defined(CIFLAB_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return reciprocal_sums_avx2(gap, cosv, weight, n, base, scale);
#endif
  return reciprocal_sums_scalar(gap, cosv, weight, n, base, scale);
}

}  // namespace cif::kernels
