#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace cif::kernels {

enum class Isa { kScalar, kAvx2 };

/// Sums over one quadrature axis of the Watson integrand:
///   s0 = sum_k w_k / (base + scale * gap_k)
///   s1 = sum_k w_k * cos_k / (base + scale * gap_k)
/// where gap_k = 1 - cos_k is passed separately to avoid cancellation.
struct ReciprocalSums {
  double s0 = 0.0;
  double s1 = 0.0;
};

ReciprocalSums reciprocal_sums_scalar(const double* gap, const double* cosv, const double* weight, std::size_t n,
                                      double base, double scale);
#if defined(CIFLAB_HAVE_AVX2)
ReciprocalSums reciprocal_sums_avx2(const double* gap, const double* cosv, const double* weight, std::size_t n,
                                    double base, double scale);
#endif

bool avx2_available();
/// Variant used by reciprocal_sums: AVX2+FMA when compiled in and supported
/// by the CPU, unless overridden.
Isa active_isa();
/// Pins the dispatch (nullopt restores auto-detection). Requesting AVX2 on a
/// machine without it falls back to scalar.
void force_isa(std::optional<Isa> isa);
std::string isa_name(Isa isa);

ReciprocalSums reciprocal_sums(const double* gap, const double* cosv, const double* weight, std::size_t n,
                               double base, double scale);

}  // namespace cif::kernels
