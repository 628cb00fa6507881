#pragma once

#include <random>

#include "ciflab/integrand.hpp"

namespace cif {

/// Uniform draw from a bounded, margin-shrunk version of int dom phi.
/// Infinite box sides are truncated to a window of width `reach` next to the
/// finite endpoint (or [-reach, reach] when both are infinite); every finite
/// side is then pulled in by `margin` times the window width. PD-cone
/// domains draw A A^T / k + margin-scaled identity.
Vec sample_interior(const DomainSpec& dom, std::mt19937_64& rng, double margin = 1e-3, double reach = 3.0);

/// Draw from dom phi including its faces: with probability `face_probability`
/// each coordinate with a finite closed endpoint is snapped onto it. Open
/// domains reduce to sample_interior.
Vec sample_domain(const DomainSpec& dom, std::mt19937_64& rng, double face_probability, double margin = 1e-3,
                  double reach = 3.0);

}  // namespace cif
