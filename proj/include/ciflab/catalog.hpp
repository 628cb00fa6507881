#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ciflab/integrand.hpp"

namespace cif {

/// Names accepted by catalog_get.
const std::vector<std::string>& catalog_names();

/// Builds a catalog integrand. `d` is the dimension of the argument (for
/// log_det the svec dimension k(k+1)/2 of a k x k symmetric matrix). `p` is
/// only read by norm_power.
///
/// Throws std::invalid_argument for an unknown name, d == 0, p <= 1, or a
/// log_det dimension that is not triangular.
IntegrandPtr catalog_get(const std::string& name, std::size_t d, double p = 2.0);

/// Integrands used only as probe witnesses, outside the catalog proper:
/// "affine" (phi(z) = sum z_i, convex but not strictly) and
/// "quarter_power_product" (-(xy)^{1/4} on [0,1]^2, convex with a flat edge).
const std::vector<std::string>& probe_integrand_names();
IntegrandPtr probe_integrand(const std::string& name, std::size_t d = 1);

/// Looks up a name in the catalog first, then among the probe integrands.
IntegrandPtr any_integrand(const std::string& name, std::size_t d, double p = 2.0);

struct RotundityClass {
  bool strongly_rotund = false;
  std::vector<std::string> reasons;
  std::vector<std::string> warnings;
};

/// Rule-based strong-rotundity classification from the integrand flags.
RotundityClass classify(const Integrand& phi);

struct ConjugateEstimate {
  /// max over the sample grid of <z,y> - phi(z); +inf when flagged unbounded,
  /// -inf when no sample lies in dom phi.
  double value = -kInf;
  bool unbounded = false;
  Vec argmax;
};

/// Grid oracle for phi*(y): maximizes <z,y> - phi(z) over a tensor grid of
/// `grid` points per axis on the bounded `search_box`, followed by
/// `zoom_passes` re-gridded passes around the incumbent. Never reads the
/// closed-form conjugate. If the maximizer sits on the box boundary and the
/// objective keeps growing past `divergence_threshold` along the outward ray,
/// the result is reported as +inf.
ConjugateEstimate numeric_conjugate(const Integrand& phi, std::span<const double> y, const DomainSpec& search_box,
                                    std::size_t grid, int zoom_passes = 0, double divergence_threshold = 1e8);

nlohmann::json to_json(const DomainSpec& d);
nlohmann::json to_json(const IntegrandFlags& f);
/// {name, dimension, domain, flags}
nlohmann::json integrand_metadata(const Integrand& phi);

}  // namespace cif
