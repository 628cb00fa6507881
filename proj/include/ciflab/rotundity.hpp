#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ciflab/catalog.hpp"
#include "ciflab/convergence_lab.hpp"
#include "ciflab/integrand.hpp"
#include "ciflab/measure_space.hpp"

namespace cif {

/// status: "passed", "failed" or "inconclusive" (premise not met, no witness
/// found, or the probe cannot run). Failed probes always carry a witness.
struct ProbeResult {
  std::string name;
  std::string status;
  /// false when the probe's hypothesis does not hold for phi; such probes are
  /// informational and never count as suite failures
  bool applicable = true;
  nlohmann::json witness = nlohmann::json::object();
  std::string notes;

  bool passed() const { return status == "passed"; }
  bool failed() const { return status == "failed"; }
};

/// Random pairs x != y of simple functions in dom I_phi (cell values drawn
/// from dom phi with its faces); fails on the first pair with
/// I((x+y)/2) >= (I(x) + I(y))/2 up to rounding. Throws DomainError when no
/// domain-feasible pair is found.
ProbeResult strict_convexity_transfer(const Integrand& phi, const MeasureSpacePtr& space, int trials,
                                      std::uint64_t seed = 1);

/// Passes when weak_gap -> 0 and |I(x_n) - I(x)| -> 0 force l1 -> 0 on the
/// family; "inconclusive" (premise not met) when either premise fails.
ProbeResult kadec_probe(const Integrand& phi, const SequenceFamily& fam, const std::vector<TestFunctional>& dictionary,
                        const std::vector<std::size_t>& schedule);

/// One-sided witness finder for non-compact lower level sets: passes when
/// every member satisfies I(x_n) <= level, ||x_n||_1 stays bounded, and the
/// weak gap to each candidate limit stays >= 0.1 on every row. Never
/// certifies compactness. Throws HypothesisError when a member leaves the
/// level set. Default candidates: the family limit and the constants 1, 2.
ProbeResult level_set_compactness_probe(const Integrand& phi, double level, const SequenceFamily& fam,
                                        const std::vector<std::size_t>& schedule = {},
                                        const std::vector<SimpleFunction>& candidates = {});

struct FenchelPairing {
  double primal = 0.0;
  double conjugate = 0.0;
  double pairing = 0.0;
  /// primal + conjugate - pairing, >= 0
  double gap = 0.0;
};
/// I_phi(x), I_phi*(g) and <x, g> on a common partition.
FenchelPairing fenchel_pairing(const Integrand& phi, const SimpleFunction& x, const SimpleFunction& g);

/// Random x in int dom I_phi: the inequality against random g in dom I_phi*,
/// and equality within 1e-9 (relative to max(1, |<x, g>|)) for g = grad phi(x)
/// cellwise.
ProbeResult conjugate_identity_check(const Integrand& phi, const MeasureSpacePtr& space, int samples,
                                     std::uint64_t seed = 1);

struct SuiteResult {
  std::string integrand;
  std::uint64_t seed = 0;
  RotundityClass classification;
  std::vector<ProbeResult> probes;

  bool any_failed() const;
};

/// Every probe that applies to phi, with fixed sizes: 8-cell transfer test
/// with 200 trials, 16-cell conjugate check with 20 samples, and for scalar
/// phi the Kadec probe on a Rademacher perturbation of an interior point and
/// the level-set probe on burg_level_escape at level I(1) + 1.
SuiteResult rotundity_suite(const Integrand& phi, std::uint64_t seed = 1);

nlohmann::json to_json(const ProbeResult& p);
nlohmann::json to_json(const SuiteResult& s);

}  // namespace cif
