#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ciflab/integrand.hpp"
#include "ciflab/measure_space.hpp"

namespace cif {

/// Metric keys shared by reports, rates and verdicts.
inline constexpr const char* kMeasure = "measure";
inline constexpr const char* kValue = "value";
inline constexpr const char* kL1 = "l1";
inline constexpr const char* kWeak = "weak";
inline constexpr const char* kComposition = "composition";

/// A sequence x_n of simple functions on [0,1] with a reference limit.
struct SequenceFamily {
  std::string name;
  std::string description;
  std::function<SimpleFunction(std::size_t)> generator;
  SimpleFunction limit;
  /// expected truth of converges_in_measure, value_convergent_for(phi),
  /// l1_convergent, weakly_convergent_surrogate; never read by verdicts
  std::map<std::string, bool> declared;
  /// Closed-form rate r(n) -> 0 bounding a metric, when one is known.
  std::function<std::optional<double>(const std::string& metric, std::size_t n, const Integrand& phi)> rate;
  std::vector<std::size_t> default_schedule;
  std::size_t max_n = 0;
};

const std::vector<std::string>& family_names();
/// Throws std::invalid_argument for unknown names.
SequenceFamily family(const std::string& name);
/// centre + amplitude r_k / n with k = min(n, 14); limit centre.
SequenceFamily rademacher_perturbation(double centre, double amplitude);

/// constant(1), indicators of [0, 2^-k] for k = 1..4, cos/sin of
/// frequencies 1..4.
std::vector<TestFunctional> default_dictionary();

struct LabOptions {
  Vec etas = {0.01, 0.1, 1.0};
  Vec ui_thresholds = {10.0, 100.0, 1000.0};
  std::vector<TestFunctional> dictionary = default_dictionary();
};

struct ConvergenceRow {
  std::size_t n = 0;
  double value = 0.0;
  double value_gap = 0.0;
  double l1 = 0.0;
  double l1_norm = 0.0;
  /// deviation_measure at each eta of the options
  Vec deviation;
  double weak_gap = 0.0;
  double composition = 0.0;
  /// tail integrals at each uniform-integrability threshold
  Vec tails;

  double metric(const std::string& key) const;
};

/// Decision for one metric, from the rows alone: "converges" when the last
/// value is below 1e-3 or within 10x a decreasing closed-form rate; "fails"
/// when the last three rows all stay >= 0.1; otherwise "inconclusive".
struct Verdict {
  std::string property;
  std::string metric;
  std::string outcome;
  std::string rule;
  double last = 0.0;
  std::optional<double> rate;
  /// least-squares slope of log metric against log n over the last rows
  std::optional<double> trend_slope;
  std::optional<bool> declared;

  bool converges() const { return outcome == "converges"; }
  bool fails() const { return outcome == "fails"; }
};

struct ConvergenceReport {
  std::string family;
  std::string integrand;
  double limit_value = 0.0;
  Vec etas;
  Vec ui_thresholds;
  std::vector<ConvergenceRow> rows;
  /// sup over the schedule of the tail integrals, per threshold
  Vec ui_sup;
  std::vector<Verdict> verdicts;

  const Verdict& verdict(const std::string& metric) const;
};

/// Every column is computed by exact simple-function arithmetic. Throws
/// std::invalid_argument for a non-increasing schedule or n above the
/// family's limit, DomainError when a member or the limit leaves dom phi.
ConvergenceReport run(const SequenceFamily& fam, const Integrand& phi, const std::vector<std::size_t>& schedule,
                      const LabOptions& opts = {});

Verdict judge(const std::string& metric, const std::vector<std::size_t>& ns, const Vec& values,
              const std::function<std::optional<double>(std::size_t)>& rate);

/// Columns: n,I_phi,value_gap,l1_distance,l1_norm,dev_eta...,weak_gap,
/// composition,tail_t...
void write_csv(std::ostream& out, const ConvergenceReport& r);
nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const Verdict& v);

struct CheckRow {
  std::size_t n = 0;
  Vec deviation;
  double composition = 0.0;
  double value_gap = 0.0;
  /// per eta: the upper bound (check II) or lower bound (probe)
  Vec bounds;
  bool bound_ok = true;
};

/// status: "passed", "failed", "refused" (hypotheses not met, nothing run)
/// or "not applicable" (the data never satisfy the premise).
struct CheckReport {
  std::string check;
  std::string family;
  std::string integrand;
  std::string status;
  std::string reason;
  nlohmann::json hypotheses;
  std::vector<CheckRow> rows;
  std::vector<Verdict> verdicts;

  bool passed() const { return status == "passed"; }
};

/// Needs a global bound |phi| <= M on all of R^d and measure convergence on
/// the data; checks that the composition distance tends to 0.
CheckReport preservation_check_I(const Integrand& phi, const SequenceFamily& fam,
                                 const std::vector<std::size_t>& schedule, const LabOptions& opts = {});
/// Needs |phi| <= M on dom phi and a Clarke subgradient bound delta; checks
/// |I(x_n) - I(x)| <= 2 M mu(T_n) + delta eps mu(S) row-wise for each eps,
/// where T_n = {|x_n - x| >= eps}.
CheckReport preservation_check_II(const Integrand& phi, const SequenceFamily& fam,
                                  const std::vector<std::size_t>& schedule, const LabOptions& opts = {});
/// For phi = -log on (0, inf) and a limit with 0 < x <= L: whenever the
/// composition distance tends to 0, so does the deviation measure. Each row
/// also checks composition >= eta mu(T_n) / (L + eta).
CheckReport measure_to_value_probe(const Integrand& phi, const SequenceFamily& fam,
                                   const std::vector<std::size_t>& schedule, const LabOptions& opts = {});

nlohmann::json to_json(const CheckReport& r);

}  // namespace cif
