#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ciflab/integrand.hpp"
#include "ciflab/measure_space.hpp"

namespace cif {

struct MomentConstraint {
  TestFunctional a;
  double b = 0.0;
};

/// minimize I_phi(x) over simple functions on `space` subject to
/// <a_i, x> = b_i.
struct MomentProblem {
  IntegrandPtr integrand;
  MeasureSpacePtr space;
  std::vector<MomentConstraint> constraints;
  std::string label;

  /// The same problem keeping only the first n constraints.
  MomentProblem truncated(std::size_t n) const;
};

/// Per-cell coefficients of the constraint functionals: <a_i, x> equals
/// sum_c mu_c <K(i, c), x_c> exactly for every simple x on the space. For
/// scalar kinds K(i, c) is the cell average of the profile times the
/// direction; piecewise functionals are averaged over their overlap.
class ConstraintMatrix {
 public:
  ConstraintMatrix(const MomentProblem& problem);
  ConstraintMatrix(const std::vector<MomentConstraint>& constraints, const MeasureSpace& space, std::size_t d);

  std::size_t rows() const { return m_; }
  std::size_t cells() const { return cells_; }
  std::size_t d() const { return d_; }
  std::span<const double> coeff(std::size_t i, std::size_t c) const { return {k_.data() + (i * cells_ + c) * d_, d_}; }
  /// Largest |cell average - midpoint value| over all scalar-profile
  /// constraints and cells.
  double midpoint_discrepancy() const { return midpoint_gap_; }

 private:
  std::size_t m_, cells_, d_;
  Vec k_;
  double midpoint_gap_ = 0.0;
};

struct DualEvaluation {
  double value = 0.0;
  Vec gradient;
  /// m x m row-major; empty when no closed-form conjugate Hessian exists.
  Vec hessian;
};

/// D(lambda) = lambda . b - sum_c mu_c phi*(sum_i lambda_i K(i, c)).
/// Throws DomainError naming the offending cell when some combination leaves
/// dom phi*.
DualEvaluation dual_objective(const MomentProblem& problem, const Vec& lambda);

struct SolverOptions {
  enum class Mode { kAuto, kNewton, kGradient };
  Mode mode = Mode::kAuto;
  int max_iterations = 200;
  double gradient_tol = 1e-9;
  double divergence_threshold = 1e8;
  /// Dual starting point; default 0, or a sign-feasible point when 0 lies
  /// outside int dom phi*.
  std::optional<Vec> start;
};

struct PrimalDualSolution {
  Vec lambda;
  SimpleFunction primal;
  double dual_value = 0.0;
  double primal_value = 0.0;
  /// <a_i, x> - b_i, paired exactly
  Vec constraint_residuals;
  double gradient_norm = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string mode;
  double midpoint_discrepancy = 0.0;
};

/// Damped Newton ascent on the concave dual (two-point step-size gradient ascent
/// when only first-order conjugate data exists). Throws InfeasibleError for
/// linearly dependent constraints or a diverging dual; an exhausted
/// iteration budget returns converged = false.
PrimalDualSolution solve(const MomentProblem& problem, const SolverOptions& opts = {});

struct BruteForceResult {
  double value = 0.0;
  SimpleFunction x;
  /// max over cells of |grad F + C^T nu| and of |C x - b|
  double kkt_residual = 0.0;
  double feasibility_residual = 0.0;
  int iterations = 0;
};

/// Independent primal oracle: infeasible-start Newton on the finite problem
/// over `grid`, using only phi values and gradients (second derivatives by
/// differencing the gradient). Requires a separable integrand and at most
/// 256 cells. Throws InfeasibleError when no interior feasible point is
/// reached.
BruteForceResult brute_force_primal(const MomentProblem& problem, const MeasureSpacePtr& grid);

struct StabilityRow {
  std::size_t n = 0;
  double value = 0.0;
  double l1_to_limit = 0.0;
  int iterations = 0;
};

struct StabilityReport {
  std::string label;
  std::size_t limit_constraints = 0;
  double limit_value = 0.0;
  std::vector<StabilityRow> rows;
  /// descriptions of V(P_n) > V(P_{n+1}) + 1e-9
  std::vector<std::string> monotonicity_errors;
};

/// Solves P_n (first n constraints) for each n in the schedule and P_inf
/// (all constraints). Throws ConvergenceError when a sub-problem fails.
StabilityReport stability_run(const MomentProblem& base, const std::vector<std::size_t>& schedule,
                              const SolverOptions& opts = {});

/// Boltzmann-Shannon trig-moment demo on [0,1]: constraints 1, cos 2 pi s,
/// sin 2 pi s, ..., cos 2 pi K s, sin 2 pi K s with right-hand sides taken
/// from the normalized target 1 / (1.6 + cos 2 pi s + 0.3 sin 4 pi s)
/// sampled at cell midpoints.
MomentProblem trig_moment_demo(std::size_t cells = 128, int max_frequency = 8);

/// Problem files: {label, integrand: name | {name, d, p}, box: {lo, hi},
/// cells: [...], constraints: [{kind, params, b}]}.
MomentProblem moment_problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PrimalDualSolution& s);
nlohmann::json to_json(const StabilityReport& r);

}  // namespace cif
