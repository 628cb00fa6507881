#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ciflab/integrand.hpp"
#include "ciflab/numeric.hpp"

namespace cif {

/// A finite measure space: a box cut into a tensor-product grid of cells,
/// each carrying a positive weight. Lebesgue-induced spaces use the cell
/// volume as weight; custom weights are treated as uniform densities inside
/// their cell. Cells are indexed row-major with the last axis fastest.
class MeasureSpace {
 public:
  /// Lebesgue measure on the grid given by per-axis breakpoints.
  static MeasureSpace lebesgue(std::vector<Vec> breakpoints);
  /// Uniform Lebesgue grid on [lo, hi] with `cells[a]` cells along axis a.
  static MeasureSpace uniform(const Vec& lo, const Vec& hi, const std::vector<std::size_t>& cells);
  static MeasureSpace interval(double a, double b, std::size_t cells);
  /// Custom positive weights, one per cell.
  static MeasureSpace weighted(std::vector<Vec> breakpoints, Vec weights);

  std::size_t axes() const { return breaks_.size(); }
  std::size_t cell_count() const { return weights_.size(); }
  const std::vector<Vec>& breakpoints() const { return breaks_; }
  std::size_t cells_along(std::size_t axis) const { return breaks_[axis].size() - 1; }
  double weight(std::size_t cell) const { return weights_[cell]; }
  const Vec& weights() const { return weights_; }
  bool lebesgue_induced() const { return lebesgue_; }
  double total_measure() const { return total_; }

  Vec box_lo() const;
  Vec box_hi() const;
  /// Lebesgue volume of the box.
  double box_volume() const;
  double cell_volume(std::size_t cell) const;
  void cell_bounds(std::size_t cell, Vec& lo, Vec& hi) const;
  Vec cell_midpoint(std::size_t cell) const;
  std::vector<std::size_t> unravel(std::size_t cell) const;
  std::size_t ravel(std::span<const std::size_t> idx) const;

  bool same_box(const MeasureSpace& other) const;
  bool same_partition(const MeasureSpace& other) const;

 private:
  MeasureSpace(std::vector<Vec> breaks, Vec weights, bool lebesgue);
  std::vector<Vec> breaks_;
  Vec weights_;
  bool lebesgue_ = true;
  double total_ = 0.0;
};

using MeasureSpacePtr = std::shared_ptr<const MeasureSpace>;

/// Piecewise-constant R^d-valued function, one vector per cell.
class SimpleFunction {
 public:
  /// `values` holds cell_count * d entries, cell-major.
  SimpleFunction(MeasureSpacePtr space, std::size_t d, Vec values);
  static SimpleFunction constant(MeasureSpacePtr space, Vec value);
  /// Samples `f` at cell midpoints.
  static SimpleFunction from_midpoints(MeasureSpacePtr space, std::size_t d,
                                       const std::function<Vec(std::span<const double>)>& f);

  const MeasureSpace& space() const { return *space_; }
  const MeasureSpacePtr& space_ptr() const { return space_; }
  std::size_t d() const { return d_; }
  std::span<const double> cell_value(std::size_t cell) const { return {values_.data() + cell * d_, d_}; }
  const Vec& values() const { return values_; }

 private:
  MeasureSpacePtr space_;
  std::size_t d_;
  Vec values_;
};

/// Bounded test functional g in L^inf used for pairings <x, g>.
///
/// Scalar kinds (constant, indicator, trig) act through a direction vector:
/// <x, g> = integral of g(s) <x(s), direction>. An empty direction means the
/// all-ones vector of whatever dimension x has. Trig functionals are
/// cos(2 pi k s_axis) or sin(2 pi k s_axis) in absolute coordinates.
class TestFunctional {
 public:
  enum class Kind { kConstant, kIndicator, kTrig, kPiecewiseConstant };
  enum class Phase { kCos, kSin };

  static TestFunctional constant(double c, Vec direction = {});
  static TestFunctional indicator(Vec lo, Vec hi, Vec direction = {});
  static TestFunctional trig(int frequency, Phase phase, std::size_t axis = 0, Vec direction = {});
  static TestFunctional piecewise(SimpleFunction g);

  Kind kind() const { return kind_; }
  /// L^inf norm of g.
  double bound() const { return bound_; }
  const Vec& direction() const { return direction_; }
  int frequency() const { return frequency_; }
  Phase phase() const { return phase_; }
  std::size_t axis() const { return axis_; }
  double constant_value() const { return constant_; }
  const Vec& indicator_lo() const { return lo_; }
  const Vec& indicator_hi() const { return hi_; }
  const SimpleFunction& piecewise_function() const { return *piecewise_; }

  /// Exact Lebesgue integral of the scalar profile over the box [lo, hi].
  double box_integral(std::span<const double> lo, std::span<const double> hi) const;
  /// Scalar profile at a point.
  double eval(std::span<const double> s) const;
  std::string describe() const;

 private:
  TestFunctional() = default;
  Kind kind_ = Kind::kConstant;
  double bound_ = 0.0;
  Vec direction_;
  double constant_ = 0.0;
  Vec lo_, hi_;
  int frequency_ = 0;
  Phase phase_ = Phase::kCos;
  std::size_t axis_ = 0;
  std::shared_ptr<const SimpleFunction> piecewise_;
};

/// Cells of the common refinement of two simple functions on one box:
/// callback(weight, cell_lo, cell_hi, x_cell, y_cell) in fixed order.
using RefinementVisitor =
    std::function<void(double, std::span<const double>, std::span<const double>, std::size_t, std::size_t)>;
void visit_common_refinement(const MeasureSpace& a, const MeasureSpace& b, const RefinementVisitor& visit);
MeasureSpacePtr common_refinement(const MeasureSpace& a, const MeasureSpace& b);

/// a*x + b*y on the common refinement.
SimpleFunction linear_combination(double a, const SimpleFunction& x, double b, const SimpleFunction& y);

/// sum_c mu_c phi(v_c); +inf when some cell value lies outside dom phi.
double integral_functional(const Integrand& phi, const SimpleFunction& x);
/// integral of |phi(x(s)) - phi(y(s))| over the common refinement.
double composition_distance(const Integrand& phi, const SimpleFunction& x, const SimpleFunction& y);
double l1_norm(const SimpleFunction& x);
double l1_distance(const SimpleFunction& x, const SimpleFunction& y);
double pair(const SimpleFunction& x, const TestFunctional& g);
/// mu{ s : |x(s) - y(s)| >= eta }.
double deviation_measure(const SimpleFunction& x, const SimpleFunction& y, double eta);
/// Finite surrogate for weak convergence: max over the dictionary of
/// |<x - y, g>| / max(1, |g|_inf). Weak convergence itself cannot be decided
/// from finitely many functionals.
double weak_gap(const SimpleFunction& x, const SimpleFunction& y, const std::vector<TestFunctional>& dictionary);
/// Integral of |x| over {|x| > threshold}.
double tail_integral(const SimpleFunction& x, double threshold);

struct UniformIntegrabilityProfile {
  Vec thresholds;
  /// per_member[n][k] = integral of |x_n| over {|x_n| > thresholds[k]}
  std::vector<Vec> per_member;
  /// sup over members, per threshold
  Vec sup;
};
UniformIntegrabilityProfile uniform_integrability_profile(const std::vector<SimpleFunction>& xs,
                                                          const Vec& thresholds);

}  // namespace cif
