#pragma once

#include <iosfwd>
#include <optional>

#include "json.hpp"

namespace cif {

// Normalized convention throughout: W1(w) is the average over the unit cube of
//   1 / (3 - w (cos 2 pi x1 + cos 2 pi x2 + cos 2 pi x3)),
// so W1(0) = 1/3. The integral over [-pi, pi]^3 of the same expression in
// angle variables equals 8 pi^3 W1(w), and
//   W1(w) = integral_0^inf exp(-3t) I0(w t)^3 dt.

/// Modified Bessel function I0; even in t. Power series for |t| <= 20,
/// scaled asymptotic expansion beyond.
double bessel_i0(double t);
/// exp(-|t|) I0(t), finite for all t.
double bessel_i0e(double t);

struct QuadratureEstimate {
  double value = 0.0;
  double error = 0.0;
};

/// W1 via the Bessel integral (substitution t = (u / (1 - u))^2 on u in [0, 1)
/// with adaptive Gauss-Kronrod).
QuadratureEstimate watson_bessel(double w);

/// Direct cube quadrature: tensor Gauss-Legendre on [0, pi]^3 in angle
/// variables with panels graded geometrically towards the corner where the
/// denominator is smallest.
struct CubeAverages {
  /// average of 1 / (3 - w sum cos)
  double reciprocal = 0.0;
  /// average of cos(theta_1) / (3 - w sum cos)
  double cosine = 0.0;
  std::size_t points_per_axis = 0;
  double smallest_panel = 0.0;
};
CubeAverages cube_averages(double w, int panel_order = 20);
double watson_cube(double w);

/// Tolerance of the two-route cross-check performed by watson().
inline constexpr double kWatsonCrossCheckTol = 1e-6;
/// Bessel-route W1(w). For w <= 0.999 the cube route is also evaluated and a
/// disagreement beyond kWatsonCrossCheckTol throws ConvergenceError.
double watson(double w);

/// First cosine moment of the optimal density, (1 - 1/(3 W1(w))) / w, with
/// alpha(0) = 0 and a series for tiny w.
double alpha_of_w(double w);
/// Inverse of alpha_of_w on [0, alpha_bar]; throws DomainError above it.
double w_of_alpha(double alpha);
/// alpha_of_w(1), computed once.
double alpha_bar();

/// p(x) = (1 / W1) / (3 - w sum cos 2 pi x_i) on the unit cube.
struct BurgDensity {
  double w = 0.0;
  double W1 = 1.0 / 3.0;
  double normalization() const { return 1.0 / W1; }
  double operator()(double x1, double x2, double x3) const;
};
BurgDensity burg_density(double w);

struct WatsonResult {
  double w = 0.0;
  double W1 = 1.0 / 3.0;
  double alpha = 0.0;
  bool attained = true;
  std::optional<BurgDensity> density;
};

/// Point evaluation for a given w.
WatsonResult watson_at(double w);
/// Attainment for a prescribed cosine moment: attained iff alpha <= alpha_bar.
WatsonResult classify_attainment(double alpha);

struct DensityMoments {
  double mass = 0.0;
  double moment = 0.0;
  /// difference between two cube resolutions, max over mass and moment
  double error_estimate = 0.0;
};
/// Cube quadrature of the mass and first cosine moment of p.
DensityMoments verify_density_moments(const BurgDensity& p);

/// Density values on an n^3 midpoint grid: x1,x2,x3,p rows.
void write_density_csv(std::ostream& out, const BurgDensity& p, int n = 16);

nlohmann::json to_json(const WatsonResult& r);
/// Fixed quadrature constants, for reproducibility records.
nlohmann::json watson_metadata();

}  // namespace cif
