#include "ciflab/watson.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "ciflab/kernels.hpp"
#include "ciflab/numeric.hpp"

namespace cif {
namespace {

constexpr double kSeriesCutoff = 20.0;
constexpr double kBesselTol = 1e-14;
constexpr unsigned kBesselDepth = 15;
constexpr double kMinPanel = 1e-7;
constexpr double kPanelFraction = 0.25;
constexpr double kTinyW = 1e-3;

void check_w(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("w must lie in [0, 1]");
}

// Sum_k (t^2/4)^k / (k!)^2, all terms positive.
double i0_series(double t) {
  const double q = 0.25 * t * t;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// exp(-t) I0(t) ~ (2 pi t)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8t)^k)
double i0e_asymptotic(double t) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * t);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * t);
}

std::vector<double> panel_edges(double w) {
  const double pi = std::numbers::pi;
  if (w == 0.0) return {0.0, pi};
  const double width = std::sqrt(6.0 * (1.0 - w) / w);
  double h = std::max(kPanelFraction * width, kMinPanel);
  std::vector<double> edges = {0.0};
  while (h < pi) {
    edges.push_back(h);
    h *= 2.0;
  }
  edges.push_back(pi);
  return edges;
}

struct AxisRule {
  std::vector<double> gap, cosv, weight;
};

template <unsigned N>
AxisRule axis_rule(double w) {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& wt = Rule::weights();
  const std::vector<double> edges = panel_edges(w);
  AxisRule r;
  auto push = [&](double theta, double weight) {
    const double s = std::sin(0.5 * theta);
    r.gap.push_back(2.0 * s * s);
    r.cosv.push_back(std::cos(theta));
    r.weight.push_back(weight / std::numbers::pi);
  };
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        push(mid, half * wt[i]);
        continue;
      }
      push(mid - half * x[i], half * wt[i]);
      push(mid + half * x[i], half * wt[i]);
    }
  }
  return r;
}

CubeAverages integrate_cube(double w, const AxisRule& r) {
  const std::size_t n = r.gap.size();
  CompensatedSum s0, s1;
  const double base0 = 3.0 * (1.0 - w);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      const double base = base0 + w * (r.gap[j] + r.gap[l]);
      const auto sums = kernels::reciprocal_sums(r.gap.data(), r.cosv.data(), r.weight.data(), n, base, w);
      const double wjl = r.weight[j] * r.weight[l];
      s0.add(wjl * sums.s0);
      s1.add(wjl * sums.s1);
    }
  CubeAverages c;
  c.reciprocal = s0.value();
  c.cosine = s1.value();
  c.points_per_axis = n;
  const auto edges = panel_edges(w);
  c.smallest_panel = edges[1] - edges[0];
  return c;
}

}  // namespace

double bessel_i0e(double t) {
  t = std::abs(t);
  if (t <= kSeriesCutoff) return std::exp(-t) * i0_series(t);
  return i0e_asymptotic(t);
}

double bessel_i0(double t) {
  t = std::abs(t);
  if (t <= kSeriesCutoff) return i0_series(t);
  return std::exp(t) * i0e_asymptotic(t);
}

QuadratureEstimate watson_bessel(double w) {
  check_w(w);
  if (w == 0.0) return {1.0 / 3.0, 0.0};
  const double edge = w == 1.0 ? 2.0 * std::pow(2.0 * std::numbers::pi, -1.5) : 0.0;
  auto f = [w, edge](double u) {
    if (u >= 1.0) return edge;
    const double v = 1.0 - u;
    const double t = (u / v) * (u / v);
    const double dt = 2.0 * u / (v * v * v);
    const double b = bessel_i0e(w * t);
    const double damp = w == 1.0 ? 1.0 : std::exp(-3.0 * (1.0 - w) * t);
    return damp == 0.0 ? 0.0 : damp * b * b * b * dt;
  };
  QuadratureEstimate q;
  q.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, kBesselDepth, kBesselTol,
                                                                          &q.error);
  return q;
}

CubeAverages cube_averages(double w, int panel_order) {
  check_w(w);
  switch (panel_order) {
    case 15:
      return integrate_cube(w, axis_rule<15>(w));
    case 20:
      return integrate_cube(w, axis_rule<20>(w));
    case 30:
      return integrate_cube(w, axis_rule<30>(w));
    default:
      throw std::invalid_argument("cube_averages: panel order must be 15, 20 or 30");
  }
}

double watson_cube(double w) {
  check_w(w);
  if (w == 0.0) return 1.0 / 3.0;
  return cube_averages(w).reciprocal;
}

double watson(double w) {
  const double v = watson_bessel(w).value;
  if (w <= 0.999) {
    const double c = watson_cube(w);
    if (std::abs(v - c) > kWatsonCrossCheckTol)
      throw ConvergenceError("Watson routes disagree at w = " + std::to_string(w) + ": " + std::to_string(v) +
                             " vs " + std::to_string(c));
  }
  return v;
}

double alpha_of_w(double w) {
  check_w(w);
  if (w == 0.0) return 0.0;
  // 3 W1 = 1 + w^2/6 + 5 w^4/72 + O(w^6)
  if (w < kTinyW) return w / 6.0 + w * w * w / 24.0;
  const double W1 = watson_bessel(w).value;
  return (1.0 - 1.0 / (3.0 * W1)) / w;
}

double alpha_bar() {
  static const double value = alpha_of_w(1.0);
  return value;
}

double w_of_alpha(double alpha) {
  const double top = alpha_bar();
  if (!(alpha >= 0.0)) throw DomainError("w_of_alpha: alpha must be nonnegative");
  if (alpha > top + 1e-12) throw DomainError("w_of_alpha: alpha above the attainment threshold has no w");
  if (alpha == 0.0) return 0.0;
  if (alpha >= top) return 1.0;
  auto f = [alpha](double w) { return alpha_of_w(w) - alpha; };
  auto done = [](double a, double b) { return b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b; };
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(f, 0.0, 1.0, -alpha, top - alpha, done, iters);
  const double lo = bracket.first, hi = bracket.second;
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

double BurgDensity::operator()(double x1, double x2, double x3) const {
  const double two_pi = 2.0 * std::numbers::pi;
  auto gap = [&](double x) {
    const double s = std::sin(0.5 * two_pi * x);
    return 2.0 * s * s;
  };
  const double den = 3.0 * (1.0 - w) + w * (gap(x1) + gap(x2) + gap(x3));
  return normalization() / den;
}

BurgDensity burg_density(double w) { return BurgDensity{w, watson_bessel(w).value}; }

WatsonResult watson_at(double w) {
  WatsonResult r;
  r.w = w;
  r.W1 = watson(w);
  r.alpha = alpha_of_w(w);
  r.attained = true;
  r.density = BurgDensity{w, r.W1};
  return r;
}

WatsonResult classify_attainment(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  WatsonResult r;
  r.alpha = alpha;
  if (alpha > alpha_bar() + 1e-12) {
    r.attained = false;
    r.w = std::numeric_limits<double>::quiet_NaN();
    r.W1 = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.w = w_of_alpha(std::min(alpha, alpha_bar()));
  r.W1 = watson_bessel(r.w).value;
  r.attained = true;
  r.density = BurgDensity{r.w, r.W1};
  return r;
}

DensityMoments verify_density_moments(const BurgDensity& p) {
  check_w(p.w);
  if (p.w == 0.0) return {1.0, 0.0, 0.0};
  const CubeAverages fine = cube_averages(p.w, 20);
  const CubeAverages coarse = cube_averages(p.w, 15);
  DensityMoments m;
  m.mass = fine.reciprocal / p.W1;
  m.moment = fine.cosine / p.W1;
  m.error_estimate = std::max(std::abs(fine.reciprocal - coarse.reciprocal), std::abs(fine.cosine - coarse.cosine)) / p.W1;
  return m;
}

void write_density_csv(std::ostream& out, const BurgDensity& p, int n) {
  if (n < 1) throw std::invalid_argument("density grid needs at least one cell per axis");
  out << "x1,x2,x3,p\n" << std::setprecision(17);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double x1 = (i + 0.5) / n, x2 = (j + 0.5) / n, x3 = (k + 0.5) / n;
        out << x1 << ',' << x2 << ',' << x3 << ',' << p(x1, x2, x3) << '\n';
      }
}

nlohmann::json to_json(const WatsonResult& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["attained"] = r.attained;
  j["w"] = r.attained ? nlohmann::json(r.w) : nlohmann::json(nullptr);
  j["W1"] = r.attained ? nlohmann::json(r.W1) : nlohmann::json(nullptr);
  if (r.density) j["density_normalization"] = r.density->normalization();
  return j;
}

nlohmann::json watson_metadata() {
  return {
      {"convention", "unit-cube average, W1(0) = 1/3"},
      {"bessel_i0", {{"series_cutoff", kSeriesCutoff}, {"beyond", "scaled asymptotic expansion"}}},
      {"bessel_route",
       {{"substitution", "t = (u/(1-u))^2"},
        {"rule", "adaptive gauss_kronrod 61"},
        {"tolerance", kBesselTol},
        {"max_depth", kBesselDepth}}},
      {"cube_route",
       {{"rule", "tensor gauss_legendre 20 per panel"},
        {"grading", "geometric x2 from 0.25*sqrt(6(1-w)/w)"},
        {"min_panel", kMinPanel},
        {"kernel", kernels::isa_name(kernels::active_isa())}}},
      {"cross_check_tolerance", kWatsonCrossCheckTol},
      {"small_w_series_below", kTinyW},
  };
}

}  // namespace cif
