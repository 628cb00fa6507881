#include "ciflab/catalog.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cif {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double softplus(double y) { return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

double sigmoid(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

DomainSpec interval_open(double lo, double hi) { return DomainSpec::open_box({lo}, {hi}); }
DomainSpec interval_closed(double lo, double hi) { return DomainSpec::closed_box({lo}, {hi}); }

ScalarIntegrandPtr scalar(std::string name, DomainSpec dom, DomainSpec conj_dom, IntegrandFlags flags,
                          ScalarFormulas formulas) {
  IntegrandInfo info;
  info.name = std::move(name);
  info.dimension = 1;
  info.domain = std::move(dom);
  info.conjugate_domain = std::move(conj_dom);
  info.flags = flags;
  info.flags.separable = true;
  return std::make_shared<ScalarIntegrand>(std::move(info), std::move(formulas));
}

ScalarIntegrandPtr boltzmann_shannon_1d() {
  return scalar("boltzmann_shannon", interval_closed(0.0, kInf), DomainSpec::all_space(1),
                {true, true, true, false, true},
                {[](double x) { return xlogx(x) - x; }, [](double x) { return std::log(x); },
                 [](double y) { return std::exp(y); }, [](double y) { return std::exp(y); },
                 [](double y) { return std::exp(y); }});
}

ScalarIntegrandPtr fermi_dirac_1d() {
  return scalar("fermi_dirac", interval_closed(0.0, 1.0), DomainSpec::all_space(1), {true, true, true, false, true},
                {[](double x) { return xlogx(x) + xlogx(1.0 - x); },
                 [](double x) { return std::log(x) - std::log1p(-x); }, softplus, sigmoid,
                 [](double y) { return sigmoid(y) * sigmoid(-y); }});
}

ScalarIntegrandPtr burg_1d() {
  return scalar("burg", interval_open(0.0, kInf), interval_open(-kInf, 0.0), {true, false, false, true, true},
                {[](double x) { return -std::log(x); }, [](double x) { return -1.0 / x; },
                 [](double y) { return -1.0 - std::log(-y); }, [](double y) { return -1.0 / y; },
                 [](double y) { return 1.0 / (y * y); }});
}

ScalarIntegrandPtr neg_log_cos_1d() {
  return scalar("neg_log_cos", interval_open(-kHalfPi, kHalfPi), DomainSpec::all_space(1),
                {true, true, true, true, true},
                {[](double x) { return -std::log(std::cos(x)); }, [](double x) { return std::tan(x); },
                 [](double y) { return y * std::atan(y) - 0.5 * std::log1p(y * y); },
                 [](double y) { return std::atan(y); }, [](double y) { return 1.0 / (1.0 + y * y); }});
}

ScalarIntegrandPtr cosh_1d() {
  return scalar("cosh_sum", DomainSpec::all_space(1), DomainSpec::all_space(1), {true, true, true, true, true},
                {[](double x) { return std::cosh(x); }, [](double x) { return std::sinh(x); },
                 [](double y) { return y * std::asinh(y) - std::hypot(1.0, y); },
                 [](double y) { return std::asinh(y); }, [](double y) { return 1.0 / std::hypot(1.0, y); }});
}

ScalarIntegrandPtr atanh_entropy_1d() {
  return scalar("atanh_entropy", interval_open(-1.0, 1.0), DomainSpec::all_space(1), {true, true, true, true, true},
                {[](double x) { return x * std::atanh(x) + 0.5 * std::log1p(-x * x); },
                 [](double x) { return std::atanh(x); }, log_cosh, [](double y) { return std::tanh(y); },
                 [](double y) {
                   const double e = std::exp(-2.0 * std::abs(y));
                   return 4.0 * e / ((1.0 + e) * (1.0 + e));
                 }});
}

ScalarIntegrandPtr burg_plus_linear_1d() {
  return scalar("burg_plus_linear", interval_open(0.0, kInf), interval_open(-kInf, 1.0),
                {true, false, false, true, true},
                {[](double x) { return x - std::log(x); }, [](double x) { return 1.0 - 1.0 / x; },
                 [](double y) { return -1.0 - std::log1p(-y); }, [](double y) { return 1.0 / (1.0 - y); },
                 [](double y) { return 1.0 / ((1.0 - y) * (1.0 - y)); }});
}

IntegrandPtr separable(const std::string& name, std::size_t d, ScalarIntegrandPtr (*make)()) {
  return std::make_shared<SeparableIntegrand>(name, std::vector<ScalarIntegrandPtr>(d, make()));
}

// (1/p)|x|^p with conjugate (1/q)|y|^q.
class NormPower final : public Integrand {
 public:
  NormPower(std::size_t d, double p)
      : Integrand(make_info(d)), p_(p), q_(p / (p - 1.0)) {}

  double value(std::span<const double> z) const override {
    require_dimension(z);
    return std::pow(norm2(z), p_) / p_;
  }
  Vec grad(std::span<const double> z) const override { return power_grad(z, p_); }
  double conj_value(std::span<const double> y) const override {
    require_dimension(y);
    return std::pow(norm2(y), q_) / q_;
  }
  Vec conj_grad(std::span<const double> y) const override { return power_grad(y, q_); }
  std::optional<Vec> conj_hess(std::span<const double> y) const override {
    require_dimension(y);
    const std::size_t d = y.size();
    const double r = norm2(y);
    Vec h(d * d, 0.0);
    if (r == 0.0) {
      if (q_ < 2.0) return std::nullopt;
      if (q_ == 2.0)
        for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;
      return h;
    }
    const double scale = std::pow(r, q_ - 2.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        h[i * d + j] = scale * ((i == j ? 1.0 : 0.0) + (q_ - 2.0) * y[i] * y[j] / (r * r));
    return h;
  }

 private:
  static IntegrandInfo make_info(std::size_t d) {
    IntegrandInfo info;
    info.name = "norm_power";
    info.dimension = d;
    info.domain = DomainSpec::all_space(d);
    info.conjugate_domain = DomainSpec::all_space(d);
    info.flags = {true, true, true, true, false};
    return info;
  }
  Vec power_grad(std::span<const double> z, double e) const {
    require_dimension(z);
    const double r = norm2(z);
    Vec g(z.begin(), z.end());
    const double scale = r == 0.0 ? 0.0 : std::pow(r, e - 2.0);
    for (double& v : g) v *= scale;
    return g;
  }
  double p_, q_;
};

// 1/(1-|x|^2) on the open unit ball. The conjugate is radial: phi*(y) = g*(|y|)
// where the maximizing radius r solves |y| = 2r/(1-r^2)^2.
class InverseGap final : public Integrand {
 public:
  explicit InverseGap(std::size_t d) : Integrand(make_info(d)) {}

  double value(std::span<const double> z) const override {
    require_dimension(z);
    if (!domain().contains(z)) return kInf;
    const double r = norm2(z);
    return 1.0 / ((1.0 - r) * (1.0 + r));
  }
  Vec grad(std::span<const double> z) const override {
    require_dimension(z);
    if (!domain().interior_contains(z)) throw DomainError("inverse_gap: gradient undefined outside the open ball");
    const double r = norm2(z);
    const double t = (1.0 - r) * (1.0 + r);
    Vec g(z.begin(), z.end());
    for (double& v : g) v *= 2.0 / (t * t);
    return g;
  }
  double conj_value(std::span<const double> y) const override {
    require_dimension(y);
    const double s = norm2(y);
    const Radial rad = solve_radius(s);
    return rad.r * s - 1.0 / rad.t;
  }
  Vec conj_grad(std::span<const double> y) const override {
    require_dimension(y);
    const double s = norm2(y);
    Vec g(y.size(), 0.0);
    if (s == 0.0) return g;
    const Radial rad = solve_radius(s);
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = rad.r * y[i] / s;
    return g;
  }
  std::optional<Vec> conj_hess(std::span<const double> y) const override {
    require_dimension(y);
    const std::size_t d = y.size();
    const double s = norm2(y);
    Vec h(d * d, 0.0);
    if (s == 0.0) {
      for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 0.5;
      return h;
    }
    const Radial rad = solve_radius(s);
    const double g2 = 2.0 / (rad.t * rad.t) + 8.0 * rad.r * rad.r / (rad.t * rad.t * rad.t);
    const double tangential = rad.r / s;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double yy = y[i] * y[j] / (s * s);
        h[i * d + j] = tangential * ((i == j ? 1.0 : 0.0) - yy) + yy / g2;
      }
    return h;
  }

 private:
  struct Radial {
    double r;  // maximizing radius
    double t;  // 1 - r^2
  };

  // Solves s t^2 = 2 sqrt(1 - t) for t in (0, 1]; increasing in t.
  static Radial solve_radius(double s) {
    if (s == 0.0) return {0.0, 1.0};
    double lo = 0.0, hi = 1.0;
    double t = std::min(1.0, std::sqrt(2.0 / s));
    for (int it = 0; it < 200; ++it) {
      const double root = std::sqrt(1.0 - t);
      const double h = s * t * t - 2.0 * root;
      if (h > 0.0) hi = t;
      else lo = t;
      const double dh = 2.0 * s * t + (root > 0.0 ? 1.0 / root : kInf);
      double next = t - h / dh;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-17 * t || hi - lo <= 1e-17 * hi) {
        t = next;
        break;
      }
      t = next;
    }
    return {std::sqrt(1.0 - t), t};
  }

  static IntegrandInfo make_info(std::size_t d) {
    IntegrandInfo info;
    info.name = "inverse_gap";
    info.dimension = d;
    info.domain = DomainSpec::open_unit_ball(d);
    info.conjugate_domain = DomainSpec::all_space(d);
    info.flags = {true, true, true, true, false};
    return info;
  }
};

// min{|x|, 1}: Lipschitz, bounded, not convex; no conjugate is provided.
class ClippedNorm final : public Integrand {
 public:
  explicit ClippedNorm(std::size_t d) : Integrand(make_info(d)) {}

  double value(std::span<const double> z) const override {
    require_dimension(z);
    return std::min(norm2(z), 1.0);
  }
  Vec grad(std::span<const double> z) const override {
    require_dimension(z);
    const double r = norm2(z);
    if (r == 0.0 || r == 1.0) throw DomainError("clipped_norm: not differentiable at |x| in {0, 1}");
    Vec g(z.size(), 0.0);
    if (r < 1.0)
      for (std::size_t i = 0; i < z.size(); ++i) g[i] = z[i] / r;
    return g;
  }

 private:
  static IntegrandInfo make_info(std::size_t d) {
    IntegrandInfo info;
    info.name = "clipped_norm";
    info.dimension = d;
    info.domain = DomainSpec::all_space(d);
    info.conjugate_domain = DomainSpec::all_space(d);
    info.flags = {false, false, false, true, false};
    info.has_conjugate = false;
    info.bounds.value_bound = 1.0;
    info.bounds.value_bound_global = true;
    info.bounds.clarke_subgradient_bound = 1.0;
    return info;
  }
};

// -log det M on svec-flattened symmetric positive definite matrices.
class LogDet final : public Integrand {
 public:
  explicit LogDet(std::size_t side) : Integrand(make_info(side)), side_(side) {}

  double value(std::span<const double> z) const override {
    require_dimension(z);
    if (!domain().contains(z)) return kInf;
    Eigen::LLT<Eigen::MatrixXd> llt(dense(z, 1.0));
    double s = 0.0;
    for (std::size_t i = 0; i < side_; ++i) s += std::log(llt.matrixL()(i, i));
    return -2.0 * s;
  }
  Vec grad(std::span<const double> z) const override {
    require_dimension(z);
    if (!domain().contains(z)) throw DomainError("log_det: gradient requires a positive definite matrix");
    const Eigen::MatrixXd inv = dense(z, 1.0).inverse();
    return flatten(-inv);
  }
  double conj_value(std::span<const double> y) const override {
    require_dimension(y);
    if (!conjugate_domain().contains(y)) return kInf;
    Eigen::LLT<Eigen::MatrixXd> llt(dense(y, -1.0));
    double s = 0.0;
    for (std::size_t i = 0; i < side_; ++i) s += std::log(llt.matrixL()(i, i));
    return -static_cast<double>(side_) - 2.0 * s;
  }
  Vec conj_grad(std::span<const double> y) const override {
    require_dimension(y);
    if (!conjugate_domain().contains(y))
      throw DomainError("log_det: conjugate gradient requires a negative definite matrix");
    return flatten(dense(y, -1.0).inverse());
  }
  std::optional<Vec> conj_hess(std::span<const double> y) const override {
    require_dimension(y);
    if (!conjugate_domain().contains(y)) return std::nullopt;
    const Eigen::MatrixXd x = dense(y, -1.0).inverse();
    const std::size_t n = dimension();
    std::vector<Eigen::MatrixXd> basis;
    for (std::size_t i = 0; i < n; ++i) {
      Vec e(n, 0.0);
      e[i] = 1.0;
      basis.push_back(x * dense(e, 1.0));
    }
    Vec h(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h[i * n + j] = (basis[i] * basis[j]).trace();
    return h;
  }

 private:
  Eigen::MatrixXd dense(std::span<const double> flat, double sign) const {
    const Vec m = smat(flat, side_);
    Eigen::MatrixXd out(side_, side_);
    for (std::size_t r = 0; r < side_; ++r)
      for (std::size_t c = 0; c < side_; ++c) out(r, c) = sign * m[r * side_ + c];
    return out;
  }
  Vec flatten(const Eigen::MatrixXd& m) const {
    Vec d(side_ * side_);
    for (std::size_t r = 0; r < side_; ++r)
      for (std::size_t c = 0; c < side_; ++c) d[r * side_ + c] = m(r, c);
    return svec(d, side_);
  }
  static IntegrandInfo make_info(std::size_t side) {
    IntegrandInfo info;
    info.name = "log_det";
    info.dimension = side * (side + 1) / 2;
    info.domain = DomainSpec::positive_definite_cone(side);
    info.conjugate_domain = info.domain.negated();
    info.flags = {true, false, false, true, false};
    return info;
  }
  std::size_t side_;
};

class Affine final : public Integrand {
 public:
  explicit Affine(std::size_t d) : Integrand(make_info(d)) {}
  double value(std::span<const double> z) const override {
    require_dimension(z);
    double s = 0.0;
    for (double v : z) s += v;
    return s;
  }
  Vec grad(std::span<const double> z) const override {
    require_dimension(z);
    return Vec(z.size(), 1.0);
  }

 private:
  static IntegrandInfo make_info(std::size_t d) {
    IntegrandInfo info;
    info.name = "affine";
    info.dimension = d;
    info.domain = DomainSpec::all_space(d);
    info.conjugate_domain = DomainSpec::all_space(d);
    info.flags = {false, false, false, true, false};
    info.has_conjugate = false;
    return info;
  }
};

// -(xy)^{1/4} on [0,1]^2: convex, strictly convex in the interior, constant
// (zero) along the edges x = 0 and y = 0.
class QuarterPowerProduct final : public Integrand {
 public:
  QuarterPowerProduct() : Integrand(make_info()) {}
  double value(std::span<const double> z) const override {
    require_dimension(z);
    if (!domain().contains(z)) return kInf;
    return -std::pow(z[0] * z[1], 0.25);
  }
  Vec grad(std::span<const double> z) const override {
    require_dimension(z);
    if (!domain().interior_contains(z)) throw DomainError("quarter_power_product: gradient needs an interior point");
    const double v = std::pow(z[0] * z[1], 0.25);
    return {-0.25 * v / z[0], -0.25 * v / z[1]};
  }

 private:
  static IntegrandInfo make_info() {
    IntegrandInfo info;
    info.name = "quarter_power_product";
    info.dimension = 2;
    info.domain = DomainSpec::closed_box({0.0, 0.0}, {1.0, 1.0});
    info.conjugate_domain = DomainSpec::all_space(2);
    info.flags = {false, true, true, false, false};
    info.has_conjugate = false;
    return info;
  }
};

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {
      "boltzmann_shannon", "fermi_dirac",   "burg",        "norm_power",   "neg_log_cos", "cosh_sum",
      "atanh_entropy",     "inverse_gap",   "burg_plus_linear", "clipped_norm", "log_det"};
  return names;
}

IntegrandPtr catalog_get(const std::string& name, std::size_t d, double p) {
  if (d == 0) throw std::invalid_argument("dimension must be positive");
  if (name == "boltzmann_shannon") return separable(name, d, boltzmann_shannon_1d);
  if (name == "fermi_dirac") return separable(name, d, fermi_dirac_1d);
  if (name == "burg") return separable(name, d, burg_1d);
  if (name == "neg_log_cos") return separable(name, d, neg_log_cos_1d);
  if (name == "cosh_sum") return separable(name, d, cosh_1d);
  if (name == "atanh_entropy") return separable(name, d, atanh_entropy_1d);
  if (name == "burg_plus_linear") return separable(name, d, burg_plus_linear_1d);
  if (name == "norm_power") {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("norm_power requires p > 1");
    return std::make_shared<NormPower>(d, p);
  }
  if (name == "inverse_gap") return std::make_shared<InverseGap>(d);
  if (name == "clipped_norm") return std::make_shared<ClippedNorm>(d);
  if (name == "log_det") {
    const std::size_t side = triangular_side(d);
    if (side == 0)
      throw std::invalid_argument("log_det dimension must be k(k+1)/2 for a k x k symmetric matrix, got " +
                                  std::to_string(d));
    return std::make_shared<LogDet>(side);
  }
  throw std::invalid_argument("unknown integrand: " + name);
}

const std::vector<std::string>& probe_integrand_names() {
  static const std::vector<std::string> names = {"affine", "quarter_power_product"};
  return names;
}

IntegrandPtr probe_integrand(const std::string& name, std::size_t d) {
  if (name == "affine") {
    if (d == 0) throw std::invalid_argument("dimension must be positive");
    return std::make_shared<Affine>(d);
  }
  if (name == "quarter_power_product") return std::make_shared<QuarterPowerProduct>();
  throw std::invalid_argument("unknown probe integrand: " + name);
}

IntegrandPtr any_integrand(const std::string& name, std::size_t d, double p) {
  const auto& probes = probe_integrand_names();
  if (std::find(probes.begin(), probes.end(), name) != probes.end()) return probe_integrand(name, d);
  return catalog_get(name, d, p);
}

RotundityClass classify(const Integrand& phi) {
  RotundityClass out;
  const IntegrandFlags& f = phi.flags();
  if (f.conjugate_everywhere_differentiable && f.domain_open)
    out.reasons.push_back("open_domain_conjugate_differentiable");
  if (f.separable && f.conjugate_everywhere_differentiable)
    out.reasons.push_back("separable_conjugate_differentiable");
  if (f.strictly_convex_on_domain && f.conjugate_everywhere_differentiable && f.conjugate_full_domain)
    out.reasons.push_back("strictly_convex_full_conjugate");
  out.strongly_rotund = !out.reasons.empty();
  if (!f.conjugate_full_domain) out.warnings.push_back("weakly compact lower level sets may fail");
  if (!f.strictly_convex_on_domain) out.warnings.push_back("not strictly convex on its domain");
  return out;
}

ConjugateEstimate numeric_conjugate(const Integrand& phi, std::span<const double> y, const DomainSpec& search_box,
                                    std::size_t grid, int zoom_passes, double divergence_threshold) {
  const std::size_t d = phi.dimension();
  if (y.size() != d || search_box.dimension() != d) throw std::invalid_argument("numeric_conjugate: dimension mismatch");
  if (!search_box.bounded()) throw std::invalid_argument("numeric_conjugate: search box must be bounded");
  if (grid < 2) throw std::invalid_argument("numeric_conjugate: need at least 2 grid points per axis");

  ConjugateEstimate best;
  Vec lo = search_box.lo(), hi = search_box.hi();
  bool on_boundary = false;
  Vec z(d);
  for (int pass = 0; pass <= zoom_passes; ++pass) {
    std::vector<std::size_t> idx(d, 0);
    Vec step(d);
    for (std::size_t i = 0; i < d; ++i) step[i] = (hi[i] - lo[i]) / static_cast<double>(grid - 1);
    while (true) {
      for (std::size_t i = 0; i < d; ++i) z[i] = idx[i] + 1 == grid ? hi[i] : lo[i] + step[i] * idx[i];
      const double fz = phi.value(z);
      if (fz < kInf) {
        const double v = dot(z, y) - fz;
        if (v > best.value) {
          best.value = v;
          best.argmax = z;
          if (pass == 0) {
            on_boundary = false;
            for (std::size_t i = 0; i < d; ++i) on_boundary |= idx[i] == 0 || idx[i] + 1 == grid;
          }
        }
      }
      std::size_t k = 0;
      while (k < d && ++idx[k] == grid) idx[k++] = 0;
      if (k == d) break;
    }
    if (best.argmax.empty()) return best;
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = std::max(search_box.lo()[i], best.argmax[i] - 2.0 * step[i]);
      hi[i] = std::min(search_box.hi()[i], best.argmax[i] + 2.0 * step[i]);
      if (!(lo[i] < hi[i])) hi[i] = lo[i] + step[i];
    }
  }

  if (on_boundary) {
    Vec centre(d), dir(d);
    for (std::size_t i = 0; i < d; ++i) {
      centre[i] = 0.5 * (search_box.lo()[i] + search_box.hi()[i]);
      dir[i] = best.argmax[i] - centre[i];
    }
    double scale = 1.0;
    for (int k = 0; k < 16; ++k) {
      scale *= 10.0;
      for (std::size_t i = 0; i < d; ++i) z[i] = centre[i] + scale * dir[i];
      const double fz = phi.value(z);
      if (fz == kInf) break;
      if (dot(z, y) - fz > divergence_threshold) {
        best.value = kInf;
        best.unbounded = true;
        break;
      }
    }
  }
  return best;
}

nlohmann::json to_json(const DomainSpec& d) {
  auto endpoint = [](double v) -> nlohmann::json {
    if (v == kInf) return "+inf";
    if (v == -kInf) return "-inf";
    return v;
  };
  nlohmann::json j;
  j["kind"] = d.kind_name();
  j["dimension"] = d.dimension();
  if (d.kind() == DomainSpec::Kind::kOpenBox || d.kind() == DomainSpec::Kind::kClosedBox) {
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (std::size_t i = 0; i < d.dimension(); ++i) {
      lo.push_back(endpoint(d.lo()[i]));
      hi.push_back(endpoint(d.hi()[i]));
    }
    j["lo"] = lo;
    j["hi"] = hi;
  }
  if (d.kind() == DomainSpec::Kind::kPositiveDefiniteCone) j["side"] = d.side();
  return j;
}

nlohmann::json to_json(const IntegrandFlags& f) {
  return {{"strictly_convex_on_domain", f.strictly_convex_on_domain},
          {"conjugate_everywhere_differentiable", f.conjugate_everywhere_differentiable},
          {"conjugate_full_domain", f.conjugate_full_domain},
          {"domain_open", f.domain_open},
          {"separable", f.separable}};
}

nlohmann::json integrand_metadata(const Integrand& phi) {
  return {{"name", phi.name()},
          {"dimension", phi.dimension()},
          {"domain", to_json(phi.domain())},
          {"flags", to_json(phi.flags())}};
}

}  // namespace cif
