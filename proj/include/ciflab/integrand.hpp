#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ciflab/domain.hpp"
#include "ciflab/numeric.hpp"

namespace cif {

struct IntegrandFlags {
  bool strictly_convex_on_domain = false;
  bool conjugate_everywhere_differentiable = false;
  bool conjugate_full_domain = false;
  bool domain_open = false;
  bool separable = false;
};

/// Optional analytic bounds used by the preservation-of-convergence checks.
struct IntegrandBounds {
  /// M with |phi(v)| <= M on dom phi.
  std::optional<double> value_bound;
  /// True when the value bound holds on all of R^d (dom phi is everything).
  bool value_bound_global = false;
  /// delta bounding every Clarke subgradient norm.
  std::optional<double> clarke_subgradient_bound;
};

struct IntegrandInfo {
  std::string name;
  std::size_t dimension = 1;
  DomainSpec domain;
  /// dom phi*; meaningful only when has_conjugate.
  DomainSpec conjugate_domain;
  IntegrandFlags flags;
  IntegrandBounds bounds;
  bool has_conjugate = true;
};

/// A closed convex integrand phi: R^d -> (-inf, +inf] together with its
/// Fenchel conjugate. Instances are immutable; every member is safe to call
/// concurrently.
///
/// `value` returns +inf outside dom phi and the lower-semicontinuous closed
/// form on the boundary. `grad` is defined on int dom phi only and throws
/// DomainError elsewhere; `conj_value`/`conj_grad` follow the same rules with
/// respect to dom phi*.
class Integrand {
 public:
  virtual ~Integrand() = default;

  const std::string& name() const { return info_.name; }
  std::size_t dimension() const { return info_.dimension; }
  const DomainSpec& domain() const { return info_.domain; }
  const DomainSpec& conjugate_domain() const { return info_.conjugate_domain; }
  const IntegrandFlags& flags() const { return info_.flags; }
  const IntegrandBounds& bounds() const { return info_.bounds; }
  bool has_conjugate() const { return info_.has_conjugate; }

  virtual double value(std::span<const double> z) const = 0;
  virtual Vec grad(std::span<const double> z) const = 0;
  virtual double conj_value(std::span<const double> y) const;
  virtual Vec conj_grad(std::span<const double> y) const;
  /// Row-major d x d Hessian of phi*; nullopt when no closed form is known
  /// at y (the dual solver then drops to first-order steps).
  virtual std::optional<Vec> conj_hess(std::span<const double> y) const;

 protected:
  explicit Integrand(IntegrandInfo info) : info_(std::move(info)) {}
  void require_dimension(std::span<const double> z) const;
  [[noreturn]] void no_conjugate() const;

 private:
  IntegrandInfo info_;
};

using IntegrandPtr = std::shared_ptr<const Integrand>;

/// Closed forms of a one-dimensional integrand. Each callable is only invoked
/// where it is defined: `f` on dom, `df` on int dom, the conjugate members on
/// dom phi* / int dom phi*.
struct ScalarFormulas {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> conj;
  std::function<double(double)> dconj;
  std::function<double(double)> d2conj;
};

class ScalarIntegrand final : public Integrand {
 public:
  ScalarIntegrand(IntegrandInfo info, ScalarFormulas formulas);

  double value(std::span<const double> z) const override;
  Vec grad(std::span<const double> z) const override;
  double conj_value(std::span<const double> y) const override;
  Vec conj_grad(std::span<const double> y) const override;
  std::optional<Vec> conj_hess(std::span<const double> y) const override;

  double value1(double z) const;
  double grad1(double z) const;
  double conj1(double y) const;
  double conj_grad1(double y) const;
  std::optional<double> conj_hess1(double y) const;

 private:
  ScalarFormulas formulas_;
};

using ScalarIntegrandPtr = std::shared_ptr<const ScalarIntegrand>;

/// phi(z) = sum_i phi_i(z_i). The conjugate of the sum is the sum of the
/// component conjugates, so everything is assembled coordinate-wise.
class SeparableIntegrand final : public Integrand {
 public:
  SeparableIntegrand(std::string name, std::vector<ScalarIntegrandPtr> components);

  const std::vector<ScalarIntegrandPtr>& components() const { return components_; }

  double value(std::span<const double> z) const override;
  Vec grad(std::span<const double> z) const override;
  double conj_value(std::span<const double> y) const override;
  Vec conj_grad(std::span<const double> y) const override;
  std::optional<Vec> conj_hess(std::span<const double> y) const override;

 private:
  std::vector<ScalarIntegrandPtr> components_;
};

}  // namespace cif
