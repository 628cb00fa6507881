#include "ciflab/integrand.hpp"

#include <stdexcept>

namespace cif {

void Integrand::require_dimension(std::span<const double> z) const {
  if (z.size() != dimension())
    throw std::invalid_argument(name() + ": expected dimension " + std::to_string(dimension()) + ", got " +
                                std::to_string(z.size()));
}

void Integrand::no_conjugate() const {
  throw std::logic_error(name() + " has no closed-form conjugate");
}

double Integrand::conj_value(std::span<const double>) const { no_conjugate(); }
Vec Integrand::conj_grad(std::span<const double>) const { no_conjugate(); }
std::optional<Vec> Integrand::conj_hess(std::span<const double>) const { return std::nullopt; }

ScalarIntegrand::ScalarIntegrand(IntegrandInfo info, ScalarFormulas formulas)
    : Integrand(std::move(info)), formulas_(std::move(formulas)) {
  if (dimension() != 1) throw std::invalid_argument("ScalarIntegrand must be one-dimensional");
}

double ScalarIntegrand::value1(double z) const {
  const double zz[1] = {z};
  if (!domain().contains(zz)) return kInf;
  return formulas_.f(z);
}

double ScalarIntegrand::grad1(double z) const {
  const double zz[1] = {z};
  if (!domain().interior_contains(zz))
    throw DomainError(name() + ": gradient undefined outside the interior of the domain");
  return formulas_.df(z);
}

double ScalarIntegrand::conj1(double y) const {
  if (!has_conjugate()) no_conjugate();
  const double yy[1] = {y};
  if (!conjugate_domain().contains(yy)) return kInf;
  return formulas_.conj(y);
}

double ScalarIntegrand::conj_grad1(double y) const {
  if (!has_conjugate()) no_conjugate();
  const double yy[1] = {y};
  if (!conjugate_domain().interior_contains(yy))
    throw DomainError(name() + ": conjugate gradient undefined outside int dom phi*");
  return formulas_.dconj(y);
}

std::optional<double> ScalarIntegrand::conj_hess1(double y) const {
  if (!has_conjugate() || !formulas_.d2conj) return std::nullopt;
  const double yy[1] = {y};
  if (!conjugate_domain().interior_contains(yy)) return std::nullopt;
  return formulas_.d2conj(y);
}

double ScalarIntegrand::value(std::span<const double> z) const {
  require_dimension(z);
  return value1(z[0]);
}

Vec ScalarIntegrand::grad(std::span<const double> z) const {
  require_dimension(z);
  return {grad1(z[0])};
}

double ScalarIntegrand::conj_value(std::span<const double> y) const {
  require_dimension(y);
  return conj1(y[0]);
}

Vec ScalarIntegrand::conj_grad(std::span<const double> y) const {
  require_dimension(y);
  return {conj_grad1(y[0])};
}

std::optional<Vec> ScalarIntegrand::conj_hess(std::span<const double> y) const {
  require_dimension(y);
  auto h = conj_hess1(y[0]);
  if (!h) return std::nullopt;
  return Vec{*h};
}

namespace {

DomainSpec product_domain(const std::vector<const DomainSpec*>& parts) {
  Vec lo, hi;
  bool any_open = false, any_closed = false, all_space = true;
  for (const DomainSpec* d : parts) {
    switch (d->kind()) {
      case DomainSpec::Kind::kAllSpace:
        break;
      case DomainSpec::Kind::kOpenBox:
        any_open = true;
        all_space = false;
        break;
      case DomainSpec::Kind::kClosedBox:
        any_closed = true;
        all_space = false;
        break;
      default:
        throw std::invalid_argument("separable components must have interval domains");
    }
    lo.push_back(d->lo()[0]);
    hi.push_back(d->hi()[0]);
  }
  if (all_space) return DomainSpec::all_space(parts.size());
  if (any_open && any_closed) {
    // An all_space coordinate is both open and closed; only genuine mixes are rejected.
    throw std::invalid_argument("mixed open/closed component domains are not representable");
  }
  return any_closed ? DomainSpec::closed_box(lo, hi) : DomainSpec::open_box(lo, hi);
}

IntegrandInfo separable_info(std::string name, const std::vector<ScalarIntegrandPtr>& comps) {
  if (comps.empty()) throw std::invalid_argument("separable integrand needs at least one component");
  IntegrandInfo info;
  info.name = std::move(name);
  info.dimension = comps.size();
  std::vector<const DomainSpec*> doms, conj_doms;
  IntegrandFlags fl{true, true, true, true, true};
  bool conj = true;
  for (const auto& c : comps) {
    doms.push_back(&c->domain());
    conj_doms.push_back(&c->conjugate_domain());
    fl.strictly_convex_on_domain &= c->flags().strictly_convex_on_domain;
    fl.conjugate_everywhere_differentiable &= c->flags().conjugate_everywhere_differentiable;
    fl.conjugate_full_domain &= c->flags().conjugate_full_domain;
    fl.domain_open &= c->flags().domain_open;
    conj &= c->has_conjugate();
  }
  info.domain = product_domain(doms);
  info.has_conjugate = conj;
  info.conjugate_domain = conj ? product_domain(conj_doms) : DomainSpec::all_space(comps.size());
  info.flags = fl;
  return info;
}

}  // namespace

SeparableIntegrand::SeparableIntegrand(std::string name, std::vector<ScalarIntegrandPtr> components)
    : Integrand(separable_info(std::move(name), components)), components_(std::move(components)) {}

double SeparableIntegrand::value(std::span<const double> z) const {
  require_dimension(z);
  double s = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const double v = components_[i]->value1(z[i]);
    if (v == kInf) return kInf;
    s += v;
  }
  return s;
}

Vec SeparableIntegrand::grad(std::span<const double> z) const {
  require_dimension(z);
  Vec g(z.size());
  for (std::size_t i = 0; i < components_.size(); ++i) g[i] = components_[i]->grad1(z[i]);
  return g;
}

double SeparableIntegrand::conj_value(std::span<const double> y) const {
  require_dimension(y);
  if (!has_conjugate()) no_conjugate();
  double s = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const double v = components_[i]->conj1(y[i]);
    if (v == kInf) return kInf;
    s += v;
  }
  return s;
}

Vec SeparableIntegrand::conj_grad(std::span<const double> y) const {
  require_dimension(y);
  Vec g(y.size());
  for (std::size_t i = 0; i < components_.size(); ++i) g[i] = components_[i]->conj_grad1(y[i]);
  return g;
}

std::optional<Vec> SeparableIntegrand::conj_hess(std::span<const double> y) const {
  require_dimension(y);
  const std::size_t d = components_.size();
  Vec h(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    auto hi = components_[i]->conj_hess1(y[i]);
    if (!hi) return std::nullopt;
    h[i * d + i] = *hi;
  }
  return h;
}

}  // namespace cif
