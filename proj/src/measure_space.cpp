#include "ciflab/measure_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cif {
namespace {

void check_breakpoints(const std::vector<Vec>& breaks) {
  if (breaks.empty()) throw std::invalid_argument("measure space needs at least one axis");
  for (const Vec& b : breaks) {
    if (b.size() < 2) throw std::invalid_argument("each axis needs at least two breakpoints");
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
      if (!(b[i] < b[i + 1]) || !std::isfinite(b[i]) || !std::isfinite(b[i + 1]))
        throw std::invalid_argument("breakpoints must be finite and strictly increasing");
  }
}

std::size_t product_of_cells(const std::vector<Vec>& breaks) {
  std::size_t n = 1;
  for (const Vec& b : breaks) n *= b.size() - 1;
  return n;
}

Vec lebesgue_weights(const std::vector<Vec>& breaks) {
  const std::size_t n = product_of_cells(breaks);
  Vec w(n);
  std::vector<std::size_t> idx(breaks.size(), 0);
  for (std::size_t c = 0; c < n; ++c) {
    double v = 1.0;
    for (std::size_t a = 0; a < breaks.size(); ++a) v *= breaks[a][idx[a] + 1] - breaks[a][idx[a]];
    w[c] = v;
    for (std::size_t a = breaks.size(); a-- > 0;) {
      if (++idx[a] < breaks[a].size() - 1) break;
      idx[a] = 0;
    }
  }
  return w;
}

// Union of two sorted breakpoint lists sharing both endpoints, with the parent
// interval of every merged interval in each input.
struct MergedAxis {
  Vec points;
  std::vector<std::size_t> parent_a, parent_b;
};

MergedAxis merge_axis(const Vec& a, const Vec& b) {
  MergedAxis m;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m.points));
  m.points.erase(std::unique(m.points.begin(), m.points.end()), m.points.end());
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k + 1 < m.points.size(); ++k) {
    const double mid_lo = m.points[k];
    while (ia + 2 < a.size() && a[ia + 1] <= mid_lo) ++ia;
    while (ib + 2 < b.size() && b[ib + 1] <= mid_lo) ++ib;
    m.parent_a.push_back(ia);
    m.parent_b.push_back(ib);
  }
  return m;
}

bool same_weights(const MeasureSpace& a, const MeasureSpace& b) {
  for (std::size_t c = 0; c < a.cell_count(); ++c)
    if (std::abs(a.weight(c) - b.weight(c)) > 1e-12 * std::max(a.weight(c), b.weight(c))) return false;
  return true;
}

}  // namespace

MeasureSpace::MeasureSpace(std::vector<Vec> breaks, Vec weights, bool lebesgue)
    : breaks_(std::move(breaks)), weights_(std::move(weights)), lebesgue_(lebesgue) {
  CompensatedSum s;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("cell weights must be finite and positive");
    s.add(w);
  }
  total_ = s.value();
}

MeasureSpace MeasureSpace::lebesgue(std::vector<Vec> breakpoints) {
  check_breakpoints(breakpoints);
  Vec w = lebesgue_weights(breakpoints);
  return MeasureSpace(std::move(breakpoints), std::move(w), true);
}

MeasureSpace MeasureSpace::uniform(const Vec& lo, const Vec& hi, const std::vector<std::size_t>& cells) {
  if (lo.size() != hi.size() || lo.size() != cells.size())
    throw std::invalid_argument("uniform grid: inconsistent axis counts");
  std::vector<Vec> breaks;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    if (cells[a] == 0) throw std::invalid_argument("uniform grid: need at least one cell per axis");
    Vec b(cells[a] + 1);
    for (std::size_t i = 0; i <= cells[a]; ++i)
      b[i] = i == cells[a] ? hi[a] : lo[a] + (hi[a] - lo[a]) * static_cast<double>(i) / static_cast<double>(cells[a]);
    breaks.push_back(std::move(b));
  }
  return lebesgue(std::move(breaks));
}

MeasureSpace MeasureSpace::interval(double a, double b, std::size_t cells) { return uniform({a}, {b}, {cells}); }

MeasureSpace MeasureSpace::weighted(std::vector<Vec> breakpoints, Vec weights) {
  check_breakpoints(breakpoints);
  if (weights.size() != product_of_cells(breakpoints))
    throw std::invalid_argument("weighted space: one weight per cell required");
  return MeasureSpace(std::move(breakpoints), std::move(weights), false);
}

Vec MeasureSpace::box_lo() const {
  Vec v;
  for (const Vec& b : breaks_) v.push_back(b.front());
  return v;
}

Vec MeasureSpace::box_hi() const {
  Vec v;
  for (const Vec& b : breaks_) v.push_back(b.back());
  return v;
}

double MeasureSpace::box_volume() const {
  double v = 1.0;
  for (const Vec& b : breaks_) v *= b.back() - b.front();
  return v;
}

double MeasureSpace::cell_volume(std::size_t cell) const {
  if (lebesgue_) return weights_[cell];
  const auto idx = unravel(cell);
  double v = 1.0;
  for (std::size_t a = 0; a < axes(); ++a) v *= breaks_[a][idx[a] + 1] - breaks_[a][idx[a]];
  return v;
}

void MeasureSpace::cell_bounds(std::size_t cell, Vec& lo, Vec& hi) const {
  const auto idx = unravel(cell);
  lo.resize(axes());
  hi.resize(axes());
  for (std::size_t a = 0; a < axes(); ++a) {
    lo[a] = breaks_[a][idx[a]];
    hi[a] = breaks_[a][idx[a] + 1];
  }
}

Vec MeasureSpace::cell_midpoint(std::size_t cell) const {
  Vec lo, hi;
  cell_bounds(cell, lo, hi);
  for (std::size_t a = 0; a < lo.size(); ++a) lo[a] = 0.5 * (lo[a] + hi[a]);
  return lo;
}

std::vector<std::size_t> MeasureSpace::unravel(std::size_t cell) const {
  std::vector<std::size_t> idx(axes());
  for (std::size_t a = axes(); a-- > 0;) {
    const std::size_t n = cells_along(a);
    idx[a] = cell % n;
    cell /= n;
  }
  return idx;
}

std::size_t MeasureSpace::ravel(std::span<const std::size_t> idx) const {
  std::size_t c = 0;
  for (std::size_t a = 0; a < axes(); ++a) c = c * cells_along(a) + idx[a];
  return c;
}

bool MeasureSpace::same_box(const MeasureSpace& other) const {
  if (axes() != other.axes()) return false;
  for (std::size_t a = 0; a < axes(); ++a)
    if (breaks_[a].front() != other.breaks_[a].front() || breaks_[a].back() != other.breaks_[a].back()) return false;
  return true;
}

bool MeasureSpace::same_partition(const MeasureSpace& other) const { return breaks_ == other.breaks_; }

SimpleFunction::SimpleFunction(MeasureSpacePtr space, std::size_t d, Vec values)
    : space_(std::move(space)), d_(d), values_(std::move(values)) {
  if (!space_) throw std::invalid_argument("simple function needs a measure space");
  if (d_ == 0) throw std::invalid_argument("codomain dimension must be positive");
  if (values_.size() != space_->cell_count() * d_)
    throw std::invalid_argument("simple function: expected one value vector per cell");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("simple function values must be finite");
}

SimpleFunction SimpleFunction::constant(MeasureSpacePtr space, Vec value) {
  const std::size_t d = value.size();
  Vec values;
  values.reserve(space->cell_count() * d);
  for (std::size_t c = 0; c < space->cell_count(); ++c) values.insert(values.end(), value.begin(), value.end());
  return SimpleFunction(std::move(space), d, std::move(values));
}

SimpleFunction SimpleFunction::from_midpoints(MeasureSpacePtr space, std::size_t d,
                                              const std::function<Vec(std::span<const double>)>& f) {
  Vec values;
  values.reserve(space->cell_count() * d);
  for (std::size_t c = 0; c < space->cell_count(); ++c) {
    const Vec v = f(space->cell_midpoint(c));
    if (v.size() != d) throw std::invalid_argument("from_midpoints: callback returned wrong dimension");
    values.insert(values.end(), v.begin(), v.end());
  }
  return SimpleFunction(std::move(space), d, std::move(values));
}

TestFunctional TestFunctional::constant(double c, Vec direction) {
  TestFunctional g;
  g.kind_ = Kind::kConstant;
  g.constant_ = c;
  g.direction_ = std::move(direction);
  g.bound_ = std::abs(c) * (g.direction_.empty() ? 1.0 : norm2(g.direction_));
  return g;
}

TestFunctional TestFunctional::indicator(Vec lo, Vec hi, Vec direction) {
  if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("indicator: bad sub-box");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw std::invalid_argument("indicator: lo < hi required");
  TestFunctional g;
  g.kind_ = Kind::kIndicator;
  g.lo_ = std::move(lo);
  g.hi_ = std::move(hi);
  g.direction_ = std::move(direction);
  g.bound_ = g.direction_.empty() ? 1.0 : norm2(g.direction_);
  return g;
}

TestFunctional TestFunctional::trig(int frequency, Phase phase, std::size_t axis, Vec direction) {
  if (frequency < 0) throw std::invalid_argument("trig: frequency must be nonnegative");
  TestFunctional g;
  g.kind_ = Kind::kTrig;
  g.frequency_ = frequency;
  g.phase_ = phase;
  g.axis_ = axis;
  g.direction_ = std::move(direction);
  g.bound_ = (frequency == 0 && phase == Phase::kSin) ? 0.0 : (g.direction_.empty() ? 1.0 : norm2(g.direction_));
  return g;
}

TestFunctional TestFunctional::piecewise(SimpleFunction gfun) {
  TestFunctional g;
  g.kind_ = Kind::kPiecewiseConstant;
  double b = 0.0;
  for (std::size_t c = 0; c < gfun.space().cell_count(); ++c) b = std::max(b, norm2(gfun.cell_value(c)));
  g.bound_ = b;
  g.piecewise_ = std::make_shared<const SimpleFunction>(std::move(gfun));
  return g;
}

double TestFunctional::box_integral(std::span<const double> lo, std::span<const double> hi) const {
  double vol = 1.0;
  switch (kind_) {
    case Kind::kConstant:
      for (std::size_t a = 0; a < lo.size(); ++a) vol *= hi[a] - lo[a];
      return constant_ * vol;
    case Kind::kIndicator:
      if (lo_.size() != lo.size()) throw std::invalid_argument("indicator dimension does not match the space");
      for (std::size_t a = 0; a < lo.size(); ++a) {
        const double w = std::min(hi[a], hi_[a]) - std::max(lo[a], lo_[a]);
        if (w <= 0.0) return 0.0;
        vol *= w;
      }
      return vol;
    case Kind::kTrig: {
      if (axis_ >= lo.size()) throw std::invalid_argument("trig axis outside the space");
      for (std::size_t a = 0; a < lo.size(); ++a)
        if (a != axis_) vol *= hi[a] - lo[a];
      const double len = hi[axis_] - lo[axis_];
      if (frequency_ == 0) return phase_ == Phase::kCos ? vol * len : 0.0;
      const double w = 2.0 * std::numbers::pi * frequency_;
      // sin B - sin A and cos A - cos B in product form to avoid cancellation on thin cells.
      const double half = 0.5 * w * len;
      const double mid = 0.5 * w * (lo[axis_] + hi[axis_]);
      const double along = phase_ == Phase::kCos ? 2.0 * std::cos(mid) * std::sin(half) / w
                                                 : 2.0 * std::sin(mid) * std::sin(half) / w;
      return vol * along;
    }
    case Kind::kPiecewiseConstant:
      break;
  }
  throw std::logic_error("box_integral is defined for scalar test functionals only");
}

double TestFunctional::eval(std::span<const double> s) const {
  switch (kind_) {
    case Kind::kConstant:
      return constant_;
    case Kind::kIndicator:
      for (std::size_t a = 0; a < s.size(); ++a)
        if (s[a] < lo_[a] || s[a] > hi_[a]) return 0.0;
      return 1.0;
    case Kind::kTrig: {
      const double arg = 2.0 * std::numbers::pi * frequency_ * s[axis_];
      return phase_ == Phase::kCos ? std::cos(arg) : std::sin(arg);
    }
    case Kind::kPiecewiseConstant:
      break;
  }
  throw std::logic_error("eval is defined for scalar test functionals only");
}

std::string TestFunctional::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kConstant:
      os << "constant(" << constant_ << ")";
      break;
    case Kind::kIndicator:
      os << "indicator([";
      for (std::size_t a = 0; a < lo_.size(); ++a) os << (a ? "," : "") << lo_[a] << ":" << hi_[a];
      os << "])";
      break;
    case Kind::kTrig:
      os << (phase_ == Phase::kCos ? "cos" : "sin") << "(2pi*" << frequency_ << "*s" << axis_ << ")";
      break;
    case Kind::kPiecewiseConstant:
      os << "piecewise(" << piecewise_->space().cell_count() << " cells)";
      break;
  }
  return os.str();
}

void visit_common_refinement(const MeasureSpace& a, const MeasureSpace& b, const RefinementVisitor& visit) {
  if (!a.same_box(b)) throw std::invalid_argument("simple functions live on incompatible boxes");
  Vec lo, hi;
  if (a.same_partition(b)) {
    if ((!a.lebesgue_induced() || !b.lebesgue_induced()) && !same_weights(a, b))
      throw std::invalid_argument("simple functions carry different measures");
    for (std::size_t c = 0; c < a.cell_count(); ++c) {
      a.cell_bounds(c, lo, hi);
      visit(a.weight(c), lo, hi, c, c);
    }
    return;
  }
  if (!a.lebesgue_induced() || !b.lebesgue_induced())
    throw std::invalid_argument("refinement of custom-weighted spaces requires identical partitions");

  const std::size_t n_axes = a.axes();
  std::vector<MergedAxis> merged;
  for (std::size_t ax = 0; ax < n_axes; ++ax) merged.push_back(merge_axis(a.breakpoints()[ax], b.breakpoints()[ax]));
  std::vector<std::size_t> idx(n_axes, 0), pa(n_axes), pb(n_axes);
  lo.resize(n_axes);
  hi.resize(n_axes);
  std::size_t total = 1;
  for (const auto& m : merged) total *= m.points.size() - 1;
  for (std::size_t c = 0; c < total; ++c) {
    double w = 1.0;
    for (std::size_t ax = 0; ax < n_axes; ++ax) {
      lo[ax] = merged[ax].points[idx[ax]];
      hi[ax] = merged[ax].points[idx[ax] + 1];
      w *= hi[ax] - lo[ax];
      pa[ax] = merged[ax].parent_a[idx[ax]];
      pb[ax] = merged[ax].parent_b[idx[ax]];
    }
    visit(w, lo, hi, a.ravel(pa), b.ravel(pb));
    for (std::size_t ax = n_axes; ax-- > 0;) {
      if (++idx[ax] < merged[ax].points.size() - 1) break;
      idx[ax] = 0;
    }
  }
}

MeasureSpacePtr common_refinement(const MeasureSpace& a, const MeasureSpace& b) {
  if (!a.same_box(b)) throw std::invalid_argument("simple functions live on incompatible boxes");
  if (a.same_partition(b)) return std::make_shared<const MeasureSpace>(a);
  if (!a.lebesgue_induced() || !b.lebesgue_induced())
    throw std::invalid_argument("refinement of custom-weighted spaces requires identical partitions");
  std::vector<Vec> breaks;
  for (std::size_t ax = 0; ax < a.axes(); ++ax) breaks.push_back(merge_axis(a.breakpoints()[ax], b.breakpoints()[ax]).points);
  return std::make_shared<const MeasureSpace>(MeasureSpace::lebesgue(std::move(breaks)));
}

SimpleFunction linear_combination(double ca, const SimpleFunction& x, double cb, const SimpleFunction& y) {
  if (x.d() != y.d()) throw std::invalid_argument("codomain dimensions differ");
  const std::size_t d = x.d();
  MeasureSpacePtr space =
      x.space().same_partition(y.space()) ? x.space_ptr() : common_refinement(x.space(), y.space());
  Vec values;
  values.reserve(space->cell_count() * d);
  visit_common_refinement(x.space(), y.space(),
                          [&](double, std::span<const double>, std::span<const double>, std::size_t i, std::size_t j) {
                            const auto u = x.cell_value(i);
                            const auto v = y.cell_value(j);
                            for (std::size_t k = 0; k < d; ++k) values.push_back(ca * u[k] + cb * v[k]);
                          });
  return SimpleFunction(std::move(space), d, std::move(values));
}

double integral_functional(const Integrand& phi, const SimpleFunction& x) {
  if (phi.dimension() != x.d())
    throw std::invalid_argument("integral_functional: integrand dimension " + std::to_string(phi.dimension()) +
                                " does not match codomain dimension " + std::to_string(x.d()));
  CompensatedSum s;
  for (std::size_t c = 0; c < x.space().cell_count(); ++c) {
    const double v = phi.value(x.cell_value(c));
    if (v == kInf) return kInf;
    s.add(x.space().weight(c) * v);
  }
  return s.value();
}

double composition_distance(const Integrand& phi, const SimpleFunction& x, const SimpleFunction& y) {
  if (phi.dimension() != x.d() || x.d() != y.d()) throw std::invalid_argument("composition_distance: dimension mismatch");
  CompensatedSum s;
  bool infinite = false;
  visit_common_refinement(x.space(), y.space(),
                          [&](double w, std::span<const double>, std::span<const double>, std::size_t i, std::size_t j) {
                            const double a = phi.value(x.cell_value(i));
                            const double b = phi.value(y.cell_value(j));
                            if (a == kInf || b == kInf) {
                              infinite = true;
                              return;
                            }
                            s.add(w * std::abs(a - b));
                          });
  return infinite ? kInf : s.value();
}

double l1_norm(const SimpleFunction& x) {
  CompensatedSum s;
  for (std::size_t c = 0; c < x.space().cell_count(); ++c) s.add(x.space().weight(c) * norm2(x.cell_value(c)));
  return s.value();
}

double l1_distance(const SimpleFunction& x, const SimpleFunction& y) {
  if (x.d() != y.d()) throw std::invalid_argument("l1_distance: codomain dimensions differ");
  const std::size_t d = x.d();
  CompensatedSum s;
  visit_common_refinement(x.space(), y.space(),
                          [&](double w, std::span<const double>, std::span<const double>, std::size_t i, std::size_t j) {
                            const auto u = x.cell_value(i);
                            const auto v = y.cell_value(j);
                            double sq = 0.0;
                            for (std::size_t k = 0; k < d; ++k) sq += (u[k] - v[k]) * (u[k] - v[k]);
                            s.add(w * std::sqrt(sq));
                          });
  return s.value();
}

double pair(const SimpleFunction& x, const TestFunctional& g) {
  const std::size_t d = x.d();
  if (g.kind() == TestFunctional::Kind::kPiecewiseConstant) {
    const SimpleFunction& gf = g.piecewise_function();
    if (gf.d() != d) throw std::invalid_argument("pair: test function dimension differs");
    CompensatedSum s;
    visit_common_refinement(x.space(), gf.space(),
                            [&](double w, std::span<const double>, std::span<const double>, std::size_t i,
                                std::size_t j) { s.add(w * dot(x.cell_value(i), gf.cell_value(j))); });
    return s.value();
  }
  const Vec& dir = g.direction();
  if (!dir.empty() && dir.size() != d) throw std::invalid_argument("pair: direction dimension differs");
  const MeasureSpace& sp = x.space();
  CompensatedSum s;
  Vec lo, hi;
  for (std::size_t c = 0; c < sp.cell_count(); ++c) {
    sp.cell_bounds(c, lo, hi);
    double integral = g.box_integral(lo, hi);
    if (integral == 0.0) continue;
    if (!sp.lebesgue_induced()) integral *= sp.weight(c) / sp.cell_volume(c);
    const auto v = x.cell_value(c);
    double proj = 0.0;
    for (std::size_t k = 0; k < d; ++k) proj += v[k] * (dir.empty() ? 1.0 : dir[k]);
    s.add(integral * proj);
  }
  return s.value();
}

double deviation_measure(const SimpleFunction& x, const SimpleFunction& y, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("deviation_measure: eta must be positive");
  if (x.d() != y.d()) throw std::invalid_argument("deviation_measure: codomain dimensions differ");
  const std::size_t d = x.d();
  CompensatedSum s;
  visit_common_refinement(x.space(), y.space(),
                          [&](double w, std::span<const double>, std::span<const double>, std::size_t i, std::size_t j) {
                            const auto u = x.cell_value(i);
                            const auto v = y.cell_value(j);
                            double sq = 0.0;
                            for (std::size_t k = 0; k < d; ++k) sq += (u[k] - v[k]) * (u[k] - v[k]);
                            if (std::sqrt(sq) >= eta) s.add(w);
                          });
  return s.value();
}

double weak_gap(const SimpleFunction& x, const SimpleFunction& y, const std::vector<TestFunctional>& dictionary) {
  if (dictionary.empty()) throw std::invalid_argument("weak_gap: dictionary must not be empty");
  const SimpleFunction diff = linear_combination(1.0, x, -1.0, y);
  double gap = 0.0;
  for (const TestFunctional& g : dictionary) gap = std::max(gap, std::abs(pair(diff, g)) / std::max(1.0, g.bound()));
  return gap;
}

double tail_integral(const SimpleFunction& x, double threshold) {
  CompensatedSum s;
  for (std::size_t c = 0; c < x.space().cell_count(); ++c) {
    const double r = norm2(x.cell_value(c));
    if (r > threshold) s.add(x.space().weight(c) * r);
  }
  return s.value();
}

UniformIntegrabilityProfile uniform_integrability_profile(const std::vector<SimpleFunction>& xs,
                                                          const Vec& thresholds) {
  UniformIntegrabilityProfile p;
  p.thresholds = thresholds;
  p.sup.assign(thresholds.size(), 0.0);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    if (n > 0 && !xs[n].space().same_box(xs[0].space()))
      throw std::invalid_argument("uniform_integrability_profile: members live on different boxes");
    Vec row;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      row.push_back(tail_integral(xs[n], thresholds[k]));
      p.sup[k] = std::max(p.sup[k], row.back());
    }
    p.per_member.push_back(std::move(row));
  }
  return p;
}

}  // namespace cif
