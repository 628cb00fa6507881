#include "ciflab/convergence_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ciflab/numeric.hpp"

namespace cif {
namespace {

constexpr double kAbsoluteThreshold = 1e-3;
constexpr double kRateFactor = 10.0;
constexpr double kFailFloor = 0.1;
constexpr std::size_t kTrendRows = 3;
constexpr std::size_t kRademacherMax = 22;
constexpr std::size_t kPerturbationIndexCap = 14;

const std::vector<std::size_t> kDefaultSchedule = {10, 100, 1000, 10000, 1000000};

MeasureSpacePtr unit_space() { return std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, 1)); }

SimpleFunction constant(double v) { return SimpleFunction::constant(unit_space(), {v}); }

// a on [0, m], b on (m, 1].
SimpleFunction two_level(double a, double m, double b) {
  if (m >= 1.0) return constant(a);
  if (m <= 0.0) return constant(b);
  auto space = std::make_shared<const MeasureSpace>(MeasureSpace::lebesgue({{0.0, m, 1.0}}));
  return SimpleFunction(space, 1, {a, b});
}

// sign(sin(2^k pi s)) scaled and shifted: centre + amplitude r_k.
SimpleFunction rademacher(std::size_t k, double centre, double amplitude) {
  const std::size_t cells = std::size_t{1} << k;
  auto space = std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, cells));
  Vec v(cells);
  for (std::size_t c = 0; c < cells; ++c) v[c] = centre + (c % 2 == 0 ? amplitude : -amplitude);
  return SimpleFunction(space, 1, std::move(v));
}

double log_n(std::size_t n) { return std::log(static_cast<double>(n)); }

std::optional<double> slope_at(const Integrand& phi, double x) {
  try {
    return std::abs(phi.grad(std::span<const double>(&x, 1))[0]);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

using Rate = std::optional<double>;

std::map<std::string, bool> declare(bool measure, bool value, bool l1, bool weak) {
  return {{"converges_in_measure", measure},
          {"value_convergent", value},
          {"l1_convergent", l1},
          {"weakly_convergent_surrogate", weak}};
}

SequenceFamily make_family(const std::string& name) {
  SequenceFamily f{name, {}, {}, constant(1.0), {}, {}, kDefaultSchedule, 0};
  const double e = std::numbers::e;
  if (name == "exlbr2" || name == "exlbr3") {
    const bool two = name == "exlbr2";
    f.description = two ? "n on [0, 1/(1+log n)], 1 elsewhere; limit e" : "n on [0, 1/(1+log n)], 1 elsewhere; limit 1";
    f.generator = [](std::size_t n) { return two_level(static_cast<double>(n), 1.0 / (1.0 + log_n(n)), 1.0); };
    f.limit = constant(two ? e : 1.0);
    f.declared = two ? declare(false, true, false, false) : declare(true, false, false, false);
    f.rate = [two](const std::string& m, std::size_t n, const Integrand& phi) -> Rate {
      if (two && m == kValue && phi.name() == "burg") return 1.0 / (1.0 + log_n(n));
      if (!two && m == kMeasure) return 1.0 / (1.0 + log_n(n));
      return std::nullopt;
    };
  } else if (name == "incompat" || name == "burg_level_escape") {
    const bool incompat = name == "incompat";
    f.description = "n on [0, 1/n], 1 elsewhere; limit 1";
    f.generator = [](std::size_t n) { return two_level(static_cast<double>(n), 1.0 / static_cast<double>(n), 1.0); };
    f.declared = incompat ? declare(true, false, false, false) : declare(true, true, false, false);
    f.rate = [](const std::string& m, std::size_t n, const Integrand& phi) -> Rate {
      const double dn = static_cast<double>(n);
      if (m == kMeasure) return 1.0 / dn;
      if ((m == kValue || m == kComposition) && phi.name() == "burg") return (1.0 + log_n(n)) / dn;
      return std::nullopt;
    };
  } else if (name == "rademacher") {
    f.description = "r_n(s) = sign sin(2^n pi s); limit 0";
    f.generator = [](std::size_t n) { return rademacher(n, 0.0, 1.0); };
    f.limit = constant(0.0);
    f.declared = declare(false, false, false, true);
    f.rate = [](const std::string&, std::size_t, const Integrand&) -> Rate { return std::nullopt; };
    f.default_schedule = {2, 4, 8, 12, 16};
    f.max_n = kRademacherMax;
  } else if (name == "rademacher_perturbation") {
    return rademacher_perturbation(1.0, 1.0);
  } else if (name == "spike_preservation") {
    f.description = "5 on [0, 1/n], 0.5 elsewhere; limit 0.5";
    f.generator = [](std::size_t n) { return two_level(5.0, 1.0 / static_cast<double>(n), 0.5); };
    f.limit = constant(0.5);
    f.declared = declare(true, true, true, true);
    f.rate = [](const std::string& m, std::size_t n, const Integrand& phi) -> Rate {
      const double dn = static_cast<double>(n);
      if (m == kMeasure) return 1.0 / dn;
      if (m == kL1 || m == kWeak) return 4.5 / dn;
      if (m == kValue || m == kComposition) {
        const double hi = 5.0, lo = 0.5;
        const double jump = std::abs(phi.value(std::span<const double>(&hi, 1)) - phi.value(std::span<const double>(&lo, 1)));
        if (std::isfinite(jump)) return jump / dn;
      }
      return std::nullopt;
    };
  } else if (name == "constant") {
    f.description = "x_n = 2 for every n; limit 2";
    f.generator = [](std::size_t) { return constant(2.0); };
    f.limit = constant(2.0);
    f.declared = declare(true, true, true, true);
    f.rate = [](const std::string&, std::size_t, const Integrand&) -> Rate { return std::nullopt; };
  } else if (name == "scaled_e") {
    f.description = "e (1 + 1/n); limit e";
    f.generator = [e](std::size_t n) { return constant(e * (1.0 + 1.0 / static_cast<double>(n))); };
    f.limit = constant(e);
    f.declared = declare(true, true, true, true);
    f.rate = [e](const std::string& m, std::size_t n, const Integrand& phi) -> Rate {
      const double dn = static_cast<double>(n);
      if (m == kL1 || m == kWeak) return e / dn;
      if (m == kValue || m == kComposition) {
        const auto s = slope_at(phi, e);
        if (s) return e * (*s + 1.0) / dn;
      }
      return std::nullopt;
    };
  } else {
    throw std::invalid_argument("unknown family: " + name);
  }
  return f;
}

}  // namespace

SequenceFamily rademacher_perturbation(double centre, double amplitude) {
  SequenceFamily f{"rademacher_perturbation", {}, {}, constant(centre), {}, {}, kDefaultSchedule, 0};
  std::ostringstream d;
  d << centre << " + " << amplitude << " r_k / n with k = min(n, " << kPerturbationIndexCap << "); limit " << centre;
  f.description = d.str();
  f.generator = [centre, amplitude](std::size_t n) {
    return rademacher(std::min(n, kPerturbationIndexCap), centre, amplitude / static_cast<double>(n));
  };
  f.declared = declare(true, true, true, true);
  f.rate = [centre, amplitude](const std::string& m, std::size_t n, const Integrand& phi) -> Rate {
    const double dn = static_cast<double>(n);
    if (m == kL1 || m == kWeak) return amplitude / dn;
    if (m == kValue || m == kComposition) {
      const auto s = slope_at(phi, centre);
      if (s) return amplitude * (*s + 1.0) / dn;
    }
    return std::nullopt;
  };
  return f;
}

namespace {

const char* property_of(const std::string& metric) {
  if (metric == kMeasure) return "converges_in_measure";
  if (metric == kValue) return "value_convergent";
  if (metric == kL1) return "l1_convergent";
  if (metric == kWeak) return "weakly_convergent_surrogate";
  return "composition_convergent";
}

std::string number_label(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"exlbr2",     "exlbr3",  "incompat", "burg_level_escape",
                                                 "rademacher", "rademacher_perturbation", "spike_preservation",
                                                 "constant",   "scaled_e"};
  return names;
}

SequenceFamily family(const std::string& name) { return make_family(name); }

std::vector<TestFunctional> default_dictionary() {
  std::vector<TestFunctional> d = {TestFunctional::constant(1.0)};
  for (int k = 1; k <= 4; ++k) d.push_back(TestFunctional::indicator({0.0}, {std::ldexp(1.0, -k)}));
  for (int k = 1; k <= 4; ++k) {
    d.push_back(TestFunctional::trig(k, TestFunctional::Phase::kCos));
    d.push_back(TestFunctional::trig(k, TestFunctional::Phase::kSin));
  }
  return d;
}

double ConvergenceRow::metric(const std::string& key) const {
  if (key == kMeasure) return deviation.empty() ? 0.0 : *std::max_element(deviation.begin(), deviation.end());
  if (key == kValue) return value_gap;
  if (key == kL1) return l1;
  if (key == kWeak) return weak_gap;
  if (key == kComposition) return composition;
  throw std::invalid_argument("unknown metric: " + key);
}

const Verdict& ConvergenceReport::verdict(const std::string& metric) const {
  for (const auto& v : verdicts)
    if (v.metric == metric) return v;
  throw std::invalid_argument("no verdict for metric " + metric);
}

Verdict judge(const std::string& metric, const std::vector<std::size_t>& ns, const Vec& values,
              const std::function<std::optional<double>(std::size_t)>& rate) {
  if (ns.empty() || ns.size() != values.size()) throw std::invalid_argument("judge: need one value per n");
  Verdict v;
  v.metric = metric;
  v.property = property_of(metric);
  v.last = values.back();
  v.rate = rate(ns.back());
  const std::size_t k = std::min(kTrendRows, values.size());
  const std::size_t first = values.size() - k;
  if (k >= 2 && std::all_of(values.begin() + first, values.end(), [](double x) { return x > 0.0; })) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i < values.size(); ++i) {
      const double x = std::log(static_cast<double>(ns[i])), y = std::log(values[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = k * sxx - sx * sx;
    if (den > 0.0) v.trend_slope = (k * sxy - sx * sy) / den;
  }
  const auto r0 = rate(ns.front());
  if (v.last < kAbsoluteThreshold) {
    v.outcome = "converges";
    v.rule = "last value below 1e-3";
  } else if (v.rate && r0 && *v.rate < *r0 && v.last <= kRateFactor * *v.rate) {
    v.outcome = "converges";
    v.rule = "last value within 10x of a decreasing closed-form rate";
  } else if (values.size() >= kTrendRows &&
             std::all_of(values.end() - kTrendRows, values.end(), [](double x) { return x >= kFailFloor; })) {
    v.outcome = "fails";
    v.rule = "at least 0.1 over the last three rows";
  } else {
    v.outcome = "inconclusive";
    v.rule = "neither rule applies on this schedule";
  }
  return v;
}

ConvergenceReport run(const SequenceFamily& fam, const Integrand& phi, const std::vector<std::size_t>& schedule,
                      const LabOptions& opts) {
  if (phi.dimension() != 1) throw std::invalid_argument("run: families are scalar; phi must be one-dimensional");
  if (schedule.empty()) throw std::invalid_argument("run: empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw std::invalid_argument("run: n must be at least 1");
    if (i > 0 && schedule[i] <= schedule[i - 1]) throw std::invalid_argument("run: schedule must be increasing");
    if (fam.max_n > 0 && schedule[i] > fam.max_n)
      throw std::invalid_argument("run: " + fam.name + " supports n <= " + std::to_string(fam.max_n));
  }
  ConvergenceReport r;
  r.family = fam.name;
  r.integrand = phi.name();
  r.etas = opts.etas;
  r.ui_thresholds = opts.ui_thresholds;
  r.limit_value = integral_functional(phi, fam.limit);
  if (!std::isfinite(r.limit_value)) throw DomainError("run: the limit of " + fam.name + " leaves dom " + phi.name());
  r.ui_sup.assign(opts.ui_thresholds.size(), 0.0);
  for (std::size_t n : schedule) {
    const SimpleFunction x = fam.generator(n);
    ConvergenceRow row;
    row.n = n;
    row.value = integral_functional(phi, x);
    if (!std::isfinite(row.value))
      throw DomainError("run: member n = " + std::to_string(n) + " of " + fam.name + " leaves dom " + phi.name());
    row.value_gap = std::abs(row.value - r.limit_value);
    row.l1 = l1_distance(x, fam.limit);
    row.l1_norm = l1_norm(x);
    for (double eta : opts.etas) row.deviation.push_back(deviation_measure(x, fam.limit, eta));
    row.weak_gap = weak_gap(x, fam.limit, opts.dictionary);
    row.composition = composition_distance(phi, x, fam.limit);
    for (std::size_t t = 0; t < opts.ui_thresholds.size(); ++t) {
      row.tails.push_back(tail_integral(x, opts.ui_thresholds[t]));
      r.ui_sup[t] = std::max(r.ui_sup[t], row.tails.back());
    }
    r.rows.push_back(std::move(row));
  }
  for (const char* m : {kMeasure, kValue, kL1, kWeak, kComposition}) {
    Vec values;
    for (const auto& row : r.rows) values.push_back(row.metric(m));
    Verdict v = judge(m, schedule, values, [&](std::size_t n) { return fam.rate(m, n, phi); });
    if (auto it = fam.declared.find(v.property); it != fam.declared.end()) v.declared = it->second;
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

void write_csv(std::ostream& out, const ConvergenceReport& r) {
  out << "n,I_phi,value_gap,l1_distance,l1_norm";
  for (double eta : r.etas) out << ",dev_" << number_label(eta);
  out << ",weak_gap,composition";
  for (double t : r.ui_thresholds) out << ",tail_" << number_label(t);
  out << '\n' << std::setprecision(17);
  for (const auto& row : r.rows) {
    out << row.n << ',' << row.value << ',' << row.value_gap << ',' << row.l1 << ',' << row.l1_norm;
    for (double d : row.deviation) out << ',' << d;
    out << ',' << row.weak_gap << ',' << row.composition;
    for (double t : row.tails) out << ',' << t;
    out << '\n';
  }
}

nlohmann::json to_json(const Verdict& v) {
  return {{"property", v.property},
          {"metric", v.metric},
          {"outcome", v.outcome},
          {"rule", v.rule},
          {"last", finite_or_null(v.last)},
          {"rate", v.rate ? nlohmann::json(*v.rate) : nlohmann::json(nullptr)},
          {"trend_slope", v.trend_slope ? nlohmann::json(*v.trend_slope) : nlohmann::json(nullptr)},
          {"declared", v.declared ? nlohmann::json(*v.declared) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"I_phi", row.value},
                    {"value_gap", row.value_gap},
                    {"l1_distance", row.l1},
                    {"l1_norm", row.l1_norm},
                    {"deviation", row.deviation},
                    {"weak_gap", row.weak_gap},
                    {"composition", row.composition},
                    {"tails", row.tails}});
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  return {{"family", r.family},       {"integrand", r.integrand}, {"limit_value", r.limit_value},
          {"etas", r.etas},           {"ui_thresholds", r.ui_thresholds}, {"rows", rows},
          {"ui_sup", r.ui_sup},       {"verdicts", verdicts}};
}

namespace {

CheckReport start_check(const char* check, const Integrand& phi, const SequenceFamily& fam) {
  CheckReport c;
  c.check = check;
  c.family = fam.name;
  c.integrand = phi.name();
  c.hypotheses = nlohmann::json::object();
  return c;
}

void copy_rows(CheckReport& c, const ConvergenceReport& r) {
  for (const auto& row : r.rows) c.rows.push_back({row.n, row.deviation, row.composition, row.value_gap, {}, true});
  c.verdicts = r.verdicts;
}

}  // namespace

CheckReport preservation_check_I(const Integrand& phi, const SequenceFamily& fam,
                                 const std::vector<std::size_t>& schedule, const LabOptions& opts) {
  CheckReport c = start_check("preservation_I", phi, fam);
  const auto& b = phi.bounds();
  c.hypotheses["value_bound"] = b.value_bound ? nlohmann::json(*b.value_bound) : nlohmann::json(nullptr);
  c.hypotheses["value_bound_global"] = b.value_bound_global;
  if (!b.value_bound || !b.value_bound_global) {
    c.status = "refused";
    c.reason = phi.name() + " has no bound |phi(v)| <= M valid on all of R^d";
    return c;
  }
  const ConvergenceReport r = run(fam, phi, schedule, opts);
  copy_rows(c, r);
  double lim_sup = 0.0;
  for (double v : fam.limit.values()) lim_sup = std::max(lim_sup, std::abs(v));
  c.hypotheses["limit_sup_norm"] = lim_sup;
  if (!r.verdict(kMeasure).converges()) {
    c.status = "not applicable";
    c.reason = "the family does not converge in measure on this schedule";
    return c;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (r.rows[i].composition > r.rows[i - 1].composition + 1e-15) monotone = false;
  if (r.verdict(kComposition).converges() && monotone) {
    c.status = "passed";
    c.reason = "composition distance decreases to below the convergence threshold";
  } else {
    c.status = "failed";
    c.reason = monotone ? "composition distance does not converge" : "composition distance is not decreasing";
  }
  return c;
}

CheckReport preservation_check_II(const Integrand& phi, const SequenceFamily& fam,
                                  const std::vector<std::size_t>& schedule, const LabOptions& opts) {
  CheckReport c = start_check("preservation_II", phi, fam);
  const auto& b = phi.bounds();
  c.hypotheses["value_bound"] = b.value_bound ? nlohmann::json(*b.value_bound) : nlohmann::json(nullptr);
  c.hypotheses["clarke_subgradient_bound"] =
      b.clarke_subgradient_bound ? nlohmann::json(*b.clarke_subgradient_bound) : nlohmann::json(nullptr);
  if (!b.value_bound || !b.clarke_subgradient_bound) {
    c.status = "refused";
    c.reason = phi.name() + " lacks a value bound M on dom phi or a Clarke subgradient bound delta";
    return c;
  }
  const double M = *b.value_bound, delta = *b.clarke_subgradient_bound;
  const double total = fam.limit.space().total_measure();
  const ConvergenceReport r = run(fam, phi, schedule, opts);
  copy_rows(c, r);
  bool all_ok = true;
  for (auto& row : c.rows) {
    double tightest = kInf;
    for (std::size_t k = 0; k < opts.etas.size(); ++k) {
      row.bounds.push_back(2.0 * M * row.deviation[k] + delta * opts.etas[k] * total);
      tightest = std::min(tightest, row.bounds.back());
    }
    row.bound_ok = row.value_gap <= tightest + 1e-12;
    all_ok = all_ok && row.bound_ok;
  }
  if (!r.verdict(kMeasure).converges()) {
    c.status = "not applicable";
    c.reason = "the family does not converge in measure on this schedule";
  } else if (!all_ok) {
    c.status = "failed";
    c.reason = "value gap exceeds 2 M mu(T_n) + delta eps mu(S) on some row";
  } else if (!r.verdict(kValue).converges()) {
    c.status = "failed";
    c.reason = "value gap does not converge";
  } else {
    c.status = "passed";
    c.reason = "bound holds on every row and the value gap converges";
  }
  return c;
}

CheckReport measure_to_value_probe(const Integrand& phi, const SequenceFamily& fam,
                                   const std::vector<std::size_t>& schedule, const LabOptions& opts) {
  CheckReport c = start_check("measure_to_value", phi, fam);
  if (phi.name() != "burg") {
    c.status = "refused";
    c.reason = "the probe's lower bound uses phi = -log x; got " + phi.name();
    return c;
  }
  const auto& lv = fam.limit.values();
  const double lo = *std::min_element(lv.begin(), lv.end());
  const double L = std::max(std::abs(lo), std::abs(*std::max_element(lv.begin(), lv.end())));
  c.hypotheses["limit_min"] = lo;
  c.hypotheses["L"] = L;
  if (!(lo > 0.0)) {
    c.status = "refused";
    c.reason = "the limit is not bounded away from 0";
    return c;
  }
  const ConvergenceReport r = run(fam, phi, schedule, opts);
  copy_rows(c, r);
  bool all_ok = true;
  for (auto& row : c.rows) {
    double strongest = 0.0;
    for (std::size_t k = 0; k < opts.etas.size(); ++k) {
      const double eta = opts.etas[k];
      row.bounds.push_back(eta * row.deviation[k] / (L + eta));
      strongest = std::max(strongest, row.bounds.back());
    }
    row.bound_ok = row.composition >= strongest - 1e-12;
    all_ok = all_ok && row.bound_ok;
  }
  if (!all_ok) {
    c.status = "failed";
    c.reason = "composition distance below eta mu(T_n) / (L + eta) on some row";
  } else if (!r.verdict(kComposition).converges()) {
    c.status = "not applicable";
    c.reason = "the composition distance does not tend to 0, so the premise never holds";
  } else if (r.verdict(kMeasure).converges()) {
    c.status = "passed";
    c.reason = "composition distance and deviation measure both tend to 0";
  } else {
    c.status = "failed";
    c.reason = "composition distance tends to 0 but the deviation measure does not";
  }
  return c;
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"deviation", row.deviation},
                    {"composition", row.composition},
                    {"value_gap", row.value_gap},
                    {"bounds", row.bounds},
                    {"bound_ok", row.bound_ok}});
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  return {{"check", r.check},   {"family", r.family},         {"integrand", r.integrand},
          {"status", r.status}, {"reason", r.reason},         {"hypotheses", r.hypotheses},
          {"rows", rows},       {"verdicts", verdicts}};
}

}  // namespace cif
