#include "ciflab/rotundity.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

#include "ciflab/numeric.hpp"
#include "ciflab/sampling.hpp"

namespace cif {
namespace {

constexpr double kFaceProbability = 0.5;
constexpr double kMargin = 1e-3;
constexpr double kEqualityTol = 1e-12;
constexpr double kIdentityTol = 1e-9;
constexpr double kWitnessFloor = 0.1;
constexpr double kBoundedSlope = 0.05;

SimpleFunction sample_function(const DomainSpec& dom, const MeasureSpacePtr& space, std::mt19937_64& rng,
                               bool faces) {
  Vec v;
  for (std::size_t c = 0; c < space->cell_count(); ++c) {
    const Vec z = faces ? sample_domain(dom, rng, kFaceProbability, kMargin) : sample_interior(dom, rng, kMargin);
    v.insert(v.end(), z.begin(), z.end());
  }
  return SimpleFunction(space, dom.dimension(), std::move(v));
}

nlohmann::json cells_json(const SimpleFunction& x) {
  nlohmann::json a = nlohmann::json::array();
  for (std::size_t c = 0; c < x.space().cell_count(); ++c) {
    const auto v = x.cell_value(c);
    a.push_back(Vec(v.begin(), v.end()));
  }
  return a;
}

MeasureSpacePtr unit_cells(std::size_t n) {
  return std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, n));
}

double interior_centre(const DomainSpec& dom) {
  if (dom.kind() != DomainSpec::Kind::kOpenBox && dom.kind() != DomainSpec::Kind::kClosedBox) return 0.0;
  const double lo = dom.lo()[0], hi = dom.hi()[0];
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo + 1.0;
  if (std::isfinite(hi)) return hi - 1.0;
  return 0.0;
}

ProbeResult inconclusive(const std::string& name, const std::string& notes, bool applicable) {
  ProbeResult p;
  p.name = name;
  p.status = "inconclusive";
  p.applicable = applicable;
  p.notes = notes;
  return p;
}

}  // namespace

ProbeResult strict_convexity_transfer(const Integrand& phi, const MeasureSpacePtr& space, int trials,
                                      std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("strict_convexity_transfer: trials must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, space->cell_count() - 1);
  const std::size_t d = phi.dimension();
  ProbeResult p;
  p.name = "strict_convexity_transfer";
  p.applicable = phi.flags().strictly_convex_on_domain;
  double min_gap = kInf;
  int feasible = 0;
  for (int t = 0; t < trials; ++t) {
    const SimpleFunction x = sample_function(phi.domain(), space, rng, true);
    Vec yv = x.values();
    bool distinct = false;
    for (int attempt = 0; attempt < 20 && !distinct; ++attempt) {
      if (t % 2 == 0) {
        const std::size_t c = pick(rng);
        const Vec z = sample_domain(phi.domain(), rng, kFaceProbability, kMargin);
        std::copy(z.begin(), z.end(), yv.begin() + c * d);
      } else {
        yv = sample_function(phi.domain(), space, rng, true).values();
      }
      distinct = yv != x.values();
    }
    if (!distinct) continue;
    const SimpleFunction y(space, d, yv);
    const SimpleFunction mid = linear_combination(0.5, x, 0.5, y);
    const double ix = integral_functional(phi, x), iy = integral_functional(phi, y);
    const double im = integral_functional(phi, mid);
    if (!std::isfinite(ix) || !std::isfinite(iy) || !std::isfinite(im)) continue;
    ++feasible;
    const double gap = 0.5 * ix + 0.5 * iy - im;
    min_gap = std::min(min_gap, gap);
    if (gap <= kEqualityTol * (std::abs(ix) + std::abs(iy) + 1.0)) {
      p.status = "failed";
      p.witness = {{"trial", t},       {"x", cells_json(x)},   {"y", cells_json(y)}, {"I_x", ix},
                   {"I_y", iy},        {"I_mid", im},          {"gap", gap}};
      p.notes = "midpoint equality: I((x+y)/2) = (I(x)+I(y))/2 for x != y";
      return p;
    }
  }
  if (feasible == 0) throw DomainError("strict_convexity_transfer: no domain-feasible pair found");
  p.status = "passed";
  p.witness = {{"trials", feasible}, {"min_gap", min_gap}};
  p.notes = "strict midpoint inequality on every sampled pair";
  return p;
}

ProbeResult kadec_probe(const Integrand& phi, const SequenceFamily& fam, const std::vector<TestFunctional>& dictionary,
                        const std::vector<std::size_t>& schedule) {
  LabOptions opts;
  opts.dictionary = dictionary;
  ConvergenceReport r;
  try {
    r = run(fam, phi, schedule, opts);
  } catch (const DomainError& e) {
    return inconclusive("kadec_probe", e.what(), true);
  }
  const Verdict& weak = r.verdict(kWeak);
  const Verdict& value = r.verdict(kValue);
  const Verdict& l1 = r.verdict(kL1);
  ProbeResult p;
  p.name = "kadec_probe";
  p.applicable = phi.flags().strictly_convex_on_domain;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"weak_gap", row.weak_gap}, {"value_gap", row.value_gap}, {"l1", row.l1}});
  p.witness = {{"family", fam.name}, {"rows", rows}, {"weak", to_json(weak)}, {"value", to_json(value)},
               {"l1", to_json(l1)}};
  if (!weak.converges() || !value.converges()) {
    p.status = "inconclusive";
    p.notes = "premise not met: weak gap " + weak.outcome + ", value gap " + value.outcome;
  } else if (l1.converges()) {
    p.status = "passed";
    p.notes = "weak and value convergence came with l1 convergence";
  } else {
    p.status = "failed";
    p.notes = "weak and value convergence without l1 convergence";
  }
  return p;
}

ProbeResult level_set_compactness_probe(const Integrand& phi, double level, const SequenceFamily& fam,
                                        const std::vector<std::size_t>& schedule,
                                        const std::vector<SimpleFunction>& candidates) {
  const std::vector<std::size_t>& ns = schedule.empty() ? fam.default_schedule : schedule;
  const ConvergenceReport r = run(fam, phi, ns);
  for (const auto& row : r.rows)
    if (row.value > level + 1e-12)
      throw HypothesisError("level_set_compactness_probe: member n = " + std::to_string(row.n) +
                            " has I = " + std::to_string(row.value) + " above the level " + std::to_string(level));
  std::vector<SimpleFunction> cands = candidates;
  if (cands.empty()) {
    cands.push_back(fam.limit);
    for (double c : {1.0, 2.0}) cands.push_back(SimpleFunction::constant(unit_cells(1), {c}));
  }
  const auto dict = default_dictionary();
  ProbeResult p;
  p.name = "level_set_compactness_probe";
  double sup_l1 = 0.0;
  for (const auto& row : r.rows) sup_l1 = std::max(sup_l1, row.l1_norm);
  std::vector<std::size_t> tail_n;
  Vec tail_l1;
  for (std::size_t i = r.rows.size() >= 3 ? r.rows.size() - 3 : 0; i < r.rows.size(); ++i) {
    tail_n.push_back(r.rows[i].n);
    tail_l1.push_back(r.rows[i].l1_norm);
  }
  const Verdict growth = judge(kL1, tail_n, tail_l1, [](std::size_t) { return std::nullopt; });
  const bool bounded = !growth.trend_slope || *growth.trend_slope <= kBoundedSlope;
  nlohmann::json rows = nlohmann::json::array();
  double min_gap = kInf;
  for (const auto& row : r.rows) {
    const SimpleFunction x = fam.generator(row.n);
    Vec gaps;
    for (const auto& c : cands) gaps.push_back(weak_gap(x, c, dict));
    const double g = *std::min_element(gaps.begin(), gaps.end());
    min_gap = std::min(min_gap, g);
    rows.push_back({{"n", row.n}, {"I_phi", row.value}, {"l1_norm", row.l1_norm}, {"weak_gaps", gaps}});
  }
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& c : cands) cj.push_back(cells_json(c));
  p.witness = {{"family", fam.name},       {"level", level},         {"candidates", cj},
               {"rows", rows},             {"sup_l1_norm", sup_l1},  {"l1_growth_slope", growth.trend_slope ? nlohmann::json(*growth.trend_slope) : nlohmann::json(nullptr)},
               {"min_weak_gap", min_gap},  {"ui_thresholds", r.ui_thresholds}, {"ui_sup", r.ui_sup}};
  if (bounded && min_gap >= kWitnessFloor) {
    p.status = "passed";
    p.notes = "non-compactness witnessed: bounded members of the level set stay weakly away from every candidate";
  } else {
    p.status = "inconclusive";
    p.notes = bounded ? "no witness found (one-sided probe)" : "no witness found: l1 norms grow";
  }
  return p;
}

FenchelPairing fenchel_pairing(const Integrand& phi, const SimpleFunction& x, const SimpleFunction& g) {
  if (x.d() != phi.dimension() || g.d() != phi.dimension())
    throw std::invalid_argument("fenchel_pairing: dimension mismatch");
  CompensatedSum a, b, c;
  visit_common_refinement(x.space(), g.space(),
                          [&](double w, std::span<const double>, std::span<const double>, std::size_t i,
                              std::size_t j) {
                            const auto xv = x.cell_value(i), gv = g.cell_value(j);
                            a.add(w * phi.value(xv));
                            b.add(w * phi.conj_value(gv));
                            c.add(w * dot(xv, gv));
                          });
  FenchelPairing f{a.value(), b.value(), c.value(), 0.0};
  f.gap = f.primal + f.conjugate - f.pairing;
  return f;
}

ProbeResult conjugate_identity_check(const Integrand& phi, const MeasureSpacePtr& space, int samples,
                                     std::uint64_t seed) {
  if (!phi.has_conjugate()) return inconclusive("conjugate_identity_check", "no closed-form conjugate", false);
  if (samples < 1) throw std::invalid_argument("conjugate_identity_check: samples must be positive");
  std::mt19937_64 rng(seed);
  ProbeResult p;
  p.name = "conjugate_identity_check";
  double worst_equality = 0.0, worst_slack = kInf;
  for (int s = 0; s < samples; ++s) {
    const SimpleFunction x = sample_function(phi.domain(), space, rng, false);
    const SimpleFunction g = sample_function(phi.conjugate_domain(), space, rng, false);
    const FenchelPairing ineq = fenchel_pairing(phi, x, g);
    const double scale = std::max(1.0, std::abs(ineq.pairing));
    worst_slack = std::min(worst_slack, ineq.gap / scale);
    if (ineq.gap < -kEqualityTol * scale) {
      p.status = "failed";
      p.witness = {{"sample", s}, {"x", cells_json(x)}, {"g", cells_json(g)}, {"gap", ineq.gap}};
      p.notes = "Fenchel-Young inequality violated";
      return p;
    }
    Vec gv;
    for (std::size_t c = 0; c < space->cell_count(); ++c) {
      const Vec gc = phi.grad(x.cell_value(c));
      gv.insert(gv.end(), gc.begin(), gc.end());
    }
    const SimpleFunction gstar(space, phi.dimension(), std::move(gv));
    const FenchelPairing eq = fenchel_pairing(phi, x, gstar);
    const double rel = std::abs(eq.gap) / std::max(1.0, std::abs(eq.pairing));
    worst_equality = std::max(worst_equality, rel);
    if (rel > kIdentityTol) {
      p.status = "failed";
      p.witness = {{"sample", s}, {"x", cells_json(x)}, {"g", cells_json(gstar)}, {"gap", eq.gap}};
      p.notes = "Fenchel-Young equality fails at g = grad phi(x)";
      return p;
    }
  }
  p.status = "passed";
  p.witness = {{"samples", samples}, {"worst_equality_residual", worst_equality}, {"min_relative_slack", worst_slack}};
  p.notes = "I_phi(x) + I_phi*(g) >= <x, g>, with equality at g = grad phi(x)";
  return p;
}

bool SuiteResult::any_failed() const {
  return std::any_of(probes.begin(), probes.end(), [](const ProbeResult& p) { return p.applicable && p.failed(); });
}

SuiteResult rotundity_suite(const Integrand& phi, std::uint64_t seed) {
  SuiteResult s;
  s.integrand = phi.name();
  s.seed = seed;
  s.classification = classify(phi);
  std::vector<std::future<ProbeResult>> jobs;
  jobs.push_back(std::async(std::launch::async, [&phi, seed] {
    try {
      return strict_convexity_transfer(phi, unit_cells(8), 200, seed);
    } catch (const DomainError& e) {
      return inconclusive("strict_convexity_transfer", e.what(), phi.flags().strictly_convex_on_domain);
    }
  }));
  jobs.push_back(std::async(std::launch::async,
                            [&phi, seed] { return conjugate_identity_check(phi, unit_cells(16), 20, seed); }));
  if (phi.dimension() == 1) {
    jobs.push_back(std::async(std::launch::async, [&phi] {
      const double centre = interior_centre(phi.domain());
      const double clearance = phi.domain().coordinate_clearance(std::span<const double>(&centre, 1), 0);
      const double amplitude = 0.5 * std::min(1.0, clearance);
      return kadec_probe(phi, rademacher_perturbation(centre, amplitude), default_dictionary(),
                         family("rademacher_perturbation").default_schedule);
    }));
    jobs.push_back(std::async(std::launch::async, [&phi] {
      const double one = 1.0;
      const double level = phi.value(std::span<const double>(&one, 1)) + 1.0;
      try {
        ProbeResult p = level_set_compactness_probe(phi, level, family("burg_level_escape"));
        if (p.passed() && phi.flags().conjugate_full_domain) {
          p.status = "failed";
          p.notes += "; contradicts the full-domain conjugate, which forces weakly compact level sets";
        }
        return p;
      } catch (const HypothesisError& e) {
        return inconclusive("level_set_compactness_probe", e.what(), false);
      } catch (const DomainError& e) {
        return inconclusive("level_set_compactness_probe", e.what(), false);
      }
    }));
  }
  for (auto& j : jobs) s.probes.push_back(j.get());
  if (phi.dimension() != 1) {
    s.probes.push_back(inconclusive("kadec_probe", "scalar families only", false));
    s.probes.push_back(inconclusive("level_set_compactness_probe", "scalar families only", false));
  }
  return s;
}

nlohmann::json to_json(const ProbeResult& p) {
  return {{"name", p.name}, {"status", p.status}, {"applicable", p.applicable}, {"witness", p.witness},
          {"notes", p.notes}};
}

nlohmann::json to_json(const SuiteResult& s) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : s.probes) probes.push_back(to_json(p));
  return {{"integrand", s.integrand},
          {"seed", s.seed},
          {"classification",
           {{"strongly_rotund", s.classification.strongly_rotund},
            {"reasons", s.classification.reasons},
            {"warnings", s.classification.warnings}}},
          {"probes", probes},
          {"any_failed", s.any_failed()}};
}

}  // namespace cif
