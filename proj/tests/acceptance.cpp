#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ciflab/catalog.hpp"
#include "ciflab/convergence_lab.hpp"
#include "ciflab/maxent.hpp"
#include "ciflab/numeric.hpp"
#include "ciflab/rotundity.hpp"
#include "ciflab/sampling.hpp"
#include "ciflab/watson.hpp"
#include "test_support.hpp"

namespace {

using namespace cif;
using Clock = std::chrono::steady_clock;
using Phase = TestFunctional::Phase;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects sub-check outcomes for one criterion and prints its verdict.
class Criterion {
 public:
  explicit Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const std::string& what) {
    if (!ok) {
      ok_ = false;
      failures_.push_back(what);
    }
    ++count_;
  }

  bool report() const {
    std::printf("%s criterion %d: %s (%d checks)\n", ok_ ? "PASS" : "FAIL", id_, title_.c_str(), count_);
    for (const auto& f : failures_) std::printf("    failed: %s\n", f.c_str());
    std::fflush(stdout);
    return ok_;
  }

 private:
  int id_;
  std::string title_;
  bool ok_ = true;
  int count_ = 0;
  std::vector<std::string> failures_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// Runs a criterion body, turning any escaped exception into a failed check.
bool run_criterion(int id, const std::string& title, const std::function<void(Criterion&)>& body) {
  Criterion c(id, title);
  try {
    body(c);
  } catch (const std::exception& e) {
    c.check(false, std::string("exception: ") + e.what());
  }
  return c.report();
}

void watson_threshold(Criterion& c) {
  const auto t0 = Clock::now();
  const double a = alpha_bar();
  const double elapsed = seconds_since(t0);
  const double reference = 0.340537329550999142833;
  c.check(std::abs(a - reference) <= 1e-9, fmt("alpha_bar = %.18f, error %.3e", a, std::abs(a - reference)));
  c.check(elapsed <= 5.0, fmt("threshold runtime %.3f s > 5 s", elapsed));
  for (double w : {0.0, 0.25, 0.5, 0.75, 0.99}) {
    const double b = watson_bessel(w).value, q = watson_cube(w);
    c.check(std::abs(b - q) <= 1e-6, fmt("w = %.2f: |Bessel - cube| = %.3e", w, std::abs(b - q)));
  }
}

void golden_numbers(Criterion& c) {
  const std::vector<std::size_t> schedule = {1, 2, 3, 10, 100, 1000, 10000, 1000000};
  LabOptions opts;
  opts.etas = {0.01, 0.1, 1.0};

  const auto burg = catalog_get("burg", 1);
  auto t0 = Clock::now();
  const auto ex = run(family("exlbr2"), *burg, schedule, opts);
  double elapsed = seconds_since(t0);
  c.check(elapsed <= 1.0, fmt("exlbr2 runtime %.3f s", elapsed));
  for (const auto& row : ex.rows) {
    const double L = std::log(static_cast<double>(row.n));
    const double expect = -L / (1.0 + L);
    c.check(std::abs(row.value - expect) <= 1e-12, fmt("exlbr2 n = %.0f: I = %.17g vs %.17g", row.n, row.value, expect));
    if (row.n >= 3)
      for (double dev : row.deviation) c.check(dev >= 0.5, fmt("exlbr2 n = %.0f: deviation %.6f < 1/2", row.n, dev));
  }

  const auto bpl = catalog_get("burg_plus_linear", 1);
  t0 = Clock::now();
  const auto inc = run(family("incompat"), *bpl, schedule, opts);
  elapsed = seconds_since(t0);
  c.check(elapsed <= 1.0, fmt("incompat runtime %.3f s", elapsed));
  c.check(std::abs(inc.limit_value - 1.0) <= 1e-12, fmt("incompat limit I(x) = %.17g", inc.limit_value));
  for (const auto& row : inc.rows) {
    const double n = static_cast<double>(row.n);
    const double expect = -std::log(n) / n + 2.0 - 1.0 / n;
    c.check(std::abs(row.value - expect) <= 1e-12, fmt("incompat n = %.0f: I = %.17g vs %.17g", n, row.value, expect));
    if (row.n >= 2)
      for (double dev : row.deviation)
        c.check(std::abs(dev - 1.0 / n) <= 1e-15, fmt("incompat n = %.0f: deviation %.17g vs 1/n", n, dev));
    if (row.n == 10000) {
      const double gap = std::abs(row.value - 2.0);
      c.check(gap <= 1e-3, fmt("incompat n = 1e4: |I - 2| = %.6e > 1e-3", gap));
    }
  }
}

MomentProblem make_problem(const std::string& name, std::size_t cells, std::vector<MomentConstraint> cs,
                           const std::string& label) {
  MomentProblem p;
  p.integrand = catalog_get(name, 1);
  p.space = std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, cells));
  p.constraints = std::move(cs);
  p.label = label;
  return p;
}

MomentProblem load_problem(const std::string& file) {
  std::ifstream f(std::string(CIFLAB_DATA_DIR) + "/" + file);
  if (!f) throw std::runtime_error("cannot read " + file);
  return moment_problem_from_json(nlohmann::json::parse(f));
}

void duality_oracle(Criterion& c) {
  std::vector<MomentProblem> problems;
  problems.push_back(load_problem("bs_mean.json"));
  problems.push_back(load_problem("bs_three_moments.json"));
  problems.push_back(load_problem("fd_half.json"));
  problems.push_back(make_problem("boltzmann_shannon", 64,
                                  {{TestFunctional::constant(1.0), 1.0},
                                   {TestFunctional::trig(1, Phase::kCos), 0.2},
                                   {TestFunctional::trig(1, Phase::kSin), -0.1}},
                                  "bs_cos_sin"));
  problems.push_back(make_problem("fermi_dirac", 48,
                                  {{TestFunctional::constant(1.0), 0.4},
                                   {TestFunctional::trig(1, Phase::kSin), 0.1},
                                   {TestFunctional::indicator({0.0}, {0.25}), 0.05}},
                                  "fd_three"));
  problems.push_back(make_problem("fermi_dirac", 64,
                                  {{TestFunctional::constant(1.0), 0.6}, {TestFunctional::trig(2, Phase::kCos), -0.05}},
                                  "fd_cos2"));
  c.check(problems.size() >= 5, "fewer than five problems");
  for (const auto& p : problems) {
    c.check(p.space->cell_count() <= 64, p.label + ": more than 64 cells");
    const auto t0 = Clock::now();
    const auto s = solve(p);
    const double elapsed = seconds_since(t0);
    const auto bf = brute_force_primal(p, p.space);
    c.check(s.converged, p.label + ": not converged");
    c.check(elapsed <= 1.0, p.label + fmt(": solve %.3f s", elapsed));
    c.check(std::abs(s.primal_value - bf.value) <= 1e-5,
            p.label + fmt(": |V - V_bf| = %.3e", std::abs(s.primal_value - bf.value)));
    c.check(s.duality_gap <= 1e-6, p.label + fmt(": duality gap %.3e", s.duality_gap));
    for (double r : s.constraint_residuals) c.check(std::abs(r) <= 1e-8, p.label + fmt(": residual %.3e", r));
  }
}

void stability(Criterion& c) {
  const auto base = trig_moment_demo();
  const std::vector<std::vector<std::size_t>> schedules = {
      {1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 4, 8}, {1, 3, 5, 7}, {2, 6, 8}};
  for (const auto& sched : schedules) {
    const auto r = stability_run(base, sched);
    c.check(r.monotonicity_errors.empty(), "monotonicity: " + (r.monotonicity_errors.empty() ? std::string()
                                                                                            : r.monotonicity_errors[0]));
    for (std::size_t i = 1; i < r.rows.size(); ++i)
      c.check(r.rows[i].value >= r.rows[i - 1].value - 1e-9,
              fmt("V(P_%.0f) = %.12g drops below V(P_prev) = %.12g", r.rows[i].n, r.rows[i].value, r.rows[i - 1].value));
    c.check(r.rows.back().value <= r.limit_value + 1e-9, "V(P_n) exceeds V(P_inf)");
    if (sched.front() == 1 && sched.back() == 8 && sched.size() == 8) {
      const double ratio = r.rows.front().l1_to_limit / r.rows.back().l1_to_limit;
      c.check(ratio >= 10.0, fmt("||x_1 - x_inf|| / ||x_8 - x_inf|| = %.3f < 10", ratio));
    }
  }
}

struct Entry {
  std::string name;
  std::size_t d;
  double p = 2.0;
};

void conjugate_suite(Criterion& c) {
  const std::vector<Entry> entries = {
      {"boltzmann_shannon", 1}, {"boltzmann_shannon", 3}, {"fermi_dirac", 1},      {"fermi_dirac", 2},
      {"burg", 1},              {"burg", 2},              {"norm_power", 1, 2.0},  {"norm_power", 2, 1.5},
      {"norm_power", 3, 3.0},   {"neg_log_cos", 2},       {"cosh_sum", 2},         {"atanh_entropy", 2},
      {"inverse_gap", 1},       {"inverse_gap", 3},       {"burg_plus_linear", 2}, {"clipped_norm", 2},
      {"log_det", 3},           {"log_det", 6}};
  constexpr double kMargin = 1e-2;
  std::set<std::string> covered;
  const auto t0 = Clock::now();
  for (const auto& e : entries) {
    const auto phi = catalog_get(e.name, e.d, e.p);
    const std::string tag = e.name + " d=" + std::to_string(e.d);
    covered.insert(e.name);
    std::mt19937_64 rng(20240917);
    auto f = [&](std::span<const double> z) { return phi->value(z); };
    for (int k = 0; k < 100; ++k) {
      const Vec z = sample_interior(phi->domain(), rng, kMargin);
      const Vec g = phi->grad(z);
      const Vec fd = testing::central_difference(f, z, phi->domain());
      for (std::size_t i = 0; i < z.size(); ++i)
        c.check(testing::rel_err(fd[i], g[i]) <= 1e-6, tag + fmt(": gradient rel err %.3e", testing::rel_err(fd[i], g[i])));
      if (phi->has_conjugate()) {
        const double gap = phi->value(z) + phi->conj_value(g) - dot(z, g);
        c.check(std::abs(gap) <= 1e-10, tag + fmt(": Fenchel-Young gap %.3e", gap));
      }
    }
    if (!phi->has_conjugate()) continue;
    auto fc = [&](std::span<const double> y) { return phi->conj_value(y); };
    for (int k = 0; k < 100; ++k) {
      const Vec y = sample_interior(phi->conjugate_domain(), rng, kMargin);
      const Vec g = phi->conj_grad(y);
      const Vec fd = testing::central_difference(fc, y, phi->conjugate_domain());
      for (std::size_t i = 0; i < y.size(); ++i)
        c.check(testing::rel_err(fd[i], g[i]) <= 1e-6,
                tag + fmt(": conjugate gradient rel err %.3e", testing::rel_err(fd[i], g[i])));
    }
    const std::size_t d = phi->dimension();
    if (d > 3) continue;
    const std::size_t grid = d == 1 ? 2001 : d == 2 ? 201 : 41;
    const DomainSpec& dom = phi->domain();
    for (int k = 0; k < 20; ++k) {
      const Vec y = sample_interior(phi->conjugate_domain(), rng, kMargin);
      const Vec x = phi->conj_grad(y);
      Vec lo(d), hi(d);
      for (std::size_t i = 0; i < d; ++i) {
        lo[i] = x[i] - 0.5;
        hi[i] = x[i] + 0.5;
        if (dom.kind() == DomainSpec::Kind::kOpenBox || dom.kind() == DomainSpec::Kind::kClosedBox) {
          lo[i] = std::max(lo[i], dom.lo()[i]);
          hi[i] = std::min(hi[i], dom.hi()[i]);
        }
      }
      const auto est = numeric_conjugate(*phi, y, DomainSpec::closed_box(lo, hi), grid, 8);
      const double err = std::abs(est.value - phi->conj_value(y));
      c.check(!est.unbounded && err <= 1e-3, tag + fmt(": numeric conjugate error %.3e", err));
    }
  }
  for (const auto& name : catalog_names()) c.check(covered.count(name) == 1, "catalog entry not covered: " + name);
  const double elapsed = seconds_since(t0);
  c.check(elapsed <= 30.0, fmt("suite runtime %.2f s > 30 s", elapsed));
}

void preservation(Criterion& c) {
  const auto clipped = catalog_get("clipped_norm", 1);
  for (const std::string name : {"spike_preservation", "incompat", "constant"}) {
    const auto fam = family(name);
    const auto one = preservation_check_I(*clipped, fam, fam.default_schedule);
    c.check(one.passed(), "I on " + name + ": " + one.status + " (" + one.reason + ")");
    const auto two = preservation_check_II(*clipped, fam, fam.default_schedule);
    c.check(two.passed(), "II on " + name + ": " + two.status + " (" + two.reason + ")");
    c.check(!two.rows.empty(), "II on " + name + ": no rows");
    for (const auto& row : two.rows) {
      c.check(row.bound_ok, "II on " + name + fmt(" n = %.0f: bound violated", row.n));
      for (double b : row.bounds)
        c.check(row.value_gap <= b, "II on " + name + fmt(" n = %.0f: gap %.3e above bound %.3e", row.n, row.value_gap, b));
    }
  }
  const auto burg = catalog_get("burg", 1);
  const auto fam = family("spike_preservation");
  const auto r1 = preservation_check_I(*burg, fam, fam.default_schedule);
  const auto r2 = preservation_check_II(*burg, fam, fam.default_schedule);
  c.check(r1.status == "refused" && r1.rows.empty(), "I on burg not refused: " + r1.status);
  c.check(r2.status == "refused" && r2.rows.empty(), "II on burg not refused: " + r2.status);
}

void non_compactness(Criterion& c) {
  const auto burg = catalog_get("burg", 1);
  const auto p = level_set_compactness_probe(*burg, 0.0, family("burg_level_escape"));
  c.check(p.passed(), "level-set probe: " + p.status + " (" + p.notes + ")");
  for (const auto& row : p.witness["rows"]) {
    const double n = row["n"], value = row["I_phi"], l1 = row["l1_norm"];
    const double gap = row["weak_gaps"][0];
    c.check(value <= 0.0, fmt("n = %.0f: I = %.6g > 0", n, value));
    c.check(l1 <= 2.0, fmt("n = %.0f: ||x_n||_1 = %.6g > 2", n, l1));
    c.check(gap >= 1.0 - 1.0 / n - 1e-12, fmt("n = %.0f: weak gap %.6g < 1 - 1/n", n, gap));
  }
  const auto q = probe_integrand("quarter_power_product", 2);
  const auto s = strict_convexity_transfer(*q, std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, 4)),
                                           200);
  c.check(s.failed(), "strict transfer on -(xy)^(1/4): " + s.status);
  c.check(s.witness.contains("x") && s.witness.contains("y") && s.witness["x"] != s.witness["y"],
          "strict transfer witness lacks distinct x, y");
}

}  // namespace

int main() {
  bool all = true;
  all &= run_criterion(1, "Watson threshold and cross-route agreement", watson_threshold);
  all &= run_criterion(2, "counterexample golden numbers", golden_numbers);
  all &= run_criterion(3, "duality oracle equivalence", duality_oracle);
  all &= run_criterion(4, "nested moment stability", stability);
  all &= run_criterion(5, "conjugate and gradient suite", conjugate_suite);
  all &= run_criterion(6, "preservation checks and refusals", preservation);
  all &= run_criterion(7, "non-compactness and strict-convexity witnesses", non_compactness);
  return all ? 0 : 1;
}
