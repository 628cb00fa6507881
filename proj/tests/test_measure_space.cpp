#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ciflab/catalog.hpp"
#include "ciflab/measure_space.hpp"
#include "ciflab/simple_function_io.hpp"

using namespace cif;

namespace {

MeasureSpacePtr unit_interval(std::size_t cells = 1) {
  return std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, cells));
}

// v_hi on [0, a), v_lo on [a, 1].
SimpleFunction step(double a, double v_hi, double v_lo) {
  auto sp = std::make_shared<const MeasureSpace>(MeasureSpace::lebesgue({{0.0, a, 1.0}}));
  return SimpleFunction(sp, 1, {v_hi, v_lo});
}

SimpleFunction incompat(int n) { return n == 1 ? SimpleFunction::constant(unit_interval(), {1.0}) : step(1.0 / n, n, 1.0); }

SimpleFunction exlbr2(int n) {
  const double a = 1.0 / (1.0 + std::log(static_cast<double>(n)));
  return a >= 1.0 ? SimpleFunction::constant(unit_interval(), {static_cast<double>(n)}) : step(a, n, 1.0);
}

SimpleFunction rademacher(int n) {
  const std::size_t cells = std::size_t{1} << n;
  Vec v(cells);
  for (std::size_t c = 0; c < cells; ++c) v[c] = c % 2 == 0 ? 1.0 : -1.0;
  return SimpleFunction(unit_interval(cells), 1, v);
}

// Random simple function on a random 1-D or 2-D partition of the unit box.
SimpleFunction random_simple(std::mt19937_64& rng, std::size_t axes, std::size_t d, double lo = -2.0,
                             double hi = 2.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 6);
  std::vector<Vec> breaks;
  for (std::size_t a = 0; a < axes; ++a) {
    Vec b = {0.0, 1.0};
    const int extra = count(rng);
    for (int k = 0; k < extra; ++k) b.push_back(u(rng));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    breaks.push_back(b);
  }
  auto sp = std::make_shared<const MeasureSpace>(MeasureSpace::lebesgue(breaks));
  Vec v(sp->cell_count() * d);
  for (double& x : v) x = lo + (hi - lo) * u(rng);
  return SimpleFunction(sp, d, v);
}

// Same function on a strictly finer partition.
SimpleFunction refine(const SimpleFunction& x, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> breaks = x.space().breakpoints();
  for (auto& b : breaks) {
    for (int k = 0; k < 3; ++k) b.push_back(u(rng));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  auto fine = std::make_shared<const MeasureSpace>(MeasureSpace::lebesgue(breaks));
  const std::size_t d = x.d();
  Vec v;
  visit_common_refinement(*fine, x.space(),
                          [&](double, std::span<const double>, std::span<const double>, std::size_t, std::size_t j) {
                            const auto c = x.cell_value(j);
                            v.insert(v.end(), c.begin(), c.end());
                          });
  return SimpleFunction(fine, d, v);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

TEST(MeasureSpace, LebesgueWeightsSumToBoxVolume) {
  const auto sp = MeasureSpace::lebesgue({{0.0, 0.1, 0.5, 2.0}, {-1.0, 0.0, 3.0}});
  EXPECT_EQ(sp.cell_count(), 6u);
  EXPECT_NEAR(sp.total_measure(), 2.0 * 4.0, 1e-15);
  EXPECT_TRUE(sp.lebesgue_induced());
  for (std::size_t c = 0; c < sp.cell_count(); ++c) EXPECT_EQ(sp.ravel(sp.unravel(c)), c);
}

TEST(MeasureSpace, RejectsBadInput) {
  EXPECT_THROW(MeasureSpace::lebesgue({{0.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(MeasureSpace::lebesgue({{1.0, 0.0}}), std::invalid_argument);
  EXPECT_THROW(MeasureSpace::weighted({{0.0, 1.0}}, {0.0}), std::invalid_argument);
  EXPECT_THROW(MeasureSpace::weighted({{0.0, 1.0}}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(SimpleFunction(unit_interval(), 1, {std::nan("")}), std::invalid_argument);
  EXPECT_THROW(SimpleFunction(unit_interval(2), 1, {1.0}), std::invalid_argument);
}

TEST(IntegralFunctional, NamedValues) {
  const auto one = SimpleFunction::constant(unit_interval(), {1.0});
  EXPECT_DOUBLE_EQ(integral_functional(*catalog_get("boltzmann_shannon", 1), one), -1.0);
  const auto e = SimpleFunction::constant(unit_interval(), {std::numbers::e});
  EXPECT_DOUBLE_EQ(integral_functional(*catalog_get("burg", 1), e), -1.0);
  const auto two = SimpleFunction::constant(unit_interval(), {2.0});
  EXPECT_EQ(integral_functional(*catalog_get("fermi_dirac", 1), two), kInf);
  EXPECT_THROW(integral_functional(*catalog_get("burg", 2), e), std::invalid_argument);
}

TEST(IntegralFunctional, CustomWeights) {
  auto sp = std::make_shared<const MeasureSpace>(MeasureSpace::weighted({{0.0, 0.5, 1.0}}, {2.0, 3.0}));
  const SimpleFunction x(sp, 1, {1.0, 2.0});
  const auto np = catalog_get("norm_power", 1, 2.0);
  EXPECT_DOUBLE_EQ(integral_functional(*np, x), 2.0 * 0.5 + 3.0 * 2.0);
  EXPECT_DOUBLE_EQ(sp->total_measure(), 5.0);
}

TEST(L1Distance, NamedValues) {
  const auto one = SimpleFunction::constant(unit_interval(), {1.0});
  EXPECT_EQ(l1_distance(one, one), 0.0);
  for (int n = 1; n <= 50; ++n) EXPECT_NEAR(l1_distance(incompat(n), one), (n - 1.0) / n, 1e-15);
  const auto e1 = SimpleFunction::constant(unit_interval(), {1.0, 0.0});
  const auto e2 = SimpleFunction::constant(unit_interval(), {0.0, 1.0});
  EXPECT_NEAR(l1_distance(e1, e2), std::sqrt(2.0), 1e-15);
}

TEST(L1Distance, IncompatibleBoxes) {
  auto other = std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 2.0, 1));
  EXPECT_THROW(l1_distance(SimpleFunction::constant(unit_interval(), {1.0}), SimpleFunction::constant(other, {1.0})),
               std::invalid_argument);
  EXPECT_THROW(l1_distance(SimpleFunction::constant(unit_interval(), {1.0}),
                           SimpleFunction::constant(unit_interval(), {1.0, 0.0})),
               std::invalid_argument);
}

TEST(Pair, NamedValues) {
  const auto one = SimpleFunction::constant(unit_interval(), {1.0});
  EXPECT_NEAR(pair(one, TestFunctional::trig(1, TestFunctional::Phase::kCos)), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(pair(one, TestFunctional::constant(1.0)), 1.0);
  const auto half = step(0.5, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(pair(half, TestFunctional::indicator({0.0}, {0.5})), 1.0);
}

TEST(Pair, TrigMatchesFineMidpointQuadrature) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_simple(rng, 2, 1);
    for (int k : {0, 1, 3}) {
      for (auto ph : {TestFunctional::Phase::kCos, TestFunctional::Phase::kSin}) {
        for (std::size_t axis : {0u, 1u}) {
          const auto g = TestFunctional::trig(k, ph, axis);
          // Oracle: Gauss-Legendre-free fine midpoint sum on each cell (error O(h^2)).
          double oracle = 0.0;
          Vec lo, hi;
          for (std::size_t c = 0; c < x.space().cell_count(); ++c) {
            x.space().cell_bounds(c, lo, hi);
            const int m = 2000;
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
              const double t = lo[axis] + (hi[axis] - lo[axis]) * (i + 0.5) / m;
              s += ph == TestFunctional::Phase::kCos ? std::cos(2 * std::numbers::pi * k * t)
                                                     : std::sin(2 * std::numbers::pi * k * t);
            }
            oracle += x.cell_value(c)[0] * x.space().cell_volume(c) * s / m;
          }
          EXPECT_NEAR(pair(x, g), oracle, 1e-5);
        }
      }
    }
  }
}

TEST(Pair, DirectionAndPiecewise) {
  const auto x = SimpleFunction::constant(unit_interval(2), {1.0, 2.0});
  EXPECT_DOUBLE_EQ(pair(x, TestFunctional::constant(1.0, {0.0, 1.0})), 2.0);
  EXPECT_DOUBLE_EQ(pair(x, TestFunctional::constant(1.0)), 3.0);
  const SimpleFunction g(unit_interval(4), 2, {1, 0, 1, 0, 0, 1, 0, 1});
  EXPECT_DOUBLE_EQ(pair(x, TestFunctional::piecewise(g)), 0.5 * 1.0 + 0.5 * 2.0);
  EXPECT_THROW(pair(x, TestFunctional::constant(1.0, {1.0})), std::invalid_argument);
}

TEST(DeviationMeasure, NamedValues) {
  const auto one = SimpleFunction::constant(unit_interval(), {1.0});
  for (int n = 2; n <= 40; ++n) EXPECT_NEAR(deviation_measure(incompat(n), one, 1.0), 1.0 / n, 1e-15);
  const auto e = SimpleFunction::constant(unit_interval(), {std::numbers::e});
  for (int n = 3; n <= 200; ++n) EXPECT_GE(deviation_measure(exlbr2(n), e, 1.0), 0.5) << n;
  std::mt19937_64 rng(5);
  const auto x = random_simple(rng, 2, 2);
  for (double eta : {1e-9, 0.5, 3.0}) EXPECT_EQ(deviation_measure(x, x, eta), 0.0);
  EXPECT_THROW(deviation_measure(x, x, 0.0), std::invalid_argument);
}

TEST(WeakGap, NamedValues) {
  const auto one = SimpleFunction::constant(unit_interval(), {1.0});
  const std::vector<TestFunctional> dict = {TestFunctional::constant(1.0),
                                            TestFunctional::trig(1, TestFunctional::Phase::kCos)};
  EXPECT_EQ(weak_gap(one, one, dict), 0.0);
  for (int n = 2; n <= 30; ++n) EXPECT_GE(weak_gap(incompat(n), one, dict), 1.0 - 1.0 / n - 1e-15);
  EXPECT_THROW(weak_gap(one, one, {}), std::invalid_argument);
}

TEST(WeakGap, RademacherFamilyVanishesAgainstFixedTrigDictionary) {
  std::vector<TestFunctional> dict;
  for (int k = 1; k <= 4; ++k) {
    dict.push_back(TestFunctional::trig(k, TestFunctional::Phase::kCos));
    dict.push_back(TestFunctional::trig(k, TestFunctional::Phase::kSin));
  }
  dict.push_back(TestFunctional::constant(1.0));
  const auto zero = SimpleFunction::constant(unit_interval(), {0.0});
  // r_1 against sin(2 pi s): 2 * integral_0^{1/2} sin(2 pi s) ds = 2 / pi.
  EXPECT_NEAR(weak_gap(rademacher(1), zero, dict), 2.0 / std::numbers::pi, 1e-15);
  // r_n only carries odd multiples of frequency 2^{n-1}, so every pairing
  // with frequency k < 2^{n-1} vanishes.
  for (int n = 4; n <= 14; ++n) {
    const auto r = rademacher(n);
    EXPECT_LE(weak_gap(r, zero, dict), 1e-14) << n;
    EXPECT_NEAR(l1_distance(r, zero), 1.0, 1e-15);
  }
}

TEST(UniformIntegrability, NamedValues) {
  const auto p0 = uniform_integrability_profile({SimpleFunction::constant(unit_interval(), {1.0})}, {2.0});
  EXPECT_EQ(p0.sup[0], 0.0);

  const int N = 25;
  std::vector<SimpleFunction> xs;
  for (int n = 1; n <= N; ++n) xs.push_back(incompat(n));
  const auto p = uniform_integrability_profile(xs, {N + 1.0, 1.5});
  EXPECT_EQ(p.sup[0], 0.0);
  EXPECT_NEAR(p.sup[1], 1.0, 1e-15);
  EXPECT_EQ(p.per_member[0][1], 0.0);

  std::vector<SimpleFunction> ex;
  const int M = 200;
  for (int n = 1; n <= M; ++n) ex.push_back(exlbr2(n));
  const auto q = uniform_integrability_profile(ex, {10.0, 100.0});
  for (std::size_t k = 0; k < 2; ++k) {
    double oracle = 0.0;
    for (int n = 1; n <= M; ++n)
      if (n > q.thresholds[k]) oracle = std::max(oracle, n / (1.0 + std::log(static_cast<double>(n))));
    EXPECT_NEAR(q.sup[k], oracle, 1e-12 * oracle);
    EXPECT_GT(q.sup[k], 1.0);
  }
}

TEST(Properties, RefinementInvariance) {
  std::mt19937_64 rng(11);
  const auto bs = catalog_get("boltzmann_shannon", 2);
  const auto g = TestFunctional::trig(2, TestFunctional::Phase::kSin, 1, {0.3, -1.0});
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_simple(rng, 2, 2, 0.1, 3.0);
    const auto y = random_simple(rng, 2, 2, 0.1, 3.0);
    const auto xf = refine(x, rng);
    const auto yf = refine(y, rng);
    EXPECT_LE(rel(integral_functional(*bs, xf), integral_functional(*bs, x)), 1e-12);
    EXPECT_LE(rel(l1_distance(xf, yf), l1_distance(x, y)), 1e-12);
    EXPECT_LE(rel(pair(xf, g), pair(x, g)), 1e-12);
    EXPECT_LE(rel(deviation_measure(xf, y, 0.7), deviation_measure(x, y, 0.7)), 1e-12);
    EXPECT_LE(rel(l1_norm(xf), l1_norm(x)), 1e-12);
  }
}

TEST(Properties, TriangleInequality) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t axes = trial % 2 + 1;
    const auto x = random_simple(rng, axes, 3);
    const auto y = random_simple(rng, axes, 3);
    const auto z = random_simple(rng, axes, 3);
    EXPECT_LE(l1_distance(x, z), l1_distance(x, y) + l1_distance(y, z) + 1e-12);
  }
}

TEST(Properties, ChebyshevBound) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_simple(rng, 1 + trial % 2, 2);
    const auto y = random_simple(rng, 1 + trial % 2, 2);
    for (double eta : {0.1, 1.0, 2.5}) EXPECT_LE(deviation_measure(x, y, eta), l1_distance(x, y) / eta + 1e-12);
  }
  // Strong convergence along the spike family forces measure convergence.
  const auto one = SimpleFunction::constant(unit_interval(), {1.0});
  for (int n = 2; n < 60; ++n) {
    const auto sp = std::make_shared<const MeasureSpace>(MeasureSpace::lebesgue({{0.0, 1.0 / (n * n), 1.0}}));
    const SimpleFunction xn(sp, 1, {static_cast<double>(n), 1.0});
    const double l1 = l1_distance(xn, one);
    EXPECT_NEAR(l1, (n - 1.0) / (n * n), 1e-15);
    for (double eta : {0.01, 0.5}) EXPECT_LE(deviation_measure(xn, one, eta), l1 / eta + 1e-15);
  }
}

TEST(Properties, JensenAndStrictness) {
  std::mt19937_64 rng(19);
  for (const char* name : {"boltzmann_shannon", "fermi_dirac", "cosh_sum", "burg"}) {
    const auto phi = catalog_get(name, 1);
    const double lo = std::string(name) == "cosh_sum" ? -2.0 : 0.05;
    const double hi = std::string(name) == "fermi_dirac" ? 0.95 : 2.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_simple(rng, 1, 1, lo, hi);
      const auto y = random_simple(rng, 1, 1, lo, hi);
      const auto m = linear_combination(0.5, x, 0.5, y);
      const double avg = 0.5 * (integral_functional(*phi, x) + integral_functional(*phi, y));
      const double mid = integral_functional(*phi, m);
      EXPECT_LE(mid, avg + 1e-12);
      if (l1_distance(x, y) > 1e-3) {
        EXPECT_LT(mid, avg) << name;
      }
    }
  }
}

TEST(Properties, CompensatedSumIsOrderFixed) {
  const std::size_t cells = 100000;
  auto sp = unit_interval(cells);
  Vec v(cells);
  for (std::size_t c = 0; c < cells; ++c) v[c] = (c % 3 == 0 ? 1e8 : 1e-8) * ((c % 2) ? 1.0 : -1.0);
  const SimpleFunction x(sp, 1, v);
  const auto np = catalog_get("norm_power", 1, 2.0);
  const double a = integral_functional(*np, x);
  const double b = integral_functional(*np, x);
  EXPECT_EQ(a, b);
}

TEST(Io, CsvRoundTrip) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t axes = 1 + trial % 2, d = 1 + trial % 3;
    const auto x = random_simple(rng, axes, d);
    std::stringstream ss;
    write_csv(ss, x);
    const auto back = read_csv(ss, axes, d);
    EXPECT_TRUE(back.space().same_partition(x.space()));
    EXPECT_EQ(back.values(), x.values());
    EXPECT_TRUE(back.space().lebesgue_induced());
  }
}

TEST(Io, JsonRoundTripWeighted) {
  auto sp = std::make_shared<const MeasureSpace>(MeasureSpace::weighted({{0.0, 0.25, 1.0}, {0.0, 1.0}}, {0.7, 1.9}));
  const SimpleFunction x(sp, 2, {1.0, -2.0, 0.125, 3.5});
  const auto back = simple_function_from_json(to_json(x));
  EXPECT_EQ(back.values(), x.values());
  EXPECT_EQ(back.space().weights(), sp->weights());
  EXPECT_FALSE(back.space().lebesgue_induced());
}

TEST(Io, LoaderRejectsInvalidInput) {
  using nlohmann::json;
  EXPECT_THROW(simple_function_from_json(json::array()), std::invalid_argument);
  // gap in coverage
  json gap = json::array({{{"lo", {0.0}}, {"hi", {0.4}}, {"weight", 0.4}, {"value", {1.0}}},
                          {{"lo", {0.5}}, {"hi", {1.0}}, {"weight", 0.5}, {"value", {1.0}}}});
  EXPECT_THROW(simple_function_from_json(gap), std::invalid_argument);
  json neg = json::array({{{"lo", {0.0}}, {"hi", {1.0}}, {"weight", -1.0}, {"value", {1.0}}}});
  EXPECT_THROW(simple_function_from_json(neg), std::invalid_argument);
  std::stringstream bad("lo_1,hi_1,weight,v_1\n0,1,1,abc\n");
  EXPECT_THROW(read_csv(bad, 1, 1), std::invalid_argument);
}

}  // namespace
