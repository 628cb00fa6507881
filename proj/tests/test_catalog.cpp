#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "ciflab/catalog.hpp"
#include "ciflab/sampling.hpp"
#include "test_support.hpp"

using namespace cif;
using cif::testing::central_difference;
using cif::testing::rel_err;

namespace {

constexpr double kMargin = 1e-2;

struct Config {
  std::string name;
  std::size_t d;
  double p = 2.0;
};

std::string config_name(const ::testing::TestParamInfo<Config>& info) {
  std::string s = info.param.name + "_d" + std::to_string(info.param.d);
  if (info.param.name == "norm_power") s += "_p" + std::to_string(static_cast<int>(info.param.p * 10));
  return s;
}

const std::vector<Config> kConfigs = {
    {"boltzmann_shannon", 1}, {"boltzmann_shannon", 3}, {"fermi_dirac", 1},   {"fermi_dirac", 2},
    {"burg", 1},              {"burg", 2},              {"norm_power", 1, 2}, {"norm_power", 2, 1.5},
    {"norm_power", 3, 3},     {"neg_log_cos", 2},       {"cosh_sum", 2},      {"atanh_entropy", 2},
    {"inverse_gap", 1},       {"inverse_gap", 3},       {"burg_plus_linear", 2}, {"clipped_norm", 2},
    {"log_det", 3},           {"log_det", 6},
};

class CatalogProperty : public ::testing::TestWithParam<Config> {
 protected:
  void SetUp() override { phi = catalog_get(GetParam().name, GetParam().d, GetParam().p); }
  IntegrandPtr phi;
  std::mt19937_64 rng{20240917};
};

// A point guaranteed to lie outside dom phi, or empty when dom phi = R^d.
Vec outside_point(const DomainSpec& dom) {
  Vec z(dom.dimension(), 0.0);
  switch (dom.kind()) {
    case DomainSpec::Kind::kAllSpace:
      return {};
    case DomainSpec::Kind::kOpenBox:
    case DomainSpec::Kind::kClosedBox:
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (std::isfinite(dom.lo()[i])) {
          z[i] = dom.lo()[i] - 0.5;
          return z;
        }
        if (std::isfinite(dom.hi()[i])) {
          z[i] = dom.hi()[i] + 0.5;
          return z;
        }
      }
      return {};
    case DomainSpec::Kind::kOpenUnitBall:
      z[0] = 1.5;
      return z;
    case DomainSpec::Kind::kPositiveDefiniteCone: {
      const std::size_t k = dom.side();
      Vec m(k * k, 0.0);
      for (std::size_t i = 0; i < k; ++i) m[i * k + i] = dom.is_negated() ? 1.0 : -1.0;
      return svec(m, k);
    }
  }
  return {};
}

TEST_P(CatalogProperty, ValueFiniteExactlyOnDomain) {
  for (int k = 0; k < 100; ++k) {
    const Vec z = sample_interior(phi->domain(), rng, kMargin);
    ASSERT_TRUE(phi->domain().contains(z));
    EXPECT_TRUE(std::isfinite(phi->value(z)));
  }
  const Vec out = outside_point(phi->domain());
  if (!out.empty()) {
    EXPECT_FALSE(phi->domain().contains(out));
    EXPECT_EQ(phi->value(out), kInf);
  }
}

TEST_P(CatalogProperty, GradientMatchesCentralDifferences) {
  auto f = [&](std::span<const double> z) { return phi->value(z); };
  for (int k = 0; k < 100; ++k) {
    const Vec z = sample_interior(phi->domain(), rng, kMargin);
    const Vec g = phi->grad(z);
    const Vec fd = central_difference(f, z, phi->domain());
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_LE(rel_err(fd[i], g[i]), 1e-6) << "coordinate " << i;
  }
}

TEST_P(CatalogProperty, ConjugateGradientMatchesCentralDifferences) {
  if (!phi->has_conjugate()) GTEST_SKIP() << "no conjugate";
  auto f = [&](std::span<const double> y) { return phi->conj_value(y); };
  for (int k = 0; k < 100; ++k) {
    const Vec y = sample_interior(phi->conjugate_domain(), rng, kMargin);
    const Vec g = phi->conj_grad(y);
    const Vec fd = central_difference(f, y, phi->conjugate_domain());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_LE(rel_err(fd[i], g[i]), 1e-6) << "coordinate " << i;
  }
}

TEST_P(CatalogProperty, ConjugateHessianMatchesGradientDifferences) {
  if (!phi->has_conjugate()) GTEST_SKIP() << "no conjugate";
  const std::size_t d = phi->dimension();
  for (int k = 0; k < 30; ++k) {
    const Vec y = sample_interior(phi->conjugate_domain(), rng, kMargin);
    const auto h = phi->conj_hess(y);
    if (!h) continue;
    for (std::size_t j = 0; j < d; ++j) {
      auto gj = [&](std::span<const double> v) { return phi->conj_grad(v)[j]; };
      const Vec fd = central_difference(gj, y, phi->conjugate_domain());
      for (std::size_t i = 0; i < d; ++i) EXPECT_LE(rel_err(fd[i], (*h)[j * d + i]), 1e-5);
    }
  }
}

TEST_P(CatalogProperty, FenchelYoungEqualityAtGradient) {
  if (!phi->has_conjugate()) GTEST_SKIP() << "no conjugate";
  for (int k = 0; k < 100; ++k) {
    const Vec z = sample_interior(phi->domain(), rng, kMargin);
    const Vec y = phi->grad(z);
    EXPECT_NEAR(phi->value(z) + phi->conj_value(y), dot(z, y), 1e-10);
  }
}

TEST_P(CatalogProperty, FenchelYoungInequality) {
  if (!phi->has_conjugate()) GTEST_SKIP() << "no conjugate";
  for (int k = 0; k < 200; ++k) {
    const Vec z = sample_interior(phi->domain(), rng, kMargin);
    const Vec y = sample_interior(phi->conjugate_domain(), rng, kMargin);
    const double c = phi->conj_value(y);
    ASSERT_TRUE(std::isfinite(c));
    EXPECT_GE(phi->value(z) + c - dot(z, y), -1e-10);
  }
}

TEST_P(CatalogProperty, NumericConjugateAgreesWithClosedForm) {
  if (!phi->has_conjugate()) GTEST_SKIP() << "no conjugate";
  const std::size_t d = phi->dimension();
  if (d > 3) GTEST_SKIP() << "grid oracle limited to d <= 3";
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
    EXPECT_FALSE(est.unbounded);
    EXPECT_NEAR(est.value, phi->conj_value(y), 1e-3);
  }
}

TEST_P(CatalogProperty, StrictConvexityWhereFlagged) {
  if (!phi->flags().strictly_convex_on_domain) GTEST_SKIP() << "not flagged strictly convex";
  for (int k = 0; k < 200; ++k) {
    const Vec a = sample_interior(phi->domain(), rng, kMargin);
    const Vec b = sample_interior(phi->domain(), rng, kMargin);
    if (a == b) continue;
    Vec m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
    const double gap = 0.5 * (phi->value(a) + phi->value(b)) - phi->value(m);
    EXPECT_GT(gap, 0.0);
  }
}

TEST_P(CatalogProperty, MetadataJson) {
  const auto j = integrand_metadata(*phi);
  EXPECT_EQ(j.at("name"), GetParam().name);
  EXPECT_EQ(j.at("dimension"), GetParam().d);
  EXPECT_TRUE(j.at("domain").contains("kind"));
  for (const char* key : {"strictly_convex_on_domain", "conjugate_everywhere_differentiable", "conjugate_full_domain",
                          "domain_open", "separable"})
    EXPECT_TRUE(j.at("flags").contains(key)) << key;
}

TEST_P(CatalogProperty, ConcurrentEvaluationMatchesSerial) {
  std::vector<Vec> pts;
  for (int k = 0; k < 64; ++k) pts.push_back(sample_interior(phi->domain(), rng, kMargin));
  Vec serial;
  for (const auto& z : pts) serial.push_back(phi->value(z));
  std::vector<Vec> results(8, Vec(pts.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t)
    threads.emplace_back([&, t] {
      for (std::size_t k = 0; k < pts.size(); ++k) results[t][k] = phi->value(pts[k]);
    });
  for (auto& th : threads) th.join();
  for (const auto& r : results) EXPECT_EQ(r, serial);
}

INSTANTIATE_TEST_SUITE_P(AllEntries, CatalogProperty, ::testing::ValuesIn(kConfigs), config_name);

TEST(Catalog, NamedValues) {
  const auto bs = catalog_get("boltzmann_shannon", 1);
  EXPECT_DOUBLE_EQ(bs->value(Vec{1.0}), -1.0);
  EXPECT_EQ(bs->value(Vec{0.0}), 0.0);
  EXPECT_DOUBLE_EQ(bs->conj_value(Vec{0.0}), 1.0);
  EXPECT_NEAR(catalog_get("fermi_dirac", 1)->conj_value(Vec{0.0}), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(catalog_get("burg", 1)->conj_value(Vec{-1.0}), -1.0);
}

TEST(Catalog, BoundaryConventions) {
  const auto bs = catalog_get("boltzmann_shannon", 1);
  EXPECT_EQ(bs->value(Vec{-1e-300}), kInf);
  EXPECT_THROW(bs->grad(Vec{0.0}), DomainError);
  const auto fd = catalog_get("fermi_dirac", 1);
  EXPECT_EQ(fd->value(Vec{0.0}), 0.0);
  EXPECT_EQ(fd->value(Vec{1.0}), 0.0);
  EXPECT_EQ(fd->value(Vec{2.0}), kInf);
  const auto burg = catalog_get("burg", 1);
  EXPECT_EQ(burg->value(Vec{0.0}), kInf);
  EXPECT_EQ(burg->conj_value(Vec{0.5}), kInf);
  EXPECT_THROW(burg->conj_grad(Vec{0.0}), DomainError);
  EXPECT_FALSE(std::isnan(catalog_get("boltzmann_shannon", 2)->value(Vec{0.0, 0.0})));
}

TEST(Catalog, LookupErrors) {
  EXPECT_THROW(catalog_get("nope", 1), std::invalid_argument);
  EXPECT_THROW(catalog_get("norm_power", 2, 1.0), std::invalid_argument);
  EXPECT_THROW(catalog_get("norm_power", 2, 0.5), std::invalid_argument);
  EXPECT_THROW(catalog_get("log_det", 2), std::invalid_argument);
  EXPECT_THROW(catalog_get("burg", 0), std::invalid_argument);
  EXPECT_NO_THROW(catalog_get("log_det", 10));
  EXPECT_THROW(catalog_get("burg", 2)->value(Vec{1.0}), std::invalid_argument);
}

TEST(Catalog, SeparableEntriesAreSeparableIntegrands) {
  for (const char* name : {"boltzmann_shannon", "fermi_dirac", "burg", "neg_log_cos", "cosh_sum", "atanh_entropy",
                           "burg_plus_linear"}) {
    for (std::size_t d : {1u, 4u}) {
      const auto phi = catalog_get(name, d);
      EXPECT_NE(dynamic_cast<const SeparableIntegrand*>(phi.get()), nullptr) << name;
      EXPECT_TRUE(phi->flags().separable);
    }
  }
  for (const char* name : {"norm_power", "inverse_gap", "clipped_norm"})
    EXPECT_EQ(dynamic_cast<const SeparableIntegrand*>(catalog_get(name, 2).get()), nullptr) << name;
}

TEST(Catalog, SeparableValueIsExactComponentSum) {
  std::mt19937_64 rng(7);
  for (const char* name : {"boltzmann_shannon", "fermi_dirac", "burg", "cosh_sum", "atanh_entropy"}) {
    const auto phi = catalog_get(name, 5);
    const auto& sep = dynamic_cast<const SeparableIntegrand&>(*phi);
    for (int k = 0; k < 50; ++k) {
      const Vec z = sample_interior(phi->domain(), rng, kMargin);
      const Vec y = sample_interior(phi->conjugate_domain(), rng, kMargin);
      double v = 0.0, c = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        v += sep.components()[i]->value1(z[i]);
        c += sep.components()[i]->conj1(y[i]);
      }
      EXPECT_EQ(phi->value(z), v);
      EXPECT_EQ(phi->conj_value(y), c);
      const Vec g = phi->grad(z);
      for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(g[i], sep.components()[i]->grad1(z[i]));
    }
  }
}

TEST(Catalog, NumericConjugateExamples) {
  const auto bs = catalog_get("boltzmann_shannon", 1);
  const auto est = numeric_conjugate(*bs, Vec{0.0}, DomainSpec::closed_box({1e-6}, {10.0}), 100000);
  EXPECT_NEAR(est.value, 1.0, 1e-4);
  EXPECT_FALSE(est.unbounded);

  const auto np = catalog_get("norm_power", 1, 2.0);
  EXPECT_NEAR(numeric_conjugate(*np, Vec{3.0}, DomainSpec::closed_box({-10.0}, {10.0}), 100000).value, 4.5, 1e-6);

  const auto burg = catalog_get("burg", 1);
  for (const auto& box : {DomainSpec::closed_box({1e-3}, {10.0}), DomainSpec::closed_box({0.0}, {1.0})}) {
    const auto b = numeric_conjugate(*burg, Vec{0.5}, box, 1000);
    EXPECT_TRUE(b.unbounded);
    EXPECT_EQ(b.value, kInf);
  }
}

TEST(Catalog, NumericConjugateEmptyGridIsMinusInfinity) {
  const auto burg = catalog_get("burg", 1);
  const auto est = numeric_conjugate(*burg, Vec{-1.0}, DomainSpec::closed_box({-2.0}, {-1.0}), 10);
  EXPECT_EQ(est.value, -kInf);
  EXPECT_THROW(numeric_conjugate(*burg, Vec{-1.0}, DomainSpec::closed_box({0.0}, {kInf}), 10), std::invalid_argument);
  EXPECT_THROW(numeric_conjugate(*burg, Vec{-1.0}, DomainSpec::closed_box({0.0}, {1.0}), 1), std::invalid_argument);
}

TEST(Classify, SeparableEntropy) {
  const auto c = classify(*catalog_get("boltzmann_shannon", 3));
  EXPECT_TRUE(c.strongly_rotund);
  EXPECT_NE(std::find(c.reasons.begin(), c.reasons.end(), "separable_conjugate_differentiable"), c.reasons.end());
  EXPECT_TRUE(c.warnings.empty());
}

TEST(Classify, BurgIsFlaggedForLevelSets) {
  const auto c = classify(*catalog_get("burg", 1));
  EXPECT_FALSE(c.strongly_rotund);
  EXPECT_NE(std::find(c.warnings.begin(), c.warnings.end(), "weakly compact lower level sets may fail"),
            c.warnings.end());
}

TEST(Classify, InverseGapOpenDomainRule) {
  const auto c = classify(*catalog_get("inverse_gap", 2));
  EXPECT_TRUE(c.strongly_rotund);
  EXPECT_NE(std::find(c.reasons.begin(), c.reasons.end(), "open_domain_conjugate_differentiable"), c.reasons.end());
}

TEST(Classify, WholeCatalog) {
  const std::map<std::string, bool> expected = {
      {"boltzmann_shannon", true}, {"fermi_dirac", true},    {"burg", false},          {"norm_power", true},
      {"neg_log_cos", true},       {"cosh_sum", true},       {"atanh_entropy", true},  {"inverse_gap", true},
      {"burg_plus_linear", false}, {"clipped_norm", false},  {"log_det", false},
  };
  for (const auto& name : catalog_names()) {
    const auto phi = catalog_get(name, name == "log_det" ? 3 : 2);
    EXPECT_EQ(classify(*phi).strongly_rotund, expected.at(name)) << name;
  }
}

TEST(Classify, RuleIsPureFunctionOfFlags) {
  // Each disjunct fires on its own.
  auto rules_for = [](IntegrandFlags f) {
    IntegrandInfo info;
    info.name = "synthetic";
    info.domain = DomainSpec::all_space(1);
    info.conjugate_domain = DomainSpec::all_space(1);
    info.flags = f;
    auto s = std::make_shared<ScalarIntegrand>(info, ScalarFormulas{});
    return classify(*s);
  };
  EXPECT_TRUE(rules_for({false, true, false, true, false}).strongly_rotund);
  EXPECT_TRUE(rules_for({false, true, false, false, true}).strongly_rotund);
  EXPECT_TRUE(rules_for({true, true, true, false, false}).strongly_rotund);
  EXPECT_FALSE(rules_for({true, true, false, false, false}).strongly_rotund);
  EXPECT_FALSE(rules_for({true, false, true, true, true}).strongly_rotund);
}

}  // namespace
