#include "ciflab/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "ciflab/catalog.hpp"
#include "ciflab/simple_function_io.hpp"

namespace cif {

MomentProblem MomentProblem::truncated(std::size_t n) const {
  if (n > constraints.size()) throw std::invalid_argument("truncated: more constraints requested than available");
  MomentProblem p = *this;
  p.constraints.erase(p.constraints.begin() + static_cast<std::ptrdiff_t>(n), p.constraints.end());
  return p;
}

ConstraintMatrix::ConstraintMatrix(const MomentProblem& problem)
    : ConstraintMatrix(problem.constraints, *problem.space, problem.integrand->dimension()) {}

ConstraintMatrix::ConstraintMatrix(const std::vector<MomentConstraint>& constraints, const MeasureSpace& space,
                                   std::size_t d)
    : m_(constraints.size()), cells_(space.cell_count()), d_(d), k_(m_ * cells_ * d_, 0.0) {
  Vec lo, hi;
  for (std::size_t i = 0; i < m_; ++i) {
    const TestFunctional& a = constraints[i].a;
    double* row = k_.data() + i * cells_ * d_;
    if (a.kind() == TestFunctional::Kind::kPiecewiseConstant) {
      const SimpleFunction& g = a.piecewise_function();
      if (g.d() != d_) throw std::invalid_argument("constraint " + std::to_string(i) + ": dimension mismatch");
      visit_common_refinement(space, g.space(),
                              [&](double w, std::span<const double>, std::span<const double>, std::size_t c,
                                  std::size_t j) {
                                const auto gv = g.cell_value(j);
                                for (std::size_t k = 0; k < d_; ++k) row[c * d_ + k] += w * gv[k] / space.weight(c);
                              });
      continue;
    }
    const Vec& dir = a.direction();
    if (!dir.empty() && dir.size() != d_)
      throw std::invalid_argument("constraint " + std::to_string(i) + ": direction dimension mismatch");
    for (std::size_t c = 0; c < cells_; ++c) {
      space.cell_bounds(c, lo, hi);
      const double mean = a.box_integral(lo, hi) / space.cell_volume(c);
      midpoint_gap_ = std::max(midpoint_gap_, std::abs(mean - a.eval(space.cell_midpoint(c))));
      for (std::size_t k = 0; k < d_; ++k) row[c * d_ + k] = mean * (dir.empty() ? 1.0 : dir[k]);
    }
  }
}

namespace {

struct DualState {
  bool finite = false;
  double value = -kInf;
  Vec gradient;
  Vec hessian;  // empty when unavailable
  Vec x;        // cells * d recovered primal values
  std::size_t bad_cell = 0;
};

Vec combination(const ConstraintMatrix& K, const Vec& lambda, std::size_t c) {
  Vec y(K.d(), 0.0);
  for (std::size_t i = 0; i < K.rows(); ++i) {
    const auto k = K.coeff(i, c);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += lambda[i] * k[j];
  }
  return y;
}

// Evaluates the dual; value only when `full` is false.
DualState evaluate(const MomentProblem& p, const ConstraintMatrix& K, const Vec& lambda, bool full, bool hessian) {
  const Integrand& phi = *p.integrand;
  const MeasureSpace& sp = *p.space;
  const std::size_t m = K.rows(), d = K.d(), n = K.cells();
  DualState st;
  CompensatedSum conj;
  std::vector<CompensatedSum> grad(m);
  Vec hess = hessian ? Vec(m * m, 0.0) : Vec{};
  bool have_hess = hessian;
  if (full) st.x.resize(n * d);
  for (std::size_t c = 0; c < n; ++c) {
    const Vec y = combination(K, lambda, c);
    const double mu = sp.weight(c);
    const double v = phi.conj_value(y);
    if (!std::isfinite(v) || !phi.conjugate_domain().interior_contains(y)) {
      st.bad_cell = c;
      return st;
    }
    conj.add(mu * v);
    if (!full) continue;
    const Vec x = phi.conj_grad(y);
    std::copy(x.begin(), x.end(), st.x.begin() + c * d);
    for (std::size_t i = 0; i < m; ++i) grad[i].add(mu * dot(K.coeff(i, c), x));
    if (have_hess) {
      const auto h = phi.conj_hess(y);
      if (!h) {
        have_hess = false;
        continue;
      }
      for (std::size_t i = 0; i < m; ++i) {
        Vec hk(d, 0.0);
        const auto ki = K.coeff(i, c);
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t s = 0; s < d; ++s) hk[s] += ki[r] * (*h)[r * d + s];
        for (std::size_t j = 0; j <= i; ++j) hess[i * m + j] -= mu * dot(hk, K.coeff(j, c));
      }
    }
  }
  st.finite = true;
  double lb = 0.0;
  for (std::size_t i = 0; i < m; ++i) lb += lambda[i] * p.constraints[i].b;
  st.value = lb - conj.value();
  if (!full) return st;
  st.gradient.resize(m);
  for (std::size_t i = 0; i < m; ++i) st.gradient[i] = p.constraints[i].b - grad[i].value();
  if (have_hess) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < i; ++j) hess[j * m + i] = hess[i * m + j];
    st.hessian = std::move(hess);
  }
  return st;
}

double inf_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

void check_rank(const MomentProblem& p, const ConstraintMatrix& K) {
  const std::size_t m = K.rows();
  if (m == 0) return;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t c = 0; c < K.cells(); ++c)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j <= i; ++j) G(i, j) += p.space->weight(c) * dot(K.coeff(i, c), K.coeff(j, c));
  G = G.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff(), lo = es.eigenvalues().minCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi)
    throw InfeasibleError("constraint functionals are linearly dependent on this partition (rank deficient)");
}

// Largest step keeping every cell combination inside a box-shaped dom phi*.
double fraction_to_boundary(const MomentProblem& p, const ConstraintMatrix& K, const Vec& lambda, const Vec& step) {
  const DomainSpec& dom = p.integrand->conjugate_domain();
  if (dom.kind() != DomainSpec::Kind::kOpenBox && dom.kind() != DomainSpec::Kind::kClosedBox) return 1.0;
  double t = 1.0;
  for (std::size_t c = 0; c < K.cells(); ++c) {
    const Vec y = combination(K, lambda, c);
    const Vec dy = combination(K, step, c);
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (dy[k] > 0.0 && std::isfinite(dom.hi()[k])) t = std::min(t, 0.99 * (dom.hi()[k] - y[k]) / dy[k]);
      if (dy[k] < 0.0 && std::isfinite(dom.lo()[k])) t = std::min(t, 0.99 * (dom.lo()[k] - y[k]) / dy[k]);
    }
  }
  return t;
}

Vec feasible_start(const MomentProblem& p, const ConstraintMatrix& K) {
  const std::size_t m = K.rows();
  Vec lambda(m, 0.0);
  if (evaluate(p, K, lambda, false, false).finite) return lambda;
  for (double s : {-1.0, 1.0, -10.0, 10.0, -0.1, 0.1})
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(lambda.begin(), lambda.end(), 0.0);
      lambda[i] = s;
      if (evaluate(p, K, lambda, false, false).finite) return lambda;
    }
  throw InfeasibleError("no dual start keeps every cell inside dom phi*; supply a start");
}

}  // namespace

DualEvaluation dual_objective(const MomentProblem& problem, const Vec& lambda) {
  const ConstraintMatrix K(problem);
  if (lambda.size() != K.rows()) throw std::invalid_argument("dual_objective: lambda has the wrong length");
  const DualState st = evaluate(problem, K, lambda, true, true);
  if (!st.finite)
    throw DomainError("dual_objective: multiplier combination leaves dom phi* in cell " + std::to_string(st.bad_cell));
  return {st.value, st.gradient, st.hessian};
}

PrimalDualSolution solve(const MomentProblem& problem, const SolverOptions& opts) {
  if (!problem.integrand || !problem.space) throw std::invalid_argument("solve: incomplete problem");
  if (!problem.integrand->has_conjugate()) throw std::invalid_argument("solve: integrand has no conjugate");
  const ConstraintMatrix K(problem);
  check_rank(problem, K);
  const std::size_t m = K.rows();

  Vec lambda = opts.start ? *opts.start : feasible_start(problem, K);
  if (lambda.size() != m) throw std::invalid_argument("solve: start has the wrong length");
  DualState st = evaluate(problem, K, lambda, true, opts.mode != SolverOptions::Mode::kGradient);
  if (!st.finite) throw DomainError("solve: start leaves dom phi* in cell " + std::to_string(st.bad_cell));
  bool newton = opts.mode == SolverOptions::Mode::kNewton ||
                (opts.mode == SolverOptions::Mode::kAuto && (!st.hessian.empty() || m == 0));
  if (newton && st.hessian.empty() && m > 0) throw std::invalid_argument("solve: Newton mode needs conjugate Hessians");

  PrimalDualSolution out{lambda, SimpleFunction::constant(problem.space, Vec(K.d(), 0.0)), 0.0, 0.0, {}, 0.0, 0.0, 0, false, {}, 0.0};
  out.mode = newton ? "newton" : "gradient";
  Vec prev_lambda, prev_grad;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (inf_norm(st.gradient) <= opts.gradient_tol) break;
    Vec step(m);
    if (newton && !st.hessian.empty()) {
      Eigen::Map<const Eigen::MatrixXd> H(st.hessian.data(), m, m);
      Eigen::Map<const Eigen::VectorXd> g(st.gradient.data(), m);
      Eigen::MatrixXd A = -H;
      double tau = 0.0;
      Eigen::VectorXd s;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::LLT<Eigen::MatrixXd> llt(A + tau * Eigen::MatrixXd::Identity(m, m));
        if (llt.info() == Eigen::Success) {
          s = llt.solve(g);
          if (s.allFinite() && s.dot(g) > 0.0) break;
        }
        tau = tau == 0.0 ? 1e-12 * std::max(1.0, A.diagonal().cwiseAbs().maxCoeff()) : 10.0 * tau;
      }
      if (s.size() != static_cast<Eigen::Index>(m)) s = g;
      for (std::size_t i = 0; i < m; ++i) step[i] = s[i];
    } else {
      double a = 1.0;
      if (!prev_lambda.empty()) {
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double si = lambda[i] - prev_lambda[i], yi = st.gradient[i] - prev_grad[i];
          ss += si * si;
          sy += si * yi;
        }
        if (sy < 0.0 && std::isfinite(ss / -sy)) a = ss / -sy;
      }
      for (std::size_t i = 0; i < m; ++i) step[i] = a * st.gradient[i];
    }
    const double slope = dot(st.gradient, step);
    double t = fraction_to_boundary(problem, K, lambda, step);
    bool accepted = false;
    Vec trial(m);
    DualState next;
    for (int bt = 0; bt < 80 && t > 1e-20; ++bt, t *= 0.5) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = lambda[i] + t * step[i];
      next = evaluate(problem, K, trial, true, newton);
      if (!next.finite) continue;
      const bool armijo = next.value >= st.value + 1e-4 * t * slope;
      // Near the optimum D is flat to rounding; accept gradient progress instead.
      const bool flat = next.value >= st.value - 1e-14 * std::max(1.0, std::abs(st.value)) &&
                        inf_norm(next.gradient) < inf_norm(st.gradient);
      if (armijo || flat) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    prev_lambda = lambda;
    prev_grad = st.gradient;
    lambda = trial;
    st = std::move(next);
    if (norm2(lambda) > opts.divergence_threshold)
      throw InfeasibleError("dual multipliers diverge (|lambda| > " + std::to_string(opts.divergence_threshold) +
                            "): the moment constraints admit no feasible point in dom phi");
  }

  out.lambda = lambda;
  out.iterations = it;
  out.gradient_norm = inf_norm(st.gradient);
  out.converged = out.gradient_norm <= opts.gradient_tol;
  out.dual_value = st.value;
  out.primal = SimpleFunction(problem.space, K.d(), st.x);
  out.primal_value = integral_functional(*problem.integrand, out.primal);
  out.duality_gap = out.primal_value - out.dual_value;
  out.midpoint_discrepancy = K.midpoint_discrepancy();
  for (std::size_t i = 0; i < m; ++i)
    out.constraint_residuals.push_back(pair(out.primal, problem.constraints[i].a) - problem.constraints[i].b);
  return out;
}

namespace {

// Interior reference point of a 1-D component domain.
double interior_centre(const DomainSpec& dom, std::size_t k) {
  if (dom.kind() != DomainSpec::Kind::kOpenBox && dom.kind() != DomainSpec::Kind::kClosedBox) return 0.0;
  const double lo = dom.lo()[k], hi = dom.hi()[k];
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo + 1.0;
  if (std::isfinite(hi)) return hi - 1.0;
  return 0.0;
}

}  // namespace

BruteForceResult brute_force_primal(const MomentProblem& problem, const MeasureSpacePtr& grid) {
  const Integrand& phi = *problem.integrand;
  if (!phi.flags().separable && phi.dimension() != 1)
    throw std::invalid_argument("brute_force_primal: integrand must be separable");
  if (grid->cell_count() > 256) throw std::invalid_argument("brute_force_primal: at most 256 cells");
  const std::size_t d = phi.dimension(), cells = grid->cell_count(), n = cells * d;
  const ConstraintMatrix K(problem.constraints, *grid, d);
  const std::size_t m = K.rows();
  {
    MomentProblem on_grid = problem;
    on_grid.space = grid;
    check_rank(on_grid, K);
  }
  Eigen::MatrixXd C(m, n);
  Eigen::VectorXd b(m);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = problem.constraints[i].b;
    for (std::size_t c = 0; c < cells; ++c)
      for (std::size_t k = 0; k < d; ++k) C(i, c * d + k) = grid->weight(c) * K.coeff(i, c)[k];
  }
  const DomainSpec& dom = phi.domain();
  Eigen::VectorXd x(n), nu = Eigen::VectorXd::Zero(m);
  for (std::size_t c = 0; c < cells; ++c)
    for (std::size_t k = 0; k < d; ++k) x[c * d + k] = interior_centre(dom, k);

  auto gradient = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g(n);
    for (std::size_t c = 0; c < cells; ++c) {
      const Vec gc = phi.grad(std::span<const double>(v.data() + c * d, d));
      for (std::size_t k = 0; k < d; ++k) g[c * d + k] = grid->weight(c) * gc[k];
    }
    return g;
  };
  auto interior = [&](const Eigen::VectorXd& v) {
    for (std::size_t c = 0; c < cells; ++c)
      if (!dom.interior_contains(std::span<const double>(v.data() + c * d, d))) return false;
    return true;
  };
  auto residual = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& mult, Eigen::VectorXd& rd, Eigen::VectorXd& rp) {
    rd = gradient(v) + C.transpose() * mult;
    rp = C * v - b;
    return std::sqrt(rd.squaredNorm() + rp.squaredNorm());
  };

  Eigen::VectorXd rd, rp;
  double rnorm = residual(x, nu, rd, rp);
  int it = 0;
  for (; it < 500; ++it) {
    if (rd.cwiseAbs().maxCoeff() <= 1e-12 && (m == 0 || rp.cwiseAbs().maxCoeff() <= 1e-13)) break;
    // Diagonal Hessian by central differences of the gradient.
    Eigen::VectorXd hdiag(n), xp = x, xm = x;
    Eigen::VectorXd step(n);
    for (std::size_t c = 0; c < cells; ++c)
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t j = c * d + k;
        const double clear = dom.coordinate_clearance(std::span<const double>(x.data() + c * d, d), k);
        step[j] = std::min(1e-6 * std::max(std::abs(x[j]), 1e-3), 0.5 * clear);
        xp[j] += step[j];
        xm[j] -= step[j];
      }
    const Eigen::VectorXd gp = gradient(xp), gm = gradient(xm);
    for (std::size_t j = 0; j < n; ++j) hdiag[j] = std::max((gp[j] - gm[j]) / (2.0 * step[j]), 1e-300);
    const Eigen::VectorXd g = gradient(x);
    const Eigen::VectorXd hinv = hdiag.cwiseInverse();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    if (m > 0) {
      const Eigen::MatrixXd S = C * hinv.asDiagonal() * C.transpose();
      w = S.ldlt().solve(rp - C * hinv.cwiseProduct(g));
    }
    const Eigen::VectorXd dx = -hinv.cwiseProduct(g + C.transpose() * w);
    const Eigen::VectorXd dnu = w - nu;
    // Largest step keeping every coordinate inside dom phi.
    double t = 1.0;
    if (dom.kind() == DomainSpec::Kind::kOpenBox || dom.kind() == DomainSpec::Kind::kClosedBox)
      for (std::size_t c = 0; c < cells; ++c)
        for (std::size_t k = 0; k < d; ++k) {
          const double v = x[c * d + k], dv = dx[c * d + k];
          if (dv > 0.0 && std::isfinite(dom.hi()[k])) t = std::min(t, 0.99 * (dom.hi()[k] - v) / dv);
          if (dv < 0.0 && std::isfinite(dom.lo()[k])) t = std::min(t, 0.99 * (dom.lo()[k] - v) / dv);
        }
    bool accepted = false;
    for (; t > 1e-14; t *= 0.5) {
      const Eigen::VectorXd xt = x + t * dx;
      if (!interior(xt)) continue;
      Eigen::VectorXd rdt, rpt;
      const Eigen::VectorXd nut = nu + t * dnu;
      const double rt = residual(xt, nut, rdt, rpt);
      if (rt <= (1.0 - 0.01 * t) * rnorm || (rt <= rnorm * (1.0 + 1e-12) && t == 1.0)) {
        x = xt;
        nu = nut;
        rd = rdt;
        rp = rpt;
        rnorm = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (m > 0 && rp.cwiseAbs().maxCoeff() > 1e-9)
    throw InfeasibleError("brute_force_primal: no strictly feasible interior point reached (constraint residual " +
                          std::to_string(rp.cwiseAbs().maxCoeff()) + ")");
  BruteForceResult out{0.0, SimpleFunction(grid, d, Vec(x.data(), x.data() + n)), 0.0, 0.0, 0};
  out.value = integral_functional(phi, out.x);
  out.kkt_residual = rd.cwiseAbs().maxCoeff();
  out.feasibility_residual = m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;
  out.iterations = it;
  return out;
}

StabilityReport stability_run(const MomentProblem& base, const std::vector<std::size_t>& schedule,
                              const SolverOptions& opts) {
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (schedule[k] <= schedule[k - 1]) throw std::invalid_argument("stability_run: schedule must be increasing");
  StabilityReport rep;
  rep.label = base.label;
  rep.limit_constraints = base.constraints.size();
  const PrimalDualSolution limit = solve(base, opts);
  if (!limit.converged) throw ConvergenceError("stability_run: limit problem did not converge");
  rep.limit_value = limit.primal_value;
  for (std::size_t n : schedule) {
    const PrimalDualSolution s = solve(base.truncated(n), opts);
    if (!s.converged) throw ConvergenceError("stability_run: P_" + std::to_string(n) + " did not converge");
    rep.rows.push_back({n, s.primal_value, l1_distance(s.primal, limit.primal), s.iterations});
  }
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const double next = k + 1 < rep.rows.size() ? rep.rows[k + 1].value : rep.limit_value;
    if (rep.rows[k].value > next + 1e-9)
      rep.monotonicity_errors.push_back("V(P_" + std::to_string(rep.rows[k].n) + ") = " +
                                        std::to_string(rep.rows[k].value) + " exceeds the next value " +
                                        std::to_string(next));
  }
  return rep;
}

MomentProblem trig_moment_demo(std::size_t cells, int max_frequency) {
  auto space = std::make_shared<const MeasureSpace>(MeasureSpace::interval(0.0, 1.0, cells));
  const double two_pi = 2.0 * std::numbers::pi;
  SimpleFunction raw = SimpleFunction::from_midpoints(space, 1, [&](std::span<const double> s) {
    return Vec{1.0 / (1.6 + std::cos(two_pi * s[0]) + 0.3 * std::sin(2.0 * two_pi * s[0]))};
  });
  const double mass = pair(raw, TestFunctional::constant(1.0));
  Vec v = raw.values();
  for (double& x : v) x /= mass;
  const SimpleFunction target(space, 1, v);
  MomentProblem p;
  p.integrand = catalog_get("boltzmann_shannon", 1);
  p.space = space;
  p.label = "trig_moment_demo";
  p.constraints.push_back({TestFunctional::constant(1.0), 1.0});
  for (int k = 1; k <= max_frequency; ++k)
    for (auto ph : {TestFunctional::Phase::kCos, TestFunctional::Phase::kSin}) {
      auto g = TestFunctional::trig(k, ph);
      const double b = pair(target, g);
      p.constraints.push_back({g, b});
    }
  return p;
}

namespace {

Vec vec_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("problem file: missing field ") + key);
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<Vec>();
}

TestFunctional functional_from_json(const nlohmann::json& c) {
  const std::string kind = c.at("kind").get<std::string>();
  const nlohmann::json params = c.value("params", nlohmann::json::object());
  const Vec dir = params.contains("direction") ? params.at("direction").get<Vec>() : Vec{};
  if (kind == "constant") return TestFunctional::constant(params.value("c", 1.0), dir);
  if (kind == "indicator") return TestFunctional::indicator(vec_field(params, "lo"), vec_field(params, "hi"), dir);
  if (kind == "trig") {
    const std::string phase = params.value("phase", std::string("cos"));
    if (phase != "cos" && phase != "sin") throw std::invalid_argument("trig phase must be cos or sin");
    return TestFunctional::trig(params.at("frequency").get<int>(),
                                phase == "cos" ? TestFunctional::Phase::kCos : TestFunctional::Phase::kSin,
                                params.value("axis", std::size_t{0}), dir);
  }
  if (kind == "piecewise") return TestFunctional::piecewise(simple_function_from_json(params.at("function")));
  throw std::invalid_argument("unknown constraint kind: " + kind);
}

}  // namespace

MomentProblem moment_problem_from_json(const nlohmann::json& j) {
  try {
    MomentProblem p;
    p.label = j.value("label", std::string("problem"));
    const auto& ij = j.at("integrand");
    if (ij.is_string()) {
      p.integrand = catalog_get(ij.get<std::string>(), 1);
    } else {
      p.integrand = catalog_get(ij.at("name").get<std::string>(), ij.value("d", std::size_t{1}), ij.value("p", 2.0));
    }
    const auto& box = j.at("box");
    const Vec lo = vec_field(box, "lo"), hi = vec_field(box, "hi");
    std::vector<std::size_t> cells;
    if (j.at("cells").is_number()) cells.assign(lo.size(), j.at("cells").get<std::size_t>());
    else cells = j.at("cells").get<std::vector<std::size_t>>();
    if (lo.size() != hi.size() || cells.size() != lo.size())
      throw std::invalid_argument("problem file: box and cells disagree on the number of axes");
    p.space = std::make_shared<const MeasureSpace>(MeasureSpace::uniform(lo, hi, cells));
    for (const auto& c : j.value("constraints", nlohmann::json::array()))
      p.constraints.push_back({functional_from_json(c), c.at("b").get<double>()});
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("problem file: ") + e.what());
  }
}

nlohmann::json to_json(const PrimalDualSolution& s) {
  return {
      {"lambda", s.lambda},
      {"V", s.primal_value},
      {"dual_value", s.dual_value},
      {"duality_gap", s.duality_gap},
      {"residuals", s.constraint_residuals},
      {"max_residual", inf_norm(s.constraint_residuals)},
      {"gradient_norm", s.gradient_norm},
      {"iterations", s.iterations},
      {"converged", s.converged},
      {"mode", s.mode},
      {"midpoint_discrepancy", s.midpoint_discrepancy},
  };
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"V", row.value}, {"l1_to_limit", row.l1_to_limit}, {"iterations", row.iterations}});
  return {{"label", r.label},
          {"limit_constraints", r.limit_constraints},
          {"limit_value", r.limit_value},
          {"rows", rows},
          {"monotonicity_errors", r.monotonicity_errors}};
}

}  // namespace cif
