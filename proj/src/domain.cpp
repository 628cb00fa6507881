#include "ciflab/domain.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace cif {
namespace {

bool positive_definite(std::span<const double> flat, std::size_t side, bool negate) {
  Eigen::MatrixXd m(side, side);
  const Vec dense = smat(flat, side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) m(r, c) = (negate ? -1.0 : 1.0) * dense[r * side + c];
  if (!m.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixL().toDenseMatrix().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    if (!(diag[i] > 0.0)) return false;
  return true;
}

void check_box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.empty())
    throw std::invalid_argument("box endpoints must have equal, nonzero length");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw std::invalid_argument("box requires lo < hi on every coordinate");
}

}  // namespace

std::size_t triangular_side(std::size_t n) {
  for (std::size_t k = 1; k * (k + 1) / 2 <= n; ++k)
    if (k * (k + 1) / 2 == n) return k;
  return 0;
}

Vec svec(std::span<const double> dense, std::size_t side) {
  Vec out;
  out.reserve(side * (side + 1) / 2);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = r; c < side; ++c)
      out.push_back(r == c ? dense[r * side + c] : std::sqrt(2.0) * dense[r * side + c]);
  return out;
}

Vec smat(std::span<const double> flat, std::size_t side) {
  Vec dense(side * side);
  std::size_t k = 0;
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = r; c < side; ++c, ++k) {
      const double v = r == c ? flat[k] : flat[k] / std::sqrt(2.0);
      dense[r * side + c] = v;
      dense[c * side + r] = v;
    }
  return dense;
}

DomainSpec DomainSpec::all_space(std::size_t dim) {
  DomainSpec d;
  d.kind_ = Kind::kAllSpace;
  d.dim_ = dim;
  d.lo_.assign(dim, -kInf);
  d.hi_.assign(dim, kInf);
  return d;
}

DomainSpec DomainSpec::open_box(Vec lo, Vec hi) {
  check_box(lo, hi);
  DomainSpec d;
  d.kind_ = Kind::kOpenBox;
  d.dim_ = lo.size();
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

DomainSpec DomainSpec::closed_box(Vec lo, Vec hi) {
  check_box(lo, hi);
  DomainSpec d;
  d.kind_ = Kind::kClosedBox;
  d.dim_ = lo.size();
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  return d;
}

DomainSpec DomainSpec::open_unit_ball(std::size_t dim) {
  DomainSpec d;
  d.kind_ = Kind::kOpenUnitBall;
  d.dim_ = dim;
  d.lo_.assign(dim, -1.0);
  d.hi_.assign(dim, 1.0);
  return d;
}

DomainSpec DomainSpec::positive_definite_cone(std::size_t side) {
  if (side == 0) throw std::invalid_argument("matrix side must be positive");
  DomainSpec d;
  d.kind_ = Kind::kPositiveDefiniteCone;
  d.side_ = side;
  d.dim_ = side * (side + 1) / 2;
  d.lo_.assign(d.dim_, -kInf);
  d.hi_.assign(d.dim_, kInf);
  return d;
}

DomainSpec DomainSpec::negated() const {
  DomainSpec d = *this;
  switch (kind_) {
    case Kind::kPositiveDefiniteCone:
      d.negated_ = !negated_;
      break;
    case Kind::kOpenBox:
    case Kind::kClosedBox:
      for (std::size_t i = 0; i < dim_; ++i) {
        d.lo_[i] = -hi_[i];
        d.hi_[i] = -lo_[i];
      }
      break;
    default:
      break;
  }
  return d;
}

bool DomainSpec::bounded() const {
  if (kind_ == Kind::kOpenUnitBall) return true;
  if (kind_ == Kind::kAllSpace || kind_ == Kind::kPositiveDefiniteCone) return false;
  for (std::size_t i = 0; i < dim_; ++i)
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) return false;
  return true;
}

bool DomainSpec::contains(std::span<const double> z) const {
  if (z.size() != dim_) return false;
  for (double v : z)
    if (!std::isfinite(v)) return false;
  switch (kind_) {
    case Kind::kAllSpace:
      return true;
    case Kind::kOpenBox:
      return interior_contains(z);
    case Kind::kClosedBox:
      for (std::size_t i = 0; i < dim_; ++i)
        if (z[i] < lo_[i] || z[i] > hi_[i]) return false;
      return true;
    case Kind::kOpenUnitBall:
      return norm2(z) < 1.0;
    case Kind::kPositiveDefiniteCone:
      return positive_definite(z, side_, negated_);
  }
  return false;
}

bool DomainSpec::interior_contains(std::span<const double> z) const {
  if (z.size() != dim_) return false;
  for (double v : z)
    if (!std::isfinite(v)) return false;
  switch (kind_) {
    case Kind::kAllSpace:
      return true;
    case Kind::kOpenBox:
    case Kind::kClosedBox:
      for (std::size_t i = 0; i < dim_; ++i)
        if (!(z[i] > lo_[i] && z[i] < hi_[i])) return false;
      return true;
    case Kind::kOpenUnitBall:
    case Kind::kPositiveDefiniteCone:
      return contains(z);
  }
  return false;
}

double DomainSpec::coordinate_clearance(std::span<const double> z, std::size_t i) const {
  switch (kind_) {
    case Kind::kOpenBox:
    case Kind::kClosedBox:
      return std::min(z[i] - lo_[i], hi_[i] - z[i]);
    case Kind::kOpenUnitBall:
      return 1.0 - norm2(z);
    case Kind::kPositiveDefiniteCone: {
      // Smallest eigenvalue bounds how far any entry may move.
      Eigen::MatrixXd m(side_, side_);
      const Vec dense = smat(z, side_);
      for (std::size_t r = 0; r < side_; ++r)
        for (std::size_t c = 0; c < side_; ++c) m(r, c) = (negated_ ? -1.0 : 1.0) * dense[r * side_ + c];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    }
    case Kind::kAllSpace:
      break;
  }
  return kInf;
}

std::string DomainSpec::kind_name() const {
  switch (kind_) {
    case Kind::kAllSpace:
      return "all_space";
    case Kind::kOpenBox:
      return "open_box";
    case Kind::kClosedBox:
      return "closed_box";
    case Kind::kOpenUnitBall:
      return "open_unit_ball";
    case Kind::kPositiveDefiniteCone:
      return negated_ ? "negative_definite_cone" : "positive_definite_cone";
  }
  return "unknown";
}

}  // namespace cif
