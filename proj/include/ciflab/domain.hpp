#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "ciflab/numeric.hpp"

namespace cif {

/// Describes dom(phi) of an integrand (or the search box of an oracle).
///
/// Boxes carry per-coordinate endpoints that may be infinite. For `kClosedBox`
/// finite endpoints belong to the set; for `kOpenBox` they do not. The
/// positive-definite cone acts on svec-flattened symmetric matrices of side
/// `side`, so `dimension == side * (side + 1) / 2`.
class DomainSpec {
 public:
  enum class Kind { kAllSpace, kOpenBox, kClosedBox, kOpenUnitBall, kPositiveDefiniteCone };

  static DomainSpec all_space(std::size_t dim);
  static DomainSpec open_box(Vec lo, Vec hi);
  static DomainSpec closed_box(Vec lo, Vec hi);
  static DomainSpec open_unit_ball(std::size_t dim);
  static DomainSpec positive_definite_cone(std::size_t side);
  /// Negative-definite cone, represented as the PD cone with `negated()`.
  DomainSpec negated() const;

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  std::size_t side() const { return side_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  bool is_negated() const { return negated_; }
  bool bounded() const;

  bool contains(std::span<const double> z) const;
  bool interior_contains(std::span<const double> z) const;
  /// Distance from z to the boundary along coordinate i (inf when unbounded).
  double coordinate_clearance(std::span<const double> z, std::size_t i) const;

  std::string kind_name() const;

 private:
  Kind kind_ = Kind::kAllSpace;
  std::size_t dim_ = 0;
  std::size_t side_ = 0;
  bool negated_ = false;
  Vec lo_, hi_;
};

/// svec flattening of a symmetric k x k matrix (row-major dense input).
Vec svec(std::span<const double> dense, std::size_t side);
/// Inverse of svec; returns the dense row-major matrix.
Vec smat(std::span<const double> flat, std::size_t side);
/// Returns k when n == k(k+1)/2, otherwise 0.
std::size_t triangular_side(std::size_t n);

}  // namespace cif
