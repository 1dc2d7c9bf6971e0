#pragma once

// Subspaces as points of the Grassmannian G(m, D) and the exact measures
// between them: principal angles, geodesic distance, projection metric,
// projection kernel and the Grassmannian RBF kernel.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gsanss/linalg.hpp"

namespace gsanss {

using SubspaceId = std::uint32_t;

/// Orthonormality tolerance enforced when a Subspace is constructed.
inline constexpr double kSubspaceOrthonormalTol = 1e-8;
/// Two subspaces whose geodesic distance is below this are treated as equal.
inline constexpr double kAngleTol = 1e-7;
inline constexpr double kDefaultBeta = 1.0;

/// span(basis) for a D x m orthonormal basis.
class Subspace {
 public:
  /// Throws kNotOrthonormal if max |B^T B - I| > 1e-8.
  Subspace(SubspaceId id, Matrix basis);

  SubspaceId id() const noexcept { return id_; }
  const Matrix& basis() const noexcept { return basis_; }
  std::size_t dim() const noexcept { return basis_.rows(); }
  std::size_t m() const noexcept { return basis_.cols(); }

 private:
  SubspaceId id_;
  Matrix basis_;
};

/// Ordered collection of subspaces sharing D and m, with ids 1..N.
class SubspaceDB {
 public:
  SubspaceDB() = default;
  /// Throws kDimensionMismatch if members disagree on D or m and
  /// kInvalidParams unless ids run 1..N in order.
  SubspaceDB(std::size_t dim, std::size_t m, std::vector<Subspace> subspaces);

  /// Assigns ids 1..N in the order given; D and m come from the first basis.
  static SubspaceDB from_bases(std::vector<Matrix> bases);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t size() const noexcept { return subspaces_.size(); }
  bool empty() const noexcept { return subspaces_.empty(); }

  const Subspace& at(SubspaceId id) const { return subspaces_.at(id - 1); }
  const std::vector<Subspace>& subspaces() const noexcept { return subspaces_; }
  auto begin() const noexcept { return subspaces_.begin(); }
  auto end() const noexcept { return subspaces_.end(); }

 private:
  std::size_t dim_ = 0;
  std::size_t m_ = 0;
  std::vector<Subspace> subspaces_;
};

struct PrincipalAngles {
  std::vector<double> angles;  // ascending, each in [0, pi/2]
};

PrincipalAngles principal_angles(const Subspace& a, const Subspace& b);
double geodesic_distance(const Subspace& a, const Subspace& b);
/// sqrt(m - k_P), evaluated from the kernel rather than from angles.
double projection_metric(const Subspace& a, const Subspace& b);
/// ||A^T B||_F^2, in [0, m].
double projection_kernel(const Subspace& a, const Subspace& b);
/// exp(beta * k_P); throws kInvalidBeta unless beta > 0.
double grbf_kernel(const Subspace& a, const Subspace& b, double beta = kDefaultBeta);

enum class MeasureKind { kGeodesic, kProjectionKernel, kGrbf };

struct Measure {
  MeasureKind kind = MeasureKind::kProjectionKernel;
  double beta = kDefaultBeta;

  static Measure geodesic() { return {MeasureKind::kGeodesic, kDefaultBeta}; }
  static Measure projection_kernel() { return {MeasureKind::kProjectionKernel, kDefaultBeta}; }
  static Measure grbf(double beta = kDefaultBeta) { return {MeasureKind::kGrbf, beta}; }

  bool is_distance() const noexcept { return kind == MeasureKind::kGeodesic; }
};

struct ScoredId {
  SubspaceId id;
  double score;

  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

/// Full scan of db. Distances rank ascending, similarities descending, ties
/// go to the lower id; min(top, N) entries are returned. GRBF is ranked on
/// its projection-kernel exponent so its permutation matches PK exactly.
std::vector<ScoredId> exact_nearest_subspaces(const SubspaceDB& db, const Subspace& query,
                                              const Measure& measure, std::size_t top);

/// Sorts by score (descending if `descending`), lower id first on ties, and
/// truncates to `top`.
void rank_and_truncate(std::vector<ScoredId>& entries, bool descending, std::size_t top);

}  // namespace gsanss
