#include "gsanss/grassmann.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "gsanss/error.hpp"

namespace gsanss {
namespace {

void require_same_shape(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim() || a.m() != b.m()) {
    throw Error(Errc::kDimensionMismatch,
                "subspaces G(" + std::to_string(a.m()) + "," + std::to_string(a.dim()) +
                    ") and G(" + std::to_string(b.m()) + "," + std::to_string(b.dim()) + ")");
  }
}

double clamp_unit(double v) {
  assert(v > -1e-6 && v < 1.0 + 1e-6);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

Subspace::Subspace(SubspaceId id, Matrix basis) : id_(id), basis_(std::move(basis)) {
  if (basis_.cols() == 0 || basis_.cols() > basis_.rows()) {
    throw Error(Errc::kInvalidParams, "subspace basis must be D x m with 1 <= m <= D");
  }
  const double err = orthonormality_error(basis_);
  if (err > kSubspaceOrthonormalTol) {
    throw Error(Errc::kNotOrthonormal,
                "subspace " + std::to_string(id) + " basis deviates by " + std::to_string(err));
  }
}

SubspaceDB::SubspaceDB(std::size_t dim, std::size_t m, std::vector<Subspace> subspaces)
    : dim_(dim), m_(m), subspaces_(std::move(subspaces)) {
  for (std::size_t i = 0; i < subspaces_.size(); ++i) {
    const Subspace& s = subspaces_[i];
    if (s.dim() != dim_ || s.m() != m_) {
      throw Error(Errc::kDimensionMismatch,
                  "subspace " + std::to_string(s.id()) + " is not in G(" + std::to_string(m_) +
                      "," + std::to_string(dim_) + ")");
    }
    if (s.id() != i + 1) {
      throw Error(Errc::kInvalidParams, "subspace ids must be 1..N in order; found " +
                                            std::to_string(s.id()) + " at position " +
                                            std::to_string(i + 1));
    }
  }
}

SubspaceDB SubspaceDB::from_bases(std::vector<Matrix> bases) {
  if (bases.empty()) return {};
  const std::size_t dim = bases.front().rows();
  const std::size_t m = bases.front().cols();
  std::vector<Subspace> subspaces;
  subspaces.reserve(bases.size());
  for (std::size_t i = 0; i < bases.size(); ++i) {
    subspaces.emplace_back(static_cast<SubspaceId>(i + 1), std::move(bases[i]));
  }
  return SubspaceDB(dim, m, std::move(subspaces));
}

PrincipalAngles principal_angles(const Subspace& a, const Subspace& b) {
  require_same_shape(a, b);
  const Matrix gram = cross_gram(a.basis(), b.basis());
  const SingularSpectrum cosines = singular_values(gram);

  PrincipalAngles out;
  out.angles.reserve(cosines.values.size());
  for (double c : cosines.values) out.angles.push_back(std::acos(clamp_unit(c)));

  // arccos loses accuracy for small angles; recover those from the sines,
  // the singular values of B - A (A^T B).
  if (!out.angles.empty() && out.angles.front() < std::numbers::pi / 4) {
    Matrix residual = b.basis();
    for (std::size_t t = 0; t < residual.cols(); ++t) {
      auto dst = residual.col(t);
      for (std::size_t s = 0; s < a.m(); ++s) {
        const double w = gram(s, t);
        auto src = a.basis().col(s);
        for (std::size_t r = 0; r < dst.size(); ++r) dst[r] -= w * src[r];
      }
    }
    SingularSpectrum sines = singular_values(residual);
    std::sort(sines.values.begin(), sines.values.end());
    for (std::size_t i = 0; i < out.angles.size(); ++i) {
      if (out.angles[i] < std::numbers::pi / 4) {
        out.angles[i] = std::asin(std::min(sines.values[i], 1.0));
      }
    }
  }
  std::sort(out.angles.begin(), out.angles.end());
  return out;
}

double geodesic_distance(const Subspace& a, const Subspace& b) {
  const PrincipalAngles pa = principal_angles(a, b);
  double s = 0.0;
  for (double t : pa.angles) s += t * t;
  return std::sqrt(s);
}

double projection_kernel(const Subspace& a, const Subspace& b) {
  require_same_shape(a, b);
  return frobenius_norm_sq(cross_gram(a.basis(), b.basis()));
}

double projection_metric(const Subspace& a, const Subspace& b) {
  const double radicand = static_cast<double>(a.m()) - projection_kernel(a, b);
  assert(radicand > -1e-6);
  return std::sqrt(std::max(radicand, 0.0));
}

double grbf_kernel(const Subspace& a, const Subspace& b, double beta) {
  if (!(beta > 0.0)) throw Error(Errc::kInvalidBeta, "beta must be > 0, got " + std::to_string(beta));
  return std::exp(beta * projection_kernel(a, b));
}

void rank_and_truncate(std::vector<ScoredId>& entries, bool descending, std::size_t top) {
  auto better = [descending](const ScoredId& x, const ScoredId& y) {
    if (x.score != y.score) return descending ? x.score > y.score : x.score < y.score;
    return x.id < y.id;
  };
  const std::size_t keep = std::min(top, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), better);
  entries.resize(keep);
}

std::vector<ScoredId> exact_nearest_subspaces(const SubspaceDB& db, const Subspace& query,
                                              const Measure& measure, std::size_t top) {
  if (db.empty()) throw Error(Errc::kEmptyDatabase, "exact_nearest_subspaces on empty database");
  if (measure.kind == MeasureKind::kGrbf && !(measure.beta > 0.0)) {
    throw Error(Errc::kInvalidBeta, "beta must be > 0");
  }
  std::vector<ScoredId> scored;
  scored.reserve(db.size());
  for (const Subspace& s : db) {
    const double score = measure.kind == MeasureKind::kGeodesic ? geodesic_distance(s, query)
                                                                : projection_kernel(s, query);
    scored.push_back({s.id(), score});
  }
  rank_and_truncate(scored, !measure.is_distance(), top);
  if (measure.kind == MeasureKind::kGrbf) {
    for (ScoredId& e : scored) e.score = std::exp(measure.beta * e.score);
  }
  return scored;
}

}  // namespace gsanss
