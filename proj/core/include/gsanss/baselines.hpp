#pragma once

// Comparison methods: the Euclidean lift of projection matrices (BHZ) and
// Grassmannian locality hashing with a pi/6 angle threshold (GLH).

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "gsanss/bytes.hpp"
#include "gsanss/grassmann.hpp"

namespace gsanss {

/// Projection matrix A = Y Y^T flattened to D(D+1)/2 coordinates: the
/// diagonal, then the strict upper triangle row by row scaled by sqrt(2), so
/// Euclidean distance between lifts equals ||A1 - A2||_F.
struct LiftedPoint {
  SubspaceId subspace_id = 0;
  std::vector<double> coords;
};

LiftedPoint bhz_lift(const Subspace& y);

struct LiftedDb {
  std::size_t dim = 0;
  std::size_t m = 0;
  std::vector<LiftedPoint> points;
};

LiftedDb bhz_lift_database(const SubspaceDB& db);

/// Brute-force Euclidean scan in the lifted space; scores are squared lifted
/// distances, ascending, ties by lower id.
std::vector<ScoredId> bhz_search(const LiftedDb& db, const Subspace& query, std::size_t top);

inline constexpr double kGlhThreshold = 3.14159265358979323846 / 6.0;

/// `tables` hash tables of `bits_per_table` random unit vectors each. Which
/// of the GLH parameters S and K plays which role is a caller decision; see
/// glh_params_from.
struct GlhParams {
  std::uint32_t tables = 100;
  std::uint32_t bits_per_table = 3;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const GlhParams&, const GlhParams&) = default;
};

enum class GlhLayout {
  kTablesOfK,  // S tables, K vectors per table
  kKTablesOfS, // K tables, S vectors per table
};

GlhParams glh_params_from(std::uint32_t s, std::uint32_t k, GlhLayout layout, std::uint64_t seed);

/// Packed bit signature; one bit per random vector of a table.
using GlhSignature = std::vector<std::uint64_t>;

struct GlhResult {
  std::vector<ScoredId> ranking;  // geodesic distance ascending
  std::size_t candidates = 0;
  bool fallback = false;   // no bucket matched; fell back to a full scan
  bool full_scan = false;  // every subspace was ranked, by fallback or bucketing
};

class GlhIndex {
 public:
  GlhIndex(std::shared_ptr<const SubspaceDB> db, const GlhParams& params);

  static std::unique_ptr<GlhIndex> restore(std::shared_ptr<const SubspaceDB> db,
                                           std::span<const std::uint8_t> params,
                                           std::span<const std::uint8_t> vectors,
                                           std::span<const std::uint8_t> buckets);

  const GlhParams& params() const noexcept { return params_; }
  const SubspaceDB& db() const noexcept { return *db_; }

  /// Bit b is set iff the angle between random vector b and span(Y), i.e.
  /// arccos ||Y^T r||, is at most pi/6.
  GlhSignature signature(std::size_t table, const Subspace& y) const;

  /// Fraction of set bits over every database signature.
  double one_bit_fraction() const;

  GlhResult query(const Subspace& q, std::size_t top) const;

  Bytes serialize_params() const;
  Bytes serialize_vectors() const;
  Bytes serialize_buckets() const;

 private:
  struct Restored {};
  GlhIndex(std::shared_ptr<const SubspaceDB> db, const GlhParams& params, Restored);

  std::shared_ptr<const SubspaceDB> db_;
  GlhParams params_;
  std::vector<double> vectors_;  // (table * bits + bit) * D
  std::vector<std::map<GlhSignature, std::vector<SubspaceId>>> buckets_;
  std::size_t one_bits_ = 0;
};

}  // namespace gsanss
