#pragma once

// Approximate nearest subspace search by decomposing the projection kernel
// k_P(P_i, Q) = sum_s sum_t (p_is . q_t)^2 into Euclidean k-NN lookups over
// the stored basis columns.
//
// Indexing stores every column p_ie of every database basis in a vector
// index. A query Q = [q_1 .. q_m] issues 2m k-NN lookups, one for each q_l
// and one for -q_l; the latter returns the columns most anti-aligned with
// q_l, which matter equally because the kernel squares inner products. Each
// hit contributes (p . q_l)^2, with the inner product recovered from the
// reported squared distance rather than recomputed. A column that comes back
// for both q_l and -q_l is credited once. With an exact backend and
// k = ceil(m N / 2) every column is visited for every q_l, so the scores are
// the exact projection kernels.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "gsanss/ann_index.hpp"
#include "gsanss/grassmann.hpp"

namespace gsanss {

/// Which vector-index backend holds the basis columns.
struct BackendConfig {
  BackendKind kind = BackendKind::kExact;
  HashIndexParams hash;

  static BackendConfig exact() { return {}; }
  static BackendConfig hashed(const HashIndexParams& p = {}) { return {BackendKind::kHash, p}; }
};

class AnssIndex {
 public:
  /// Wraps an already-built backend; throws kInvalidParams unless it holds
  /// exactly the N*m columns of db.
  AnssIndex(std::shared_ptr<const SubspaceDB> db, std::unique_ptr<VectorIndex> backend);

  const SubspaceDB& db() const noexcept { return *db_; }
  std::shared_ptr<const SubspaceDB> db_ptr() const noexcept { return db_; }
  const VectorIndex& backend() const noexcept { return *backend_; }
  std::size_t m() const noexcept { return db_->m(); }
  std::size_t num_subspaces() const noexcept { return db_->size(); }

 private:
  std::shared_ptr<const SubspaceDB> db_;
  std::unique_ptr<VectorIndex> backend_;
};

/// Columns of every basis in (subspace, column) order, eigen ids from 1.
std::vector<VectorRecord> basis_records(const SubspaceDB& db);

AnssIndex index_database(std::shared_ptr<const SubspaceDB> db, const BackendConfig& backend);

/// Per-query accumulator. Reset is O(1) via epoch counters, so one table can
/// serve many sequential searches on a thread.
class ScoreTable {
 public:
  ScoreTable() = default;
  ScoreTable(std::size_t num_subspaces, std::size_t num_records);

  /// Starts a new query; sizes the table if needed.
  void reset(std::size_t num_subspaces, std::size_t num_records);
  /// Starts crediting query column l; subsequent credits of one record for
  /// the same column are ignored.
  void begin_column();
  /// Adds `value` to the score of `id` unless `record` was already credited
  /// for the current column. Returns whether it was credited.
  bool credit(SubspaceId id, std::uint32_t record, double value);

  double score(SubspaceId id) const;
  const std::vector<SubspaceId>& touched() const noexcept { return touched_; }
  std::size_t credits() const noexcept { return credits_; }

 private:
  std::vector<double> scores_;
  std::vector<std::uint32_t> score_epoch_;
  std::vector<std::uint64_t> seen_column_;
  std::vector<SubspaceId> touched_;
  std::uint32_t epoch_ = 0;
  std::uint64_t column_stamp_ = 0;
  std::size_t credits_ = 0;
};

enum class ApproxKind { kApk, kAgrbf };

struct ApproxMeasure {
  ApproxKind kind = ApproxKind::kApk;
  double beta = kDefaultBeta;

  static ApproxMeasure apk() { return {}; }
  static ApproxMeasure agrbf(double beta = kDefaultBeta) { return {ApproxKind::kAgrbf, beta}; }
};

/// Ranks subspaces by approximate projection kernel, descending, ties by
/// lower id. Subspaces no hit reached follow in id order with score 0
/// (AGRBF: exp(0) = 1). k is clamped to N*m.
std::vector<ScoredId> search(const AnssIndex& index, const Subspace& query, std::size_t k,
                             const ApproxMeasure& measure, std::size_t top = 1);
std::vector<ScoredId> search(const AnssIndex& index, const Subspace& query, std::size_t k,
                             const ApproxMeasure& measure, std::size_t top, ScoreTable& scratch);

/// ceil(m * N / 2): the k at which an exact backend covers every column.
std::size_t score_exactness_budget(const AnssIndex& index);
std::size_t score_exactness_budget(std::size_t num_subspaces, std::size_t m);

}  // namespace gsanss
