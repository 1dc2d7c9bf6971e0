#pragma once

// k-NN over unit vectors in R^D. Backends report exact squared Euclidean
// distances, from which inner products are recovered as 1 - d^2 / 2.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "gsanss/bytes.hpp"
#include "gsanss/grassmann.hpp"

namespace gsanss {

inline constexpr double kUnitNormTol = 1e-6;

/// One stored basis column, tagged with the subspace it belongs to.
struct VectorRecord {
  SubspaceId subspace_id = 0;
  std::uint32_t eigen_id = 0;  // 1..m
  std::vector<double> vector;
};

struct NeighborHit {
  std::uint32_t record = 0;  // position in the index
  SubspaceId subspace_id = 0;
  std::uint32_t eigen_id = 0;
  double sq_dist = 0.0;

  friend bool operator==(const NeighborHit&, const NeighborHit&) = default;
};

enum class BackendKind : std::uint32_t { kExact = 0, kHash = 1 };

struct HashIndexParams {
  std::uint32_t tables = 16;
  std::uint32_t bits_per_table = 16;
  std::uint64_t seed = 1;
  std::uint32_t probe_radius = 2;

  void validate() const;
  friend bool operator==(const HashIndexParams&, const HashIndexParams&) = default;
};

/// Immutable after construction; knn is const and safe to call concurrently.
class VectorIndex {
 public:
  virtual ~VectorIndex() = default;

  virtual BackendKind backend() const noexcept = 0;
  /// Up to k hits ordered by (sq_dist, subspace_id, eigen_id).
  virtual std::vector<NeighborHit> knn(std::span<const double> query, std::size_t k) const = 0;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return subspace_ids_.size(); }
  std::span<const double> vector(std::size_t record) const {
    return {data_.data() + record * dim_, dim_};
  }
  SubspaceId subspace_id(std::size_t record) const { return subspace_ids_[record]; }
  std::uint32_t eigen_id(std::size_t record) const { return eigen_ids_[record]; }

 protected:
  explicit VectorIndex(std::vector<VectorRecord> records);

  void check_query(std::span<const double> query, std::size_t k) const;
  NeighborHit make_hit(std::uint32_t record, std::span<const double> query) const;
  /// Keeps the k best of `hits` in tie-broken ascending order.
  static void select_k(std::vector<NeighborHit>& hits, std::size_t k);

  std::size_t dim_ = 0;
  std::vector<double> data_;  // record-major, dim_ per record
  std::vector<SubspaceId> subspace_ids_;
  std::vector<std::uint32_t> eigen_ids_;
};

/// Full scan; the reference backend.
class ExactIndex final : public VectorIndex {
 public:
  explicit ExactIndex(std::vector<VectorRecord> records);

  BackendKind backend() const noexcept override { return BackendKind::kExact; }
  std::vector<NeighborHit> knn(std::span<const double> query, std::size_t k) const override;
};

/// Sign-random-hyperplane hashing: L tables of B-bit signatures, queried
/// with Hamming multi-probe up to probe_radius. Candidate distances are
/// exact; when probing yields fewer than k candidates, fewer hits return.
class HashIndex final : public VectorIndex {
 public:
  HashIndex(std::vector<VectorRecord> records, const HashIndexParams& params);

  /// Rebuilds an index from persisted sections without re-hashing.
  static std::unique_ptr<HashIndex> restore(std::vector<VectorRecord> records,
                                            std::span<const std::uint8_t> params,
                                            std::span<const std::uint8_t> hyperplanes,
                                            std::span<const std::uint8_t> buckets);

  BackendKind backend() const noexcept override { return BackendKind::kHash; }
  std::vector<NeighborHit> knn(std::span<const double> query, std::size_t k) const override;

  const HashIndexParams& params() const noexcept { return params_; }
  std::uint64_t signature(std::size_t table, std::span<const double> v) const;
  /// Distinct records in the buckets probed for `query`, ascending.
  std::vector<std::uint32_t> candidates(std::span<const double> query) const;

  static Bytes serialize_params(const HashIndexParams& params);
  static HashIndexParams deserialize_params(std::span<const std::uint8_t> bytes);
  Bytes serialize_hyperplanes() const;
  Bytes serialize_buckets() const;

 private:
  struct Restored {};
  HashIndex(std::vector<VectorRecord> records, const HashIndexParams& params, Restored);
  void init_probes();

  HashIndexParams params_;
  std::vector<double> normals_;  // (table * B + bit) * dim_
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> tables_;
  std::vector<std::uint64_t> probe_masks_;  // Hamming ball, nearest first
};

std::unique_ptr<VectorIndex> build_exact(std::vector<VectorRecord> records);
std::unique_ptr<VectorIndex> build_hash(std::vector<VectorRecord> records,
                                        const HashIndexParams& params);

/// a . b = 1 - ||a - b||^2 / 2 for unit a, b. Throws kOutOfRange outside
/// [0, 4 + 1e-9]; the result is clamped to [-1, 1].
double inner_product_from_sqdist(double sq_dist);

}  // namespace gsanss
