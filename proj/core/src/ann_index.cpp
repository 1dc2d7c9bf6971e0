#include "gsanss/ann_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "gsanss/error.hpp"
#include "gsanss/linalg.hpp"
#include "gsanss/random.hpp"

namespace gsanss {
namespace {

bool hit_less(const NeighborHit& a, const NeighborHit& b) {
  if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
  if (a.subspace_id != b.subspace_id) return a.subspace_id < b.subspace_id;
  return a.eigen_id < b.eigen_id;
}

void all_masks_of_weight(std::uint32_t bits, std::uint32_t weight, std::uint32_t start,
                         std::uint64_t mask, std::vector<std::uint64_t>& out) {
  if (weight == 0) {
    out.push_back(mask);
    return;
  }
  for (std::uint32_t b = start; b + weight <= bits; ++b) {
    all_masks_of_weight(bits, weight - 1, b + 1, mask | (std::uint64_t{1} << b), out);
  }
}

}  // namespace

void HashIndexParams::validate() const {
  if (tables < 1) throw Error(Errc::kInvalidParams, "hash index needs at least one table");
  if (bits_per_table < 1 || bits_per_table > 63) {
    throw Error(Errc::kInvalidParams, "bits_per_table must be in [1, 63]");
  }
  if (probe_radius > bits_per_table) {
    throw Error(Errc::kInvalidParams, "probe_radius exceeds bits_per_table");
  }
}

VectorIndex::VectorIndex(std::vector<VectorRecord> records) {
  if (records.empty()) throw Error(Errc::kEmptyInput, "vector index needs at least one record");
  dim_ = records.front().vector.size();
  if (dim_ == 0) throw Error(Errc::kInvalidParams, "zero-dimensional record");
  data_.reserve(records.size() * dim_);
  subspace_ids_.reserve(records.size());
  eigen_ids_.reserve(records.size());
  std::set<std::pair<SubspaceId, std::uint32_t>> keys;
  for (const VectorRecord& r : records) {
    if (r.vector.size() != dim_) {
      throw Error(Errc::kDimensionMismatch, "record dimension " + std::to_string(r.vector.size()) +
                                                " != " + std::to_string(dim_));
    }
    for (double v : r.vector) {
      if (!std::isfinite(v)) throw Error(Errc::kNonFinite, "record entry is not finite");
    }
    const double norm = std::sqrt(dot(r.vector, r.vector));
    if (std::abs(norm - 1.0) > kUnitNormTol) {
      throw Error(Errc::kNonUnitVector, "record (" + std::to_string(r.subspace_id) + "," +
                                            std::to_string(r.eigen_id) + ") has norm " +
                                            std::to_string(norm));
    }
    if (!keys.emplace(r.subspace_id, r.eigen_id).second) {
      throw Error(Errc::kDuplicateRecord, "record (" + std::to_string(r.subspace_id) + "," +
                                              std::to_string(r.eigen_id) + ") appears twice");
    }
    data_.insert(data_.end(), r.vector.begin(), r.vector.end());
    subspace_ids_.push_back(r.subspace_id);
    eigen_ids_.push_back(r.eigen_id);
  }
}

void VectorIndex::check_query(std::span<const double> query, std::size_t k) const {
  if (query.size() != dim_) {
    throw Error(Errc::kDimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                              " != " + std::to_string(dim_));
  }
  if (k == 0) throw Error(Errc::kInvalidParams, "knn needs k >= 1");
  const double norm = std::sqrt(dot(query, query));
  if (std::abs(norm - 1.0) > kUnitNormTol) {
    throw Error(Errc::kNonUnitVector, "query norm " + std::to_string(norm));
  }
}

NeighborHit VectorIndex::make_hit(std::uint32_t record, std::span<const double> query) const {
  return {record, subspace_ids_[record], eigen_ids_[record],
          squared_distance(query, vector(record))};
}

void VectorIndex::select_k(std::vector<NeighborHit>& hits, std::size_t k) {
  if (hits.size() > k) {
    std::nth_element(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k - 1), hits.end(),
                     hit_less);
    hits.resize(k);
  }
  std::sort(hits.begin(), hits.end(), hit_less);
}

ExactIndex::ExactIndex(std::vector<VectorRecord> records) : VectorIndex(std::move(records)) {}

std::vector<NeighborHit> ExactIndex::knn(std::span<const double> query, std::size_t k) const {
  check_query(query, k);
  std::vector<NeighborHit> hits;
  hits.reserve(size());
  for (std::uint32_t r = 0; r < size(); ++r) hits.push_back(make_hit(r, query));
  select_k(hits, std::min(k, size()));
  return hits;
}

HashIndex::HashIndex(std::vector<VectorRecord> records, const HashIndexParams& params,
                     Restored)
    : VectorIndex(std::move(records)), params_(params) {
  params_.validate();
  init_probes();
}

HashIndex::HashIndex(std::vector<VectorRecord> records, const HashIndexParams& params)
    : HashIndex(std::move(records), params, Restored{}) {
  const std::size_t planes = std::size_t{params_.tables} * params_.bits_per_table;
  normals_.resize(planes * dim_);
  Rng rng(derive_seed(params_.seed, "hyperplanes"));
  NormalSampler normal;
  for (std::size_t p = 0; p < planes; ++p) {
    std::span<double> n(normals_.data() + p * dim_, dim_);
    for (double& x : n) x = normal(rng);
    const double len = std::sqrt(dot(n, n));
    for (double& x : n) x /= len;
  }
  tables_.resize(params_.tables);
  for (std::size_t t = 0; t < params_.tables; ++t) {
    for (std::uint32_t r = 0; r < size(); ++r) tables_[t][signature(t, vector(r))].push_back(r);
  }
}

void HashIndex::init_probes() {
  probe_masks_.clear();
  for (std::uint32_t w = 0; w <= params_.probe_radius; ++w) {
    all_masks_of_weight(params_.bits_per_table, w, 0, 0, probe_masks_);
  }
}

std::uint64_t HashIndex::signature(std::size_t table, std::span<const double> v) const {
  std::uint64_t sig = 0;
  const std::size_t base = table * params_.bits_per_table;
  for (std::uint32_t b = 0; b < params_.bits_per_table; ++b) {
    std::span<const double> n(normals_.data() + (base + b) * dim_, dim_);
    if (dot(n, v) >= 0.0) sig |= std::uint64_t{1} << b;
  }
  return sig;
}

std::vector<std::uint32_t> HashIndex::candidates(std::span<const double> query) const {
  std::vector<std::uint32_t> out;
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    const std::uint64_t sig = signature(t, query);
    for (std::uint64_t mask : probe_masks_) {
      auto it = tables_[t].find(sig ^ mask);
      if (it != tables_[t].end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<NeighborHit> HashIndex::knn(std::span<const double> query, std::size_t k) const {
  check_query(query, k);
  const std::vector<std::uint32_t> cand = candidates(query);
  std::vector<NeighborHit> hits;
  hits.reserve(cand.size());
  for (std::uint32_t r : cand) hits.push_back(make_hit(r, query));
  select_k(hits, std::min(k, size()));
  return hits;
}

Bytes HashIndex::serialize_params(const HashIndexParams& params) {
  ByteWriter w;
  w.u32(params.tables);
  w.u32(params.bits_per_table);
  w.u64(params.seed);
  w.u32(params.probe_radius);
  return w.take();
}

HashIndexParams HashIndex::deserialize_params(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  HashIndexParams p;
  p.tables = r.u32();
  p.bits_per_table = r.u32();
  p.seed = r.u64();
  p.probe_radius = r.u32();
  r.expect_done("hash params");
  p.validate();
  return p;
}

Bytes HashIndex::serialize_hyperplanes() const {
  ByteWriter w;
  w.f64s(normals_);
  return w.take();
}

Bytes HashIndex::serialize_buckets() const {
  ByteWriter w;
  for (const auto& table : tables_) {
    std::vector<std::uint64_t> keys;
    keys.reserve(table.size());
    for (const auto& [key, members] : table) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    w.u32(static_cast<std::uint32_t>(keys.size()));
    for (std::uint64_t key : keys) {
      const auto& members = table.at(key);
      w.u64(key);
      w.u32(static_cast<std::uint32_t>(members.size()));
      for (std::uint32_t r : members) w.u32(r);
    }
  }
  return w.take();
}

std::unique_ptr<HashIndex> HashIndex::restore(std::vector<VectorRecord> records,
                                              std::span<const std::uint8_t> params,
                                              std::span<const std::uint8_t> hyperplanes,
                                              std::span<const std::uint8_t> buckets) {
  const HashIndexParams p = deserialize_params(params);
  auto index = std::unique_ptr<HashIndex>(new HashIndex(std::move(records), p, Restored{}));
  const std::size_t planes = std::size_t{p.tables} * p.bits_per_table;
  if (hyperplanes.size() != planes * index->dim_ * 8) {
    throw Error(Errc::kFormatError, "hyperplane section has " + std::to_string(hyperplanes.size()) +
                                        " bytes, expected " +
                                        std::to_string(planes * index->dim_ * 8));
  }
  ByteReader hr(hyperplanes);
  index->normals_.resize(planes * index->dim_);
  for (double& x : index->normals_) x = hr.f64();

  ByteReader br(buckets);
  const std::uint64_t key_limit = std::uint64_t{1} << p.bits_per_table;
  index->tables_.resize(p.tables);
  for (auto& table : index->tables_) {
    std::vector<bool> seen(index->size(), false);
    std::size_t placed = 0;
    const std::uint32_t nkeys = br.u32();
    for (std::uint32_t i = 0; i < nkeys; ++i) {
      const std::uint64_t key = br.u64();
      if (key >= key_limit) throw Error(Errc::kFormatError, "bucket key exceeds signature width");
      const std::uint32_t count = br.u32();
      auto& members = table[key];
      if (!members.empty()) throw Error(Errc::kFormatError, "duplicate bucket key");
      for (std::uint32_t j = 0; j < count; ++j) {
        const std::uint32_t r = br.u32();
        if (r >= index->size() || seen[r]) {
          throw Error(Errc::kFormatError, "bucket member out of range or repeated");
        }
        seen[r] = true;
        members.push_back(r);
      }
      placed += count;
    }
    if (placed != index->size()) {
      throw Error(Errc::kFormatError, "bucket table does not hold every record exactly once");
    }
  }
  br.expect_done("hash buckets");
  return index;
}

std::unique_ptr<VectorIndex> build_exact(std::vector<VectorRecord> records) {
  return std::make_unique<ExactIndex>(std::move(records));
}

std::unique_ptr<VectorIndex> build_hash(std::vector<VectorRecord> records,
                                        const HashIndexParams& params) {
  params.validate();
  return std::make_unique<HashIndex>(std::move(records), params);
}

double inner_product_from_sqdist(double sq_dist) {
  if (!(sq_dist >= 0.0 && sq_dist <= 4.0 + 1e-9)) {
    throw Error(Errc::kOutOfRange, "squared distance " + std::to_string(sq_dist) +
                                       " outside [0, 4] for unit vectors");
  }
  return std::clamp(1.0 - sq_dist / 2.0, -1.0, 1.0);
}

}  // namespace gsanss
