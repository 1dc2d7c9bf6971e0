#include "gsanss/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "gsanss/error.hpp"
#include "gsanss/linalg.hpp"
#include "gsanss/random.hpp"

namespace gsanss {

LiftedPoint bhz_lift(const Subspace& y) {
  const std::size_t dim = y.dim();
  const Matrix& b = y.basis();
  LiftedPoint out;
  out.subspace_id = y.id();
  out.coords.reserve(dim * (dim + 1) / 2);
  // A(r, c) = sum_j b(r, j) b(c, j); rows of B are strided, so copy them.
  std::vector<double> rows(dim * y.m());
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t j = 0; j < y.m(); ++j) rows[r * y.m() + j] = b(r, j);
  auto row = [&](std::size_t r) { return std::span<const double>(rows.data() + r * y.m(), y.m()); };
  for (std::size_t r = 0; r < dim; ++r) out.coords.push_back(dot(row(r), row(r)));
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r + 1; c < dim; ++c)
      out.coords.push_back(std::numbers::sqrt2 * dot(row(r), row(c)));
  return out;
}

LiftedDb bhz_lift_database(const SubspaceDB& db) {
  LiftedDb out{db.dim(), db.m(), {}};
  out.points.reserve(db.size());
  for (const Subspace& s : db) out.points.push_back(bhz_lift(s));
  return out;
}

std::vector<ScoredId> bhz_search(const LiftedDb& db, const Subspace& query, std::size_t top) {
  if (db.points.empty()) throw Error(Errc::kEmptyDatabase, "bhz_search on empty database");
  if (query.dim() != db.dim || query.m() != db.m) {
    throw Error(Errc::kDimensionMismatch, "query does not match lifted database");
  }
  const LiftedPoint q = bhz_lift(query);
  std::vector<ScoredId> scored;
  scored.reserve(db.points.size());
  for (const LiftedPoint& p : db.points) {
    scored.push_back({p.subspace_id, squared_distance(p.coords, q.coords)});
  }
  rank_and_truncate(scored, /*descending=*/false, top);
  return scored;
}

void GlhParams::validate() const {
  if (tables < 1 || bits_per_table < 1) {
    throw Error(Errc::kInvalidParams, "GLH needs at least one table and one bit per table");
  }
}

GlhParams glh_params_from(std::uint32_t s, std::uint32_t k, GlhLayout layout, std::uint64_t seed) {
  return layout == GlhLayout::kTablesOfK ? GlhParams{s, k, seed} : GlhParams{k, s, seed};
}

GlhIndex::GlhIndex(std::shared_ptr<const SubspaceDB> db, const GlhParams& params, Restored)
    : db_(std::move(db)), params_(params) {
  if (!db_) throw Error(Errc::kInvalidParams, "GLH index without database");
  params_.validate();
}

GlhIndex::GlhIndex(std::shared_ptr<const SubspaceDB> db, const GlhParams& params)
    : GlhIndex(std::move(db), params, Restored{}) {
  const std::size_t dim = db_->dim();
  const std::size_t count = std::size_t{params_.tables} * params_.bits_per_table;
  vectors_.resize(count * dim);
  Rng rng(derive_seed(params_.seed, "glh"));
  NormalSampler normal;
  for (std::size_t v = 0; v < count; ++v) {
    std::span<double> r(vectors_.data() + v * dim, dim);
    for (double& x : r) x = normal(rng);
    const double len = std::sqrt(dot(r, r));
    for (double& x : r) x /= len;
  }
  buckets_.resize(params_.tables);
  for (std::size_t t = 0; t < params_.tables; ++t) {
    for (const Subspace& s : *db_) {
      GlhSignature sig = signature(t, s);
      for (std::uint64_t w : sig) one_bits_ += static_cast<std::size_t>(std::popcount(w));
      buckets_[t][std::move(sig)].push_back(s.id());
    }
  }
}

GlhSignature GlhIndex::signature(std::size_t table, const Subspace& y) const {
  const std::size_t dim = db_->dim();
  if (y.dim() != dim) throw Error(Errc::kDimensionMismatch, "GLH signature dimension mismatch");
  GlhSignature sig((params_.bits_per_table + 63) / 64, 0);
  for (std::uint32_t b = 0; b < params_.bits_per_table; ++b) {
    std::span<const double> r(vectors_.data() + (table * params_.bits_per_table + b) * dim, dim);
    double proj = 0.0;
    for (std::size_t j = 0; j < y.m(); ++j) {
      const double c = dot(y.basis().col(j), r);
      proj += c * c;
    }
    const double angle = std::acos(std::clamp(std::sqrt(proj), 0.0, 1.0));
    if (angle <= kGlhThreshold) sig[b / 64] |= std::uint64_t{1} << (b % 64);
  }
  return sig;
}

double GlhIndex::one_bit_fraction() const {
  const double total = static_cast<double>(db_->size()) * params_.tables * params_.bits_per_table;
  return total > 0.0 ? static_cast<double>(one_bits_) / total : 0.0;
}

GlhResult GlhIndex::query(const Subspace& q, std::size_t top) const {
  if (db_->empty()) throw Error(Errc::kEmptyDatabase, "GLH query on empty database");
  if (q.dim() != db_->dim() || q.m() != db_->m()) {
    throw Error(Errc::kDimensionMismatch, "GLH query does not match database");
  }
  std::vector<bool> member(db_->size() + 1, false);
  std::vector<SubspaceId> cand;
  for (std::size_t t = 0; t < params_.tables; ++t) {
    auto it = buckets_[t].find(signature(t, q));
    if (it == buckets_[t].end()) continue;
    for (SubspaceId id : it->second) {
      if (!member[id]) {
        member[id] = true;
        cand.push_back(id);
      }
    }
  }
  GlhResult out;
  if (cand.empty()) {
    out.fallback = true;
    for (const Subspace& s : *db_) cand.push_back(s.id());
  }
  out.candidates = cand.size();
  out.full_scan = cand.size() == db_->size();
  out.ranking.reserve(cand.size());
  for (SubspaceId id : cand) out.ranking.push_back({id, geodesic_distance(db_->at(id), q)});
  rank_and_truncate(out.ranking, /*descending=*/false, top);
  return out;
}

Bytes GlhIndex::serialize_params() const {
  ByteWriter w;
  w.u32(params_.tables);
  w.u32(params_.bits_per_table);
  w.u64(params_.seed);
  return w.take();
}

Bytes GlhIndex::serialize_vectors() const {
  ByteWriter w;
  w.f64s(vectors_);
  return w.take();
}

Bytes GlhIndex::serialize_buckets() const {
  ByteWriter w;
  for (const auto& table : buckets_) {
    w.u32(static_cast<std::uint32_t>(table.size()));
    for (const auto& [sig, ids] : table) {
      for (std::uint64_t word : sig) w.u64(word);
      w.u32(static_cast<std::uint32_t>(ids.size()));
      for (SubspaceId id : ids) w.u32(id);
    }
  }
  return w.take();
}

std::unique_ptr<GlhIndex> GlhIndex::restore(std::shared_ptr<const SubspaceDB> db,
                                            std::span<const std::uint8_t> params,
                                            std::span<const std::uint8_t> vectors,
                                            std::span<const std::uint8_t> buckets) {
  ByteReader pr(params);
  GlhParams p;
  p.tables = pr.u32();
  p.bits_per_table = pr.u32();
  p.seed = pr.u64();
  pr.expect_done("GLH params");
  auto index = std::unique_ptr<GlhIndex>(new GlhIndex(std::move(db), p, Restored{}));
  const std::size_t dim = index->db_->dim();
  const std::size_t count = std::size_t{p.tables} * p.bits_per_table;
  if (vectors.size() != count * dim * 8) {
    throw Error(Errc::kFormatError, "GLH vector section has wrong size");
  }
  ByteReader vr(vectors);
  index->vectors_.resize(count * dim);
  for (double& x : index->vectors_) x = vr.f64();

  const std::size_t words = (p.bits_per_table + 63) / 64;
  const std::size_t n = index->db_->size();
  ByteReader br(buckets);
  index->buckets_.resize(p.tables);
  for (auto& table : index->buckets_) {
    std::vector<bool> seen(n + 1, false);
    std::size_t placed = 0;
    const std::uint32_t nkeys = br.u32();
    for (std::uint32_t i = 0; i < nkeys; ++i) {
      GlhSignature sig(words);
      for (auto& word : sig) word = br.u64();
      std::size_t ones = 0;
      for (std::uint64_t word : sig) ones += static_cast<std::size_t>(std::popcount(word));
      const std::uint32_t count_ids = br.u32();
      auto& ids = table[sig];
      if (!ids.empty()) throw Error(Errc::kFormatError, "duplicate GLH bucket");
      for (std::uint32_t j = 0; j < count_ids; ++j) {
        const SubspaceId id = br.u32();
        if (id < 1 || id > n || seen[id]) throw Error(Errc::kFormatError, "bad GLH bucket member");
        seen[id] = true;
        ids.push_back(id);
      }
      placed += count_ids;
      index->one_bits_ += ones * count_ids;
    }
    if (placed != n) throw Error(Errc::kFormatError, "GLH table does not cover the database");
  }
  br.expect_done("GLH buckets");
  return index;
}

}  // namespace gsanss
