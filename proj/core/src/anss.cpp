#include "gsanss/anss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsanss/error.hpp"

namespace gsanss {

AnssIndex::AnssIndex(std::shared_ptr<const SubspaceDB> db, std::unique_ptr<VectorIndex> backend)
    : db_(std::move(db)), backend_(std::move(backend)) {
  if (!db_ || db_->empty()) throw Error(Errc::kEmptyDatabase, "AnssIndex over an empty database");
  if (!backend_) throw Error(Errc::kInvalidParams, "AnssIndex without a backend");
  const std::size_t expected = db_->size() * db_->m();
  if (backend_->size() != expected || backend_->dim() != db_->dim()) {
    throw Error(Errc::kInvalidParams, "backend holds " + std::to_string(backend_->size()) +
                                          " records, expected " + std::to_string(expected));
  }
  // Records must be the db columns in (subspace, column) order.
  for (std::size_t r = 0; r < expected; ++r) {
    const auto sid = static_cast<SubspaceId>(r / db_->m() + 1);
    const auto eid = static_cast<std::uint32_t>(r % db_->m() + 1);
    if (backend_->subspace_id(r) != sid || backend_->eigen_id(r) != eid) {
      throw Error(Errc::kInvalidParams, "backend record " + std::to_string(r) +
                                            " is not column " + std::to_string(eid) +
                                            " of subspace " + std::to_string(sid));
    }
  }
}

std::vector<VectorRecord> basis_records(const SubspaceDB& db) {
  std::vector<VectorRecord> records;
  records.reserve(db.size() * db.m());
  for (const Subspace& s : db) {
    for (std::size_t e = 0; e < s.m(); ++e) {
      auto col = s.basis().col(e);
      records.push_back({s.id(), static_cast<std::uint32_t>(e + 1), {col.begin(), col.end()}});
    }
  }
  return records;
}

AnssIndex index_database(std::shared_ptr<const SubspaceDB> db, const BackendConfig& backend) {
  if (!db || db->empty()) throw Error(Errc::kEmptyDatabase, "index_database on empty database");
  auto records = basis_records(*db);
  std::unique_ptr<VectorIndex> vi = backend.kind == BackendKind::kHash
                                        ? build_hash(std::move(records), backend.hash)
                                        : build_exact(std::move(records));
  return AnssIndex(std::move(db), std::move(vi));
}

ScoreTable::ScoreTable(std::size_t num_subspaces, std::size_t num_records) {
  reset(num_subspaces, num_records);
}

void ScoreTable::reset(std::size_t num_subspaces, std::size_t num_records) {
  // Ids are 1-based; slot 0 is unused.
  if (scores_.size() != num_subspaces + 1) {
    scores_.assign(num_subspaces + 1, 0.0);
    score_epoch_.assign(num_subspaces + 1, 0);
    epoch_ = 0;
  }
  if (seen_column_.size() != num_records) seen_column_.assign(num_records, 0);
  if (++epoch_ == 0) {
    std::fill(score_epoch_.begin(), score_epoch_.end(), 0);
    epoch_ = 1;
  }
  touched_.clear();
  credits_ = 0;
}

void ScoreTable::begin_column() { ++column_stamp_; }

bool ScoreTable::credit(SubspaceId id, std::uint32_t record, double value) {
  if (seen_column_[record] == column_stamp_) return false;
  seen_column_[record] = column_stamp_;
  ++credits_;
  if (value > 0.0) {
    if (score_epoch_[id] != epoch_) {
      score_epoch_[id] = epoch_;
      scores_[id] = 0.0;
      touched_.push_back(id);
    }
    scores_[id] += value;
  }
  return true;
}

double ScoreTable::score(SubspaceId id) const {
  return score_epoch_.at(id) == epoch_ ? scores_[id] : 0.0;
}

std::vector<ScoredId> search(const AnssIndex& index, const Subspace& query, std::size_t k,
                             const ApproxMeasure& measure, std::size_t top) {
  ScoreTable scratch;
  return search(index, query, k, measure, top, scratch);
}

std::vector<ScoredId> search(const AnssIndex& index, const Subspace& query, std::size_t k,
                             const ApproxMeasure& measure, std::size_t top, ScoreTable& scratch) {
  const SubspaceDB& db = index.db();
  const VectorIndex& backend = index.backend();
  if (backend.size() == 0) throw Error(Errc::kEmptyIndex, "search on an empty index");
  if (query.dim() != db.dim() || query.m() != db.m()) {
    throw Error(Errc::kDimensionMismatch, "query is not in G(" + std::to_string(db.m()) + "," +
                                              std::to_string(db.dim()) + ")");
  }
  if (k == 0) throw Error(Errc::kInvalidParams, "search needs k >= 1");
  if (measure.kind == ApproxKind::kAgrbf && !(measure.beta > 0.0)) {
    throw Error(Errc::kInvalidBeta, "beta must be > 0");
  }
  k = std::min(k, backend.size());

  scratch.reset(db.size(), backend.size());
  std::vector<double> negated(db.dim());
  for (std::size_t l = 0; l < query.m(); ++l) {
    auto q = query.basis().col(l);
    for (std::size_t r = 0; r < q.size(); ++r) negated[r] = -q[r];
    scratch.begin_column();
    for (std::span<const double> probe : {q, std::span<const double>(negated)}) {
      for (const NeighborHit& hit : backend.knn(probe, k)) {
        // For -q_l the recovered value is -(p . q_l); squaring removes the sign.
        const double ip = inner_product_from_sqdist(hit.sq_dist);
        scratch.credit(hit.subspace_id, hit.record, ip * ip);
      }
    }
  }

  std::vector<ScoredId> ranked;
  ranked.reserve(scratch.touched().size());
  for (SubspaceId id : scratch.touched()) ranked.push_back({id, scratch.score(id)});
  rank_and_truncate(ranked, /*descending=*/true, top);
  for (SubspaceId id = 1; ranked.size() < std::min(top, db.size()); ++id) {
    if (scratch.score(id) == 0.0) ranked.push_back({id, 0.0});
  }
  if (measure.kind == ApproxKind::kAgrbf) {
    for (ScoredId& e : ranked) e.score = std::exp(measure.beta * e.score);
  }
  return ranked;
}

std::size_t score_exactness_budget(std::size_t num_subspaces, std::size_t m) {
  return (m * num_subspaces + 1) / 2;
}

std::size_t score_exactness_budget(const AnssIndex& index) {
  return score_exactness_budget(index.num_subspaces(), index.m());
}

}  // namespace gsanss
