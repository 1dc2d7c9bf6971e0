#pragma once

// Sample sets, synthetic data, query construction and the accuracy/latency
// evaluation of every search method.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsanss/anss.hpp"
#include "gsanss/baselines.hpp"
#include "gsanss/grassmann.hpp"
#include "gsanss/linalg.hpp"

namespace gsanss {

struct Category {
  std::string label;
  Matrix samples;  // D x n, one sample per column
};

struct SampleSet {
  std::size_t dim = 0;
  std::vector<Category> categories;

  std::size_t total_samples() const noexcept;
};

struct SyntheticParams {
  std::size_t num_subspaces = 100;
  std::size_t dim = 64;
  std::size_t m = 5;
  std::size_t n_train = 20;
  std::size_t n_query_sets = 3;  // query windows per category
  std::size_t query_window = 10; // samples per query window
  double noise = 0.2;            // per-coordinate standard deviation
  std::uint64_t seed = 1;

  void validate() const;
};

struct CategoryDraw {
  Matrix train;  // D x n_train
  Matrix query;  // D x (n_query_sets * query_window)
};

/// Per-category draws with independent seeded streams, so a category can be
/// regenerated on its own.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(const SyntheticParams& params);

  const SyntheticParams& params() const noexcept { return params_; }
  /// Hidden orthonormal basis of category c (0-based).
  Matrix hidden_basis(std::size_t c) const;
  CategoryDraw draw(std::size_t c) const;
  static std::string label(std::size_t c);

 private:
  SyntheticParams params_;
};

/// Train and query sets; category labels and order agree between the two.
std::pair<SampleSet, SampleSet> gen_synthetic(const SyntheticParams& params);

/// One PCA subspace per category, ids in category order. RankDeficient
/// errors name the offending category.
SubspaceDB build_subspace_db(const SampleSet& samples, std::size_t m, const PcaOptions& opts = {});

struct QuerySubspace {
  std::string label;
  Subspace subspace;
};

/// Splits each category's samples into consecutive windows of `window`
/// samples (a short tail is dropped) and returns one PCA subspace per window.
std::vector<QuerySubspace> make_query_subspaces(const SampleSet& samples, std::size_t m,
                                                std::size_t window, const PcaOptions& opts = {});

/// Header-free CSV rows "label,v1,...,vD"; rows sharing a label form one
/// category, in order of first appearance.
SampleSet load_samples(const std::string& path);
SampleSet parse_samples(std::istream& in);
void write_samples(std::ostream& out, const SampleSet& samples);
void write_samples(const std::string& path, const SampleSet& samples);

enum class Method { kGD, kPK, kGRBF, kBHZ, kGLH, kAPK, kAGRBF };

std::string method_name(Method m);
Method parse_method(const std::string& name);  // case-insensitive; kInvalidParams otherwise

inline constexpr std::size_t kDefaultRepeats = 7;

struct MethodConfig {
  Method method = Method::kPK;
  std::size_t k = 1;  // APK / AGRBF neighbours per query column
  double beta = kDefaultBeta;
  BackendConfig backend;
  GlhParams glh;
  std::uint32_t glh_s = 0;  // reported S and K (GLH)
  std::uint32_t glh_k = 0;
  std::size_t repeats = kDefaultRepeats;
  bool warmup = false;  // run one untimed batch first
};

struct BenchRecord {
  std::string method;
  std::string backend;
  std::optional<std::size_t> k;
  std::optional<std::uint32_t> s;
  std::optional<std::uint32_t> kbits;
  std::optional<double> beta;
  std::size_t m = 0;
  std::size_t dim = 0;
  std::size_t num_subspaces = 0;
  double top1_accuracy = 0.0;
  double recall_vs_pk = 0.0;
  double mean_query_seconds = 0.0;
  double build_seconds = 0.0;
  std::size_t queries = 0;
  std::size_t fallbacks = 0;
  std::uint64_t seed = 0;
};

/// Database, labels, and query batch shared by all evaluations of one run.
class BenchContext {
 public:
  BenchContext(std::shared_ptr<const SubspaceDB> db, std::vector<std::string> labels,
               std::vector<QuerySubspace> queries, std::uint64_t seed = 0);

  const SubspaceDB& db() const noexcept { return *db_; }
  std::shared_ptr<const SubspaceDB> db_ptr() const noexcept { return db_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<QuerySubspace>& queries() const noexcept { return queries_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Exact projection-kernel top-1 id per query, computed once.
  const std::vector<SubspaceId>& pk_top1() const;
  /// Fraction of queries whose top-1 label equals the query label.
  double accuracy(const std::vector<SubspaceId>& top1) const;
  double recall_vs_pk(const std::vector<SubspaceId>& top1) const;

 private:
  std::shared_ptr<const SubspaceDB> db_;
  std::vector<std::string> labels_;
  std::vector<QuerySubspace> queries_;
  std::uint64_t seed_;
  mutable std::vector<SubspaceId> pk_top1_;
};

/// Builds the method's index (timed separately), then times `repeats` runs
/// of the whole query batch.
BenchRecord evaluate(const MethodConfig& config, const BenchContext& ctx);

/// One record per (k, measure), k-major. The index is built once.
std::vector<BenchRecord> sweep_k(const BenchContext& ctx, const std::vector<std::size_t>& k_values,
                                 const BackendConfig& backend, const std::vector<Method>& measures,
                                 std::size_t repeats = kDefaultRepeats, double beta = kDefaultBeta);

inline constexpr const char* kBenchCsvHeader =
    "method,backend,k,S,K,beta,m,D,N_sub,top1_accuracy,recall_vs_pk,mean_query_seconds,"
    "build_seconds,fallbacks,seed";

/// One CSV row; timing columns are left empty when `with_timing` is false,
/// which is the form used for determinism comparisons.
std::string bench_csv_row(const BenchRecord& r, bool with_timing = true);
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records,
                     bool with_timing = true);

}  // namespace gsanss
