#include "gsanss/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "gsanss/error.hpp"
#include "gsanss/random.hpp"

namespace gsanss {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_g(double v, int digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  return {buf, res.ptr};
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::size_t SampleSet::total_samples() const noexcept {
  std::size_t n = 0;
  for (const Category& c : categories) n += c.samples.cols();
  return n;
}

void SyntheticParams::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::kInvalidParams, why); };
  if (num_subspaces < 2) fail("synthetic data needs at least 2 subspaces");
  if (m < 1 || m > dim) fail("need 1 <= m <= D");
  if (n_train < m) fail("n_train must be >= m");
  if (n_query_sets > 0 && query_window < m) fail("query_window must be >= m");
  if (!(noise >= 0.0) || !std::isfinite(noise)) fail("noise must be >= 0");
}

SyntheticGenerator::SyntheticGenerator(const SyntheticParams& params) : params_(params) {
  params_.validate();
}

std::string SyntheticGenerator::label(std::size_t c) { return "c" + std::to_string(c + 1); }

Matrix SyntheticGenerator::hidden_basis(std::size_t c) const {
  Rng rng(derive_seed(derive_seed(params_.seed, "basis"), c));
  NormalSampler normal;
  Matrix g(params_.dim, params_.m);
  for (double& x : g.data()) x = normal(rng);
  return orthonormalize(g);
}

CategoryDraw SyntheticGenerator::draw(std::size_t c) const {
  const Matrix basis = hidden_basis(c);
  Rng rng(derive_seed(derive_seed(params_.seed, "samples"), c));
  NormalSampler normal;

  // Coefficient scales decay as 1/(j+1), normalised to unit total energy, so
  // the category subspace has a well-separated principal direction order.
  std::vector<double> scale(params_.m);
  double energy = 0.0;
  for (std::size_t j = 0; j < params_.m; ++j) {
    scale[j] = 1.0 / static_cast<double>(j + 1);
    energy += scale[j] * scale[j];
  }
  for (double& s : scale) s /= std::sqrt(energy);

  auto fill = [&](Matrix& out) {
    std::vector<double> coef(params_.m);
    for (std::size_t n = 0; n < out.cols(); ++n) {
      auto x = out.col(n);
      for (std::size_t j = 0; j < params_.m; ++j) coef[j] = scale[j] * normal(rng);
      for (std::size_t r = 0; r < params_.dim; ++r) {
        double v = 0.0;
        for (std::size_t j = 0; j < params_.m; ++j) v += basis(r, j) * coef[j];
        x[r] = v + params_.noise * normal(rng);
      }
      const double len = std::sqrt(dot(x, x));
      if (len > 0.0) {
        for (double& v : x) v /= len;
      }
    }
  };
  CategoryDraw out{Matrix(params_.dim, params_.n_train),
                   Matrix(params_.dim, params_.n_query_sets * params_.query_window)};
  fill(out.train);
  fill(out.query);
  return out;
}

std::pair<SampleSet, SampleSet> gen_synthetic(const SyntheticParams& params) {
  SyntheticGenerator gen(params);
  SampleSet train{params.dim, {}};
  SampleSet query{params.dim, {}};
  train.categories.reserve(params.num_subspaces);
  query.categories.reserve(params.num_subspaces);
  for (std::size_t c = 0; c < params.num_subspaces; ++c) {
    CategoryDraw d = gen.draw(c);
    train.categories.push_back({SyntheticGenerator::label(c), std::move(d.train)});
    query.categories.push_back({SyntheticGenerator::label(c), std::move(d.query)});
  }
  return {std::move(train), std::move(query)};
}

SubspaceDB build_subspace_db(const SampleSet& samples, std::size_t m, const PcaOptions& opts) {
  std::vector<Matrix> bases;
  bases.reserve(samples.categories.size());
  for (const Category& c : samples.categories) {
    try {
      bases.push_back(pca_basis(c.samples, m, opts));
    } catch (const Error& e) {
      throw Error(e.code(), "category '" + c.label + "': " + e.what());
    }
  }
  SubspaceDB db = SubspaceDB::from_bases(std::move(bases));
  if (db.empty()) return SubspaceDB(samples.dim, m, {});
  return db;
}

std::vector<QuerySubspace> make_query_subspaces(const SampleSet& samples, std::size_t m,
                                                std::size_t window, const PcaOptions& opts) {
  if (window < m) throw Error(Errc::kInvalidParams, "query window must hold at least m samples");
  std::vector<QuerySubspace> out;
  for (const Category& c : samples.categories) {
    for (std::size_t start = 0; start + window <= c.samples.cols(); start += window) {
      std::vector<double> data(c.samples.data().begin() +
                                   static_cast<std::ptrdiff_t>(start * samples.dim),
                               c.samples.data().begin() +
                                   static_cast<std::ptrdiff_t>((start + window) * samples.dim));
      Matrix w(samples.dim, window, std::move(data));
      try {
        out.push_back({c.label, Subspace(0, pca_basis(w, m, opts))});
      } catch (const Error& e) {
        throw Error(e.code(), "query window of '" + c.label + "': " + e.what());
      }
    }
  }
  return out;
}

SampleSet parse_samples(std::istream& in) {
  SampleSet out;
  std::unordered_map<std::string, std::size_t> index_of;
  std::vector<std::vector<double>> columns;  // flattened samples per category
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0) {
      throw Error(Errc::kParseError, "line " + std::to_string(line_no) + ": expected label,v1,...");
    }
    std::string label = line.substr(0, comma);
    std::vector<double> values;
    const char* p = line.data() + comma + 1;
    const char* end = line.data() + line.size();
    while (true) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || !std::isfinite(v)) {
        throw Error(Errc::kParseError, "line " + std::to_string(line_no) + ": bad number");
      }
      values.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw Error(Errc::kParseError, "line " + std::to_string(line_no) + ": expected ','");
      }
      ++p;
    }
    if (out.dim == 0) out.dim = values.size();
    if (values.size() != out.dim) {
      throw Error(Errc::kInconsistentDimension, "line " + std::to_string(line_no) + ": " +
                                                    std::to_string(values.size()) +
                                                    " values, expected " + std::to_string(out.dim));
    }
    auto [it, inserted] = index_of.emplace(label, out.categories.size());
    if (inserted) {
      out.categories.push_back({std::move(label), {}});
      columns.emplace_back();
    }
    auto& col = columns[it->second];
    col.insert(col.end(), values.begin(), values.end());
    ++rows;
  }
  if (rows == 0) throw Error(Errc::kParseError, "no sample rows");
  for (std::size_t i = 0; i < out.categories.size(); ++i) {
    const std::size_t n = columns[i].size() / out.dim;
    out.categories[i].samples = Matrix(out.dim, n, std::move(columns[i]));
  }
  return out;
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path);
  try {
    return parse_samples(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_samples(std::ostream& out, const SampleSet& samples) {
  std::string line;
  for (const Category& c : samples.categories) {
    for (std::size_t n = 0; n < c.samples.cols(); ++n) {
      line = c.label;
      for (double v : c.samples.col(n)) {
        line.push_back(',');
        line += format_g(v, 17);
      }
      line.push_back('\n');
      out << line;
    }
  }
}

void write_samples(const std::string& path, const SampleSet& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  write_samples(out, samples);
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kGD: return "GD";
    case Method::kPK: return "PK";
    case Method::kGRBF: return "GRBF";
    case Method::kBHZ: return "BHZ";
    case Method::kGLH: return "GLH";
    case Method::kAPK: return "APK";
    case Method::kAGRBF: return "AGRBF";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  const std::string n = lower(name);
  if (n == "gd") return Method::kGD;
  if (n == "pk") return Method::kPK;
  if (n == "grbf") return Method::kGRBF;
  if (n == "bhz") return Method::kBHZ;
  if (n == "glh") return Method::kGLH;
  if (n == "apk") return Method::kAPK;
  if (n == "agrbf") return Method::kAGRBF;
  throw Error(Errc::kInvalidParams, "unknown method '" + name + "'");
}

BenchContext::BenchContext(std::shared_ptr<const SubspaceDB> db, std::vector<std::string> labels,
                           std::vector<QuerySubspace> queries, std::uint64_t seed)
    : db_(std::move(db)), labels_(std::move(labels)), queries_(std::move(queries)), seed_(seed) {
  if (!db_ || db_->empty()) throw Error(Errc::kEmptyDatabase, "benchmark over empty database");
  if (labels_.size() != db_->size()) {
    throw Error(Errc::kInvalidParams, "one label per subspace required");
  }
}

const std::vector<SubspaceId>& BenchContext::pk_top1() const {
  if (pk_top1_.empty() && !queries_.empty()) {
    pk_top1_.reserve(queries_.size());
    for (const QuerySubspace& q : queries_) {
      pk_top1_.push_back(
          exact_nearest_subspaces(*db_, q.subspace, Measure::projection_kernel(), 1).front().id);
    }
  }
  return pk_top1_;
}

double BenchContext::accuracy(const std::vector<SubspaceId>& top1) const {
  if (queries_.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    if (labels_.at(top1[i] - 1) == queries_[i].label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries_.size());
}

double BenchContext::recall_vs_pk(const std::vector<SubspaceId>& top1) const {
  if (queries_.empty()) return 0.0;
  const auto& ref = pk_top1();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < queries_.size(); ++i) hits += top1[i] == ref[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(queries_.size());
}

namespace {

BenchRecord base_record(const BenchContext& ctx, Method method, const std::string& backend) {
  BenchRecord r;
  r.method = method_name(method);
  r.backend = backend;
  r.m = ctx.db().m();
  r.dim = ctx.db().dim();
  r.num_subspaces = ctx.db().size();
  r.queries = ctx.queries().size();
  r.seed = ctx.seed();
  return r;
}

const char* backend_name(BackendKind k) { return k == BackendKind::kHash ? "hash" : "exact"; }

/// Times `repeats` passes of `one` over the query batch; the first pass's
/// answers are kept.
template <typename QueryFn>
double time_batch(const BenchContext& ctx, std::size_t repeats, bool warmup, QueryFn&& one,
                  std::vector<SubspaceId>& top1) {
  const auto& queries = ctx.queries();
  top1.assign(queries.size(), 0);
  if (warmup) {
    for (std::size_t i = 0; i < queries.size(); ++i) top1[i] = one(i);
  }
  repeats = std::max<std::size_t>(repeats, 1);
  double total = 0.0;
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const SubspaceId id = one(i);
      if (rep == 0) top1[i] = id;
    }
    total += seconds_since(start);
  }
  if (queries.empty()) return 0.0;
  const double mean = total / static_cast<double>(repeats * queries.size());
  return std::max(mean, 1e-12);
}

void finish(BenchRecord& r, const BenchContext& ctx, const std::vector<SubspaceId>& top1) {
  r.top1_accuracy = ctx.accuracy(top1);
  r.recall_vs_pk = ctx.recall_vs_pk(top1);
}

}  // namespace

BenchRecord evaluate(const MethodConfig& config, const BenchContext& ctx) {
  const SubspaceDB& db = ctx.db();
  const auto& queries = ctx.queries();
  std::vector<SubspaceId> top1;
  BenchRecord r;

  switch (config.method) {
    case Method::kGD:
    case Method::kPK:
    case Method::kGRBF: {
      r = base_record(ctx, config.method, "scan");
      const Measure measure = config.method == Method::kGD   ? Measure::geodesic()
                              : config.method == Method::kPK ? Measure::projection_kernel()
                                                             : Measure::grbf(config.beta);
      if (config.method == Method::kGRBF) r.beta = config.beta;
      r.mean_query_seconds = time_batch(
          ctx, config.repeats, config.warmup,
          [&](std::size_t i) {
            return exact_nearest_subspaces(db, queries[i].subspace, measure, 1).front().id;
          },
          top1);
      break;
    }
    case Method::kBHZ: {
      r = base_record(ctx, config.method, "scan");
      const auto start = Clock::now();
      const LiftedDb lifted = bhz_lift_database(db);
      r.build_seconds = seconds_since(start);
      r.mean_query_seconds = time_batch(
          ctx, config.repeats, config.warmup,
          [&](std::size_t i) { return bhz_search(lifted, queries[i].subspace, 1).front().id; },
          top1);
      break;
    }
    case Method::kGLH: {
      r = base_record(ctx, config.method, "glh");
      r.s = config.glh_s;
      r.kbits = config.glh_k;
      const auto start = Clock::now();
      const GlhIndex index(ctx.db_ptr(), config.glh);
      r.build_seconds = seconds_since(start);
      std::vector<bool> full(queries.size(), false);
      r.mean_query_seconds = time_batch(
          ctx, config.repeats, config.warmup,
          [&](std::size_t i) {
            GlhResult res = index.query(queries[i].subspace, 1);
            full[i] = res.full_scan;
            return res.ranking.front().id;
          },
          top1);
      r.fallbacks = static_cast<std::size_t>(std::count(full.begin(), full.end(), true));
      break;
    }
    case Method::kAPK:
    case Method::kAGRBF: {
      r = base_record(ctx, config.method, backend_name(config.backend.kind));
      const ApproxMeasure measure = config.method == Method::kAPK
                                        ? ApproxMeasure::apk()
                                        : ApproxMeasure::agrbf(config.beta);
      if (config.method == Method::kAGRBF) r.beta = config.beta;
      r.k = config.k;
      const auto start = Clock::now();
      const AnssIndex index = index_database(ctx.db_ptr(), config.backend);
      r.build_seconds = seconds_since(start);
      ScoreTable scratch;
      r.mean_query_seconds = time_batch(
          ctx, config.repeats, config.warmup,
          [&](std::size_t i) {
            return search(index, queries[i].subspace, config.k, measure, 1, scratch).front().id;
          },
          top1);
      break;
    }
  }
  finish(r, ctx, top1);
  return r;
}

std::vector<BenchRecord> sweep_k(const BenchContext& ctx, const std::vector<std::size_t>& k_values,
                                 const BackendConfig& backend, const std::vector<Method>& measures,
                                 std::size_t repeats, double beta) {
  std::vector<BenchRecord> out;
  if (measures.empty() || k_values.empty()) return out;
  for (Method m : measures) {
    if (m != Method::kAPK && m != Method::kAGRBF) {
      throw Error(Errc::kInvalidParams, "sweep_k takes APK or AGRBF, got " + method_name(m));
    }
  }
  const auto start = Clock::now();
  const AnssIndex index = index_database(ctx.db_ptr(), backend);
  const double build = seconds_since(start);
  const auto& queries = ctx.queries();
  ScoreTable scratch;
  for (std::size_t k : k_values) {
    for (Method m : measures) {
      BenchRecord r = base_record(ctx, m, backend_name(backend.kind));
      const ApproxMeasure measure =
          m == Method::kAPK ? ApproxMeasure::apk() : ApproxMeasure::agrbf(beta);
      if (m == Method::kAGRBF) r.beta = beta;
      r.k = k;
      r.build_seconds = build;
      std::vector<SubspaceId> top1;
      r.mean_query_seconds = time_batch(
          ctx, repeats, false,
          [&](std::size_t i) {
            return search(index, queries[i].subspace, k, measure, 1, scratch).front().id;
          },
          top1);
      finish(r, ctx, top1);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string bench_csv_row(const BenchRecord& r, bool with_timing) {
  std::ostringstream os;
  auto opt = [&](const auto& v) {
    if (v) os << *v;
  };
  os << r.method << ',' << r.backend << ',';
  opt(r.k);
  os << ',';
  opt(r.s);
  os << ',';
  opt(r.kbits);
  os << ',';
  if (r.beta) os << format_g(*r.beta, 9);
  os << ',' << r.m << ',' << r.dim << ',' << r.num_subspaces << ',' << format_g(r.top1_accuracy, 9)
     << ',' << format_g(r.recall_vs_pk, 9) << ',';
  if (with_timing) os << format_g(r.mean_query_seconds, 9);
  os << ',';
  if (with_timing) os << format_g(r.build_seconds, 9);
  os << ',' << r.fallbacks << ',' << r.seed;
  return os.str();
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records, bool with_timing) {
  out << kBenchCsvHeader << '\n';
  for (const BenchRecord& r : records) out << bench_csv_row(r, with_timing) << '\n';
}

}  // namespace gsanss
