#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gsanss/anss.hpp"
#include "gsanss/baselines.hpp"
#include "gsanss/bench.hpp"
#include "gsanss/error.hpp"
#include "gsanss/index_file.hpp"

namespace gsanss::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kIoError:
      return kExitIo;
    case Errc::kConfigMismatch:
      return kExitMismatch;
    case Errc::kInvalidParams:
    case Errc::kInvalidBeta:
      return kExitUsage;
    default:
      return kExitData;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Parses "1,50,budget" into ascending k values.
std::vector<std::size_t> parse_k_list(const std::string& text, std::size_t budget) {
  std::vector<std::size_t> ks;
  for (const std::string& item : split(text, ',')) {
    if (item == "budget") {
      ks.push_back(budget);
      continue;
    }
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) throw UsageError("bad k value '" + item + "'");
    ks.push_back(static_cast<std::size_t>(v));
  }
  if (ks.empty()) throw UsageError("empty --k-list");
  if (!std::is_sorted(ks.begin(), ks.end())) throw UsageError("--k-list must be ascending");
  return ks;
}

std::size_t parse_k(const std::string& text, std::size_t budget) {
  const auto ks = parse_k_list(text, budget);
  if (ks.size() != 1) throw UsageError("--k takes a single value");
  return ks.front();
}

GlhLayout parse_layout(const std::string& s) {
  if (s == "tables-of-k") return GlhLayout::kTablesOfK;
  if (s == "k-tables-of-s") return GlhLayout::kKTablesOfS;
  throw UsageError("unknown --glh-layout '" + s + "'");
}

std::vector<std::string> labels_of(const SampleSet& s) {
  std::vector<std::string> labels;
  for (const Category& c : s.categories) labels.push_back(c.label);
  return labels;
}

struct HashFlags {
  std::uint32_t tables = HashIndexParams{}.tables;
  std::uint32_t bits = HashIndexParams{}.bits_per_table;
  std::uint32_t probes = HashIndexParams{}.probe_radius;
};

struct GlhFlags {
  std::uint32_t s = 100;
  std::uint32_t k = 3;
  std::string layout = "tables-of-k";
};

void add_hash_flags(CLI::App* cmd, HashFlags& f) {
  cmd->add_option("--tables", f.tables, "Hash tables")->capture_default_str();
  cmd->add_option("--bits", f.bits, "Signature bits per table")->capture_default_str();
  cmd->add_option("--probes", f.probes, "Hamming probe radius")->capture_default_str();
}

void add_glh_flags(CLI::App* cmd, GlhFlags& f) {
  cmd->add_option("--S", f.s, "GLH S")->capture_default_str();
  cmd->add_option("--K", f.k, "GLH K")->capture_default_str();
  cmd->add_option("--glh-layout", f.layout, "tables-of-k (S tables of K bits) or k-tables-of-s")
      ->capture_default_str();
}

BackendConfig backend_from(const std::string& name, const HashFlags& f, std::uint64_t seed) {
  if (name == "exact") return BackendConfig::exact();
  if (name == "hash") return BackendConfig::hashed(HashIndexParams{f.tables, f.bits, seed, f.probes});
  throw UsageError("unknown backend '" + name + "'");
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  SyntheticParams params;
  std::string out_train;
  std::string out_query;
};

int cmd_gen(const GenArgs& a) {
  a.params.validate();
  std::ofstream train(a.out_train, std::ios::binary);
  std::ofstream query(a.out_query, std::ios::binary);
  if (!train) throw Error(Errc::kIoError, "cannot write " + a.out_train);
  if (!query) throw Error(Errc::kIoError, "cannot write " + a.out_query);
  // One category at a time keeps memory flat at large N_sub.
  const SyntheticGenerator gen(a.params);
  for (std::size_t c = 0; c < a.params.num_subspaces; ++c) {
    CategoryDraw d = gen.draw(c);
    const std::string label = SyntheticGenerator::label(c);
    write_samples(train, SampleSet{a.params.dim, {{label, std::move(d.train)}}});
    write_samples(query, SampleSet{a.params.dim, {{label, std::move(d.query)}}});
  }
  train.flush();
  query.flush();
  if (!train || !query) throw Error(Errc::kIoError, "write failed");
  return kExitOk;
}

// ---------------------------------------------------------------- index

struct IndexArgs {
  std::string train;
  std::size_t m = 5;
  std::string method = "apk";
  std::string backend = "exact";
  HashFlags hash;
  GlhFlags glh;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_index(const IndexArgs& a, std::ostream& err) {
  if (a.method != "apk" && a.method != "bhz" && a.method != "glh") {
    throw UsageError("unknown --method '" + a.method + "'");
  }
  const BackendConfig backend = backend_from(a.backend, a.hash, a.seed);
  const SampleSet train = load_samples(a.train);

  const auto start = std::chrono::steady_clock::now();
  StoredIndex s;
  s.db = std::make_shared<const SubspaceDB>(build_subspace_db(train, a.m));
  s.labels = labels_of(train);
  if (a.method == "apk") {
    s.tag = backend.kind == BackendKind::kHash ? IndexTag::kApkHash : IndexTag::kApkExact;
    s.anss = std::make_shared<const AnssIndex>(index_database(s.db, backend));
  } else if (a.method == "bhz") {
    s.tag = IndexTag::kBhz;
    s.lifted = std::make_shared<const LiftedDb>(bhz_lift_database(*s.db));
  } else {
    s.tag = IndexTag::kGlh;
    s.glh = std::make_shared<const GlhIndex>(
        s.db, glh_params_from(a.glh.s, a.glh.k, parse_layout(a.glh.layout), a.seed));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_index(a.out, s);
  err << "built " << index_tag_name(s.tag) << " index over " << s.db->size()
      << " subspaces in " << seconds << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------- search

struct SearchArgs {
  std::string index;
  std::string query;
  std::string k = "1";
  std::string measure = "pk";
  double beta = kDefaultBeta;
  std::size_t top = 1;
  std::string label;
  std::size_t window = 0;
};

int cmd_search(const SearchArgs& a, std::ostream& out) {
  if (a.top == 0) throw UsageError("--top must be at least 1");
  static const std::vector<std::string> measures = {"gd", "pk", "grbf", "apk", "agrbf"};
  if (std::find(measures.begin(), measures.end(), a.measure) == measures.end()) {
    throw UsageError("unknown --measure '" + a.measure + "'");
  }
  if (!(a.beta > 0.0)) throw UsageError("--beta must be positive");

  const StoredIndex s = load_index(a.index);
  const SampleSet qset = load_samples(a.query);
  if (qset.dim != s.db->dim()) {
    throw Error(Errc::kDimensionMismatch, "query samples have dimension " +
                                              std::to_string(qset.dim) + ", index has " +
                                              std::to_string(s.db->dim()));
  }
  const Category* cat = &qset.categories.front();
  if (!a.label.empty()) {
    auto it = std::find_if(qset.categories.begin(), qset.categories.end(),
                           [&](const Category& c) { return c.label == a.label; });
    if (it == qset.categories.end()) throw Error(Errc::kParseError, "no samples labelled " + a.label);
    cat = &*it;
  }
  const std::size_t n = a.window == 0 ? cat->samples.cols() : std::min(a.window, cat->samples.cols());
  Matrix window(cat->samples.rows(), n);
  for (std::size_t j = 0; j < n; ++j) {
    std::copy(cat->samples.col(j).begin(), cat->samples.col(j).end(), window.col(j).begin());
  }
  const Subspace q(0, pca_basis(window, s.db->m()));

  const bool approx = a.measure == "apk" || a.measure == "agrbf";
  const bool apk_index = s.tag == IndexTag::kApkExact || s.tag == IndexTag::kApkHash;
  if (approx && !apk_index) {
    throw Error(Errc::kConfigMismatch,
                a.measure + " needs an apk index, got " + index_tag_name(s.tag));
  }

  std::vector<ScoredId> ranked;
  if (approx) {
    const std::size_t k = parse_k(a.k, score_exactness_budget(*s.anss));
    ranked = search(*s.anss, q, k,
                    a.measure == "apk" ? ApproxMeasure::apk() : ApproxMeasure::agrbf(a.beta), a.top);
  } else if (a.measure == "pk" && s.tag == IndexTag::kBhz) {
    // Lifted squared distance is 2m - 2 k_P; report the kernel.
    ranked = bhz_search(*s.lifted, q, a.top);
    for (ScoredId& e : ranked) e.score = static_cast<double>(s.db->m()) - e.score / 2.0;
  } else if (a.measure == "gd" && s.tag == IndexTag::kGlh) {
    ranked = s.glh->query(q, a.top).ranking;
  } else {
    const Measure m = a.measure == "gd"   ? Measure::geodesic()
                      : a.measure == "pk" ? Measure::projection_kernel()
                                          : Measure::grbf(a.beta);
    ranked = exact_nearest_subspaces(*s.db, q, m, a.top);
  }

  out << std::setprecision(17);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out << (i + 1) << ',' << ranked[i].id << ',' << ranked[i].score << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string train;
  std::string query;
  std::size_t m = 5;
  std::string methods = "pk,apk";
  std::string k_list = "1,budget";
  std::size_t repeats = kDefaultRepeats;
  std::uint64_t seed = 1;
  std::string out_csv;
  std::string backend = "exact";
  HashFlags hash;
  GlhFlags glh;
  double beta = kDefaultBeta;
  std::size_t window = 10;
  std::size_t threads = 1;
  bool warmup = false;
};

void print_summary(std::ostream& out, const std::vector<BenchRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, double> best;
  for (const BenchRecord& r : records) {
    auto [it, inserted] = best.emplace(r.method, r.top1_accuracy);
    if (inserted) order.push_back(r.method);
    it->second = std::max(it->second, r.top1_accuracy);
  }
  out << "best top-1 accuracy per method:\n";
  for (const std::string& m : order) out << "  " << m << ' ' << best[m] << '\n';

  auto pk = std::find_if(records.begin(), records.end(),
                         [](const BenchRecord& r) { return r.method == "PK"; });
  if (pk == records.end()) return;
  const BenchRecord* fastest = nullptr;
  for (const BenchRecord& r : records) {
    if (r.method != "APK" || r.top1_accuracy < pk->top1_accuracy) continue;
    if (fastest == nullptr || r.mean_query_seconds < fastest->mean_query_seconds) fastest = &r;
  }
  if (fastest == nullptr) {
    out << "no APK setting matched PK accuracy " << pk->top1_accuracy << '\n';
    return;
  }
  out << "APK vs PK at matched accuracy " << pk->top1_accuracy << ": k=" << *fastest->k
      << ", speedup " << pk->mean_query_seconds / fastest->mean_query_seconds << "x\n";
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  std::vector<Method> methods;
  for (const std::string& name : split(a.methods, ',')) {
    try {
      methods.push_back(parse_method(name));
    } catch (const Error&) {
      throw UsageError("unknown method '" + name + "'");
    }
  }
  if (methods.empty()) throw UsageError("empty --methods");
  if (a.threads == 0) throw UsageError("--threads must be at least 1");
  if (!(a.beta > 0.0)) throw UsageError("--beta must be positive");
  const BackendConfig backend = backend_from(a.backend, a.hash, a.seed);
  const GlhLayout layout = parse_layout(a.glh.layout);

  const SampleSet train = load_samples(a.train);
  const SampleSet query = load_samples(a.query);
  if (train.dim != query.dim) {
    throw Error(Errc::kDimensionMismatch, "train and query dimensions differ");
  }
  auto db = std::make_shared<const SubspaceDB>(build_subspace_db(train, a.m));
  const std::vector<std::size_t> ks =
      parse_k_list(a.k_list, score_exactness_budget(db->size(), db->m()));
  const BenchContext ctx(db, labels_of(train), make_query_subspaces(query, a.m, a.window), a.seed);
  if (ctx.queries().empty()) throw Error(Errc::kEmptyInput, "no query windows");
  ctx.pk_top1();  // computed before any worker starts

  // One cell per listed method; APK-type methods sweep the whole k list.
  std::vector<std::vector<BenchRecord>> cells(methods.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(methods.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < methods.size(); i = next++) {
      try {
        const Method m = methods[i];
        if (m == Method::kAPK || m == Method::kAGRBF) {
          cells[i] = sweep_k(ctx, ks, backend, {m}, a.repeats, a.beta);
        } else {
          MethodConfig cfg;
          cfg.method = m;
          cfg.beta = a.beta;
          cfg.repeats = a.repeats;
          cfg.warmup = a.warmup;
          cfg.glh = glh_params_from(a.glh.s, a.glh.k, layout, a.seed);
          cfg.glh_s = a.glh.s;
          cfg.glh_k = a.glh.k;
          cells[i] = {evaluate(cfg, ctx)};
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min(a.threads, methods.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<BenchRecord> records;
  for (auto& c : cells) records.insert(records.end(), c.begin(), c.end());
  std::ofstream csv(a.out_csv, std::ios::binary);
  if (!csv) throw Error(Errc::kIoError, "cannot write " + a.out_csv);
  write_bench_csv(csv, records);
  csv.flush();
  if (!csv) throw Error(Errc::kIoError, "write failed: " + a.out_csv);
  print_summary(out, records);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nearest subspace search on the Grassmannian", "gsanss"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "Generate synthetic train/query sample CSVs");
  g->add_option("--nsub", gen.params.num_subspaces, "Categories")->capture_default_str();
  g->add_option("--dim", gen.params.dim, "Dimension D")->capture_default_str();
  g->add_option("--m", gen.params.m, "Hidden subspace dimension")->capture_default_str();
  g->add_option("--ntrain", gen.params.n_train, "Training samples per category")
      ->capture_default_str();
  g->add_option("--nquery-sets", gen.params.n_query_sets, "Query windows per category")
      ->capture_default_str();
  g->add_option("--window", gen.params.query_window, "Samples per query window")
      ->capture_default_str();
  g->add_option("--noise", gen.params.noise, "Per-coordinate noise standard deviation")
      ->capture_default_str();
  g->add_option("--seed", gen.params.seed, "Master seed")->capture_default_str();
  g->add_option("--out-train", gen.out_train, "Training CSV")->required();
  g->add_option("--out-query", gen.out_query, "Query CSV")->required();

  IndexArgs idx;
  CLI::App* ix = app.add_subcommand("index", "Build and save a search index");
  ix->add_option("--train", idx.train, "Training CSV")->required();
  ix->add_option("--m", idx.m, "Subspace dimension")->capture_default_str();
  ix->add_option("--method", idx.method, "apk, bhz or glh")->capture_default_str();
  ix->add_option("--backend", idx.backend, "exact or hash (apk only)")->capture_default_str();
  add_hash_flags(ix, idx.hash);
  add_glh_flags(ix, idx.glh);
  ix->add_option("--seed", idx.seed, "Master seed")->capture_default_str();
  ix->add_option("--out", idx.out, "Index file")->required();

  SearchArgs sa;
  CLI::App* se = app.add_subcommand("search", "Query a saved index");
  se->add_option("--index", sa.index, "Index file")->required();
  se->add_option("--query", sa.query, "Query sample CSV")->required();
  se->add_option("--k", sa.k, "Neighbours per query column, or 'budget'")->capture_default_str();
  se->add_option("--measure", sa.measure, "gd, pk, grbf, apk or agrbf")->capture_default_str();
  se->add_option("--beta", sa.beta, "GRBF / AGRBF beta")->capture_default_str();
  se->add_option("--top", sa.top, "Results to print")->capture_default_str();
  se->add_option("--label", sa.label, "Query category (default: first in file)");
  se->add_option("--window", sa.window, "Use the first N samples (0: all)")->capture_default_str();

  BenchArgs ba;
  CLI::App* be = app.add_subcommand("bench", "Accuracy and latency sweep");
  be->add_option("--train", ba.train, "Training CSV")->required();
  be->add_option("--query", ba.query, "Query CSV")->required();
  be->add_option("--m", ba.m, "Subspace dimension")->capture_default_str();
  be->add_option("--methods", ba.methods, "Comma list of gd,pk,grbf,bhz,glh,apk,agrbf")
      ->capture_default_str();
  be->add_option("--k-list", ba.k_list, "Ascending k values; 'budget' allowed")
      ->capture_default_str();
  be->add_option("--repeats", ba.repeats, "Timed passes over the query batch")
      ->capture_default_str();
  be->add_option("--seed", ba.seed, "Master seed")->capture_default_str();
  be->add_option("--out-csv", ba.out_csv, "Result CSV")->required();
  be->add_option("--backend", ba.backend, "exact or hash")->capture_default_str();
  add_hash_flags(be, ba.hash);
  add_glh_flags(be, ba.glh);
  be->add_option("--beta", ba.beta, "GRBF / AGRBF beta")->capture_default_str();
  be->add_option("--window", ba.window, "Query samples per window")->capture_default_str();
  be->add_option("--threads", ba.threads, "Parallel method cells")->capture_default_str();
  be->add_flag("--warmup", ba.warmup, "Run one untimed pass first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*ix) return cmd_index(idx, err);
    if (*se) return cmd_search(sa, out);
    if (*be) return cmd_bench(ba, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gsanss::cli
