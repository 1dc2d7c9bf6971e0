// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Every criterion also emits a CSV (timing
// columns blank); the last criterion reruns the others and compares them.
//
//   acceptance [--out-dir DIR] [--only N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gsanss/anss.hpp"
#include "gsanss/baselines.hpp"
#include "gsanss/bench.hpp"
#include "gsanss/grassmann.hpp"
#include "gsanss/linalg.hpp"
#include "gsanss/random.hpp"

namespace {

using namespace gsanss;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string csv;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  NormalSampler normal;
  Matrix m(rows, cols);
  for (double& x : m.data()) x = normal(rng);
  return m;
}

Subspace random_subspace(std::size_t dim, std::size_t m, Rng& rng) {
  return Subspace(1, orthonormalize(random_matrix(dim, m, rng)));
}

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
  NormalSampler normal;
  std::vector<double> v(dim);
  double s = 0.0;
  for (double& x : v) {
    x = normal(rng);
    s += x * x;
  }
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

struct Instance {
  std::shared_ptr<const SubspaceDB> db;
  std::vector<std::string> labels;
  std::vector<QuerySubspace> queries;
};

Instance synthetic(const SyntheticParams& p) {
  const auto [train, query] = gen_synthetic(p);
  Instance inst;
  inst.db = std::make_shared<const SubspaceDB>(build_subspace_db(train, p.m));
  for (const Category& c : train.categories) inst.labels.push_back(c.label);
  inst.queries = make_query_subspaces(query, p.m, p.query_window);
  return inst;
}

std::string records_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream os;
  write_bench_csv(os, records, /*with_timing=*/false);
  return os.str();
}

// ------------------------------------------------------------------ 1

Outcome exactness_at_budget() {
  std::ostringstream csv;
  csv << "N_sub,D,m,seed,queries,max_abs_score_diff,ranking_mismatches\n";
  std::size_t total = 0, mismatches = 0;
  double worst = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t nsub : {20U, 80U}) {
    for (std::size_t dim : {16U, 64U}) {
      for (std::size_t m : {3U, 5U, 7U}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
          SyntheticParams p;
          p.num_subspaces = nsub;
          p.dim = dim;
          p.m = m;
          p.seed = seed;
          const Instance inst = synthetic(p);
          const AnssIndex index = index_database(inst.db, BackendConfig::exact());
          const std::size_t budget = score_exactness_budget(index);
          ScoreTable scratch;
          double diff = 0.0;
          std::size_t bad = 0;
          for (const QuerySubspace& q : inst.queries) {
            const auto apk = search(index, q.subspace, budget, ApproxMeasure::apk(), nsub, scratch);
            const auto pk = exact_nearest_subspaces(*inst.db, q.subspace,
                                                    Measure::projection_kernel(), nsub);
            bool same = apk.size() == pk.size();
            for (std::size_t i = 0; same && i < pk.size(); ++i) {
              same = apk[i].id == pk[i].id;
              diff = std::max(diff, std::abs(apk[i].score - pk[i].score));
            }
            if (!same) ++bad;
          }
          csv << nsub << ',' << dim << ',' << m << ',' << seed << ',' << inst.queries.size() << ','
              << csv_num(diff) << ',' << bad << '\n';
          total += inst.queries.size();
          mismatches += bad;
          worst = std::max(worst, diff);
        }
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Outcome o;
  o.pass = mismatches == 0 && worst <= 1e-9 && secs < 60.0;
  o.detail = std::to_string(total) + " queries over 240 instances, " + std::to_string(mismatches) +
             " ranking mismatches, max |score diff| " + fmt(worst) + ", " + fmt(secs) + " s";
  o.csv = csv.str();
  return o;
}

// ------------------------------------------------------------------ 2

Outcome kernel_identities() {
  Rng rng(derive_seed(2, "kernel-identities"));
  std::uniform_int_distribution<std::size_t> pick_m(1, 8);
  double worst_sum = 0.0, worst_self_gd = 0.0, worst_self_kp = 0.0;
  bool angles_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = pick_m(rng);
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(m, 64)(rng);
    const Subspace a = random_subspace(dim, m, rng);
    const Subspace b = random_subspace(dim, m, rng);
    const double dp = projection_metric(a, b);
    worst_sum = std::max(worst_sum, std::abs(dp * dp + projection_kernel(a, b) - double(m)));
    worst_self_gd = std::max(worst_self_gd, geodesic_distance(a, a));
    worst_self_kp = std::max(worst_self_kp, std::abs(projection_kernel(a, a) - double(m)));
    for (double t : principal_angles(a, b).angles) {
      angles_ok = angles_ok && t >= 0.0 && t <= std::numbers::pi / 2;
    }
  }
  Outcome o;
  o.pass = worst_sum <= 1e-9 && worst_self_gd <= 1e-9 && worst_self_kp <= 1e-9 && angles_ok;
  o.detail = "1000 pairs: max |d_P^2 + k_P - m| " + fmt(worst_sum) + ", max d_G(Y,Y) " +
             fmt(worst_self_gd) + ", max |k_P(Y,Y) - m| " + fmt(worst_self_kp) +
             (angles_ok ? ", angles in range" : ", ANGLE OUT OF RANGE");
  o.csv = "max_pm_identity_error,max_self_geodesic,max_self_kernel_error,angles_in_range\n" +
          csv_num(worst_sum) + ',' + csv_num(worst_self_gd) + ',' + csv_num(worst_self_kp) + ',' +
          (angles_ok ? "1" : "0") + '\n';
  return o;
}

// ------------------------------------------------------------------ 3

std::vector<SubspaceId> ids(const std::vector<ScoredId>& r) {
  std::vector<SubspaceId> out;
  for (const ScoredId& e : r) out.push_back(e.id);
  return out;
}

Outcome rank_invariances() {
  std::size_t exact_cmp = 0, exact_bad = 0, approx_cmp = 0, approx_bad = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticParams p;
    p.num_subspaces = 60;
    p.dim = 32;
    p.m = 4;
    p.seed = seed;
    const Instance inst = synthetic(p);
    const std::size_t n = inst.db->size();
    const AnssIndex exact = index_database(inst.db, BackendConfig::exact());
    const AnssIndex hashed = index_database(inst.db, BackendConfig::hashed());
    for (const QuerySubspace& q : inst.queries) {
      const auto pk = ids(exact_nearest_subspaces(*inst.db, q.subspace, Measure::projection_kernel(), n));
      for (double beta : {0.5, 1.0, 2.0}) {
        ++exact_cmp;
        if (ids(exact_nearest_subspaces(*inst.db, q.subspace, Measure::grbf(beta), n)) != pk) ++exact_bad;
      }
      for (const AnssIndex* index : {&exact, &hashed}) {
        for (std::size_t k : {1U, 10U, 120U}) {
          const auto apk = ids(search(*index, q.subspace, k, ApproxMeasure::apk(), n));
          for (double beta : {0.5, 1.0, 2.0}) {
            ++approx_cmp;
            if (ids(search(*index, q.subspace, k, ApproxMeasure::agrbf(beta), n)) != apk) ++approx_bad;
          }
        }
      }
    }
  }

  Rng rng(derive_seed(3, "rotations"));
  double worst_rot = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial) % 8;
    const std::size_t dim = m + 2 + static_cast<std::size_t>(trial) % 50;
    const Subspace a = random_subspace(dim, m, rng);
    const Subspace b = random_subspace(dim, m, rng);
    const Subspace ar(1, a.basis().multiply(orthonormalize(random_matrix(m, m, rng))));
    const auto track = [&](double x, double y) { worst_rot = std::max(worst_rot, std::abs(x - y)); };
    track(geodesic_distance(a, b), geodesic_distance(ar, b));
    track(projection_metric(a, b), projection_metric(ar, b));
    track(projection_kernel(a, b), projection_kernel(ar, b));
    track(grbf_kernel(a, b, 1.0), grbf_kernel(ar, b, 1.0));
    const auto t1 = principal_angles(a, b).angles;
    const auto t2 = principal_angles(ar, b).angles;
    for (std::size_t i = 0; i < m; ++i) track(t1[i], t2[i]);
  }

  Outcome o;
  o.pass = exact_bad == 0 && approx_bad == 0 && worst_rot <= 1e-9;
  o.detail = "PK/GRBF " + std::to_string(exact_cmp - exact_bad) + "/" + std::to_string(exact_cmp) +
             " identical, APK/AGRBF " + std::to_string(approx_cmp - approx_bad) + "/" +
             std::to_string(approx_cmp) + " identical, max rotation change " + fmt(worst_rot);
  o.csv = "pk_grbf_comparisons,pk_grbf_differences,apk_agrbf_comparisons,apk_agrbf_differences,"
          "max_rotation_change\n" +
          std::to_string(exact_cmp) + ',' + std::to_string(exact_bad) + ',' +
          std::to_string(approx_cmp) + ',' + std::to_string(approx_bad) + ',' + csv_num(worst_rot) +
          '\n';
  return o;
}

// ------------------------------------------------------------------ 4

Outcome bhz_isometry() {
  Rng rng(derive_seed(4, "bhz"));
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial) % 8;
    const std::size_t dim = m + static_cast<std::size_t>(trial) % 40;
    const Subspace a = random_subspace(dim, m, rng);
    const Subspace b = random_subspace(dim, m, rng);
    const auto la = bhz_lift(a).coords;
    const auto lb = bhz_lift(b).coords;
    double d = 0.0;
    for (std::size_t i = 0; i < la.size(); ++i) d += (la[i] - lb[i]) * (la[i] - lb[i]);
    worst = std::max(worst, std::abs(d - (2.0 * double(m) - 2.0 * projection_kernel(a, b))));
  }
  std::size_t compared = 0, differ = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticParams p;
    p.num_subspaces = 50;
    p.dim = 24;
    p.m = 3;
    p.seed = seed;
    const Instance inst = synthetic(p);
    const LiftedDb lifted = bhz_lift_database(*inst.db);
    for (const QuerySubspace& q : inst.queries) {
      ++compared;
      if (ids(bhz_search(lifted, q.subspace, 50)) !=
          ids(exact_nearest_subspaces(*inst.db, q.subspace, Measure::projection_kernel(), 50))) {
        ++differ;
      }
    }
  }
  Outcome o;
  o.pass = worst <= 1e-9 && differ == 0;
  o.detail = "1000 pairs: max |lifted d^2 - (2m - 2k_P)| " + fmt(worst) + "; " +
             std::to_string(compared - differ) + "/" + std::to_string(compared) +
             " bhz_search permutations identical to PK";
  o.csv = "max_isometry_error,permutations,permutation_differences\n" + csv_num(worst) + ',' +
          std::to_string(compared) + ',' + std::to_string(differ) + '\n';
  return o;
}

// ------------------------------------------------------------------ 5

Outcome column_sum_bound() {
  Rng rng(derive_seed(5, "column-bound"));
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const std::size_t m = 1 + static_cast<std::size_t>(pair) % 8;
    const std::size_t dim = m + static_cast<std::size_t>(pair) % 57;
    std::vector<Matrix> bases;
    for (int i = 0; i < 20; ++i) bases.push_back(orthonormalize(random_matrix(dim, m, rng)));
    const SubspaceDB db = SubspaceDB::from_bases(std::move(bases));
    const Subspace q = random_subspace(dim, m, rng);
    for (const Subspace& p : db) {
      const Matrix g = cross_gram(p.basis(), q.basis());
      for (std::size_t l = 0; l < m; ++l) {
        double s = 0.0;
        for (std::size_t e = 0; e < m; ++e) s += g(e, l) * g(e, l);
        worst = std::max(worst, s);
      }
    }
  }
  Outcome o;
  o.pass = worst <= 1.0 + 1e-8;
  o.detail = "100 db/query pairs: max column sum " + fmt(worst, 17);
  o.csv = "max_column_sum\n" + csv_num(worst) + '\n';
  return o;
}

// ------------------------------------------------------------------ 6

Outcome inner_product_recovery() {
  Rng rng(derive_seed(6, "recovery"));
  double worst = 0.0;
  std::size_t pairs = 0;
  for (int batch = 0; batch < 100; ++batch) {
    std::vector<VectorRecord> recs;
    std::vector<std::vector<double>> vecs;
    for (std::uint32_t i = 0; i < 100; ++i) {
      vecs.push_back(random_unit(32, rng));
      recs.push_back({i + 1, 1, vecs.back()});
    }
    const auto index = build_exact(std::move(recs));
    for (int qi = 0; qi < 10; ++qi) {
      const auto q = random_unit(32, rng);
      for (const NeighborHit& h : index->knn(q, 100)) {
        const auto& v = vecs[h.subspace_id - 1];
        double direct = 0.0;
        for (std::size_t d = 0; d < q.size(); ++d) direct += q[d] * v[d];
        worst = std::max(worst, std::abs(inner_product_from_sqdist(h.sq_dist) - direct));
        ++pairs;
      }
    }
  }
  Outcome o;
  o.pass = pairs == 100000 && worst <= 1e-10;
  o.detail = std::to_string(pairs) + " pairs: max |recovered - direct| " + fmt(worst);
  o.csv = "pairs,max_error\n" + std::to_string(pairs) + ',' + csv_num(worst) + '\n';
  return o;
}

// ------------------------------------------------------------------ 7

Outcome monotone_accuracy() {
  const std::size_t budget = score_exactness_budget(100, 5);
  const std::vector<std::size_t> ks = {1, budget / 8, budget / 4, budget / 2, budget};
  std::vector<double> mean(ks.size(), 0.0);
  double pk_mean = 0.0;
  bool budget_equal = true;
  std::vector<BenchRecord> all;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SyntheticParams p;
    p.seed = seed;
    const Instance inst = synthetic(p);
    const BenchContext ctx(inst.db, inst.labels, inst.queries, seed);
    const double pk = ctx.accuracy(ctx.pk_top1());
    pk_mean += pk / 20.0;
    const auto recs = sweep_k(ctx, ks, BackendConfig::exact(), {Method::kAPK}, 1);
    for (std::size_t i = 0; i < ks.size(); ++i) mean[i] += recs[i].top1_accuracy / 20.0;
    budget_equal = budget_equal && recs.back().top1_accuracy == pk;
    all.insert(all.end(), recs.begin(), recs.end());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ks.size(); ++i) monotone = monotone && mean[i] >= mean[i - 1] - 0.01;
  std::string curve;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    curve += (i ? ", " : "") + std::string("k=") + std::to_string(ks[i]) + ":" + fmt(mean[i], 4);
  }
  Outcome o;
  o.pass = monotone && budget_equal;
  o.detail = "mean accuracy over 20 seeds " + curve + "; PK " + fmt(pk_mean, 4) +
             (budget_equal ? ", budget equals PK on every seed" : ", BUDGET DIFFERS FROM PK");
  o.csv = records_csv(all);
  return o;
}

// ------------------------------------------------------------------ 8

Outcome self_relative_speedup() {
  SyntheticParams p;
  p.num_subspaces = 3036;
  p.dim = 1024;
  p.m = 5;
  p.n_train = 20;
  p.n_query_sets = 1;
  p.query_window = 10;
  p.noise = 0.02;
  p.seed = 8;
  // One category at a time; every third category contributes a query.
  const SyntheticGenerator gen(p);
  std::vector<Matrix> bases;
  std::vector<std::string> labels;
  std::vector<QuerySubspace> queries;
  for (std::size_t c = 0; c < p.num_subspaces; ++c) {
    CategoryDraw d = gen.draw(c);
    bases.push_back(pca_basis(d.train, p.m));
    labels.push_back(SyntheticGenerator::label(c));
    if (c % 3 == 0) queries.push_back({labels.back(), Subspace(0, pca_basis(d.query, p.m))});
  }
  auto db = std::make_shared<const SubspaceDB>(SubspaceDB::from_bases(std::move(bases)));
  const BenchContext ctx(db, labels, std::move(queries), p.seed);

  constexpr std::size_t kRepeats = 3;
  MethodConfig pk;
  pk.method = Method::kPK;
  pk.repeats = kRepeats;
  const BenchRecord pk_rec = evaluate(pk, ctx);
  const auto recs = sweep_k(ctx, {1, 10, 100}, BackendConfig::hashed(), {Method::kAPK}, kRepeats);

  const BenchRecord* best = nullptr;
  std::string detail;
  for (const BenchRecord& r : recs) {
    const double ratio = r.mean_query_seconds / pk_rec.mean_query_seconds;
    detail += " k=" + std::to_string(*r.k) + ": recall " + fmt(r.recall_vs_pk, 4) + ", time x" +
              fmt(ratio, 3) + ";";
    if (r.recall_vs_pk >= 0.99 && ratio <= 0.5 && best == nullptr) best = &r;
  }
  std::vector<BenchRecord> all = {pk_rec};
  all.insert(all.end(), recs.begin(), recs.end());
  Outcome o;
  o.pass = best != nullptr;
  o.detail = std::to_string(ctx.queries().size()) + " queries, PK " +
             fmt(pk_rec.mean_query_seconds * 1e3) + " ms/query (accuracy " +
             fmt(pk_rec.top1_accuracy, 4) + ");" + detail;
  o.csv = records_csv(all);
  return o;
}

// ------------------------------------------------------------------ 9

Outcome glh_degeneracy() {
  SyntheticParams p;
  p.num_subspaces = 500;
  p.dim = 1024;
  p.m = 5;
  p.n_query_sets = 1;
  p.seed = 9;
  const SyntheticGenerator gen(p);
  std::vector<Matrix> bases;
  std::vector<std::string> labels;
  std::vector<QuerySubspace> queries;
  for (std::size_t c = 0; c < p.num_subspaces; ++c) {
    CategoryDraw d = gen.draw(c);
    bases.push_back(pca_basis(d.train, p.m));
    labels.push_back(SyntheticGenerator::label(c));
    if (c % 5 == 0) queries.push_back({labels.back(), Subspace(0, pca_basis(d.query, p.m))});
  }
  auto db = std::make_shared<const SubspaceDB>(SubspaceDB::from_bases(std::move(bases)));
  const BenchContext ctx(db, labels, std::move(queries), p.seed);

  double worst_fraction = 0.0, worst_rate = 1.0;
  std::vector<BenchRecord> all;
  std::string detail;
  for (auto [s, k] : {std::pair{100U, 1U}, {100U, 3U}, {100U, 5U}, {500U, 3U}}) {
    MethodConfig cfg;
    cfg.method = Method::kGLH;
    cfg.glh = glh_params_from(s, k, GlhLayout::kTablesOfK, p.seed);
    cfg.glh_s = s;
    cfg.glh_k = k;
    cfg.repeats = 1;
    const BenchRecord r = evaluate(cfg, ctx);
    const double fraction = GlhIndex(db, cfg.glh).one_bit_fraction();
    const double rate = double(r.fallbacks) / double(r.queries);
    worst_fraction = std::max(worst_fraction, fraction);
    worst_rate = std::min(worst_rate, rate);
    detail += " S=" + std::to_string(s) + ",K=" + std::to_string(k) + ": 1-bits " +
              fmt(fraction * 100, 3) + "%, full scans " + fmt(rate * 100, 4) + "%;";
    all.push_back(r);
  }
  std::ostringstream csv;
  csv << records_csv(all) << "max_one_bit_fraction,min_full_scan_rate\n"
      << csv_num(worst_fraction) << ',' << csv_num(worst_rate) << '\n';
  Outcome o;
  o.pass = worst_fraction < 0.01 && worst_rate > 0.9;
  o.detail = "D=1024, 500 subspaces, " + std::to_string(ctx.queries().size()) + " queries;" + detail;
  o.csv = csv.str();
  return o;
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out-dir" && i + 1 < argc) {
      out_dir = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--out-dir DIR] [--only N]\n";
      return 2;
    }
  }
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  const std::vector<Criterion> criteria = {
      {1, "exactness at budget", exactness_at_budget},
      {2, "kernel identities", kernel_identities},
      {3, "rank invariances", rank_invariances},
      {4, "BHZ lift isometry", bhz_isometry},
      {5, "column-sum bound", column_sum_bound},
      {6, "inner product recovery", inner_product_recovery},
      {7, "monotone accuracy in k", monotone_accuracy},
      {8, "self-relative speedup", self_relative_speedup},
      {9, "GLH degeneracy", glh_degeneracy},
  };

  int failures = 0;
  std::vector<std::string> first_csv;
  std::vector<const Criterion*> ran;
  for (const Criterion& c : criteria) {
    if (only != 0 && only != c.number && only != 10) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.number << "] " << c.name << ": "
              << o.detail << " (" << fmt(secs) << " s)" << std::endl;
    if (!o.pass) ++failures;
    if (!out_dir.empty()) {
      std::ofstream(out_dir + "/criterion" + std::to_string(c.number) + ".csv") << o.csv;
    }
    first_csv.push_back(o.csv);
    ran.push_back(&c);
  }

  if (only == 0 || only == 10) {
    std::size_t identical = 0;
    std::string differing;
    for (std::size_t i = 0; i < ran.size(); ++i) {
      std::string again;
      try {
        again = ran[i]->run().csv;
      } catch (const std::exception&) {
      }
      if (!first_csv[i].empty() && again == first_csv[i]) {
        ++identical;
      } else {
        differing += " " + std::to_string(ran[i]->number);
      }
    }
    const bool pass = identical == ran.size();
    std::cout << (pass ? "PASS" : "FAIL") << " [10] determinism: " << identical << "/" << ran.size()
              << " criterion CSVs bit-identical on rerun"
              << (differing.empty() ? "" : " (differ:" + differing + ")") << std::endl;
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
