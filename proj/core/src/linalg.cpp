#include "gsanss/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "gsanss/error.hpp"

namespace gsanss {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(Errc::kInvalidParams, "matrix data length " + std::to_string(data_.size()) +
                                          " != " + std::to_string(rows_) + "x" +
                                          std::to_string(cols_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(Errc::kNonFinite, "matrix entry is not finite");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return {};
  const std::size_t rows = columns.front().size();
  std::vector<double> data;
  data.reserve(rows * columns.size());
  for (const auto& c : columns) {
    if (c.size() != rows) throw Error(Errc::kDimensionMismatch, "ragged column list");
    data.insert(data.end(), c.begin(), c.end());
  }
  return Matrix(rows, columns.size(), std::move(data));
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) out(c, r) = (*this)(r, c);
  return out;
}

Matrix Matrix::multiply(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw Error(Errc::kDimensionMismatch, "multiply: inner sizes differ");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t j = 0; j < rhs.cols_; ++j) {
    auto dst = out.col(j);
    for (std::size_t k = 0; k < cols_; ++k) {
      const double w = rhs(k, j);
      if (w == 0.0) continue;
      auto src = col(k);
      for (std::size_t i = 0; i < rows_; ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

double frobenius_norm_sq(const Matrix& m) noexcept {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

double orthonormality_error(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t j = i; j < m.cols(); ++j) {
      const double g = dot(m.col(i), m.col(j)) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

void apply_sign_convention(Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    auto col = m.col(c);
    std::size_t best = 0;
    for (std::size_t r = 1; r < col.size(); ++r) {
      if (std::abs(col[r]) > std::abs(col[best])) best = r;
    }
    if (!col.empty() && col[best] < 0.0) {
      for (double& v : col) v = -v;
    }
  }
}

Matrix orthonormalize(const Matrix& m, const LinalgConfig& cfg) {
  if (m.cols() > m.rows()) {
    throw Error(Errc::kRankDeficient, "more columns than rows: " + std::to_string(m.cols()) +
                                          " > " + std::to_string(m.rows()));
  }
  Matrix out = m;
  if (orthonormality_error(out) <= cfg.orthonormal_tol) {
    apply_sign_convention(out);
    return out;
  }
  for (std::size_t j = 0; j < out.cols(); ++j) {
    auto v = out.col(j);
    double norm = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        auto r = out.col(i);
        const double proj = dot(r, v);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= proj * r[k];
      }
      norm = std::sqrt(dot(v, v));
      if (norm < cfg.rank_residual) {
        throw Error(Errc::kRankDeficient,
                    "column " + std::to_string(j) + " is linearly dependent on earlier columns");
      }
      for (double& x : v) x /= norm;
    }
  }
  apply_sign_convention(out);
  return out;
}

SingularSpectrum singular_values(const Matrix& m, const LinalgConfig& cfg) {
  if (m.empty()) throw Error(Errc::kInvalidParams, "singular_values of an empty matrix");
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw Error(Errc::kNonFinite, "singular_values: non-finite entry");
  }
  // Rotate columns of A until pairwise orthogonal; the column norms are then
  // the singular values.
  Matrix a = m.rows() >= m.cols() ? m : m.transpose();
  const std::size_t n = a.cols();
  bool converged = n < 2;
  for (int sweep = 0; sweep < cfg.jacobi_max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto ap = a.col(p);
        auto aq = a.col(q);
        const double alpha = dot(ap, ap);
        const double beta = dot(aq, aq);
        const double gamma = dot(ap, aq);
        if (gamma == 0.0 || std::abs(gamma) <= cfg.jacobi_tol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t k = 0; k < ap.size(); ++k) {
          const double x = ap[k];
          const double y = aq[k];
          ap[k] = c * x - s * y;
          aq[k] = s * x + c * y;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw Error(Errc::kNoConvergence, "one-sided Jacobi exceeded " +
                                          std::to_string(cfg.jacobi_max_sweeps) + " sweeps");
  }
  SingularSpectrum out;
  out.values.reserve(n);
  for (std::size_t j = 0; j < n; ++j) out.values.push_back(std::sqrt(dot(a.col(j), a.col(j))));
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

Matrix pca_basis(const Matrix& samples, std::size_t m, const PcaOptions& opts,
                 const LinalgConfig& cfg) {
  const std::size_t dim = samples.rows();
  const std::size_t n = samples.cols();
  if (m == 0 || m > dim) throw Error(Errc::kInvalidParams, "pca_basis: need 1 <= m <= D");
  if (n < m) {
    throw Error(Errc::kRankDeficient, "pca_basis: " + std::to_string(n) + " samples for m=" +
                                          std::to_string(m));
  }

  Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(samples.data().data(),
                                                        static_cast<Eigen::Index>(dim),
                                                        static_cast<Eigen::Index>(n));
  if (opts.subtract_mean) x.colwise() -= x.rowwise().mean();

  // With fewer samples than dimensions, solve the n x n Gram problem and map
  // eigenvectors back through X; both share the nonzero spectrum.
  const bool dual = n < dim;
  Eigen::MatrixXd sym = dual ? Eigen::MatrixXd(x.transpose() * x) : Eigen::MatrixXd(x * x.transpose());
  sym /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::kNoConvergence, "pca_basis: symmetric eigen-solve failed");
  }
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& evecs = solver.eigenvectors();
  const Eigen::Index top = evals.size() - 1;
  const double largest = evals(top);
  if (!(largest > 0.0)) throw Error(Errc::kRankDeficient, "pca_basis: all samples are zero");
  const double floor = cfg.pca_rank_rel * largest;

  Matrix basis(dim, m);
  for (std::size_t j = 0; j < m; ++j) {
    const Eigen::Index idx = top - static_cast<Eigen::Index>(j);
    const double lambda = evals(idx);
    if (!(lambda > floor)) {
      throw Error(Errc::kRankDeficient, "pca_basis: only " + std::to_string(j) +
                                            " nonzero eigenvalues, need " + std::to_string(m));
    }
    Eigen::Map<Eigen::VectorXd> dst(basis.col(j).data(), static_cast<Eigen::Index>(dim));
    if (dual) {
      dst = x * evecs.col(idx);
      dst /= dst.norm();
    } else {
      dst = evecs.col(idx);
    }
  }
  return orthonormalize(basis, cfg);
}

Matrix cross_gram(const Matrix& p, const Matrix& q) {
  if (p.rows() != q.rows()) {
    throw Error(Errc::kDimensionMismatch, "cross_gram: D " + std::to_string(p.rows()) +
                                              " vs " + std::to_string(q.rows()));
  }
  Matrix out(p.cols(), q.cols());
  for (std::size_t t = 0; t < q.cols(); ++t)
    for (std::size_t s = 0; s < p.cols(); ++s) out(s, t) = dot(p.col(s), q.col(t));
  return out;
}

}  // namespace gsanss
