#pragma once

// Small dense linear algebra: what principal angles, projection kernels
// and PCA subspaces need, and nothing more.

#include <cstddef>
#include <span>
#include <vector>

namespace gsanss {

/// Numerical thresholds shared by the linear-algebra routines.
struct LinalgConfig {
  double orthonormal_tol = 1e-10;   // max |R^T R - I| accepted as orthonormal
  double rank_residual = 1e-12;     // Gram-Schmidt residual norm below this is rank loss
  double pca_rank_rel = 1e-12;      // eigenvalue / largest below this counts as zero
  int jacobi_max_sweeps = 100;
  double jacobi_tol = 1e-12;        // relative off-diagonal threshold per column pair
};

inline constexpr LinalgConfig kDefaultLinalg{};

/// Column-major matrix of doubles; column j is a contiguous run of rows().
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of column-major data; throws kInvalidParams on a size
  /// mismatch and kNonFinite on NaN/inf entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_columns(const std::vector<std::vector<double>>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const {
    return {data_.data() + c * rows_, rows_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  /// Plain product this * rhs.
  Matrix multiply(const Matrix& rhs) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Singular values, sorted non-increasing.
struct SingularSpectrum {
  std::vector<double> values;
};

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double frobenius_norm_sq(const Matrix& m) noexcept;

/// max |M^T M - I| over all entries.
double orthonormality_error(const Matrix& m);

/// Flips each column so that its largest-magnitude entry (first on ties) is
/// positive.
void apply_sign_convention(Matrix& m);

/// Orthonormal basis of span(M) via twice-iterated modified Gram-Schmidt,
/// with the column sign convention applied. An input that already passes
/// the orthonormality check is returned with only the sign convention
/// applied, which makes the operation idempotent bit for bit.
Matrix orthonormalize(const Matrix& m, const LinalgConfig& cfg = kDefaultLinalg);

/// One-sided Jacobi singular values of a small square matrix.
SingularSpectrum singular_values(const Matrix& m, const LinalgConfig& cfg = kDefaultLinalg);

struct PcaOptions {
  bool subtract_mean = false;  // default is autocorrelation PCA
};

/// Top-m eigenvectors of the autocorrelation matrix (1/n) sum x x^T of the
/// sample columns of `samples` (D x n), eigenvalue-descending, orthonormal,
/// sign convention applied.
Matrix pca_basis(const Matrix& samples, std::size_t m, const PcaOptions& opts = {},
                 const LinalgConfig& cfg = kDefaultLinalg);

/// (P^T Q)[s][t] = p_s . q_t for two D x m bases.
Matrix cross_gram(const Matrix& p, const Matrix& q);

}  // namespace gsanss
