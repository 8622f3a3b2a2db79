#ifndef DIAGOSC_BASIS_HPP
#define DIAGOSC_BASIS_HPP

// Orthonormal bases of the complement of the uniform direction, and the
// change of variables theta = v * 1 + W u between oscillator phases and
// (time-like coordinate, phase deviations).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "diagosc/errors.hpp"

namespace diagosc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The unit vector (1/sqrt(n), ..., 1/sqrt(n)).
inline Vector uniform_direction(int n) {
  return Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
}

/// An n x (n-1) matrix whose columns are meant to be an orthonormal basis of
/// the subspace orthogonal to the uniform direction. Shape is enforced on
/// construction; the orthonormality itself is checked by validate_basis.
class BasisMatrix {
 public:
  BasisMatrix() = default;

  explicit BasisMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 2) {
      throw DimensionError("basis needs at least 2 rows, got " + std::to_string(entries_.rows()));
    }
    if (entries_.cols() != entries_.rows() - 1) {
      throw DimensionError("basis must be N x (N-1), got " + std::to_string(entries_.rows()) +
                           " x " + std::to_string(entries_.cols()));
    }
  }

  int n() const { return static_cast<int>(entries_.rows()); }
  int modes() const { return static_cast<int>(entries_.cols()); }
  const Matrix& entries() const { return entries_; }
  double operator()(int row, int col) const { return entries_(row, col); }
  auto column(int k) const { return entries_.col(k); }

 private:
  Matrix entries_;
};

namespace detail {

// sin(2 pi r / n) + cos(2 pi r / n) with r reduced mod n first, so large
// products j*k do not lose accuracy in the argument.
inline double cas_entry(long long j, long long k, long long n) {
  const long long r = (j * k) % n;
  const double x = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
  return std::sin(x) + std::cos(x);
}

}  // namespace detail

/// W_jk = (sin(2 pi jk/n) + cos(2 pi jk/n)) / sqrt(n), j = 1..n, k = 1..n-1.
inline BasisMatrix build_fourier_basis(int n) {
  if (n < 2) {
    throw DimensionError("build_fourier_basis: n must be >= 2, got " + std::to_string(n));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix w(n, n - 1);
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n - 1; ++k) {
      w(j - 1, k - 1) = scale * detail::cas_entry(j, k, n);
    }
  }
  return BasisMatrix(std::move(w));
}

struct ValidationReport {
  int n = 0;
  double tolerance = 0.0;
  double orthonormality_error = 0.0;   // max |W^T W - I|
  double uniform_overlap = 0.0;        // max |1^T W|
  double max_entry = 0.0;              // ||W||_inf (max absolute entry)
  // Every row has pairwise distinct entries: W_ki != W_kj for i != j.
  bool row_distinct = false;
  // Every column has pairwise distinct entries: W_ik != W_jk for i != j.
  // This is the form the partial-coherence argument actually consumes.
  bool column_distinct = false;

  bool orthonormal() const { return orthonormality_error <= tolerance; }
  bool orthogonal_to_uniform() const { return uniform_overlap <= tolerance; }
  bool valid() const { return orthonormal() && orthogonal_to_uniform(); }
};

namespace detail {

inline constexpr double kDistinctGranularity = 1e-10;

template <typename Range>
bool all_distinct_rounded(const Range& values) {
  std::vector<long long> keys;
  keys.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    keys.push_back(std::llround(values(i) / kDistinctGranularity));
  }
  std::sort(keys.begin(), keys.end());
  return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

}  // namespace detail

inline ValidationReport validate_basis(const BasisMatrix& w, double tol = 1e-12) {
  const Matrix& e = w.entries();
  ValidationReport r;
  r.n = w.n();
  r.tolerance = tol;
  const Matrix gram = e.transpose() * e;
  r.orthonormality_error =
      (gram - Matrix::Identity(w.modes(), w.modes())).cwiseAbs().maxCoeff();
  r.uniform_overlap = (uniform_direction(w.n()).transpose() * e).cwiseAbs().maxCoeff();
  r.max_entry = e.cwiseAbs().maxCoeff();

  r.row_distinct = true;
  for (int k = 0; k < w.n() && r.row_distinct; ++k) {
    r.row_distinct = detail::all_distinct_rounded(e.row(k));
  }
  r.column_distinct = true;
  for (int k = 0; k < w.modes() && r.column_distinct; ++k) {
    r.column_distinct = detail::all_distinct_rounded(e.col(k));
  }
  return r;
}

/// Coordinates of a phase vector along the uniform direction (v) and the
/// basis columns (u).
struct PhaseDecomposition {
  double v = 0.0;
  Vector u;
};

inline PhaseDecomposition decompose(const Vector& theta, const BasisMatrix& w) {
  require_same_size(w.n(), theta.size(), "decompose: phase vector");
  PhaseDecomposition d;
  d.v = theta.sum() / std::sqrt(static_cast<double>(w.n()));
  d.u = w.entries().transpose() * theta;
  return d;
}

inline Vector compose(const PhaseDecomposition& d, const BasisMatrix& w) {
  require_same_size(w.modes(), d.u.size(), "compose: deviation vector");
  Vector theta = w.entries() * d.u;
  theta.array() += d.v / std::sqrt(static_cast<double>(w.n()));
  return theta;
}

// CSV exchange format: first line "N,K" (the two integers), then N rows of K
// comma-separated entries in row-major order.

inline void write_basis_csv(std::ostream& out, const BasisMatrix& w) {
  out << w.n() << ',' << w.modes() << '\n';
  std::ostringstream line;
  line.precision(17);
  for (int i = 0; i < w.n(); ++i) {
    line.str({});
    for (int k = 0; k < w.modes(); ++k) {
      if (k) line << ',';
      line << w(i, k);
    }
    out << line.str() << '\n';
  }
}

inline BasisMatrix read_basis_csv(std::istream& in) {
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  auto parse_double = [](const std::string& s) {
    std::size_t used = 0;
    double x = std::stod(s, &used);
    if (s.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw std::invalid_argument("basis csv: bad number '" + s + "'");
    }
    return x;
  };

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("basis csv: empty input");
  const auto header = split(line);
  if (header.size() != 2) throw std::invalid_argument("basis csv: header must be 'N,K'");
  const int n = std::stoi(header[0]);
  const int k = std::stoi(header[1]);
  if (n < 2 || k != n - 1) {
    throw DimensionError("basis csv: header declares " + std::to_string(n) + " x " +
                         std::to_string(k) + ", expected N x (N-1) with N >= 2");
  }
  Matrix w(n, k);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("basis csv: missing rows");
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != k) {
      throw DimensionError("basis csv: row " + std::to_string(i + 1) + " has " +
                           std::to_string(cells.size()) + " entries, expected " +
                           std::to_string(k));
    }
    for (int c = 0; c < k; ++c) w(i, c) = parse_double(cells[c]);
  }
  return BasisMatrix(std::move(w));
}

}  // namespace diagosc

#endif  // DIAGOSC_BASIS_HPP
