#ifndef DIAGOSC_RANDOM_BASIS_HPP
#define DIAGOSC_RANDOM_BASIS_HPP

// Seeded random orthonormal complement of the uniform direction, built by QR
// of [1 | G] with G Gaussian. Not a stable construction: the output depends on
// the QR implementation. Use it for tests and for experiments that need a
// basis whose entries are distinct within every row and column; limit
// sequences use build_fourier_basis.

#include <cstdint>

#include "diagosc/basis.hpp"
#include "diagosc/random.hpp"

namespace diagosc {

inline BasisMatrix random_orthonormal_complement(int n, std::uint64_t seed) {
  if (n < 2) throw DimensionError("random_orthonormal_complement: n must be >= 2");
  CounterRng rng(seed, 0x5eedba515ull);
  Matrix a(n, n);
  a.col(0) = uniform_direction(n);
  for (int c = 1; c < n; ++c) {
    for (int r = 0; r < n; ++r) a(r, c) = rng.normal();
  }
  const Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return BasisMatrix(q.rightCols(n - 1));
}

}  // namespace diagosc

#endif  // DIAGOSC_RANDOM_BASIS_HPP
