#include "ncb/random.hpp"

#include <cmath>

namespace ncb {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Mat random_complex(Index rows, Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal() / std::sqrt(2.0);
  return m;
}

Mat random_hermitian(Index n, Rng& rng) { return hermitian_part(random_complex(n, n, rng)); }

Mat random_unitary(Index n, Rng& rng) {
  Mat g = random_complex(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    const double a = std::abs(r(i, i));
    if (a > 0) q.col(i) *= r(i, i) / a;
  }
  return q;
}

Mat random_isometry(Index n, Index k, Rng& rng) { return random_unitary(n, rng).leftCols(k); }

RVec random_real(Index n, Rng& rng) {
  RVec v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace ncb
