#pragma once

#include <cstdint>
#include <random>

#include "ncb/matrix.hpp"

namespace ncb {

/// splitmix64 step; used to derive independent sub-seeds from one run seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Scalar complex_normal() { return {normal(), normal()}; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

Mat random_complex(Index rows, Index cols, Rng& rng);
Mat random_hermitian(Index n, Rng& rng);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
Mat random_unitary(Index n, Rng& rng);
/// Isometry C^k -> C^n given by the first k columns of a Haar unitary.
Mat random_isometry(Index n, Index k, Rng& rng);
RVec random_real(Index n, Rng& rng);

}  // namespace ncb
