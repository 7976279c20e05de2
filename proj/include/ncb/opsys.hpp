#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ncb/matrix.hpp"

namespace ncb {

/// Self-adjoint unital subspace of M_l with a trace-orthonormal Hermitian basis.
/// basis[0] is I/sqrt(l).
struct OperatorSystem {
  Index ambient_dim = 0;
  std::vector<Mat> basis;
  std::vector<Mat> generators;  // as supplied; used for serialization only

  Index dim() const { return static_cast<Index>(basis.size()); }
  bool contains_identity() const { return true; }
};

OperatorSystem build_operator_system(const std::vector<Mat>& generators, Index l,
                                     const Tolerance& tol = {});

/// Coefficients c_k = tr(b_k m), or nothing when m is not in the span.
std::optional<std::vector<Scalar>> membership(const OperatorSystem& s, const Mat& m,
                                              const Tolerance& tol = {});

/// M_n(S) inside M_{nl}.
OperatorSystem amplify(const OperatorSystem& s, Index n, const Tolerance& tol = {});

/// Finite-dimensional C*-algebra with a Hermitian trace-orthonormal basis.
/// When generated from an operator system, the first dim(S) basis elements
/// are the system basis.
struct StarAlgebra {
  Index ambient_dim = 0;
  std::vector<Mat> basis;
  std::vector<Mat> generators;  // Hermitian, generate the algebra
  bool unital = true;

  Index dim() const { return static_cast<Index>(basis.size()); }
};

StarAlgebra generated_cstar_algebra(const OperatorSystem& s, const Tolerance& tol = {});

/// pi(a) = embedding^* a embedding for a in the algebra.
struct Irrep {
  Index dim = 0;
  int label = 0;
  Mat embedding;            // l x dim isometry onto one copy
  std::vector<Mat> action;  // pi(basis_k)

  Mat operator()(const Mat& a) const { return embedding.adjoint() * a * embedding; }
};

struct RepBlock {
  Index irrep_dim = 0;
  Index multiplicity = 0;
  Mat unitary;  // l x (n m); column p*m + j is vector p of copy j
};

/// W^* a W = (+)_i pi_i(a) (x) I_{m_i} for every a in the algebra.
struct RepDecomposition {
  std::vector<RepBlock> blocks;
  std::vector<Irrep> irreps;
  Mat unitary;  // [W_1 ... W_k]
  std::uint64_t seed = 0;
  int attempts = 0;
};

RepDecomposition irreducible_decomposition(const StarAlgebra& a, std::uint64_t seed,
                                           const Tolerance& tol = {});

/// U with U pi1(a) = pi2(a) U on the algebra basis, if one exists.
std::optional<Mat> unitary_equivalence(const Irrep& p1, const Irrep& p2, const Tolerance& tol = {});

/// Trace character a_k -> tr pi(a_k) on the algebra basis.
std::vector<Scalar> character(const Irrep& p);

/// Irrep of the algebra realized by an arbitrary isometry onto an invariant subspace.
Irrep make_irrep(const StarAlgebra& a, const Mat& embedding, int label = 0);

}  // namespace ncb
