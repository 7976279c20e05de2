#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ncb/matrix.hpp"
#include "ncb/opsys.hpp"
#include "ncb/sdp.hpp"

namespace ncb {

using SystemPtr = std::shared_ptr<const OperatorSystem>;

/// Unital completely positive map S -> M_n, stored by its values on the
/// system basis. The optional Choi matrix C = sum_ij E_ij (x) Phi(E_ij)
/// describes an extension to all of M_l.
struct UcpMap {
  SystemPtr domain;
  Index target_dim = 0;
  std::vector<Mat> values;
  std::optional<Mat> choi;

  /// Phi(a) for a in S (throws when a is not in S and no Choi matrix is known).
  Mat operator()(const Mat& a) const;
};

/// Completely positive, not necessarily unital.
struct CpCone {
  SystemPtr domain;
  Index target_dim = 0;
  std::vector<Mat> values;
  std::optional<Mat> choi;
  double scale = 1.0;
};

/// Validates unitality, shape and (when present) the Choi matrix.
UcpMap make_ucp(SystemPtr domain, std::vector<Mat> values, std::optional<Mat> choi = std::nullopt,
                const Tolerance& tol = {});
UcpMap ucp_from_choi(SystemPtr domain, Index n, const Mat& choi, const Tolerance& tol = {});
/// a -> sum_k K_k^* a K_k with K_k of size l x n.
UcpMap ucp_from_kraus(SystemPtr domain, const std::vector<Mat>& kraus, const Tolerance& tol = {});

Mat choi_apply(const Mat& choi, Index l, Index n, const Mat& a);
Mat choi_from_kraus(const std::vector<Mat>& kraus);

/// Hermitian H with Re tr(H C) = Re Phi_C(a)_pq (imag = false) or Im Phi_C(a)_pq.
Mat entry_functional(const Mat& a, Index n, Index p, Index q, bool imag);

/// Real coordinates of Phi(b_k) for all basis elements: per k the n^2 real
/// parameters of a Hermitian matrix (diagonal, sqrt2 Re, sqrt2 Im).
RVec value_coordinates(const std::vector<Mat>& values);
/// Functionals matching value_coordinates on a Choi variable.
std::vector<Mat> value_functionals(const OperatorSystem& s, Index n);

/// The set of Choi matrices of ucp extensions of phi to M_l.
sdp::SdpProblem extension_spectrahedron(const UcpMap& phi);

struct PurityWitness {
  bool is_pure = false;
  std::optional<CpCone> violating_psi;
  double deviation = 0.0;
  int probes = 0;
  Index region_dim = 0;
};

/// Throws InconclusiveError when the underlying SDPs cannot decide.
PurityWitness purity_check(const UcpMap& phi, std::uint64_t seed, const Tolerance& tol = {});

inline constexpr double kPurityThreshold = 1e-6;

/// Pure extension to M_l (rank-one Choi).
UcpMap pure_extension(const UcpMap& phi, std::uint64_t seed, const Tolerance& tol = {});
/// Pure extension to a larger operator system S2 containing S (same ambient space).
UcpMap pure_extension_to(const UcpMap& phi, SystemPtr larger, std::uint64_t seed,
                         const Tolerance& tol = {});

bool cp_leq(const CpCone& psi, const UcpMap& phi, const Tolerance& tol = {});

struct Stinespring {
  Mat v;  // (l r) x n isometry, row i*r + k holds row i of Kraus operator k
  Index rank = 0;
  std::vector<Mat> kraus;
};

Stinespring stinespring(const UcpMap& phi, const Tolerance& tol = {});

struct ConvexTerm {
  Mat v;  // n_i x n
  UcpMap phi;
};

UcpMap matrix_convex_combine(const std::vector<ConvexTerm>& terms, const Tolerance& tol = {});
UcpMap direct_sum(const UcpMap& a, const UcpMap& b);
UcpMap compress(const UcpMap& phi, const Mat& v, const Tolerance& tol = {});

/// Restrict a map with known Choi matrix to another system on the same space.
UcpMap restrict_to(const UcpMap& phi, SystemPtr smaller, const Tolerance& tol = {});

}  // namespace ncb
