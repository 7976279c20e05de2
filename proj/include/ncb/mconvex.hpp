#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncb/boundary.hpp"
#include "ncb/cpmaps.hpp"

namespace ncb {

/// S_x = span{1, x, x^*}.
SystemPtr element_system(const Mat& x, const Tolerance& tol = {});

struct MatricialRangeQuery {
  Mat x;
  Index level = 1;
};

/// Choi constraints of ucp maps phi on S_x with phi(x) = a.
sdp::SdpProblem representing_spectrahedron(const Mat& x, const Mat& a);

struct RangeMembership {
  bool member = false;
  std::optional<UcpMap> phi;   // on S_x, with Choi matrix
  std::optional<RVec> farkas;  // when not a member
  double residual = 0.0;
};

RangeMembership wrange_membership(const MatricialRangeQuery& q, const Mat& a, const Tolerance& tol = {});

struct SupportValue {
  double value = 0.0;
  Mat attained;  // phi(x) at the maximizer
};

/// max Re tr(theta^* phi(x)) over ucp phi : S_x -> M_n.
SupportValue wrange_support(const MatricialRangeQuery& q, const Mat& theta, const Tolerance& tol = {});

struct ExtremeResult {
  bool matrix_extreme = false;
  std::optional<UcpMap> representative;  // pure when matrix_extreme
  PurityWitness witness;
};

ExtremeResult matrix_extreme_check(const MatricialRangeQuery& q, const Mat& a, std::uint64_t seed,
                                   const Tolerance& tol = {});

struct BoundaryPointCertificate {
  Mat a;
  Index level = 0;
  bool is_matrix_extreme = false;
  bool is_boundary_point = false;
  bool maximal = false;
  std::optional<int> linked_irrep_label;
  std::optional<Mat> link_unitary;
  double residual = 0.0;
};

BoundaryPointCertificate boundary_point_check(const MatricialRangeQuery& q, const Mat& a,
                                              std::uint64_t seed, const Tolerance& tol = {},
                                              const Spectrum* spectrum = nullptr);

enum class TermKind { pure, pure_plus_scalar };
std::string to_string(TermKind k);

struct MorenzTerm {
  Mat x;          // level x n coefficient
  UcpMap psi;     // ucp map on S_y into M_level
  TermKind kind = TermKind::pure;
  int irrep_label = 0;
  Mat value;      // psi(y)
  std::optional<Scalar> scalar;  // t for the scalar block of a pure-plus-scalar term
};

struct MorenzDecomposition {
  std::vector<MorenzTerm> terms;
  double reconstruction_residual = 0.0;
  double column_residual = 0.0;  // || sum x_i^* x_i - I ||
  DilationTrace trace;
};

/// Decomposition of phi(y) for a ucp map phi on S_y (sp must be the spectrum of S_y).
MorenzDecomposition morenz_decomposition(const Spectrum& sp, const Mat& y, const UcpMap& phi,
                                         std::uint64_t seed, const Tolerance& tol = {},
                                         Index cap = -1,
                                         const std::vector<BoundaryEntry>* known = nullptr);
MorenzDecomposition morenz_decomposition(const MatricialRangeQuery& q, const Mat& a,
                                         std::uint64_t seed, const Tolerance& tol = {});

/// Pure matrix state on S_s of level <= 2 with ||phi(s)|| = ||s||.
struct NormAttainingState {
  UcpMap phi;
  Index level = 0;
  PurityWitness witness;
  std::string route;
};

NormAttainingState norm_attaining_pure_state(const Mat& s, std::uint64_t seed, const Tolerance& tol = {});

struct GammaElement {
  Index level = 0;
  Mat matrix;
};

struct RecoveryReport {
  bool recovered = false;
  int boundary_points = 0;
  std::vector<std::string> missing;  // descriptions of boundary points not reached
};

/// Is every boundary point of the matrix range of x (from the computed
/// spectrum and the supplied candidates) a compression of some element of gamma?
RecoveryReport recovery_check(const Mat& x, const std::vector<GammaElement>& gamma,
                              const std::vector<GammaElement>& candidates, std::uint64_t seed,
                              const Tolerance& tol = {});

/// Is b = v^* g v for some isometry v?
bool is_compression(const Mat& b, const Mat& g, const Tolerance& tol = {});

}  // namespace ncb
