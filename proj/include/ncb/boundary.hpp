#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ncb/cpmaps.hpp"
#include "ncb/opsys.hpp"

namespace ncb {

/// C*(S) and its irreducible representations, computed once per system.
struct Spectrum {
  SystemPtr system;
  StarAlgebra algebra;
  SystemPtr algebra_system;  // the algebra basis viewed as an operator system
  RepDecomposition decomposition;

  const std::vector<Irrep>& irreps() const { return decomposition.irreps; }
};

Spectrum compute_spectrum(SystemPtr s, std::uint64_t seed, const Tolerance& tol = {});

struct BoundaryCertificate {
  int irrep_label = 0;
  bool is_boundary = false;
  int probe_count = 0;
  double max_width = 0.0;
  Index region_dim = 0;
};

/// Is pi|_S uniquely extendable to C*(S)? Singleton check of the set of ucp
/// extensions, probed on the algebra basis beyond S.
BoundaryCertificate uep_check(const Irrep& pi, const Spectrum& sp, std::uint64_t seed,
                              const Tolerance& tol = {});

struct BoundaryEntry {
  Irrep irrep;
  BoundaryCertificate certificate;
};

/// One entry per irreducible class of C*(S), in label order.
std::vector<BoundaryEntry> boundary_representations(const Spectrum& sp, std::uint64_t seed,
                                                    const Tolerance& tol = {}, int workers = 1);

struct MaximalityResult {
  bool maximal = false;
  std::optional<UcpMap> witness;  // one-step dilation into M_{n+1}
  double corner_norm = 0.0;
};

MaximalityResult maximality_check(const UcpMap& phi, std::uint64_t seed, const Tolerance& tol = {});

struct DilationStep {
  Index size = 0;
  double corner_norm = 0.0;
};

struct DilationTrace {
  std::vector<DilationStep> steps;
  Index final_size = 0;
  bool maximal = false;
};

struct Dilation {
  UcpMap map;
  DilationTrace trace;
};

/// cap < 0 selects n + l^2.
Dilation maximal_dilation(const UcpMap& phi, Index cap, std::uint64_t seed, const Tolerance& tol = {});

struct Representation {
  Index dim = 0;
  std::vector<Mat> action;  // on the algebra basis
  double residual = 0.0;    // multiplicativity / adjoint defect
};

/// The unique ucp extension of a maximal map to C*(S), verified multiplicative.
Representation representation_from_maximal(const UcpMap& phi_max, const Spectrum& sp,
                                           const Tolerance& tol = {});

/// Isometric intertwiners X (dim(rep) x dim(irrep)) with rep(a) X = X irrep(a).
std::vector<Mat> intertwiners(const Representation& rep, const Irrep& irrep, const Spectrum& sp);

struct Factorization {
  Irrep pi;
  Mat v;  // n_pi x n isometry
  double residual = 0.0;
  BoundaryCertificate certificate;
  DilationTrace trace;
};

/// phi = v^* pi(.) v on S with pi a boundary representation.
Factorization pure_state_factorization(const UcpMap& phi, const Spectrum& sp, std::uint64_t seed,
                                       const Tolerance& tol = {}, Index cap = -1,
                                       const std::vector<BoundaryEntry>* known = nullptr);

struct NormCertificate {
  Mat element;
  double norm = 0.0;
  int irrep_label = 0;
  std::optional<Mat> v;
  double achieved = 0.0;
  double residual = 0.0;
  Index state_level = 0;  // target dimension of the intermediate pure state
  bool state_pure = false;
  double state_norm = 0.0;
  BoundaryCertificate certificate;
};

NormCertificate norm_certificate(const Spectrum& sp, const Mat& s, std::uint64_t seed,
                                 const Tolerance& tol = {},
                                 const std::vector<BoundaryEntry>* known = nullptr);

inline constexpr double kPeakGap = 1e-6;

/// || pi^(n)(e) || exceeds || sigma^(n)(e) || by kPeakGap for every other class sigma.
bool peak_verify(const Spectrum& sp, const Irrep& pi, const Mat& element, Index n,
                 const Tolerance& tol = {});

}  // namespace ncb
