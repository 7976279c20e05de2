#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncb/matrix.hpp"

namespace ncb::sdp {

/// Linear equality <a, X> = b with <a, X> = Re tr(a X), a Hermitian.
struct Constraint {
  Mat a;
  double b = 0.0;
};

/// maximize <C, X> subject to <A_k, X> = b_k, X >= 0.
///
/// X is block diagonal with the given block sizes (a single block when
/// `blocks` is empty). Constraint and objective matrices are full dim x dim
/// matrices; only their diagonal blocks are read.
struct SdpProblem {
  Index dim = 0;
  std::vector<Index> blocks;
  Mat objective;  // empty means zero
  std::vector<Constraint> constraints;

  std::vector<Index> block_sizes() const;
};

enum class Status { optimal, infeasible, unbounded, max_iter };
std::string to_string(Status s);

struct SolverOptions {
  int max_iter = 200;
  double tol = 1e-11;  // relative residual / gap target
  std::ostream* trace = nullptr;  // JSON lines, one per iteration
};

struct SdpSolution {
  Mat X;
  RVec y;  // multipliers for the original constraint list
  double value = 0.0;
  double dual_value = 0.0;
  Status status = Status::max_iter;
  double primal_residual = 0.0;  // max_k |<A_k,X> - b_k|
  double dual_residual = 0.0;
  double dual_gap = 0.0;
  int iterations = 0;
  // Farkas ray for status == infeasible: sum y_k A_k >= 0 with b.y = -1.
  std::optional<RVec> farkas;
};

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});

struct FeasibilityResult {
  bool feasible = false;
  Mat X;
  double residual = 0.0;
  std::optional<RVec> farkas;
  Status status = Status::max_iter;
};

/// Some point of the spectrahedron, or a certified infeasibility.
FeasibilityResult feasible_point(Index dim, const std::vector<Index>& blocks,
                                 const std::vector<Constraint>& constraints,
                                 const SolverOptions& opts = {});

/// Exact description of a nonempty spectrahedron:
/// every feasible X equals face * X' * face^* with X' in a reduced problem
/// that is strictly feasible, and the feasible set is
/// { center + sum t_j directions[j] } intersected with the PSD cone, with
/// center in its relative interior.
struct Region {
  Mat face;                          // dim x r, block-diagonal isometry
  std::vector<Index> face_blocks;    // reduced block sizes
  SdpProblem reduced;                // constraints in face coordinates
  Mat center;                        // full coordinates
  Mat reduced_center;                // face coordinates
  std::vector<Mat> directions;       // full coordinates, orthonormal
  double margin = 0.0;               // smallest eigenvalue of reduced_center
  double residual = 0.0;             // max constraint violation of center

  Index dimension() const { return static_cast<Index>(directions.size()); }
};

/// Throws InconclusiveError when the solver cannot decide, and Error with
/// message "infeasible" when the spectrahedron is empty.
Region analyze_region(const SdpProblem& p, const Tolerance& tol, const SolverOptions& opts = {},
                      const Mat* hint = nullptr);

struct Maximum {
  double value = 0.0;
  Mat argmax;
};

/// max <objective, X> over the region (solved in face coordinates).
Maximum maximize_over(const Region& r, const Mat& objective, const SolverOptions& opts = {});

/// Walk down optimal faces of random objectives until the region (or its
/// image under the observable functionals, when given) is a single point.
Mat extreme_point_refine(const SdpProblem& p, const Mat& x0, std::uint64_t seed,
                         const Tolerance& tol, const std::vector<Mat>& observables = {},
                         const SolverOptions& opts = {});

struct SingletonReport {
  bool singleton = false;
  double max_width = 0.0;
  int probes_checked = 0;
  Index region_dim = 0;
  Mat point;
};

inline constexpr double kSingletonWidth = 1e-7;

/// True iff every probe functional has width <= kSingletonWidth over the
/// region. With stop_early, returns at the first wide probe.
SingletonReport singleton_check(const SdpProblem& p, const std::vector<Mat>& probes,
                                const Tolerance& tol, const Mat* known_point = nullptr,
                                bool stop_early = true, const SolverOptions& opts = {});

/// Region widths along probes (max - min), computed from an existing analysis.
double width_along(const Region& r, const Mat& probe, const SolverOptions& opts = {});

}  // namespace ncb::sdp
