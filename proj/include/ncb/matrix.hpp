#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ncb {

using Scalar = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. Every module reports failures through these.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
// A solver or search ran out of budget; the question is undecided.
struct InconclusiveError : Error {
  using Error::Error;
};
// A constructive step produced something that fails its own verification.
struct PipelineError : Error {
  using Error::Error;
};

/// Centralized numerical tolerances.
///
/// eq   - entrywise / residual comparisons
/// psd  - slack allowed on the smallest eigenvalue of a PSD matrix
/// rank - singular values at or below this count as zero
struct Tolerance {
  double eq = 1e-9;
  double psd = 1e-8;
  double rank = 1e-7;

  void validate() const;
};

/// Dense Hermitian matrix. Construction symmetrizes (M + M*)/2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const Mat& m);

  const Mat& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

 private:
  Mat m_;
};

struct EigenDecomposition {
  RVec values;  // ascending
  Mat vectors;  // columns are eigenvectors
};

EigenDecomposition hermitian_eig(const HermitianMatrix& m);
EigenDecomposition hermitian_eig(const Mat& m);  // symmetrizes first

double operator_norm(const Mat& m);
double min_eigenvalue(const Mat& hermitian);
bool psd_check(const HermitianMatrix& m, const Tolerance& tol);

/// Kronecker product A (x) B.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Out = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Out out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Block diagonal A (+) B.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> direct_sum(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Out = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Out out = Out::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Mat matrix_unit(Index n, Index i, Index j);
Mat matrix_unit(Index rows, Index cols, Index i, Index j);
Mat hermitian_part(const Mat& m);

/// Real inner product Re tr(A* B) on M_n viewed as a real vector space.
double real_inner(const Mat& a, const Mat& b);
/// Complex trace pairing tr(B* A).
Scalar trace_inner(const Mat& a, const Mat& b);

bool all_finite(const Mat& m);
void require_finite(const Mat& m, const std::string& what);
void require_square(const Mat& m, const std::string& what);

/// ||V*V - I||_op
double isometry_defect(const Mat& v);

/// PSD square root and pseudo-inverse square root through the eigendecomposition.
Mat psd_sqrt(const Mat& m);

/// Orthonormal basis of the range, singular values above cutoff * max(1, s_max).
Mat range_basis(const Mat& m, double cutoff);

/// Null space of a complex matrix (columns), singular values below cutoff * max(1, s_max).
Mat null_space(const Mat& m, double cutoff);
RMat null_space(const RMat& m, double cutoff);

}  // namespace ncb
