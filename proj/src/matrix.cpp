#include "ncb/matrix.hpp"

#include <cmath>
#include <limits>

namespace ncb {

void Tolerance::validate() const {
  const double eps = std::numeric_limits<double>::epsilon();
  if (!(eq >= eps) || !(psd > 0.0) || !(rank > 0.0)) {
    throw Error("tolerances must be positive (eq >= machine epsilon)");
  }
}

HermitianMatrix::HermitianMatrix(const Mat& m) {
  require_square(m, "HermitianMatrix");
  require_finite(m, "HermitianMatrix");
  m_ = hermitian_part(m);
}

EigenDecomposition hermitian_eig(const HermitianMatrix& m) {
  // Householder tridiagonalization followed by implicit symmetric QR.
  Eigen::SelfAdjointEigenSolver<Mat> es(m.matrix());
  if (es.info() != Eigen::Success) throw Error("hermitian eigensolver failed to converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition hermitian_eig(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eig: non-square input");
  return hermitian_eig(HermitianMatrix(m));
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Mat& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(hermitian), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool psd_check(const HermitianMatrix& m, const Tolerance& tol) {
  return min_eigenvalue(m.matrix()) >= -tol.psd;
}

Mat matrix_unit(Index n, Index i, Index j) { return matrix_unit(n, n, i, j); }

Mat matrix_unit(Index rows, Index cols, Index i, Index j) {
  Mat e = Mat::Zero(rows, cols);
  e(i, j) = 1.0;
  return e;
}

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

double real_inner(const Mat& a, const Mat& b) {
  return (a.array().conjugate() * b.array()).sum().real();
}

Scalar trace_inner(const Mat& a, const Mat& b) {
  return (b.array().conjugate() * a.array()).sum();
}

bool all_finite(const Mat& m) {
  for (Index i = 0; i < m.size(); ++i) {
    const Scalar z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

void require_finite(const Mat& m, const std::string& what) {
  if (!all_finite(m)) throw Error(what + ": non-finite entry");
}

void require_square(const Mat& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(what + ": expected square matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

double isometry_defect(const Mat& v) {
  return operator_norm(v.adjoint() * v - Mat::Identity(v.cols(), v.cols()));
}

Mat psd_sqrt(const Mat& m) {
  auto eig = hermitian_eig(m);
  RVec s = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * s.asDiagonal() * eig.vectors.adjoint();
}

Mat range_basis(const Mat& m, double cutoff) {
  if (m.size() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  const double thresh = cutoff * std::max(1.0, s(0));
  Index r = 0;
  while (r < s.size() && s(r) > thresh) ++r;
  return svd.matrixU().leftCols(r);
}

namespace {

template <typename M>
M null_space_impl(const M& m, double cutoff) {
  const Index n = m.cols();
  if (m.rows() == 0) return M::Identity(n, n);
  Eigen::JacobiSVD<M> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thresh = cutoff * std::max(1.0, s.size() ? s(0) : 0.0);
  Index r = 0;
  while (r < s.size() && s(r) > thresh) ++r;
  return svd.matrixV().rightCols(n - r);
}

}  // namespace

Mat null_space(const Mat& m, double cutoff) { return null_space_impl(m, cutoff); }
RMat null_space(const RMat& m, double cutoff) { return null_space_impl(m, cutoff); }

}  // namespace ncb
