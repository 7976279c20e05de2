#include "ncb/cpmaps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncb/random.hpp"

namespace ncb {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

std::vector<Mat> values_from_choi(const OperatorSystem& s, Index n, const Mat& choi) {
  std::vector<Mat> v;
  for (const Mat& b : s.basis) v.push_back(hermitian_part(choi_apply(choi, s.ambient_dim, n, b)));
  return v;
}

double coordinate_distance_to_ray(const RVec& v, const RVec& f) {
  const double t = std::max(0.0, v.dot(f) / f.squaredNorm());
  return (v - t * f).norm();
}

Mat embed_block(const Mat& m, Index total, Index offset) {
  Mat out = Mat::Zero(total, total);
  out.block(offset, offset, m.rows(), m.cols()) = m;
  return out;
}

}  // namespace

Mat UcpMap::operator()(const Mat& a) const {
  if (auto c = membership(*domain, a)) {
    Mat out = Mat::Zero(target_dim, target_dim);
    for (std::size_t k = 0; k < values.size(); ++k) out += (*c)[k] * values[k];
    return out;
  }
  if (choi) return choi_apply(*choi, domain->ambient_dim, target_dim, a);
  throw Error("UcpMap: argument is outside the operator system and no extension is known");
}

Mat choi_apply(const Mat& choi, Index l, Index n, const Mat& a) {
  if (choi.rows() != l * n || a.rows() != l || a.cols() != l)
    throw DimensionError("choi_apply: shape mismatch");
  Mat out = Mat::Zero(n, n);
  for (Index i = 0; i < l; ++i)
    for (Index j = 0; j < l; ++j)
      if (a(i, j) != Scalar(0)) out += a(i, j) * choi.block(i * n, j * n, n, n);
  return out;
}

Mat choi_from_kraus(const std::vector<Mat>& kraus) {
  if (kraus.empty()) throw Error("choi_from_kraus: no Kraus operators");
  const Index l = kraus.front().rows(), n = kraus.front().cols();
  Mat c = Mat::Zero(l * n, l * n);
  for (const Mat& k : kraus) {
    if (k.rows() != l || k.cols() != n) throw DimensionError("choi_from_kraus: shape mismatch");
    Vec w(l * n);
    for (Index i = 0; i < l; ++i)
      for (Index p = 0; p < n; ++p) w(i * n + p) = std::conj(k(i, p));
    c += w * w.adjoint();
  }
  return c;
}

Mat entry_functional(const Mat& a, Index n, Index p, Index q, bool imag) {
  const Mat k = kron(Mat(a.transpose()), matrix_unit(n, q, p));
  if (!imag) return 0.5 * (k + k.adjoint());
  return Scalar(0, -0.5) * (k - k.adjoint());
}

RVec value_coordinates(const std::vector<Mat>& values) {
  if (values.empty()) return RVec();
  const Index n = values.front().rows();
  RVec out(static_cast<Index>(values.size()) * n * n);
  Index k = 0;
  for (const Mat& v : values) {
    for (Index i = 0; i < n; ++i) out(k++) = v(i, i).real();
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const Scalar z = 0.5 * (v(i, j) + std::conj(v(j, i)));
        out(k++) = kSqrt2 * z.real();
        out(k++) = kSqrt2 * z.imag();
      }
  }
  return out;
}

std::vector<Mat> value_functionals(const OperatorSystem& s, Index n) {
  std::vector<Mat> out;
  for (const Mat& b : s.basis) {
    for (Index i = 0; i < n; ++i) out.push_back(entry_functional(b, n, i, i, false));
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        out.push_back(kSqrt2 * entry_functional(b, n, i, j, false));
        out.push_back(kSqrt2 * entry_functional(b, n, i, j, true));
      }
  }
  return out;
}

UcpMap make_ucp(SystemPtr domain, std::vector<Mat> values, std::optional<Mat> choi,
                const Tolerance& tol) {
  tol.validate();
  if (!domain) throw Error("UcpMap: missing domain");
  if (static_cast<Index>(values.size()) != domain->dim())
    throw DimensionError("UcpMap: expected " + std::to_string(domain->dim()) + " values, got " +
                         std::to_string(values.size()));
  const Index n = values.empty() ? 0 : values.front().rows();
  if (n <= 0) throw DimensionError("UcpMap: target dimension must be positive");
  for (const Mat& v : values) {
    if (v.rows() != n || v.cols() != n) throw DimensionError("UcpMap: value shape mismatch");
    require_finite(v, "UcpMap value");
  }
  const double slack = 10.0 * tol.eq * static_cast<double>(n);
  for (const Mat& v : values) {
    if ((v - v.adjoint()).cwiseAbs().maxCoeff() > slack)
      throw Error("UcpMap: value on a Hermitian basis element is not Hermitian");
  }
  const double sl = std::sqrt(static_cast<double>(domain->ambient_dim));
  if ((sl * values[0] - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > slack)
    throw Error("UcpMap: map is not unital");
  const Index l = domain->ambient_dim;
  if (choi) {
    if (choi->rows() != l * n || choi->cols() != l * n)
      throw DimensionError("UcpMap: Choi matrix must be (l n) x (l n)");
    *choi = hermitian_part(*choi);
    if (min_eigenvalue(*choi) < -tol.psd * std::max(1.0, choi->trace().real()))
      throw Error("UcpMap: Choi matrix is not positive semidefinite");
    for (std::size_t k = 0; k < values.size(); ++k) {
      if ((choi_apply(*choi, l, n, domain->basis[k]) - values[k]).cwiseAbs().maxCoeff() > slack)
        throw Error("UcpMap: Choi matrix disagrees with the values");
    }
  }
  for (Mat& v : values) v = hermitian_part(v);
  return UcpMap{std::move(domain), n, std::move(values), std::move(choi)};
}

UcpMap ucp_from_choi(SystemPtr domain, Index n, const Mat& choi, const Tolerance& tol) {
  const Mat c = hermitian_part(choi);
  auto vals = values_from_choi(*domain, n, c);
  return make_ucp(std::move(domain), std::move(vals), c, tol);
}

UcpMap ucp_from_kraus(SystemPtr domain, const std::vector<Mat>& kraus, const Tolerance& tol) {
  if (kraus.empty()) throw Error("ucp_from_kraus: no Kraus operators");
  const Index n = kraus.front().cols();
  return ucp_from_choi(std::move(domain), n, choi_from_kraus(kraus), tol);
}

sdp::SdpProblem extension_spectrahedron(const UcpMap& phi) {
  const OperatorSystem& s = *phi.domain;
  const Index n = phi.target_dim;
  const auto funcs = value_functionals(s, n);
  const RVec f = value_coordinates(phi.values);
  sdp::SdpProblem p;
  p.dim = s.ambient_dim * n;
  for (std::size_t j = 0; j < funcs.size(); ++j) p.constraints.push_back({funcs[j], f(static_cast<Index>(j))});
  return p;
}

PurityWitness purity_check(const UcpMap& phi, std::uint64_t seed, const Tolerance& tol) {
  const OperatorSystem& s = *phi.domain;
  const Index n = phi.target_dim;
  const Index big = s.ambient_dim * n;
  const auto funcs = value_functionals(s, n);
  const RVec f = value_coordinates(phi.values);
  const Index m = f.size();

  // psi = Phi_{C1}|_S and phi - psi = Phi_{C2}|_S
  sdp::SdpProblem p;
  p.dim = 2 * big;
  p.blocks = {big, big};
  std::vector<Mat> obs;
  for (Index j = 0; j < m; ++j) {
    const Mat& fj = funcs[static_cast<std::size_t>(j)];
    p.constraints.push_back({direct_sum(fj, fj), f(j)});
    obs.push_back(embed_block(fj, 2 * big, 0));
  }
  const sdp::Region region = sdp::analyze_region(p, tol);

  auto observe = [&](const Mat& x) {
    RVec v(m);
    for (Index j = 0; j < m; ++j) v(j) = real_inner(obs[static_cast<std::size_t>(j)], x);
    return v;
  };
  const RVec lc = observe(region.center);
  RMat ld(m, region.dimension());
  for (Index j = 0; j < region.dimension(); ++j) ld.col(j) = observe(region.directions[static_cast<std::size_t>(j)]);

  // probes: a basis of the orthocomplement of f plus random directions in it
  RMat ft(1, m);
  ft.row(0) = f.transpose();
  RMat probes = null_space(ft, 1e-12);
  Rng rng(seed);
  const Index nbasis = probes.cols();
  probes.conservativeResize(Eigen::NoChange, nbasis + 16);
  for (Index j = 0; j < 16; ++j) {
    RVec r = random_real(m, rng);
    r -= (r.dot(f) / f.squaredNorm()) * f;
    probes.col(nbasis + j) = r / std::max(r.norm(), 1e-300);
  }

  PurityWitness w;
  w.region_dim = region.dimension();
  w.is_pure = true;
  for (Index k = 0; k < probes.cols(); ++k) {
    ++w.probes;
    const RVec d = probes.col(k);
    const double g = (d.transpose() * ld).norm();
    const double c0 = std::abs(d.dot(lc));
    if (g <= 1e-10 && c0 <= 1e-10) {
      w.deviation = std::max(w.deviation, c0);
      continue;
    }
    Mat pm = Mat::Zero(2 * big, 2 * big);
    for (Index j = 0; j < m; ++j) pm += d(j) * obs[static_cast<std::size_t>(j)];
    for (double sign : {1.0, -1.0}) {
      const sdp::Maximum mx = sdp::maximize_over(region, sign * pm);
      const RVec v = observe(mx.argmax);
      const double dev = coordinate_distance_to_ray(v, f);
      if (dev > w.deviation) {
        w.deviation = dev;
        if (dev > kPurityThreshold) {
          CpCone psi;
          psi.domain = phi.domain;
          psi.target_dim = n;
          const Mat c1 = hermitian_part(mx.argmax.topLeftCorner(big, big));
          psi.choi = c1;
          psi.values = values_from_choi(s, n, c1);
          psi.scale = std::max(0.0, v.dot(f) / f.squaredNorm());
          w.violating_psi = std::move(psi);
        }
      }
    }
    if (w.deviation > kPurityThreshold) {
      w.is_pure = false;
      break;
    }
  }
  return w;
}

UcpMap pure_extension(const UcpMap& phi, std::uint64_t seed, const Tolerance& tol) {
  if (!purity_check(phi, derive_seed(seed, 0), tol).is_pure)
    throw Error("pure_extension: input map is not pure");
  const Mat x = sdp::extreme_point_refine(extension_spectrahedron(phi), Mat(), derive_seed(seed, 1), tol);
  return ucp_from_choi(phi.domain, phi.target_dim, x, tol);
}

UcpMap pure_extension_to(const UcpMap& phi, SystemPtr larger, std::uint64_t seed,
                         const Tolerance& tol) {
  if (larger->ambient_dim != phi.domain->ambient_dim)
    throw DimensionError("pure_extension_to: systems live in different matrix algebras");
  for (const Mat& b : phi.domain->basis)
    if (!membership(*larger, b, tol)) throw Error("pure_extension_to: target system does not contain S");
  if (!purity_check(phi, derive_seed(seed, 0), tol).is_pure)
    throw Error("pure_extension_to: input map is not pure");
  const auto obs = value_functionals(*larger, phi.target_dim);
  const Mat x = sdp::extreme_point_refine(extension_spectrahedron(phi), Mat(), derive_seed(seed, 1),
                                          tol, obs);
  return make_ucp(larger, values_from_choi(*larger, phi.target_dim, hermitian_part(x)),
                  hermitian_part(x), tol);
}

bool cp_leq(const CpCone& psi, const UcpMap& phi, const Tolerance& tol) {
  if (psi.domain->ambient_dim != phi.domain->ambient_dim || psi.target_dim != phi.target_dim ||
      psi.values.size() != phi.values.size())
    throw DimensionError("cp_leq: maps have different shapes");
  const Index n = phi.target_dim;
  const auto funcs = value_functionals(*phi.domain, n);
  std::vector<Mat> diff;
  for (std::size_t k = 0; k < phi.values.size(); ++k) diff.push_back(phi.values[k] - psi.values[k]);
  const RVec f = value_coordinates(diff);
  std::vector<sdp::Constraint> cons;
  for (std::size_t j = 0; j < funcs.size(); ++j) cons.push_back({funcs[j], f(static_cast<Index>(j))});
  const Index big = phi.domain->ambient_dim * n;
  const auto r = sdp::feasible_point(big, {}, cons);
  if (r.status == sdp::Status::infeasible) return false;
  if (r.feasible) return true;
  if (r.residual <= tol.psd && min_eigenvalue(r.X) >= -tol.psd) return true;
  throw InconclusiveError("cp_leq: solver could not decide feasibility (" + sdp::to_string(r.status) + ")");
}

Stinespring stinespring(const UcpMap& phi, const Tolerance& tol) {
  if (!phi.choi) throw Error("stinespring: map has no Choi matrix");
  const Index l = phi.domain->ambient_dim, n = phi.target_dim;
  const auto e = hermitian_eig(*phi.choi);
  const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  Stinespring out;
  for (Index k = e.values.size() - 1; k >= 0; --k) {
    const double lam = e.values(k);
    if (lam > 0.1 * tol.rank * scale && lam < 10.0 * tol.rank * scale) {
      std::string spectrum;
      for (Index j = e.values.size() - 1; j >= 0; --j) spectrum += " " + std::to_string(e.values(j));
      throw Error("stinespring: ambiguous rank, Choi spectrum:" + spectrum);
    }
    if (lam <= tol.rank * scale) continue;
    Mat kr(l, n);
    for (Index i = 0; i < l; ++i)
      for (Index p = 0; p < n; ++p) kr(i, p) = std::sqrt(lam) * std::conj(e.vectors(i * n + p, k));
    out.kraus.push_back(kr);
  }
  out.rank = static_cast<Index>(out.kraus.size());
  const Index r = out.rank;
  out.v = Mat::Zero(l * r, n);
  for (Index k = 0; k < r; ++k)
    for (Index i = 0; i < l; ++i) out.v.row(i * r + k) = out.kraus[static_cast<std::size_t>(k)].row(i);
  // project onto the isometries to remove discarded-spectrum noise
  Eigen::JacobiSVD<Mat> svd(out.v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if ((svd.singularValues().array() - 1.0).abs().maxCoeff() > 1e-6)
    throw Error("stinespring: Choi matrix is not unital");
  out.v = svd.matrixU() * svd.matrixV().adjoint();
  for (Index k = 0; k < r; ++k)
    for (Index i = 0; i < l; ++i) out.kraus[static_cast<std::size_t>(k)].row(i) = out.v.row(i * r + k);
  return out;
}

UcpMap matrix_convex_combine(const std::vector<ConvexTerm>& terms, const Tolerance& tol) {
  if (terms.empty()) throw Error("matrix_convex_combine: no terms");
  const Index n = terms.front().v.cols();
  const SystemPtr dom = terms.front().phi.domain;
  Mat col = Mat::Zero(n, n);
  bool all_choi = true;
  for (const auto& t : terms) {
    if (t.v.cols() != n || t.v.rows() != t.phi.target_dim)
      throw DimensionError("matrix_convex_combine: coefficient shape mismatch");
    if (t.phi.domain->ambient_dim != dom->ambient_dim || t.phi.values.size() != dom->basis.size())
      throw DimensionError("matrix_convex_combine: maps have different domains");
    col += t.v.adjoint() * t.v;
    all_choi = all_choi && t.phi.choi.has_value();
  }
  if ((col - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 10.0 * tol.eq * static_cast<double>(n))
    throw Error("matrix_convex_combine: sum v_i^* v_i differs from the identity");
  std::vector<Mat> vals(dom->basis.size(), Mat::Zero(n, n));
  const Index l = dom->ambient_dim;
  Mat choi = Mat::Zero(l * n, l * n);
  for (const auto& t : terms) {
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += t.v.adjoint() * t.phi.values[k] * t.v;
    if (all_choi) {
      const Mat lift = kron(Mat::Identity(l, l), t.v);
      choi += lift.adjoint() * *t.phi.choi * lift;
    }
  }
  std::optional<Mat> c;
  if (all_choi) c = choi;
  return make_ucp(dom, std::move(vals), c, tol);
}

UcpMap direct_sum(const UcpMap& a, const UcpMap& b) {
  if (a.domain->ambient_dim != b.domain->ambient_dim || a.values.size() != b.values.size())
    throw DimensionError("direct_sum: maps have different domains");
  const Index l = a.domain->ambient_dim, n1 = a.target_dim, n2 = b.target_dim, n = n1 + n2;
  UcpMap out;
  out.domain = a.domain;
  out.target_dim = n;
  for (std::size_t k = 0; k < a.values.size(); ++k) out.values.push_back(ncb::direct_sum(a.values[k], b.values[k]));
  if (a.choi && b.choi) {
    Mat c = Mat::Zero(l * n, l * n);
    for (Index i = 0; i < l; ++i)
      for (Index j = 0; j < l; ++j) {
        c.block(i * n, j * n, n1, n1) = a.choi->block(i * n1, j * n1, n1, n1);
        c.block(i * n + n1, j * n + n1, n2, n2) = b.choi->block(i * n2, j * n2, n2, n2);
      }
    out.choi = c;
  }
  return out;
}

UcpMap compress(const UcpMap& phi, const Mat& v, const Tolerance& tol) {
  if (v.rows() != phi.target_dim) throw DimensionError("compress: isometry has wrong row count");
  if (isometry_defect(v) > 10.0 * tol.eq * static_cast<double>(v.rows()))
    throw Error("compress: v is not an isometry");
  return matrix_convex_combine({{v, phi}}, tol);
}

UcpMap restrict_to(const UcpMap& phi, SystemPtr smaller, const Tolerance& tol) {
  if (!phi.choi) throw Error("restrict_to: map has no Choi matrix");
  auto vals = values_from_choi(*smaller, phi.target_dim, *phi.choi);
  return make_ucp(std::move(smaller), std::move(vals), phi.choi, tol);
}

}  // namespace ncb
