#include "ncb/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "ncb/mconvex.hpp"
#include "ncb/random.hpp"

namespace ncb {

namespace {

// Values of an irrep on the system basis (the algebra basis starts with it).
std::vector<Mat> system_values(const Irrep& pi, const OperatorSystem& s) {
  std::vector<Mat> v;
  for (Index k = 0; k < s.dim(); ++k) v.push_back(pi.action[static_cast<std::size_t>(k)]);
  return v;
}

UcpMap irrep_restriction(const Irrep& pi, const Spectrum& sp) {
  return ucp_from_kraus(sp.system, {pi.embedding});
}

Mat polar_isometry(const Mat& t) {
  Eigen::JacobiSVD<Mat> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Exactly feasible copy of x (on the face of the spectrahedron containing it).
Mat polish(const sdp::SdpProblem& p, const Mat& x, const Tolerance& tol) {
  try {
    return sdp::analyze_region(p, tol, {}, &x).center;
  } catch (const InconclusiveError&) {
    return x;
  }
}

}  // namespace

Spectrum compute_spectrum(SystemPtr s, std::uint64_t seed, const Tolerance& tol) {
  Spectrum sp;
  sp.system = std::move(s);
  sp.algebra = generated_cstar_algebra(*sp.system, tol);
  auto as = std::make_shared<OperatorSystem>();
  as->ambient_dim = sp.algebra.ambient_dim;
  as->basis = sp.algebra.basis;
  sp.algebra_system = as;
  sp.decomposition = irreducible_decomposition(sp.algebra, seed, tol);
  return sp;
}

BoundaryCertificate uep_check(const Irrep& pi, const Spectrum& sp, std::uint64_t seed,
                              const Tolerance& tol) {
  const OperatorSystem& s = *sp.system;
  const Index n = pi.dim;
  const UcpMap phi = make_ucp(sp.system, system_values(pi, s), std::nullopt, tol);
  const sdp::SdpProblem p = extension_spectrahedron(phi);

  OperatorSystem rest;
  rest.ambient_dim = s.ambient_dim;
  rest.basis.assign(sp.algebra.basis.begin() + s.dim(), sp.algebra.basis.end());
  std::vector<Mat> probes = value_functionals(rest, n);
  const std::size_t base = probes.size();
  Rng rng(seed);
  for (int j = 0; j < 16 && base > 0; ++j) {
    Mat r = Mat::Zero(p.dim, p.dim);
    for (std::size_t k = 0; k < base; ++k) r += rng.normal() * probes[k];
    probes.push_back(r / std::max(1e-300, r.norm()));
  }
  const auto rep = sdp::singleton_check(p, probes, tol);
  BoundaryCertificate c;
  c.irrep_label = pi.label;
  c.is_boundary = rep.singleton;
  c.probe_count = rep.probes_checked;
  c.max_width = rep.max_width;
  c.region_dim = rep.region_dim;
  return c;
}

std::vector<BoundaryEntry> boundary_representations(const Spectrum& sp, std::uint64_t seed,
                                                    const Tolerance& tol, int workers) {
  const auto& irreps = sp.irreps();
  std::vector<BoundaryEntry> out(irreps.size());
  auto run = [&](std::size_t i) {
    out[i] = {irreps[i], uep_check(irreps[i], sp, derive_seed(seed, i), tol)};
  };
  if (workers <= 1 || irreps.size() < 2) {
    for (std::size_t i = 0; i < irreps.size(); ++i) run(i);
    return out;
  }
  for (std::size_t start = 0; start < irreps.size(); start += static_cast<std::size_t>(workers)) {
    std::vector<std::future<void>> jobs;
    for (std::size_t i = start; i < std::min(irreps.size(), start + static_cast<std::size_t>(workers)); ++i)
      jobs.push_back(std::async(std::launch::async, run, i));
    for (auto& j : jobs) j.get();
  }
  return out;
}

MaximalityResult maximality_check(const UcpMap& phi, std::uint64_t seed, const Tolerance& tol) {
  const OperatorSystem& s = *phi.domain;
  const Index l = s.ambient_dim, n = phi.target_dim, m = n + 1;
  sdp::SdpProblem p;
  p.dim = l * m;
  // top-left corner equals phi
  for (Index k = 0; k < s.dim(); ++k) {
    const Mat& b = s.basis[static_cast<std::size_t>(k)];
    const Mat& v = phi.values[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n; ++i) {
      p.constraints.push_back({entry_functional(b, m, i, i, false), v(i, i).real()});
      for (Index j = i + 1; j < n; ++j) {
        p.constraints.push_back({entry_functional(b, m, i, j, false), v(i, j).real()});
        p.constraints.push_back({entry_functional(b, m, i, j, true), v(i, j).imag()});
      }
    }
  }
  // unital in the new row and column
  const Mat& b0 = s.basis[0];
  for (Index i = 0; i < n; ++i) {
    p.constraints.push_back({entry_functional(b0, m, i, n, false), 0.0});
    p.constraints.push_back({entry_functional(b0, m, i, n, true), 0.0});
  }
  p.constraints.push_back({entry_functional(b0, m, n, n, false), 1.0 / std::sqrt(static_cast<double>(l))});

  std::vector<Mat> obs;
  for (Index k = 1; k < s.dim(); ++k)
    for (Index i = 0; i < n; ++i) {
      obs.push_back(entry_functional(s.basis[static_cast<std::size_t>(k)], m, i, n, false));
      obs.push_back(entry_functional(s.basis[static_cast<std::size_t>(k)], m, i, n, true));
    }
  const Index no = static_cast<Index>(obs.size());
  MaximalityResult res;
  if (no == 0) {
    res.maximal = true;
    return res;
  }
  const sdp::Region region = sdp::analyze_region(p, tol);
  auto observe = [&](const Mat& x) {
    RVec v(no);
    for (Index j = 0; j < no; ++j) v(j) = real_inner(obs[static_cast<std::size_t>(j)], x);
    return v;
  };
  const RVec c = observe(region.center);
  RMat g(no, region.dimension());
  for (Index j = 0; j < region.dimension(); ++j) g.col(j) = observe(region.directions[static_cast<std::size_t>(j)]);
  const double spread = g.size() ? Eigen::JacobiSVD<RMat>(g).singularValues()(0) : 0.0;
  if (spread <= 1e-9 && c.norm() <= 1e-9) {
    res.maximal = true;
    res.corner_norm = c.norm();
    return res;
  }
  // witness: push the corner as far as possible along the most variable direction
  RVec dir;
  if (spread > 1e-9) {
    Eigen::JacobiSVD<RMat> svd(g, Eigen::ComputeThinU);
    dir = svd.matrixU().col(0);
  } else {
    dir = c / c.norm();
  }
  Rng rng(seed);
  double best = c.norm();
  Mat best_x = region.center;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Mat objective = Mat::Zero(p.dim, p.dim);
    for (Index j = 0; j < no; ++j) objective += dir(j) * obs[static_cast<std::size_t>(j)];
    for (double sign : {1.0, -1.0}) {
      const auto mx = sdp::maximize_over(region, sign * objective);
      const double val = observe(mx.argmax).norm();
      if (val > best) {
        best = val;
        best_x = mx.argmax;
      }
    }
    if (best > 1e-7) break;
    dir = random_real(no, rng);
    dir /= dir.norm();
  }
  res.corner_norm = best;
  if (best <= 1e-7) {
    res.maximal = true;
    return res;
  }
  const Mat x = polish(p, best_x, tol);
  res.witness = ucp_from_choi(phi.domain, m, x, tol);
  return res;
}

Dilation maximal_dilation(const UcpMap& phi, Index cap, std::uint64_t seed, const Tolerance& tol) {
  const Index l = phi.domain->ambient_dim;
  if (cap < 0) cap = phi.target_dim + l * l;
  if (cap < phi.target_dim) throw Error("maximal_dilation: cap below the target dimension");
  Dilation d{phi, {}};
  for (std::uint64_t step = 0;; ++step) {
    const MaximalityResult r = maximality_check(d.map, derive_seed(seed, step), tol);
    d.trace.steps.push_back({d.map.target_dim, r.corner_norm});
    if (r.maximal) {
      d.trace.maximal = true;
      break;
    }
    if (d.map.target_dim + 1 > cap) break;
    d.map = *r.witness;
  }
  d.trace.final_size = d.map.target_dim;
  return d;
}

Representation representation_from_maximal(const UcpMap& phi_max, const Spectrum& sp,
                                           const Tolerance& tol) {
  const Index l = sp.algebra.ambient_dim, n = phi_max.target_dim;
  const sdp::Region region = sdp::analyze_region(extension_spectrahedron(phi_max), tol);
  Representation rep;
  rep.dim = n;
  for (const Mat& a : sp.algebra.basis) rep.action.push_back(hermitian_part(choi_apply(region.center, l, n, a)));
  // multiplicative against the generators, hence on every word
  const Index d = sp.algebra.dim();
  double worst = 0.0;
  for (Index i = 0; i < sp.system->dim(); ++i) {
    for (Index j = 0; j < d; ++j) {
      const Mat prod = sp.algebra.basis[static_cast<std::size_t>(i)] * sp.algebra.basis[static_cast<std::size_t>(j)];
      Mat image = Mat::Zero(n, n);
      for (Index k = 0; k < d; ++k)
        image += trace_inner(prod, sp.algebra.basis[static_cast<std::size_t>(k)]) * rep.action[static_cast<std::size_t>(k)];
      const Mat expect = rep.action[static_cast<std::size_t>(i)] * rep.action[static_cast<std::size_t>(j)];
      worst = std::max(worst, (image - expect).cwiseAbs().maxCoeff());
    }
  }
  rep.residual = worst;
  if (worst > 1e-6) {
    throw Error("representation_from_maximal: extension is not multiplicative (residual " +
                std::to_string(worst) + ")");
  }
  return rep;
}

std::vector<Mat> intertwiners(const Representation& rep, const Irrep& irrep, const Spectrum& sp) {
  const Index big = rep.dim, n = irrep.dim;
  const Index gens = sp.system->dim();
  Mat sys(gens * big * n, big * n);
  const Mat ib = Mat::Identity(big, big), in = Mat::Identity(n, n);
  for (Index k = 0; k < gens; ++k) {
    sys.middleRows(k * big * n, big * n) =
        kron(in, rep.action[static_cast<std::size_t>(k)]) -
        kron(Mat(irrep.action[static_cast<std::size_t>(k)].transpose()), ib);
  }
  const Mat ns = null_space(sys, 1e-8);
  std::vector<Mat> out;
  for (Index c = 0; c < ns.cols(); ++c) {
    const Mat x = Eigen::Map<const Mat>(ns.col(c).data(), big, n) * std::sqrt(static_cast<double>(n));
    out.push_back(polar_isometry(x));
  }
  return out;
}

Factorization pure_state_factorization(const UcpMap& phi, const Spectrum& sp, std::uint64_t seed,
                                       const Tolerance& tol, Index cap,
                                       const std::vector<BoundaryEntry>* known) {
  const Index n = phi.target_dim;
  const UcpMap ext = pure_extension(phi, derive_seed(seed, 1), tol);
  const Stinespring st = stinespring(ext, tol);

  // Every summand piece of a pure map reproduces it up to scale; keep the largest.
  const auto& dec = sp.decomposition;
  double best = -1.0;
  std::size_t best_block = 0;
  Mat best_t;
  for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
    const RepBlock& blk = dec.blocks[i];
    for (Index j = 0; j < blk.multiplicity; ++j) {
      Mat copy(sp.algebra.ambient_dim, blk.irrep_dim);
      for (Index p = 0; p < blk.irrep_dim; ++p) copy.col(p) = blk.unitary.col(p * blk.multiplicity + j);
      for (const Mat& k : st.kraus) {
        const Mat t = copy.adjoint() * k;
        const double w = t.squaredNorm();
        if (w > best) {
          best = w;
          best_block = i;
          best_t = t;
        }
      }
    }
  }
  const Mat v0 = polar_isometry(best_t);
  Factorization f;
  const Irrep& first = dec.irreps[best_block];

  auto boundary_cert = [&](const Irrep& pi) {
    if (known) {
      for (const auto& e : *known)
        if (e.irrep.label == pi.label) return e.certificate;
    }
    return uep_check(pi, sp, derive_seed(seed, 7), tol);
  };

  const BoundaryCertificate c0 = boundary_cert(first);
  if (c0.is_boundary) {
    f.pi = first;
    f.v = v0;
    f.certificate = c0;
    f.trace.final_size = first.dim;
    f.trace.maximal = true;
  } else {
    const Dilation dil = maximal_dilation(irrep_restriction(first, sp), cap, derive_seed(seed, 2), tol);
    f.trace = dil.trace;
    if (!dil.trace.maximal)
      throw InconclusiveError("pure_state_factorization: dilation cap reached before maximality");
    const Representation rep = representation_from_maximal(dil.map, sp, tol);
    Mat y = Mat::Zero(rep.dim, n);
    y.topRows(first.dim) = v0;
    double top = -1.0;
    Index covered = 0;
    for (const Irrep& sigma : dec.irreps) {
      const auto xs = intertwiners(rep, sigma, sp);
      covered += sigma.dim * static_cast<Index>(xs.size());
      for (const Mat& x : xs) {
        const Mat t = x.adjoint() * y;
        if (t.squaredNorm() > top) {
          top = t.squaredNorm();
          f.pi = sigma;
          f.v = polar_isometry(t);
        }
      }
    }
    if (covered != rep.dim)
      throw Error("pure_state_factorization: maximal representation does not split over the spectrum");
    f.certificate = boundary_cert(f.pi);
  }
  double res = 0.0;
  for (Index k = 0; k < sp.system->dim(); ++k) {
    const Mat approx = f.v.adjoint() * f.pi.action[static_cast<std::size_t>(k)] * f.v;
    res = std::max(res, (approx - phi.values[static_cast<std::size_t>(k)]).norm());
  }
  f.residual = res;
  if (!f.certificate.is_boundary)
    throw Error("pure_state_factorization: selected representation failed the boundary check");
  if (res > 1e-6)
    throw Error("pure_state_factorization: no summand reproduces the state (residual " +
                std::to_string(res) + ")");
  return f;
}

NormCertificate norm_certificate(const Spectrum& sp, const Mat& s, std::uint64_t seed,
                                 const Tolerance& tol, const std::vector<BoundaryEntry>* known) {
  if (!membership(*sp.system, s, tol)) throw Error("norm_certificate: element is not in the operator system");
  NormCertificate c;
  c.element = s;
  c.norm = operator_norm(s);
  const NormAttainingState st = norm_attaining_pure_state(s, derive_seed(seed, 0), tol);
  c.state_level = st.level;
  c.state_pure = st.witness.is_pure;
  c.state_norm = operator_norm(st.phi(s));
  const UcpMap on_s = pure_extension_to(st.phi, sp.system, derive_seed(seed, 1), tol);
  const Factorization f = pure_state_factorization(on_s, sp, derive_seed(seed, 2), tol, -1, known);
  c.irrep_label = f.pi.label;
  c.v = f.v;
  c.achieved = operator_norm(f.pi(s));
  c.residual = f.residual;
  c.certificate = f.certificate;
  return c;
}

bool peak_verify(const Spectrum& sp, const Irrep& pi, const Mat& element, Index n, const Tolerance& tol) {
  const Index l = sp.system->ambient_dim;
  if (element.rows() != n * l || element.cols() != n * l)
    throw DimensionError("peak_verify: element must be (n l) x (n l)");
  const OperatorSystem amp = amplify(*sp.system, n, tol);
  if (!membership(amp, element, tol)) throw Error("peak_verify: element is not in M_n(S)");
  auto amplified_norm = [&](const Irrep& r) {
    const Mat lift = kron(Mat::Identity(n, n), r.embedding);
    return operator_norm(lift.adjoint() * element * lift);
  };
  const double mine = amplified_norm(pi);
  for (const Irrep& sigma : sp.irreps()) {
    if (sigma.label == pi.label) continue;
    if (!(mine - amplified_norm(sigma) >= kPeakGap)) return false;
  }
  return true;
}

}  // namespace ncb
