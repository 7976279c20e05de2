#include "ncb/mconvex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncb/random.hpp"

namespace ncb {

namespace {

// Phi_C(h) = target for Hermitian h, entrywise on the upper triangle.
void add_value_constraints(sdp::SdpProblem& p, const Mat& h, Index n, const Mat& target) {
  for (Index i = 0; i < n; ++i) {
    p.constraints.push_back({entry_functional(h, n, i, i, false), target(i, i).real()});
    for (Index j = i + 1; j < n; ++j) {
      p.constraints.push_back({entry_functional(h, n, i, j, false), target(i, j).real()});
      p.constraints.push_back({entry_functional(h, n, i, j, true), target(i, j).imag()});
    }
  }
}

sdp::SdpProblem unital_problem(Index l, Index n) {
  sdp::SdpProblem p;
  p.dim = l * n;
  add_value_constraints(p, Mat::Identity(l, l), n, Mat::Identity(n, n));
  return p;
}

Mat re_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }
Mat im_part(const Mat& m) { return Scalar(0, -0.5) * (m - m.adjoint()); }

void require_query(const MatricialRangeQuery& q, const Mat& a) {
  require_square(q.x, "matricial range generator");
  if (q.level < 1) throw DimensionError("matricial range: level must be positive");
  if (a.rows() != q.level || a.cols() != q.level)
    throw DimensionError("matricial range: point must be level x level");
  require_finite(a, "matricial range point");
}

Mat polar_isometry(const Mat& t) {
  Eigen::JacobiSVD<Mat> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Mat top_right_singular(const Mat& s) {
  Eigen::JacobiSVD<Mat> svd(s, Eigen::ComputeFullV);
  return svd.matrixV().col(0);
}

// Orthonormal basis of span{xi, s xi} (one or two columns).
Mat pair_basis(const Mat& xi, const Mat& sxi) {
  Mat both(xi.rows(), 2);
  both << xi, sxi;
  Mat w = range_basis(both, 1e-9 * std::max(1.0, both.norm()));
  if (w.cols() == 2) {
    // first column xi, second along s xi
    w.col(0) = xi / xi.norm();
    Mat rest = sxi - w.col(0) * (w.col(0).adjoint() * sxi);
    w.col(1) = rest / rest.norm();
  }
  return w;
}

// Real-linear least squares polish of v with v^* g v = b, v^* v = I.
Mat polish_compression(Mat v, const Mat& g, const Mat& b) {
  const Index m = v.rows(), k = v.cols();
  auto residual = [&](const Mat& w) {
    const Mat r1 = w.adjoint() * g * w - b;
    const Mat r2 = w.adjoint() * w - Mat::Identity(k, k);
    RVec r(4 * k * k);
    for (Index i = 0; i < k * k; ++i) {
      r(i) = r1.data()[i].real();
      r(k * k + i) = r1.data()[i].imag();
      r(2 * k * k + i) = r2.data()[i].real();
      r(3 * k * k + i) = r2.data()[i].imag();
    }
    return r;
  };
  for (int it = 0; it < 30; ++it) {
    const RVec r = residual(v);
    if (r.norm() < 1e-13) break;
    RMat jac(r.size(), 2 * m * k);
    for (Index p = 0; p < 2 * m * k; ++p) {
      Mat d = Mat::Zero(m, k);
      d.data()[p / 2] = (p % 2 == 0) ? Scalar(1, 0) : Scalar(0, 1);
      const Mat d1 = d.adjoint() * g * v + v.adjoint() * g * d;
      const Mat d2 = d.adjoint() * v + v.adjoint() * d;
      for (Index i = 0; i < k * k; ++i) {
        jac(i, p) = d1.data()[i].real();
        jac(k * k + i, p) = d1.data()[i].imag();
        jac(2 * k * k + i, p) = d2.data()[i].real();
        jac(3 * k * k + i, p) = d2.data()[i].imag();
      }
    }
    const RVec step = jac.completeOrthogonalDecomposition().solve(-r);
    Mat d(m, k);
    for (Index i = 0; i < m * k; ++i) d.data()[i] = Scalar(step(2 * i), step(2 * i + 1));
    v += d;
  }
  return polar_isometry(v);
}

double compression_error(const Mat& v, const Mat& g, const Mat& b) {
  return (v.adjoint() * g * v - b).norm();
}

}  // namespace

SystemPtr element_system(const Mat& x, const Tolerance& tol) {
  require_square(x, "element system generator");
  return std::make_shared<OperatorSystem>(build_operator_system({x}, x.rows(), tol));
}

sdp::SdpProblem representing_spectrahedron(const Mat& x, const Mat& a) {
  const Index l = x.rows(), n = a.rows();
  sdp::SdpProblem p = unital_problem(l, n);
  add_value_constraints(p, re_part(x), n, re_part(a));
  add_value_constraints(p, im_part(x), n, im_part(a));
  return p;
}

RangeMembership wrange_membership(const MatricialRangeQuery& q, const Mat& a, const Tolerance& tol) {
  require_query(q, a);
  const sdp::SdpProblem p = representing_spectrahedron(q.x, a);
  const auto fp = sdp::feasible_point(p.dim, p.blocks, p.constraints);
  RangeMembership out;
  if (!fp.feasible) {
    if (!fp.farkas) throw InconclusiveError("wrange_membership: solver could not decide membership");
    out.farkas = fp.farkas;
    return out;
  }
  Mat x = fp.X;
  try {
    x = sdp::analyze_region(p, tol, {}, &fp.X).center;
  } catch (const InconclusiveError&) {
  }
  out.member = true;
  double worst = 0.0;
  for (const auto& c : p.constraints) worst = std::max(worst, std::abs(real_inner(c.a, x) - c.b));
  out.residual = worst;
  out.phi = ucp_from_choi(element_system(q.x, tol), q.level, x, tol);
  return out;
}

SupportValue wrange_support(const MatricialRangeQuery& q, const Mat& theta, const Tolerance& tol) {
  tol.validate();
  require_square(q.x, "matricial range generator");
  const Index l = q.x.rows(), n = q.level;
  if (theta.rows() != n || theta.cols() != n) throw DimensionError("wrange_support: direction must be level x level");
  sdp::SdpProblem p = unital_problem(l, n);
  const Mat k = kron(Mat(q.x.transpose()), Mat(theta.adjoint()));
  p.objective = re_part(k);
  const auto sol = sdp::solve(p);
  if (sol.status != sdp::Status::optimal)
    throw InconclusiveError("wrange_support: solver status " + sdp::to_string(sol.status));
  SupportValue out;
  out.attained = choi_apply(sol.X, l, n, q.x);
  out.value = trace_inner(out.attained, theta).real();
  return out;
}

ExtremeResult matrix_extreme_check(const MatricialRangeQuery& q, const Mat& a, std::uint64_t seed,
                                   const Tolerance& tol) {
  const RangeMembership m = wrange_membership(q, a, tol);
  if (!m.member) throw Error("matrix_extreme_check: point is not in the matricial range");
  // a fixes the map on S_x, so the representative is unique there
  ExtremeResult r;
  r.witness = purity_check(*m.phi, seed, tol);
  r.matrix_extreme = r.witness.is_pure;
  if (r.matrix_extreme) r.representative = m.phi;
  return r;
}

BoundaryPointCertificate boundary_point_check(const MatricialRangeQuery& q, const Mat& a,
                                              std::uint64_t seed, const Tolerance& tol,
                                              const Spectrum* spectrum) {
  BoundaryPointCertificate c;
  c.a = a;
  c.level = q.level;
  const ExtremeResult ex = matrix_extreme_check(q, a, derive_seed(seed, 0), tol);
  c.is_matrix_extreme = ex.matrix_extreme;
  if (!ex.matrix_extreme) return c;
  const UcpMap& phi = *ex.representative;
  c.maximal = maximality_check(phi, derive_seed(seed, 1), tol).maximal;
  if (!c.maximal) return c;
  Spectrum local;
  if (!spectrum) {
    local = compute_spectrum(phi.domain, derive_seed(seed, 2), tol);
    spectrum = &local;
  }
  const Factorization f = pure_state_factorization(phi, *spectrum, derive_seed(seed, 3), tol);
  c.residual = f.residual;
  if (f.v.rows() != f.v.cols() || isometry_defect(f.v) > 1e-6)
    throw Error("boundary_point_check: maximal pure map factors through a larger representation");
  c.is_boundary_point = true;
  c.linked_irrep_label = f.pi.label;
  c.link_unitary = f.v;
  return c;
}

std::string to_string(TermKind k) { return k == TermKind::pure ? "pure" : "pure-plus-scalar"; }

MorenzDecomposition morenz_decomposition(const Spectrum& sp, const Mat& y, const UcpMap& phi,
                                         std::uint64_t seed, const Tolerance& tol, Index cap,
                                         const std::vector<BoundaryEntry>* known) {
  const Index n = phi.target_dim;
  const Mat a = phi(y);
  UcpMap ext = phi;
  if (!ext.choi) {
    const Mat c = sdp::analyze_region(extension_spectrahedron(phi), tol).center;
    ext = ucp_from_choi(phi.domain, n, c, tol);
  }
  const Stinespring st = stinespring(ext, tol);
  const auto& irreps = sp.irreps();

  // Each irreducible summand of the identity representation of C*(S) is
  // written over boundary irreps: sigma|_S = sum_c Y_c^* tau_c|_S Y_c.
  struct Piece {
    std::size_t irrep;
    Mat y;
  };
  std::vector<std::optional<std::vector<Piece>>> lifts(irreps.size());
  MorenzDecomposition out;
  auto lift = [&](std::size_t i) -> const std::vector<Piece>& {
    if (lifts[i]) return *lifts[i];
    const Irrep& sigma = irreps[i];
    bool boundary = false;
    if (known) {
      for (const auto& e : *known)
        if (e.irrep.label == sigma.label) boundary = e.certificate.is_boundary;
    } else {
      boundary = uep_check(sigma, sp, derive_seed(seed, 100 + i), tol).is_boundary;
    }
    std::vector<Piece> pieces;
    if (boundary) {
      pieces.push_back({i, Mat::Identity(sigma.dim, sigma.dim)});
    } else {
      const UcpMap restricted = ucp_from_kraus(sp.system, {sigma.embedding}, tol);
      const Dilation dil = maximal_dilation(restricted, cap, derive_seed(seed, 200 + i), tol);
      if (!dil.trace.maximal)
        throw InconclusiveError("morenz_decomposition: dilation cap reached before maximality");
      if (dil.trace.steps.size() > out.trace.steps.size()) out.trace = dil.trace;
      const Representation rep = representation_from_maximal(dil.map, sp, tol);
      const Mat j = Mat::Identity(rep.dim, sigma.dim);
      Index covered = 0;
      for (std::size_t c = 0; c < irreps.size(); ++c) {
        const auto xs = intertwiners(rep, irreps[c], sp);
        covered += irreps[c].dim * static_cast<Index>(xs.size());
        for (const Mat& x : xs) {
          const Mat coef = x.adjoint() * j;
          if (coef.norm() > 1e-12) pieces.push_back({c, coef});
        }
      }
      if (covered != rep.dim)
        throw Error("morenz_decomposition: representation does not split over the spectrum");
    }
    lifts[i] = std::move(pieces);
    return *lifts[i];
  };

  struct Raw {
    Mat x;
    std::size_t irrep;
  };
  std::vector<Raw> raw;
  const auto& dec = sp.decomposition;
  for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
    const RepBlock& blk = dec.blocks[i];
    for (Index j = 0; j < blk.multiplicity; ++j) {
      Mat copy(sp.algebra.ambient_dim, blk.irrep_dim);
      for (Index p = 0; p < blk.irrep_dim; ++p) copy.col(p) = blk.unitary.col(p * blk.multiplicity + j);
      for (const Mat& k : st.kraus) {
        const Mat t = copy.adjoint() * k;
        if (t.norm() <= 1e-12) continue;
        for (const Piece& pc : lift(i)) {
          const Mat coef = pc.y * t;
          if (coef.norm() > 1e-12) raw.push_back({coef, pc.irrep});
        }
      }
    }
  }

  // Merge terms sharing an irrep into a minimal Kraus family.
  {
    std::vector<Raw> merged;
    for (std::size_t c = 0; c < irreps.size(); ++c) {
      std::vector<const Mat*> group;
      for (const Raw& r : raw)
        if (r.irrep == c) group.push_back(&r.x);
      if (group.empty()) continue;
      const Index rows = group.front()->rows();
      Mat cols(rows * n, static_cast<Index>(group.size()));
      for (std::size_t g = 0; g < group.size(); ++g)
        cols.col(static_cast<Index>(g)) = Eigen::Map<const Mat>(group[g]->data(), rows * n, 1);
      const EigenDecomposition e = hermitian_eig(Mat(cols * cols.adjoint()));
      const double top = std::max(e.values.maxCoeff(), 1e-300);
      for (Index k = 0; k < e.values.size(); ++k) {
        if (e.values(k) <= 1e-12 * top) continue;
        const Mat v = std::sqrt(e.values(k)) * e.vectors.col(k);
        merged.push_back({Eigen::Map<const Mat>(v.data(), rows, n), c});
      }
    }
    raw = std::move(merged);
  }

  // Conic Caratheodory on (x^* x, x^* sigma(y) x), a real space of dimension 3 n^2.
  auto features = [&](const Raw& r) {
    const Mat h = r.x.adjoint() * r.x;
    const Mat v = r.x.adjoint() * sp.irreps()[r.irrep](y) * r.x;
    RVec f(3 * n * n);
    for (Index i = 0; i < n * n; ++i) {
      f(i) = h.data()[i].real() + h.data()[i].imag();
      f(n * n + i) = v.data()[i].real();
      f(2 * n * n + i) = v.data()[i].imag();
    }
    return f;
  };
  std::vector<double> weight(raw.size(), 1.0);
  std::vector<std::size_t> alive(raw.size());
  std::iota(alive.begin(), alive.end(), 0);
  while (static_cast<Index>(alive.size()) > 3 * n * n) {
    RMat f(3 * n * n, static_cast<Index>(alive.size()));
    for (std::size_t i = 0; i < alive.size(); ++i) f.col(static_cast<Index>(i)) = features(raw[alive[i]]);
    Eigen::FullPivLU<RMat> lu(f);
    const RMat ns = lu.kernel();
    RVec mu = ns.col(0);
    if (mu.maxCoeff() <= 0) mu = -mu;
    double t = std::numeric_limits<double>::infinity();
    std::size_t drop = 0;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      const double m = mu(static_cast<Index>(i));
      if (m > 1e-14 && weight[alive[i]] / m < t) {
        t = weight[alive[i]] / m;
        drop = i;
      }
    }
    for (std::size_t i = 0; i < alive.size(); ++i) weight[alive[i]] -= t * mu(static_cast<Index>(i));
    weight[alive[drop]] = 0.0;
    std::vector<std::size_t> next;
    for (std::size_t i : alive)
      if (weight[i] > 1e-14) next.push_back(i);
    alive = std::move(next);
  }

  for (std::size_t i : alive) {
    const Irrep& sigma = sp.irreps()[raw[i].irrep];
    MorenzTerm term;
    term.irrep_label = sigma.label;
    const Mat x = std::sqrt(weight[i]) * raw[i].x;
    if (sigma.dim >= n) {
      term.kind = TermKind::pure;
      term.x = x;
      term.psi = ucp_from_kraus(sp.system, {sigma.embedding}, tol);
    } else {
      // pad sigma with a boundary point of its numerical range to reach level n
      const Index k = n - sigma.dim;
      const Mat sy = sigma(y);
      const Mat xi = hermitian_eig(re_part(sy)).vectors.rightCols(1);
      const Mat ex = sigma.embedding * xi;
      std::vector<Mat> kraus;
      Mat k0 = Mat::Zero(sigma.embedding.rows(), n);
      k0.leftCols(sigma.dim) = sigma.embedding;
      kraus.push_back(k0);
      for (Index r = 0; r < k; ++r) {
        Mat kr = Mat::Zero(sigma.embedding.rows(), n);
        kr.col(sigma.dim + r) = ex;
        kraus.push_back(kr);
      }
      term.kind = TermKind::pure_plus_scalar;
      term.scalar = (xi.adjoint() * sy * xi)(0, 0);
      term.x = Mat::Zero(n, n);
      term.x.topRows(sigma.dim) = x;
      term.psi = ucp_from_kraus(sp.system, kraus, tol);
    }
    term.value = term.psi(y);
    out.terms.push_back(std::move(term));
  }
  Mat sum = Mat::Zero(n, n), cols = Mat::Zero(n, n);
  for (const auto& t : out.terms) {
    sum += t.x.adjoint() * t.value * t.x;
    cols += t.x.adjoint() * t.x;
  }
  out.reconstruction_residual = (sum - a).norm();
  out.column_residual = (cols - Mat::Identity(n, n)).norm();
  if (out.reconstruction_residual > 1e-6 || out.column_residual > 1e-6)
    throw Error("morenz_decomposition: terms do not reconstruct the point");
  return out;
}

MorenzDecomposition morenz_decomposition(const MatricialRangeQuery& q, const Mat& a,
                                         std::uint64_t seed, const Tolerance& tol) {
  const RangeMembership m = wrange_membership(q, a, tol);
  if (!m.member) throw Error("morenz_decomposition: point is not in the matricial range");
  const Spectrum sp = compute_spectrum(m.phi->domain, derive_seed(seed, 1), tol);
  return morenz_decomposition(sp, q.x, *m.phi, derive_seed(seed, 2), tol);
}

NormAttainingState norm_attaining_pure_state(const Mat& s, std::uint64_t seed, const Tolerance& tol) {
  const SystemPtr ss = element_system(s, tol);
  const double norm = operator_norm(s);
  const double slack = 1e-7 * std::max(1.0, norm);
  auto attempt = [&](const Mat& embed, const Mat& action, const Mat& xi, std::uint64_t sd,
                     const std::string& route) -> std::optional<NormAttainingState> {
    const Mat w = pair_basis(xi, action * xi);
    const UcpMap phi = ucp_from_kraus(ss, {embed * w}, tol);
    if (std::abs(operator_norm(phi(s)) - norm) > slack) return std::nullopt;
    const PurityWitness pw = purity_check(phi, sd, tol);
    if (!pw.is_pure) return std::nullopt;
    return NormAttainingState{phi, w.cols(), pw, route};
  };

  const Index l = s.rows();
  if (auto r = attempt(Mat::Identity(l, l), s, top_right_singular(s), derive_seed(seed, 0), "identity"))
    return *r;

  const Spectrum sp = compute_spectrum(ss, derive_seed(seed, 1), tol);
  const auto reps = boundary_representations(sp, derive_seed(seed, 2), tol);
  Rng rng(derive_seed(seed, 3));
  for (const auto& e : reps) {
    if (!e.certificate.is_boundary) continue;
    const Mat ps = e.irrep(s);
    if (operator_norm(ps) < norm - slack) continue;
    Eigen::JacobiSVD<Mat> svd(ps, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Index top = 1;
    while (top < sv.size() && sv(top) > sv(0) - slack) ++top;
    if (auto r = attempt(e.irrep.embedding, ps, svd.matrixV().col(0), derive_seed(seed, 4), "boundary"))
      return *r;
    for (int t = 0; t < 8 && top > 1; ++t) {
      Mat xi = svd.matrixV().leftCols(top) * random_complex(top, 1, rng);
      xi /= xi.norm();
      if (auto r = attempt(e.irrep.embedding, ps, xi, derive_seed(seed, 5 + static_cast<std::uint64_t>(t)), "boundary"))
        return *r;
    }
  }

  // face of norm-attaining level-2 states, refined to a point
  const Mat xi = top_right_singular(s);
  const Mat w = pair_basis(xi, s * xi);
  const Index k = w.cols();
  const Index row = k == 2 ? 1 : 0;
  const Scalar target = (w.col(row).adjoint() * s * w.col(0))(0, 0);
  const UcpMap start = ucp_from_kraus(ss, {w}, tol);
  const Mat x0 = *start.choi;
  sdp::SdpProblem face = unital_problem(l, k);
  const Mat kfun = kron(Mat(s.transpose()), Mat(matrix_unit(k, 0, row)));
  face.constraints.push_back({re_part(kfun), target.real()});
  face.constraints.push_back({im_part(kfun), target.imag()});
  const Mat x = sdp::extreme_point_refine(face, x0, derive_seed(seed, 20), tol, value_functionals(*ss, k));
  const UcpMap phi = ucp_from_choi(ss, k, x, tol);
  const PurityWitness pw = purity_check(phi, derive_seed(seed, 21), tol);
  if (!pw.is_pure) throw InconclusiveError("norm_attaining_pure_state: no pure norm-attaining state found");
  return NormAttainingState{phi, k, pw, "face"};
}

bool is_compression(const Mat& b, const Mat& g, const Tolerance& tol) {
  require_square(b, "compression target");
  require_square(g, "compression source");
  const Index k = b.rows(), m = g.rows();
  if (k > m) return false;
  const double ok = 1e-6 * std::max(1.0, g.norm());
  // relaxation: b must lie in the level-k matricial range of g
  const RangeMembership mem = wrange_membership({g, k}, b, tol);
  if (!mem.member) return false;
  const sdp::SdpProblem p = representing_spectrahedron(g, b);
  Mat seed_choi = *mem.phi->choi;
  for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
    const Mat x = sdp::extreme_point_refine(p, seed_choi, derive_seed(0x636f6d70, attempt), tol);
    const EigenDecomposition e = hermitian_eig(x);
    for (Index c = e.values.size() - 1; c >= 0; --c) {
      if (e.values(c) <= tol.rank) break;
      Mat kr(m, k);
      for (Index i = 0; i < m; ++i) kr.row(i) = std::sqrt(e.values(c)) * e.vectors.col(c).segment(i * k, k).adjoint();
      const Mat v = polish_compression(polar_isometry(kr), g, b);
      if (compression_error(v, g, b) <= ok) return true;
    }
    seed_choi = Mat();
  }
  Rng rng(0x726e64);
  for (int t = 0; t < 16; ++t) {
    const Mat v = polish_compression(random_isometry(m, k, rng), g, b);
    if (compression_error(v, g, b) <= ok) return true;
  }
  throw InconclusiveError("is_compression: isometry search budget exhausted");
}

RecoveryReport recovery_check(const Mat& x, const std::vector<GammaElement>& gamma,
                              const std::vector<GammaElement>& candidates, std::uint64_t seed,
                              const Tolerance& tol) {
  for (const auto& g : gamma) {
    if (!wrange_membership({x, g.level}, g.matrix, tol).member)
      throw Error("recovery_check: a gamma element is outside the matricial range");
  }
  const Spectrum sp = compute_spectrum(element_system(x, tol), derive_seed(seed, 0), tol);
  const auto reps = boundary_representations(sp, derive_seed(seed, 1), tol);
  struct Point {
    Mat b;
    std::string what;
  };
  std::vector<Point> points;
  for (const auto& e : reps)
    if (e.certificate.is_boundary) points.push_back({e.irrep(x), "irrep " + std::to_string(e.irrep.label)});
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto cert = boundary_point_check({x, c.level}, c.matrix, derive_seed(seed, 10 + i), tol, &sp);
    if (cert.is_boundary_point) points.push_back({c.matrix, "candidate " + std::to_string(i)});
  }
  RecoveryReport out;
  out.boundary_points = static_cast<int>(points.size());
  for (const auto& pt : points) {
    bool hit = false;
    for (const auto& g : gamma) {
      if (is_compression(pt.b, g.matrix, tol)) {
        hit = true;
        break;
      }
    }
    if (!hit) out.missing.push_back(pt.what);
  }
  out.recovered = out.missing.empty();
  return out;
}

}  // namespace ncb
