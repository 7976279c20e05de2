#include "ncb/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ncb/random.hpp"

namespace ncb::sdp {

std::vector<Index> SdpProblem::block_sizes() const {
  if (blocks.empty()) return {dim};
  return blocks;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::max_iter: return "max-iter";
  }
  return "unknown";
}

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Isometric real coordinates for block-diagonal Hermitian matrices:
// per block the diagonal, then sqrt(2) Re / sqrt(2) Im of the strict upper triangle.
class Layout {
 public:
  explicit Layout(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
    Index off = 0, voff = 0;
    for (Index n : sizes_) {
      if (n < 0) throw DimensionError("negative block size");
      offsets_.push_back(off);
      voffsets_.push_back(voff);
      off += n;
      voff += n * n;
    }
    dim_ = off;
    total_ = voff;
  }

  Index dim() const { return dim_; }
  Index total() const { return total_; }
  std::size_t count() const { return sizes_.size(); }
  Index size(std::size_t b) const { return sizes_[b]; }
  Index offset(std::size_t b) const { return offsets_[b]; }
  Index voffset(std::size_t b) const { return voffsets_[b]; }
  const std::vector<Index>& sizes() const { return sizes_; }

  static void pack_block(const Mat& m, double* out) {
    const Index n = m.rows();
    Index k = 0;
    for (Index i = 0; i < n; ++i) out[k++] = m(i, i).real();
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const Scalar z = 0.5 * (m(i, j) + std::conj(m(j, i)));
        out[k++] = kSqrt2 * z.real();
        out[k++] = kSqrt2 * z.imag();
      }
    }
  }

  static Mat unpack_block(const double* v, Index n) {
    Mat m(n, n);
    Index k = 0;
    for (Index i = 0; i < n; ++i) m(i, i) = v[k++];
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const Scalar z(v[k] / kSqrt2, v[k + 1] / kSqrt2);
        k += 2;
        m(i, j) = z;
        m(j, i) = std::conj(z);
      }
    }
    return m;
  }

  RVec pack(const Mat& full) const {
    RVec v(total_);
    for (std::size_t b = 0; b < count(); ++b) {
      pack_block(full.block(offsets_[b], offsets_[b], sizes_[b], sizes_[b]), v.data() + voffsets_[b]);
    }
    return v;
  }

  Mat unpack(const RVec& v) const {
    Mat m = Mat::Zero(dim_, dim_);
    for (std::size_t b = 0; b < count(); ++b) {
      m.block(offsets_[b], offsets_[b], sizes_[b], sizes_[b]) =
          unpack_block(v.data() + voffsets_[b], sizes_[b]);
    }
    return m;
  }

  Mat block(const RVec& v, std::size_t b) const {
    return unpack_block(v.data() + voffsets_[b], sizes_[b]);
  }

  void set_block(RVec& v, std::size_t b, const Mat& m) const {
    pack_block(m, v.data() + voffsets_[b]);
  }

  RVec identity() const {
    RVec v = RVec::Zero(total_);
    for (std::size_t b = 0; b < count(); ++b)
      for (Index i = 0; i < sizes_[b]; ++i) v(voffsets_[b] + i) = 1.0;
    return v;
  }

 private:
  std::vector<Index> sizes_, offsets_, voffsets_;
  Index dim_ = 0, total_ = 0;
};

// Constraint rows orthonormalized through an SVD; dependent rows pruned.
struct Prepared {
  Layout layout;
  RMat a_raw;    // m x N
  RVec b_raw;    // m
  RMat a;        // r x N, orthonormal rows
  RVec b;        // r
  RMat back;     // m x r, y_orig = back * y
  RMat null;     // N x (N - r)
  RVec c;
  bool inconsistent = false;
  RVec ray;      // original-space Farkas ray when inconsistent
};

Prepared prepare(const SdpProblem& p) {
  Prepared pr{Layout(p.block_sizes()), {}, {}, {}, {}, {}, {}, {}, false, {}};
  const Layout& lay = pr.layout;
  if (lay.dim() != p.dim) throw DimensionError("SdpProblem: block sizes do not sum to dim");
  const Index m = static_cast<Index>(p.constraints.size());
  const Index nvars = lay.total();
  pr.a_raw.resize(m, nvars);
  pr.b_raw.resize(m);
  for (Index k = 0; k < m; ++k) {
    const auto& con = p.constraints[static_cast<std::size_t>(k)];
    if (con.a.rows() != p.dim || con.a.cols() != p.dim)
      throw DimensionError("constraint matrix has wrong size");
    pr.a_raw.row(k) = lay.pack(con.a).transpose();
    pr.b_raw(k) = con.b;
  }
  if (p.objective.size() == 0) {
    pr.c = RVec::Zero(nvars);
  } else {
    if (p.objective.rows() != p.dim || p.objective.cols() != p.dim)
      throw DimensionError("objective has wrong size");
    pr.c = lay.pack(p.objective);
  }

  if (m == 0) {
    pr.a.resize(0, nvars);
    pr.b.resize(0);
    pr.back.resize(0, 0);
    pr.null = RMat::Identity(nvars, nvars);
    return pr;
  }
  Eigen::JacobiSVD<RMat> svd(pr.a_raw, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  const double thresh = 1e-9 * std::max(1.0, s(0));
  Index r = 0;
  while (r < s.size() && s(r) > thresh) ++r;
  const RMat ur = svd.matrixU().leftCols(r);
  const RVec proj = ur.transpose() * pr.b_raw;
  const RVec resid = pr.b_raw - ur * proj;
  if (resid.norm() > 1e-9 * (1.0 + pr.b_raw.norm())) {
    pr.inconsistent = true;
    pr.ray = -resid / resid.squaredNorm();
  }
  pr.a = svd.matrixV().leftCols(r).transpose();
  pr.b = proj.cwiseQuotient(s.head(r));
  pr.back = ur * s.head(r).cwiseInverse().asDiagonal();
  pr.null = svd.matrixV().rightCols(nvars - r);
  return pr;
}

struct BlockScaling {
  Mat lx, lz;       // Cholesky factors of X and Z
  Mat g, ginv;      // NT scaling: G^{-1} X G^{-*} = G^* Z G = diag(d)
  Mat w, winv;      // W = G G^*
  RVec d;
};

bool compute_scaling(const Mat& x, const Mat& z, BlockScaling& s) {
  Eigen::LLT<Mat> lx(x), lz(z);
  if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  s.lx = lx.matrixL();
  s.lz = lz.matrixL();
  Eigen::JacobiSVD<Mat> svd(s.lz.adjoint() * s.lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.d = svd.singularValues();
  if (s.d.size() && s.d.minCoeff() <= 0.0) return false;
  const RVec isq = s.d.cwiseSqrt().cwiseInverse();
  s.g = s.lx * svd.matrixV() * isq.asDiagonal();
  Mat linv = s.lx.triangularView<Eigen::Lower>().solve(Mat::Identity(x.rows(), x.rows()));
  s.ginv = s.d.cwiseSqrt().asDiagonal() * svd.matrixV().adjoint() * linv;
  s.w = s.g * s.g.adjoint();
  s.winv = s.ginv.adjoint() * s.ginv;
  return true;
}

// Largest alpha with L L^* + alpha dX >= 0, where L is a Cholesky factor.
double max_step(const Mat& l, const Mat& dx) {
  if (dx.rows() == 0) return kInf;
  Mat t = l.triangularView<Eigen::Lower>().solve(dx);
  t = l.triangularView<Eigen::Lower>().solve(t.adjoint().eval()).adjoint();
  const double lmin = min_eigenvalue(t);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

class NewtonSystem {
 public:
  NewtonSystem(const Prepared& pr, const std::vector<BlockScaling>& sc)
      : pr_(pr), sc_(sc), use_null_(pr.a.rows() > pr.null.cols()) {
    if (use_null_) {
      const Index f = pr.null.cols();
      RMat gm(pr.layout.total(), f);
      for (Index j = 0; j < f; ++j) gm.col(j) = apply(pr.null.col(j), true);
      RMat m = pr.null.transpose() * gm;
      factor(m);
    } else {
      const Index r = pr.a.rows();
      RMat h(r, pr.layout.total());
      for (Index j = 0; j < r; ++j) h.row(j) = apply(pr.a.row(j).transpose(), false).transpose();
      RMat m = pr.a * h.transpose();
      factor(m);
    }
  }

  bool ok() const { return ok_; }

  // Solves dX + W dZ W = rc, A dX = rp, dZ = A^T dy + rd.
  void solve(const RVec& rc, const RVec& rp, const RVec& rd, RVec& dx, RVec& dy, RVec& dz) const {
    if (use_null_) {
      const RVec dx0 = pr_.a.transpose() * rp;
      const RVec rhs = pr_.null.transpose() * (apply(rc - dx0, true) - rd);
      const RVec u = back_solve(rhs);
      dx = dx0 + pr_.null * u;
      dz = apply(rc - dx, true);
      dy = pr_.a * (dz - rd);
    } else {
      const RVec rhs = pr_.a * (rc - apply(rd, false)) - rp;
      dy = back_solve(rhs);
      dz = pr_.a.transpose() * dy + rd;
      dx = rc - apply(dz, false);
    }
  }

  // W v W  (or W^{-1} v W^{-1})
  RVec apply(const RVec& v, bool inverse) const {
    const Layout& lay = pr_.layout;
    RVec out(v.size());
    for (std::size_t b = 0; b < lay.count(); ++b) {
      const Mat& w = inverse ? sc_[b].winv : sc_[b].w;
      lay.set_block(out, b, w * lay.block(v, b) * w);
    }
    return out;
  }

 private:
  void factor(RMat& m) {
    m = 0.5 * (m + m.transpose()).eval();
    if (m.rows() == 0) {
      ok_ = true;
      return;
    }
    llt_.compute(m);
    if (llt_.info() == Eigen::Success) {
      ok_ = true;
      return;
    }
    const double reg = 1e-14 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    m.diagonal().array() += reg;
    llt_.compute(m);
    ok_ = llt_.info() == Eigen::Success;
  }

  RVec back_solve(const RVec& rhs) const {
    if (rhs.size() == 0) return rhs;
    return llt_.solve(rhs);
  }

  const Prepared& pr_;
  const std::vector<BlockScaling>& sc_;
  bool use_null_;
  bool ok_ = false;
  Eigen::LLT<RMat> llt_;
};

Mat block_of(const Mat& full, const Layout& lay, std::size_t b) {
  return full.block(lay.offset(b), lay.offset(b), lay.size(b), lay.size(b));
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts) {
  const Prepared pr = prepare(p);
  const Layout& lay = pr.layout;
  SdpSolution sol;
  const Index m = static_cast<Index>(p.constraints.size());
  if (pr.inconsistent) {
    sol.status = Status::infeasible;
    sol.X = Mat::Zero(p.dim, p.dim);
    sol.y = RVec::Zero(m);
    sol.farkas = pr.ray;
    sol.primal_residual = pr.b_raw.cwiseAbs().maxCoeff();
    return sol;
  }

  const Index nvars = lay.total();
  const double n = std::max<double>(1.0, static_cast<double>(lay.dim()));
  const double normb = pr.b.norm();
  const double normc = pr.c.norm();
  const RVec eye = lay.identity();

  double xi = std::max(10.0, std::sqrt(n));
  for (Index k = 0; k < pr.b.size(); ++k) xi = std::max(xi, n * (1.0 + std::abs(pr.b(k))) / 2.0);
  const double eta = std::max({10.0, std::sqrt(n), normc});
  RVec x = xi * eye;
  RVec z = eta * eye;
  RVec y = RVec::Zero(pr.a.rows());

  bool converged = false;
  double best = kInf;
  int since_best = 0;
  int it = 0;
  // Late iterations on problems without interior points can lose accuracy;
  // keep the best iterate seen.
  double kept_merit = kInf;
  RVec kept_x = x, kept_y = y, kept_z = z;
  std::vector<BlockScaling> sc(lay.count());

  for (; it < opts.max_iter; ++it) {
    const RVec rp = pr.b - pr.a * x;
    const RVec rd = pr.a.transpose() * y - pr.c - z;
    const double pobj = pr.c.dot(x);
    const double dobj = pr.b.dot(y);
    const double gap = x.dot(z);
    const double mu = gap / n;
    const double pinf = rp.norm() / (1.0 + normb);
    const double dinf = rd.norm() / (1.0 + normc);
    const double relgap = std::abs(gap) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (opts.trace) {
      *opts.trace << "{\"iter\":" << it << ",\"pobj\":" << pobj << ",\"dobj\":" << dobj
                  << ",\"pinf\":" << pinf << ",\"dinf\":" << dinf << ",\"gap\":" << gap << "}\n";
    }
    if (pinf < opts.tol && dinf < opts.tol && relgap < opts.tol) {
      converged = true;
      break;
    }

    // Farkas-type certificates.
    const double t = -dobj;
    if (t > 1e4) {
      const RVec ray = (pr.c + rd) / t;
      if (ray.norm() < 1e-8) {
        const RVec aty = pr.a.transpose() * y / t;
        if (min_eigenvalue(lay.unpack(aty)) >= -1e-8) {
          sol.status = Status::infeasible;
          sol.farkas = pr.back * (y / t);
          break;
        }
      }
    }
    if (pobj > 1e4 && (pr.b - rp).norm() / pobj < 1e-8) {
      sol.status = Status::unbounded;
      break;
    }

    const double merit = std::max({pinf, dinf, relgap});
    if (merit < kept_merit || merit <= 1e-9) {
      kept_merit = merit;
      kept_x = x;
      kept_y = y;
      kept_z = z;
    }
    if (merit < 0.5 * best) {
      best = merit;
      since_best = 0;
    } else if (++since_best > 12) {
      break;
    }

    bool scaled = true;
    for (std::size_t b = 0; b < lay.count(); ++b) {
      if (lay.size(b) == 0) continue;
      if (!compute_scaling(lay.block(x, b), lay.block(z, b), sc[b])) {
        scaled = false;
        break;
      }
    }
    if (!scaled) break;
    NewtonSystem sys(pr, sc);
    if (!sys.ok()) break;

    // predictor
    RVec dx, dy, dz;
    sys.solve(-x, rp, rd, dx, dy, dz);
    double ap = kInf, ad = kInf;
    for (std::size_t b = 0; b < lay.count(); ++b) {
      if (lay.size(b) == 0) continue;
      ap = std::min(ap, max_step(sc[b].lx, lay.block(dx, b)));
      ad = std::min(ad, max_step(sc[b].lz, lay.block(dz, b)));
    }
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    const double mu_aff = (x + ap * dx).dot(z + ad * dz) / n;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // corrector in NT-scaled coordinates
    RVec rc(nvars);
    for (std::size_t b = 0; b < lay.count(); ++b) {
      const Index nb = lay.size(b);
      if (nb == 0) continue;
      const BlockScaling& s = sc[b];
      const Mat dxs = s.ginv * lay.block(dx, b) * s.ginv.adjoint();
      const Mat dzs = s.g.adjoint() * lay.block(dz, b) * s.g;
      Mat rhs = -(dxs * dzs + dzs * dxs);
      for (Index i = 0; i < nb; ++i) rhs(i, i) += 2.0 * sigma * mu - 2.0 * s.d(i) * s.d(i);
      for (Index i = 0; i < nb; ++i)
        for (Index j = 0; j < nb; ++j) rhs(i, j) /= (s.d(i) + s.d(j));
      lay.set_block(rc, b, s.g * rhs * s.g.adjoint());
    }
    sys.solve(rc, rp, rd, dx, dy, dz);
    double apm = kInf, adm = kInf;
    for (std::size_t b = 0; b < lay.count(); ++b) {
      if (lay.size(b) == 0) continue;
      apm = std::min(apm, max_step(sc[b].lx, lay.block(dx, b)));
      adm = std::min(adm, max_step(sc[b].lz, lay.block(dz, b)));
    }
    const double tau = 0.9 + 0.09 * std::min(ap, ad);
    const double step_p = std::min(1.0, tau * apm);
    const double step_d = std::min(1.0, tau * adm);
    if (step_p < 1e-12 && step_d < 1e-12) break;
    x += step_p * dx;
    y += step_d * dy;
    z += step_d * dz;
  }

  sol.iterations = it;
  auto finish = [&]() {
    sol.X = lay.unpack(x);
    sol.y = pr.back * y;
    sol.value = pr.c.dot(x);
    sol.dual_value = pr.b.dot(y);
    sol.primal_residual = m ? (pr.a_raw * x - pr.b_raw).cwiseAbs().maxCoeff() : 0.0;
    sol.dual_residual = (pr.a.transpose() * y - pr.c - z).norm();
    sol.dual_gap = std::abs(sol.value - sol.dual_value);
    return sol.primal_residual <= 1e-8 && sol.dual_gap <= 1e-7 &&
           sol.dual_residual <= 1e-7 * (1.0 + normc);
  };
  bool contract = finish();
  if (sol.status == Status::infeasible || sol.status == Status::unbounded) return sol;
  if (!contract && !converged) {
    x = kept_x;
    y = kept_y;
    z = kept_z;
    contract = finish();
  }
  sol.status = (converged || contract) && contract ? Status::optimal : Status::max_iter;
  return sol;
}

FeasibilityResult feasible_point(Index dim, const std::vector<Index>& blocks,
                                 const std::vector<Constraint>& constraints,
                                 const SolverOptions& opts) {
  SdpProblem p{dim, blocks, Mat(), constraints};
  const SdpSolution s = solve(p, opts);
  FeasibilityResult r;
  r.status = s.status;
  r.X = s.X;
  r.residual = s.primal_residual;
  r.farkas = s.farkas;
  r.feasible = s.status != Status::infeasible && s.primal_residual <= 1e-8 &&
               min_eigenvalue(s.X) >= -1e-8;
  return r;
}

// ---------------------------------------------------------------------------
// Region analysis

namespace {

// Number of eigenvalues (given descending) that belong to the range of a
// relative-interior point. Kernel eigenvalues of an interior-point iterate
// are separated from the rest by a clear multiplicative gap.
Index split_rank(const RVec& desc) {
  const Index n = desc.size();
  if (n == 0) return 0;
  const double scale = std::max(desc(0), 1e-300);
  if (desc(0) <= 1e-12) return 0;
  if (desc(n - 1) > 1e-4 * scale) return n;
  Index best_k = n;
  double best_ratio = 0.0;
  for (Index k = 1; k < n; ++k) {
    if (desc(k) > 1e-4 * scale) continue;
    const double floor = 1e-14 * scale;
    const double ratio = std::max(desc(k - 1), floor) / std::max(desc(k), floor);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_k = k;
    }
  }
  if (best_ratio >= 1e2) return best_k;
  // no clear gap; everything tiny is kernel
  Index k = 0;
  while (k < n && desc(k) > 1e-9 * scale) ++k;
  return k;
}

// Gauss-Newton on X = blockdiag(Y_b Y_b^*) for the equality constraints.
// Returns the final residual.
double polish_factor(const Prepared& pr, std::vector<Mat>& ys) {
  const Layout& lay = pr.layout;
  Index nparams = 0;
  for (const Mat& y : ys) nparams += 2 * y.size();
  auto assemble = [&](const std::vector<Mat>& yy) {
    RVec x = RVec::Zero(lay.total());
    for (std::size_t b = 0; b < lay.count(); ++b)
      if (yy[b].size()) lay.set_block(x, b, yy[b] * yy[b].adjoint());
    return x;
  };
  const double scale = 1.0 + pr.b_raw.norm();
  double res_norm = kInf;
  for (int iter = 0; iter < 40; ++iter) {
    const RVec res = pr.b_raw - pr.a_raw * assemble(ys);
    res_norm = res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
    if (res_norm <= 1e-14 * scale || nparams == 0) break;
    RMat cols(lay.total(), nparams);
    Index col = 0;
    for (std::size_t b = 0; b < lay.count(); ++b) {
      const Mat& y = ys[b];
      for (Index j = 0; j < y.cols(); ++j) {
        for (Index i = 0; i < y.rows(); ++i) {
          for (int part = 0; part < 2; ++part) {
            Mat e = Mat::Zero(y.rows(), y.cols());
            e(i, j) = part == 0 ? Scalar(1, 0) : Scalar(0, 1);
            const Mat dxm = e * y.adjoint() + y * e.adjoint();
            RVec v = RVec::Zero(lay.total());
            lay.set_block(v, b, dxm);
            cols.col(col++) = v;
          }
        }
      }
    }
    const RMat jac = pr.a_raw * cols;
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(jac);
    cod.setThreshold(1e-12);
    const RVec step = cod.solve(res);
    // Near-singular Jacobians at degenerate faces can overshoot; backtrack.
    bool improved = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      std::vector<Mat> trial = ys;
      col = 0;
      for (std::size_t b = 0; b < lay.count(); ++b) {
        Mat& y = trial[b];
        for (Index j = 0; j < y.cols(); ++j)
          for (Index i = 0; i < y.rows(); ++i) {
            y(i, j) += t * Scalar(step(col), step(col + 1));
            col += 2;
          }
      }
      const RVec r2 = pr.b_raw - pr.a_raw * assemble(trial);
      if ((r2.size() ? r2.cwiseAbs().maxCoeff() : 0.0) < res_norm) {
        ys = std::move(trial);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  {
    const RVec res = pr.b_raw - pr.a_raw * assemble(ys);
    res_norm = res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
  }
  return res_norm;
}

Mat block_diag_face(const Layout& lay, const std::vector<Mat>& bases, std::vector<Index>& sizes) {
  Index cols = 0;
  for (const Mat& u : bases) cols += u.cols();
  Mat face = Mat::Zero(lay.dim(), cols);
  Index c = 0;
  sizes.clear();
  for (std::size_t b = 0; b < lay.count(); ++b) {
    const Mat& u = bases[b];
    if (u.cols() == 0) continue;
    face.block(lay.offset(b), c, lay.size(b), u.cols()) = u;
    c += u.cols();
    sizes.push_back(u.cols());
  }
  return face;
}

SdpProblem reduce_problem(const SdpProblem& p, const Mat& face, const std::vector<Index>& sizes) {
  SdpProblem q;
  q.dim = face.cols();
  q.blocks = sizes;
  for (const auto& c : p.constraints) q.constraints.push_back({face.adjoint() * c.a * face, c.b});
  if (p.objective.size()) q.objective = face.adjoint() * p.objective * face;
  return q;
}

double max_violation(const SdpProblem& p, const Mat& x) {
  double v = 0.0;
  for (const auto& c : p.constraints) v = std::max(v, std::abs(real_inner(c.a, x) - c.b));
  return v;
}

}  // namespace

Region analyze_region(const SdpProblem& p, const Tolerance& tol, const SolverOptions& opts,
                      const Mat* hint) {
  (void)tol;
  SdpProblem base = p;
  base.objective = Mat();
  const Prepared pr = prepare(base);
  if (pr.inconsistent) throw Error("infeasible: linear constraints are inconsistent");
  const Layout& lay = pr.layout;

  Mat x;
  if (hint) {
    x = *hint;
  } else {
    const SdpSolution s = solve(base, opts);
    if (s.status == Status::infeasible) throw Error("infeasible: spectrahedron is empty");
    if (s.primal_residual > 1e-6 * (1.0 + pr.b_raw.norm()))
      throw InconclusiveError("region analysis: solver did not reach a feasible point (" +
                              to_string(s.status) + ")");
    x = s.X;
  }

  Region region;
  for (int round = 0; round < 4; ++round) {
    std::vector<Mat> ys(lay.count());
    bool reduced = false;
    for (std::size_t b = 0; b < lay.count(); ++b) {
      const Index nb = lay.size(b);
      if (nb == 0) continue;
      auto eig = hermitian_eig(block_of(x, lay, b));
      const RVec desc = eig.values.reverse();
      const Mat vecs = eig.vectors.rowwise().reverse();
      const Index k = split_rank(desc);
      if (k < nb) reduced = true;
      ys[b] = vecs.leftCols(k) * desc.head(k).cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    if (!reduced) {
      // Interior of the full cone: polish linearly onto the affine space.
      RVec xv = lay.pack(x);
      xv += pr.a.transpose() * (pr.b - pr.a * xv);
      Mat center = lay.unpack(xv);
      region.face = Mat::Identity(lay.dim(), lay.dim());
      region.face_blocks = lay.sizes();
      region.reduced = base;
      region.center = center;
      region.reduced_center = center;
      region.margin = min_eigenvalue(center);
      if (region.margin <= 0.0) {
        throw InconclusiveError("region analysis: polished center left the cone");
      }
      for (Index j = 0; j < pr.null.cols(); ++j) region.directions.push_back(lay.unpack(pr.null.col(j)));
      region.residual = max_violation(base, center);
      return region;
    }

    const double res = polish_factor(pr, ys);
    if (!(res <= 1e-9 * (1.0 + pr.b_raw.norm()))) {
      throw InconclusiveError("region analysis: face polishing did not converge (residual " +
                              std::to_string(res) + ")");
    }
    // A factor that lost rank means the face guess was too generous.
    bool degenerate = false;
    std::vector<Mat> bases(lay.count());
    for (std::size_t b = 0; b < lay.count(); ++b) {
      if (ys[b].size() == 0) {
        bases[b] = Mat(lay.size(b), 0);
        continue;
      }
      Eigen::JacobiSVD<Mat> svd(ys[b], Eigen::ComputeThinU);
      const RVec& s = svd.singularValues();
      if (s(s.size() - 1) < 1e-5 * std::max(s(0), 1e-300)) degenerate = true;
      bases[b] = svd.matrixU();
    }
    Mat xf = Mat::Zero(lay.dim(), lay.dim());
    for (std::size_t b = 0; b < lay.count(); ++b)
      if (ys[b].size())
        xf.block(lay.offset(b), lay.offset(b), lay.size(b), lay.size(b)) = ys[b] * ys[b].adjoint();
    if (degenerate) {
      x = xf;
      continue;
    }

    std::vector<Index> sizes;
    region.face = block_diag_face(lay, bases, sizes);
    region.face_blocks = sizes;
    region.reduced = reduce_problem(base, region.face, sizes);
    region.center = xf;
    region.reduced_center = region.face.adjoint() * xf * region.face;
    region.margin = sizes.empty() ? 0.0 : min_eigenvalue(region.reduced_center);
    region.residual = max_violation(base, xf);
    if (!sizes.empty()) {
      const Prepared rp = prepare(region.reduced);
      if (rp.inconsistent)
        throw InconclusiveError("region analysis: reduced constraints inconsistent");
      for (Index j = 0; j < rp.null.cols(); ++j) {
        region.directions.push_back(region.face * rp.layout.unpack(rp.null.col(j)) *
                                    region.face.adjoint());
      }
    }
    return region;
  }
  throw InconclusiveError("region analysis: face identification did not stabilize");
}

Maximum maximize_over(const Region& r, const Mat& objective, const SolverOptions& opts) {
  Maximum out;
  if (r.directions.empty()) {
    out.value = real_inner(objective, r.center);
    out.argmax = r.center;
    return out;
  }
  SdpProblem q = r.reduced;
  q.objective = hermitian_part(r.face.adjoint() * objective * r.face);
  const SdpSolution s = solve(q, opts);
  if (s.status != Status::optimal &&
      !(s.primal_residual <= 1e-7 && s.dual_gap <= 1e-6 * (1.0 + std::abs(s.value)))) {
    throw InconclusiveError("maximize_over: solver status " + to_string(s.status));
  }
  out.argmax = r.face * s.X * r.face.adjoint();
  out.value = real_inner(objective, out.argmax);
  return out;
}

double width_along(const Region& r, const Mat& probe, const SolverOptions& opts) {
  double g2 = 0.0;
  for (const Mat& d : r.directions) {
    const double g = real_inner(probe, d);
    g2 += g * g;
  }
  const double g = std::sqrt(g2);
  const double pn = std::max(1.0, probe.norm());
  if (g <= 1e-10 * pn) {
    return 2.0 * g * std::max(1.0, std::abs(r.center.trace().real()));
  }
  const double hi = maximize_over(r, probe, opts).value;
  const double lo = -maximize_over(r, -probe, opts).value;
  return std::max(0.0, hi - lo);
}

namespace {

Region compose(const Region& outer, const Region& inner) {
  Region r;
  r.face = outer.face * inner.face;
  r.face_blocks = inner.face_blocks;
  r.reduced = inner.reduced;
  r.center = outer.face * inner.center * outer.face.adjoint();
  r.reduced_center = inner.reduced_center;
  r.margin = inner.margin;
  r.residual = inner.residual;
  for (const Mat& d : inner.directions) r.directions.push_back(outer.face * d * outer.face.adjoint());
  return r;
}

}  // namespace

Mat extreme_point_refine(const SdpProblem& p, const Mat& x0, std::uint64_t seed,
                         const Tolerance& tol, const std::vector<Mat>& observables,
                         const SolverOptions& opts) {
  (void)x0;
  Rng rng(seed);
  Region region = analyze_region(p, tol, opts);
  const int limit = static_cast<int>(region.dimension()) + 2;
  for (int step = 0; step <= limit; ++step) {
    if (region.directions.empty()) return region.center;
    Mat objective;
    if (observables.empty()) {
      objective = Mat::Zero(p.dim, p.dim);
      for (const Mat& d : region.directions) objective += rng.normal() * d;
    } else {
      double spread = 0.0;
      for (const Mat& o : observables)
        for (const Mat& d : region.directions) spread = std::max(spread, std::abs(real_inner(o, d)));
      if (spread <= 1e-10) return region.center;
      objective = Mat::Zero(p.dim, p.dim);
      for (const Mat& o : observables) objective += rng.normal() * o;
    }
    const Maximum mx = maximize_over(region, objective, opts);
    SdpProblem pinned = region.reduced;
    const Mat red_obj = hermitian_part(region.face.adjoint() * objective * region.face);
    const Mat red_arg = region.face.adjoint() * mx.argmax * region.face;
    pinned.constraints.push_back({red_obj, real_inner(red_obj, red_arg)});
    const Region inner = analyze_region(pinned, tol, opts, &red_arg);
    if (inner.dimension() >= region.dimension()) {
      throw InconclusiveError("extreme_point_refine: optimal face did not shrink");
    }
    region = compose(region, inner);
  }
  throw InconclusiveError("extreme_point_refine: iteration budget exhausted");
}

SingletonReport singleton_check(const SdpProblem& p, const std::vector<Mat>& probes,
                                const Tolerance& tol, const Mat* known_point, bool stop_early,
                                const SolverOptions& opts) {
  (void)known_point;
  const Region region = analyze_region(p, tol, opts);
  SingletonReport rep;
  rep.point = region.center;
  rep.region_dim = region.dimension();
  rep.singleton = true;
  for (const Mat& probe : probes) {
    const double w = width_along(region, probe, opts);
    ++rep.probes_checked;
    rep.max_width = std::max(rep.max_width, w);
    if (w > kSingletonWidth) {
      rep.singleton = false;
      if (stop_early) break;
    }
  }
  return rep;
}

}  // namespace ncb::sdp
