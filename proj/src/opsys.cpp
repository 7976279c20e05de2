#include "ncb/opsys.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ncb/random.hpp"

namespace ncb {

namespace {

// Real span of Hermitian matrices kept trace-orthonormal by two-pass Gram-Schmidt.
class HermitianSpan {
 public:
  explicit HermitianSpan(Index l) : l_(l), cols_(l * l, 0) {}

  bool add(const Mat& h, double cutoff) {
    const double scale = std::max(1.0, h.norm());
    Mat r = hermitian_part(h);
    for (int pass = 0; pass < 2; ++pass) {
      if (cols_.cols() == 0) break;
      const Eigen::Map<const Vec> v(r.data(), r.size());
      const RVec coef = (cols_.adjoint() * v).real();
      const Vec proj = cols_ * coef.cast<Scalar>();
      r -= Eigen::Map<const Mat>(proj.data(), l_, l_);
    }
    const double nr = r.norm();
    if (nr <= cutoff * scale) return false;
    r = hermitian_part(r) / nr;
    mats_.push_back(r);
    cols_.conservativeResize(Eigen::NoChange, cols_.cols() + 1);
    cols_.col(cols_.cols() - 1) = Eigen::Map<const Vec>(r.data(), r.size());
    return true;
  }

  const std::vector<Mat>& mats() const { return mats_; }
  Index size() const { return static_cast<Index>(mats_.size()); }

 private:
  Index l_;
  Mat cols_;
  std::vector<Mat> mats_;
};

void require_shape(const Mat& m, Index l, const std::string& what) {
  if (m.rows() != l || m.cols() != l) {
    throw DimensionError(what + ": expected " + std::to_string(l) + "x" + std::to_string(l) +
                         ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  require_finite(m, what);
}

// Trace-orthonormal real basis of the Hermitian l x l matrices.
std::vector<Mat> hermitian_units(Index l) {
  std::vector<Mat> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < l; ++i) out.push_back(matrix_unit(l, i, i));
  for (Index i = 0; i < l; ++i) {
    for (Index j = i + 1; j < l; ++j) {
      out.push_back(s * (matrix_unit(l, i, j) + matrix_unit(l, j, i)));
      out.push_back(s * Scalar(0, 1) * (matrix_unit(l, i, j) - matrix_unit(l, j, i)));
    }
  }
  return out;
}

// Real combinations of `params` (Hermitian) commuting with every generator.
std::vector<Mat> commuting_hermitian(const std::vector<Mat>& params, const std::vector<Mat>& gens,
                                     double cutoff) {
  const Index np = static_cast<Index>(params.size());
  if (np == 0) return {};
  const Index l = params.front().rows();
  const Index block = 2 * l * l;
  RMat sys(block * static_cast<Index>(std::max<std::size_t>(gens.size(), 1)), np);
  sys.setZero();
  for (Index p = 0; p < np; ++p) {
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const Mat c = params[p] * gens[g] - gens[g] * params[p];
      for (Index k = 0; k < l * l; ++k) {
        sys(static_cast<Index>(g) * block + 2 * k, p) = c(k).real();
        sys(static_cast<Index>(g) * block + 2 * k + 1, p) = c(k).imag();
      }
    }
  }
  const RMat ns = null_space(sys, cutoff);
  HermitianSpan span(l);
  for (Index j = 0; j < ns.cols(); ++j) {
    Mat h = Mat::Zero(l, l);
    for (Index p = 0; p < np; ++p) h += ns(p, j) * params[p];
    span.add(h, 1e-10);
  }
  return span.mats();
}

// Dimension of the real span of compressions V^* h V.
Index compressed_rank(const std::vector<Mat>& hs, const Mat& v, double cutoff) {
  const Index n = v.cols();
  RMat cols(2 * n * n, static_cast<Index>(hs.size()));
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const Mat c = v.adjoint() * hs[k] * v;
    for (Index i = 0; i < n * n; ++i) {
      cols(2 * i, static_cast<Index>(k)) = c(i).real();
      cols(2 * i + 1, static_cast<Index>(k)) = c(i).imag();
    }
  }
  if (cols.cols() == 0) return 0;
  Eigen::JacobiSVD<RMat> svd(cols);
  const RVec& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s(r) > cutoff * std::max(1.0, s(0))) ++r;
  return r;
}

// Split ascending values into k clusters at the k-1 widest gaps.
// Returns empty when the split is not clean.
std::vector<std::vector<Index>> cluster(const RVec& vals, Index k, double rank_tol) {
  const Index n = vals.size();
  if (k <= 0 || k > n) return {};
  std::vector<Index> order(static_cast<std::size_t>(std::max<Index>(n - 1, 0)));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return vals(a + 1) - vals(a) > vals(b + 1) - vals(b);
  });
  std::vector<Index> cuts(order.begin(), order.begin() + (k - 1));
  std::sort(cuts.begin(), cuts.end());
  const double span = std::max(1.0, vals.cwiseAbs().maxCoeff());
  double min_cut = std::numeric_limits<double>::infinity();
  for (Index c : cuts) min_cut = std::min(min_cut, vals(c + 1) - vals(c));
  double max_inner = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    if (std::find(cuts.begin(), cuts.end(), i) == cuts.end())
      max_inner = std::max(max_inner, vals(i + 1) - vals(i));
  }
  if (k > 1 && (min_cut < rank_tol * span || min_cut < 1e3 * max_inner)) return {};
  if (k == 1 && max_inner > 1e-6 * span) return {};
  std::vector<std::vector<Index>> groups(1);
  for (Index i = 0; i < n; ++i) {
    groups.back().push_back(i);
    if (std::find(cuts.begin(), cuts.end(), i) != cuts.end()) groups.emplace_back();
  }
  return groups;
}

Mat columns(const Mat& m, const std::vector<Index>& idx) {
  Mat out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

struct BlockResult {
  Index n = 0, m = 0;
  std::vector<Mat> copies;  // l x n each, aligned
  Index anchor = 0;
};

}  // namespace

OperatorSystem build_operator_system(const std::vector<Mat>& generators, Index l,
                                     const Tolerance& tol) {
  tol.validate();
  if (l <= 0) throw DimensionError("operator system: ambient dimension must be positive");
  OperatorSystem s;
  s.ambient_dim = l;
  s.generators = generators;
  HermitianSpan span(l);
  span.add(Mat::Identity(l, l), tol.rank);
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const Mat& g = generators[k];
    require_shape(g, l, "generator " + std::to_string(k));
    span.add(0.5 * (g + g.adjoint()), tol.rank);
    span.add(Scalar(0, -0.5) * (g - g.adjoint()), tol.rank);
  }
  s.basis = span.mats();
  return s;
}

std::optional<std::vector<Scalar>> membership(const OperatorSystem& s, const Mat& m,
                                              const Tolerance& tol) {
  require_shape(m, s.ambient_dim, "membership");
  std::vector<Scalar> c;
  Mat r = m;
  for (const Mat& b : s.basis) {
    const Scalar ck = trace_inner(m, b);
    c.push_back(ck);
    r -= ck * b;
  }
  if (r.norm() > tol.eq * static_cast<double>(s.ambient_dim) * std::max(1.0, m.norm()))
    return std::nullopt;
  return c;
}

OperatorSystem amplify(const OperatorSystem& s, Index n, const Tolerance& tol) {
  if (n < 1) throw DimensionError("amplify: n must be at least 1");
  if (n == 1) return s;
  std::vector<Mat> gens;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (const Mat& b : s.basis) gens.push_back(kron(matrix_unit(n, i, j), b));
  OperatorSystem out = build_operator_system(gens, n * s.ambient_dim, tol);
  if (out.dim() != n * n * s.dim())
    throw Error("amplify: dimension " + std::to_string(out.dim()) + " differs from n^2 dim(S)");
  return out;
}

StarAlgebra generated_cstar_algebra(const OperatorSystem& s, const Tolerance& tol) {
  const Index l = s.ambient_dim;
  HermitianSpan span(l);
  for (const Mat& b : s.basis) span.add(b, tol.rank);
  StarAlgebra a;
  a.ambient_dim = l;
  a.generators = s.basis;
  // Right multiplication by generators of a unital *-closed span reaches every word.
  Index done = 0;
  while (done < span.size()) {
    const Index upto = span.size();
    for (Index i = done; i < upto; ++i) {
      const Mat bi = span.mats()[static_cast<std::size_t>(i)];
      for (const Mat& g : s.basis) {
        const Mat p = bi * g;
        span.add(0.5 * (p + p.adjoint()), tol.rank);
        span.add(Scalar(0, -0.5) * (p - p.adjoint()), tol.rank);
      }
    }
    done = upto;
    if (span.size() > l * l) throw Error("algebra closure exceeded l^2 dimensions");
  }
  a.basis = span.mats();
  return a;
}

Irrep make_irrep(const StarAlgebra& a, const Mat& embedding, int label) {
  Irrep p;
  p.dim = embedding.cols();
  p.label = label;
  p.embedding = embedding;
  for (const Mat& b : a.basis) p.action.push_back(embedding.adjoint() * b * embedding);
  return p;
}

std::vector<Scalar> character(const Irrep& p) {
  std::vector<Scalar> c;
  for (const Mat& m : p.action) c.push_back(m.trace());
  return c;
}

RepDecomposition irreducible_decomposition(const StarAlgebra& a, std::uint64_t seed,
                                           const Tolerance& tol) {
  tol.validate();
  const Index l = a.ambient_dim;
  const std::vector<Mat>& gens = a.generators.empty() ? a.basis : a.generators;
  const std::vector<Mat> commutant = commuting_hermitian(hermitian_units(l), gens, 1e-9);
  const std::vector<Mat> center = commuting_hermitian(a.basis, gens, 1e-9);
  const Index ncentral = static_cast<Index>(center.size());
  if (ncentral == 0) throw Error("irreducible_decomposition: algebra is not unital");

  for (int attempt = 0; attempt < 10; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Mat z = Mat::Zero(l, l);
    for (const Mat& c : center) z += rng.normal() * c;
    const auto ez = hermitian_eig(z);
    const auto groups = cluster(ez.values, ncentral, tol.rank);
    if (groups.empty()) continue;

    std::vector<BlockResult> blocks;
    bool ok = true;
    for (const auto& g : groups) {
      const Mat u = columns(ez.vectors, g);
      const Index d = u.cols();
      const Index m2 = compressed_rank(commutant, u, 1e-8);
      const Index m = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(m2))));
      if (m * m != m2 || m == 0 || d % m != 0) {
        ok = false;
        break;
      }
      BlockResult br;
      br.m = m;
      br.n = d / m;
      // random commutant element splits the multiplicity space
      Mat h = Mat::Zero(l, l);
      for (const Mat& c : commutant) h += rng.normal() * c;
      const auto eh = hermitian_eig(Mat(u.adjoint() * h * u));
      const auto copies = cluster(eh.values, m, tol.rank);
      if (copies.empty()) {
        ok = false;
        break;
      }
      for (const auto& cp : copies) {
        if (static_cast<Index>(cp.size()) != br.n) {
          ok = false;
          break;
        }
        br.copies.push_back(u * columns(eh.vectors, cp));
      }
      if (!ok) break;
      // align copies through an intertwiner from the commutant
      Mat t = Mat::Zero(l, l);
      for (const Mat& c : commutant) t += rng.complex_normal() * c;
      for (Index j = 1; j < m; ++j) {
        const Mat x = br.copies[static_cast<std::size_t>(j)].adjoint() * t * br.copies[0];
        const double fn = x.norm();
        if (fn < 1e-8) {
          ok = false;
          break;
        }
        const Mat unit = x * (std::sqrt(static_cast<double>(br.n)) / fn);
        if (isometry_defect(unit) > 1e-7) {
          ok = false;
          break;
        }
        br.copies[static_cast<std::size_t>(j)] = br.copies[static_cast<std::size_t>(j)] * unit;
      }
      if (!ok) break;
      const Mat proj = u * u.adjoint();
      br.anchor = l;
      for (Index i = 0; i < l; ++i)
        if (proj(i, i).real() > 1e-6) {
          br.anchor = i;
          break;
        }
      blocks.push_back(std::move(br));
    }
    if (!ok) continue;

    std::stable_sort(blocks.begin(), blocks.end(), [](const BlockResult& x, const BlockResult& y) {
      if (x.n != y.n) return x.n < y.n;
      if (x.m != y.m) return x.m < y.m;
      return x.anchor < y.anchor;
    });

    RepDecomposition out;
    out.seed = seed;
    out.attempts = attempt + 1;
    out.unitary = Mat(l, 0);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const BlockResult& br = blocks[i];
      RepBlock rb;
      rb.irrep_dim = br.n;
      rb.multiplicity = br.m;
      rb.unitary = Mat(l, br.n * br.m);
      for (Index p = 0; p < br.n; ++p)
        for (Index j = 0; j < br.m; ++j)
          rb.unitary.col(p * br.m + j) = br.copies[static_cast<std::size_t>(j)].col(p);
      const Index c0 = out.unitary.cols();
      out.unitary.conservativeResize(Eigen::NoChange, c0 + rb.unitary.cols());
      out.unitary.rightCols(rb.unitary.cols()) = rb.unitary;
      out.irreps.push_back(make_irrep(a, br.copies[0], static_cast<int>(i)));
      out.blocks.push_back(std::move(rb));
    }

    // verify the block form on every basis element
    double worst = isometry_defect(out.unitary);
    for (std::size_t k = 0; k < a.basis.size(); ++k) {
      const Mat conj = out.unitary.adjoint() * a.basis[k] * out.unitary;
      Mat expect = Mat::Zero(l, l);
      Index off = 0;
      for (std::size_t i = 0; i < out.blocks.size(); ++i) {
        const Index m = out.blocks[i].multiplicity;
        const Index sz = out.blocks[i].irrep_dim * m;
        expect.block(off, off, sz, sz) = kron(out.irreps[i].action[k], Mat::Identity(m, m));
        off += sz;
      }
      worst = std::max(worst, (conj - expect).cwiseAbs().maxCoeff());
    }
    if (worst > static_cast<double>(l) * tol.eq * 10.0) continue;
    return out;
  }
  throw Error("irreducible_decomposition: no clean split after 10 attempts");
}

std::optional<Mat> unitary_equivalence(const Irrep& p1, const Irrep& p2, const Tolerance& tol) {
  if (p1.dim != p2.dim || p1.action.size() != p2.action.size()) return std::nullopt;
  const Index n = p1.dim;
  const auto c1 = character(p1), c2 = character(p2);
  for (std::size_t k = 0; k < c1.size(); ++k) {
    if (std::abs(c1[k] - c2[k]) > tol.rank * static_cast<double>(n)) return std::nullopt;
  }
  // U pi1(a) - pi2(a) U = 0 in column-major vec form
  const Index nn = n * n;
  Mat sys(nn * static_cast<Index>(p1.action.size()), nn);
  const Mat id = Mat::Identity(n, n);
  for (std::size_t k = 0; k < p1.action.size(); ++k) {
    sys.middleRows(static_cast<Index>(k) * nn, nn) =
        kron(Mat(p1.action[k].transpose()), id) - kron(id, p2.action[k]);
  }
  const Mat ns = null_space(sys, 1e-8);
  if (ns.cols() != 1) return std::nullopt;
  Mat u = Eigen::Map<const Mat>(ns.data(), n, n) * std::sqrt(static_cast<double>(n));
  if (isometry_defect(u) > 1e-7) return std::nullopt;
  // fix the global phase so the largest entry is real positive
  Index bi = 0, bj = 0;
  u.cwiseAbs().maxCoeff(&bi, &bj);
  u *= std::conj(u(bi, bj)) / std::abs(u(bi, bj));
  for (std::size_t k = 0; k < p1.action.size(); ++k) {
    if ((u * p1.action[k] - p2.action[k] * u).cwiseAbs().maxCoeff() >
        tol.eq * 10.0 * static_cast<double>(n))
      return std::nullopt;
  }
  return u;
}

}  // namespace ncb
