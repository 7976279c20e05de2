// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hull_oracle.hpp"
#include "ncb/boundary.hpp"
#include "ncb/mconvex.hpp"
#include "ncb/random.hpp"
#include "sdp_cases.hpp"

using namespace ncb;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void fail(const std::string& why) {
    pass = false;
    if (failures.size() < 5) failures.push_back(why);
  }
};

// Peaking observations collected from the other criteria.
struct PeakRecord {
  int observed = 0;
  std::vector<std::string> counterexamples;
};

PeakRecord g_peaks;

bool is_boundary(const std::vector<BoundaryEntry>& reps, int label) {
  for (const auto& e : reps)
    if (e.irrep.label == label) return e.certificate.is_boundary;
  return false;
}

void record_peaks(const Spectrum& sp, const std::vector<BoundaryEntry>& reps, const Mat& element,
                  Index n, const std::string& where) {
  for (const Irrep& p : sp.irreps()) {
    if (!peak_verify(sp, p, element, n)) continue;
    ++g_peaks.observed;
    if (!is_boundary(reps, p.label)) g_peaks.counterexamples.push_back(where + " irrep " + std::to_string(p.label));
  }
}

// Block-diagonal random generators, so that C*(S) has several irreducible classes.
std::vector<Mat> random_generators(Index l, int count, Rng& rng) {
  std::vector<Index> sizes;
  Index left = l;
  const Index max_blocks = std::min<Index>(3, l);
  const Index blocks = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(max_blocks));
  for (Index b = 0; b < blocks - 1 && left > 1; ++b) {
    const Index s = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(left - 1));
    sizes.push_back(s);
    left -= s;
  }
  sizes.push_back(left);
  std::vector<Mat> gens;
  for (int g = 0; g < count; ++g) {
    Mat m = Mat::Zero(l, l);
    Index off = 0;
    for (Index s : sizes) {
      m.block(off, off, s, s) = random_complex(s, s, rng);
      off += s;
    }
    gens.push_back(m);
  }
  return gens;
}

SystemPtr make_system(const std::vector<Mat>& gens, Index l) {
  return std::make_shared<const OperatorSystem>(build_operator_system(gens, l));
}

Mat random_element(const OperatorSystem& s, Rng& rng) {
  Mat e = Mat::Zero(s.ambient_dim, s.ambient_dim);
  for (const Mat& b : s.basis) e += rng.complex_normal() * b;
  return e;
}

// Random ucp map into M_n as Kraus operators normalized by sum K^*K = I.
std::vector<Mat> random_kraus(Index l, Index n, int count, Rng& rng) {
  std::vector<Mat> g;
  Mat t = Mat::Zero(n, n);
  for (int k = 0; k < count; ++k) {
    g.push_back(random_complex(l, n, rng));
    t += g.back().adjoint() * g.back();
  }
  const auto e = hermitian_eig(t);
  const Mat inv_sqrt = e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.adjoint();
  for (Mat& k : g) k = k * inv_sqrt;
  return g;
}

Mat block_x() {
  Mat x = Mat::Zero(3, 3);
  x(0, 0) = 1.0;
  x(1, 2) = 2.0;
  return x;
}

// Criteria 1 and 2 share their runs.
struct NormRuns {
  int total = 0;
  Outcome attain;
  Outcome level;
};

NormRuns run_norm_attainment() {
  NormRuns r;
  Rng rng(1001);
  for (int inst = 0; inst < 50; ++inst) {
    const Index l = 2 + inst % 4;
    const int gens = 1 + (inst / 4) % 3;
    const std::string tag = "instance " + std::to_string(inst);
    try {
      const SystemPtr s = make_system(random_generators(l, gens, rng), l);
      const Mat e = random_element(*s, rng);
      const Spectrum sp = compute_spectrum(s, derive_seed(1002, inst));
      const auto reps = boundary_representations(sp, derive_seed(1003, inst));
      const NormCertificate c = norm_certificate(sp, e, derive_seed(1004, inst), {}, &reps);
      ++r.total;
      const double err = std::abs(c.achieved - c.norm);
      if (err > 1e-6 * std::max(1.0, c.norm)) r.attain.fail(tag + ": |achieved - norm| = " + std::to_string(err));
      if (!c.certificate.is_boundary) r.attain.fail(tag + ": representation not boundary");
      if (c.state_level > 2) r.level.fail(tag + ": state level " + std::to_string(c.state_level));
      if (!c.state_pure) r.level.fail(tag + ": intermediate state not pure");
      if (std::abs(c.state_norm - c.norm) > 1e-6 * std::max(1.0, c.norm))
        r.level.fail(tag + ": intermediate state misses the norm");
      record_peaks(sp, reps, e, 1, "criterion 1 " + tag);
    } catch (const std::exception& ex) {
      r.attain.fail(tag + ": " + ex.what());
      r.level.fail(tag + ": no state produced");
    }
  }
  r.attain.detail = std::to_string(r.total) + "/50 certificates";
  r.level.detail = std::to_string(r.total) + "/50 intermediate states checked";
  return r;
}

Outcome run_factorization() {
  Outcome o;
  Rng rng(2001);
  int pure = 0, attempts = 0;
  while (pure < 30 && attempts < 200) {
    ++attempts;
    const Index l = 2 + attempts % 3;
    const int gens = 2 + attempts % 2;
    const std::string tag = "attempt " + std::to_string(attempts);
    try {
      const SystemPtr s = make_system(random_generators(l, gens, rng), l);
      const Spectrum sp = compute_spectrum(s, derive_seed(2002, attempts));
      const auto reps = boundary_representations(sp, derive_seed(2003, attempts));
      std::vector<const Irrep*> bd;
      for (const auto& e : reps)
        if (e.certificate.is_boundary) bd.push_back(&e.irrep);
      if (bd.empty()) {
        o.fail(tag + ": no boundary representation");
        continue;
      }
      const Irrep& pi = *bd[static_cast<std::size_t>(rng.uniform() * static_cast<double>(bd.size()))];
      const Index k = std::min<Index>(pi.dim, 1 + attempts % 2);
      const Mat w = random_isometry(pi.dim, k, rng);
      const UcpMap phi = ucp_from_kraus(s, {Mat(pi.embedding * w)});
      if (!purity_check(phi, derive_seed(2004, attempts)).is_pure) continue;
      ++pure;
      const Factorization f = pure_state_factorization(phi, sp, derive_seed(2005, attempts), {}, -1, &reps);
      if (f.residual > 1e-6) o.fail(tag + ": residual " + std::to_string(f.residual));
      if (isometry_defect(f.v) > 1e-9) o.fail(tag + ": v is not an isometry");
      if (!f.certificate.is_boundary || !is_boundary(reps, f.pi.label)) o.fail(tag + ": pi not boundary");
    } catch (const std::exception& ex) {
      o.fail(tag + ": " + ex.what());
    }
  }
  if (pure < 30) o.fail("only " + std::to_string(pure) + " pure states found");
  o.detail = std::to_string(pure) + " pure states factored (" + std::to_string(attempts) + " candidates)";
  return o;
}

Outcome run_counterexample() {
  Outcome o;
  try {
    const Mat x = block_x();
    const SystemPtr s = element_system(x);
    const Spectrum sp = compute_spectrum(s, 3001);
    const auto reps = boundary_representations(sp, 3002);
    const Mat one = Mat::Constant(1, 1, 1.0);
    Mat x2 = Mat::Zero(2, 2);
    x2(0, 1) = 2.0;
    const auto ext = matrix_extreme_check({x, 1}, one, 3003);
    if (!ext.matrix_extreme) o.fail("x_1 not matrix extreme");
    const auto b1 = boundary_point_check({x, 1}, one, 3004, {}, &sp);
    if (b1.is_boundary_point) o.fail("x_1 reported as boundary point");
    const auto b2 = boundary_point_check({x, 2}, x2, 3005, {}, &sp);
    if (!b2.is_boundary_point) o.fail("x_2 not a boundary point");
    if (b2.residual > 1e-6) o.fail("x_2 factorization residual " + std::to_string(b2.residual));
    int classes = 0;
    for (const auto& e : reps) {
      if (!e.certificate.is_boundary) continue;
      ++classes;
      if (e.irrep.dim != 2) o.fail("boundary class of dimension " + std::to_string(e.irrep.dim));
    }
    if (classes != 1) o.fail(std::to_string(classes) + " boundary classes");
    record_peaks(sp, reps, x, 1, "criterion 4");
    o.detail = "x_1 extreme, not boundary; x_2 boundary; " + std::to_string(classes) + " boundary class";
  } catch (const std::exception& ex) {
    o.fail(ex.what());
  }
  return o;
}

Outcome run_morenz() {
  Outcome o;
  Rng rng(5001);
  int done = 0;
  Index worst_terms = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index l = 2 + inst % 3;
    const Index n = 1 + (inst / 3) % 3;
    const std::string tag = "query " + std::to_string(inst);
    try {
      const Mat x = inst % 2 == 0 ? random_generators(l, 1, rng).front() : random_complex(l, l, rng);
      const auto kraus = random_kraus(l, n, 2, rng);
      Mat a = Mat::Zero(n, n);
      for (const Mat& k : kraus) a += k.adjoint() * x * k;
      const auto m = morenz_decomposition({x, n}, a, derive_seed(5002, inst));
      ++done;
      worst_terms = std::max<Index>(worst_terms, static_cast<Index>(m.terms.size()));
      if (m.reconstruction_residual > 1e-6) o.fail(tag + ": residual " + std::to_string(m.reconstruction_residual));
      if (m.column_residual > 1e-6) o.fail(tag + ": column residual " + std::to_string(m.column_residual));
      if (static_cast<Index>(m.terms.size()) > 3 * n * n) o.fail(tag + ": " + std::to_string(m.terms.size()) + " terms");
      for (std::size_t t = 0; t < m.terms.size(); ++t)
        if (m.terms[t].kind == TermKind::pure &&
            !purity_check(m.terms[t].psi, derive_seed(5003, inst * 64 + static_cast<int>(t))).is_pure)
          o.fail(tag + ": term " + std::to_string(t) + " not pure");
    } catch (const std::exception& ex) {
      o.fail(tag + ": " + ex.what());
    }
  }
  o.detail = std::to_string(done) + "/20 decompositions, at most " + std::to_string(worst_terms) + " terms";
  return o;
}

Outcome run_amplification() {
  Outcome o;
  Rng rng(6001);
  int done = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const Index l = 2 + inst % 2;
    const int gens = 1 + (inst / 2) % 2;
    const std::string tag = "system " + std::to_string(inst);
    try {
      const SystemPtr s = make_system(random_generators(l, gens, rng), l);
      const Spectrum sp = compute_spectrum(s, derive_seed(6002, inst));
      const auto reps = boundary_representations(sp, derive_seed(6003, inst));
      const SystemPtr amp = std::make_shared<const OperatorSystem>(amplify(*s, 2));
      const Spectrum spa = compute_spectrum(amp, derive_seed(6004, inst));
      const auto repa = boundary_representations(spa, derive_seed(6005, inst));
      std::vector<Irrep> lifted;
      for (const auto& e : reps)
        if (e.certificate.is_boundary)
          lifted.push_back(make_irrep(spa.algebra, kron(Mat::Identity(2, 2), e.irrep.embedding), e.irrep.label));
      std::vector<const Irrep*> found;
      for (const auto& e : repa)
        if (e.certificate.is_boundary) found.push_back(&e.irrep);
      for (const Irrep& p : lifted) {
        bool hit = false;
        for (const Irrep* q : found) hit = hit || unitary_equivalence(p, *q).has_value();
        if (!hit) o.fail(tag + ": amplified boundary class " + std::to_string(p.label) + " missing");
      }
      for (const Irrep* q : found) {
        bool hit = false;
        for (const Irrep& p : lifted) hit = hit || unitary_equivalence(p, *q).has_value();
        if (!hit) o.fail(tag + ": extra boundary class " + std::to_string(q->label));
      }
      ++done;
    } catch (const std::exception& ex) {
      o.fail(tag + ": " + ex.what());
    }
  }
  o.detail = std::to_string(done) + "/10 systems compared at n=2";
  return o;
}

Outcome run_purity_oracle() {
  Outcome o;
  Rng rng(7001);
  int agree = 0;
  for (int inst = 0; inst < 40; ++inst) {
    const Index l = 2 + inst % 2;
    const Index n = 1 + (inst / 2) % l;
    const bool rank_one = inst < 20;
    const std::string tag = "map " + std::to_string(inst);
    try {
      std::vector<Mat> gens;
      for (Index i = 0; i < l; ++i)
        for (Index j = 0; j < l; ++j) gens.push_back(matrix_unit(l, i, j));
      const SystemPtr s = make_system(gens, l);
      const auto kraus = rank_one ? std::vector<Mat>{random_isometry(l, n, rng)} : random_kraus(l, n, 2 + inst % 2, rng);
      const Mat choi = choi_from_kraus(kraus);
      const auto ev = hermitian_eig(choi).values;
      Index rank = 0;
      for (Index i = 0; i < ev.size(); ++i)
        if (ev(i) > Tolerance{}.rank * std::max(1.0, ev.maxCoeff())) ++rank;
      const bool pure = purity_check(ucp_from_kraus(s, kraus), derive_seed(7002, inst)).is_pure;
      if (pure == (rank == 1)) {
        ++agree;
      } else {
        o.fail(tag + ": purity " + std::to_string(pure) + " vs Choi rank " + std::to_string(rank));
      }
    } catch (const std::exception& ex) {
      o.fail(tag + ": " + ex.what());
    }
  }
  o.detail = std::to_string(agree) + "/40 agree";
  return o;
}

Outcome run_function_systems() {
  Outcome o;
  Rng rng(8001);
  int agree = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const Index l = 3 + inst % 3;
    const std::string tag = "diagonal " + std::to_string(inst);
    try {
      std::vector<Scalar> vals;
      for (Index i = 0; i < l; ++i) vals.push_back(rng.complex_normal());
      // make sure some instances have interior points
      if (inst % 2 == 0) vals.back() = (vals[0] + vals[1] + vals[2]) / 3.0;
      Mat d = Mat::Zero(l, l);
      for (Index i = 0; i < l; ++i) d(i, i) = vals[static_cast<std::size_t>(i)];
      const SystemPtr s = make_system({d}, l);
      const Spectrum sp = compute_spectrum(s, derive_seed(8002, inst));
      const auto reps = boundary_representations(sp, derive_seed(8003, inst));
      const auto hull = oracle::convex_hull(vals);
      bool ok = static_cast<Index>(reps.size()) == l;
      for (const auto& e : reps) {
        const Scalar value = e.irrep(d)(0, 0);
        if (e.certificate.is_boundary != oracle::is_vertex(hull, value)) ok = false;
      }
      if (ok) {
        ++agree;
      } else {
        o.fail(tag + ": boundary characters differ from hull vertices");
      }
      Scalar centroid = 0.0;
      for (const Scalar& v : vals) centroid += v / static_cast<double>(l);
      record_peaks(sp, reps, Mat(d - centroid * Mat::Identity(l, l)), 1, "criterion 8 " + tag);
    } catch (const std::exception& ex) {
      o.fail(tag + ": " + ex.what());
    }
  }
  o.detail = std::to_string(agree) + "/10 agree with the convex hull oracle";
  return o;
}

Outcome run_peaking() {
  Outcome o;
  for (const auto& c : g_peaks.counterexamples) o.fail("peaking but not boundary: " + c);
  if (g_peaks.observed == 0) o.fail("no peaking instance observed");
  o.detail = std::to_string(g_peaks.observed) + " peaking instances, " +
             std::to_string(g_peaks.counterexamples.size()) + " counterexamples";
  return o;
}

Outcome run_sdp_suite() {
  Outcome o;
  int ok = 0;
  const auto cases = sdp_cases::catalog();
  for (const auto& c : cases) {
    try {
      const std::string why = sdp_cases::check(c, sdp::solve(c.problem));
      if (why.empty()) {
        ++ok;
      } else {
        o.fail(c.name + ": " + why);
      }
    } catch (const std::exception& ex) {
      o.fail(c.name + ": " + ex.what());
    }
  }
  if (cases.size() != 12) o.fail("catalog size " + std::to_string(cases.size()));
  o.detail = std::to_string(ok) + "/" + std::to_string(cases.size()) + " closed-form problems";
  return o;
}

void report(int id, const std::string& title, const Outcome& o, double seconds, bool& all) {
  std::printf("criterion %d: %s: %s (%s; %.1f s)\n", id, o.pass ? "PASS" : "FAIL", title.c_str(),
              o.detail.c_str(), seconds);
  for (const auto& f : o.failures) std::printf("    %s\n", f.c_str());
  std::fflush(stdout);
  all = all && o.pass;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

int main() {
  bool all = true;
  auto t = std::chrono::steady_clock::now();
  const NormRuns norms = run_norm_attainment();
  const double t12 = seconds_since(t);
  report(1, "norm attained by a boundary representation", norms.attain, t12, all);
  report(2, "pure norm-attaining matrix state of level <= 2", norms.level, t12, all);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> rest = {
      {"pure matrix states factor through boundary representations", run_factorization},
      {"pinned compression example", run_counterexample},
      {"Morenz decomposition with m <= 3n^2", run_morenz},
      {"boundary classes of M_2(S) are amplifications", run_amplification},
      {"purity agrees with Choi rank on M_l", run_purity_oracle},
      {"boundary characters are hull vertices", run_function_systems},
  };
  int id = 3;
  for (const auto& [title, run] : rest) {
    t = std::chrono::steady_clock::now();
    const Outcome o = run();
    report(id++, title, o, seconds_since(t), all);
  }
  t = std::chrono::steady_clock::now();
  report(9, "peaking representations are boundary", run_peaking(), seconds_since(t), all);
  t = std::chrono::steady_clock::now();
  report(10, "SDP closed-form suite", run_sdp_suite(), seconds_since(t), all);
  return all ? 0 : 1;
}
