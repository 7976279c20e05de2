#include "ncb/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "ncb/boundary.hpp"
#include "ncb/mconvex.hpp"
#include "ncb/random.hpp"

namespace ncb::cli {

namespace {

// What each command certifies; embedded in every report.
const std::map<std::string, std::string> kClaims = {
    {"boundary-reps", "irreducible representations of C*(S) whose restriction to S has a unique ucp extension"},
    {"norm-cert", "every s in M_n(S) attains its norm at a boundary representation"},
    {"purity", "a ucp map is pure iff every cp map below it is a scalar multiple"},
    {"wrange", "membership in and support function of the matricial range"},
    {"morenz", "C*-convex decomposition into pure terms with at most 3n^2 terms"},
    {"peak-verify", "peaking representations are boundary representations"},
    {"amplify-check", "boundary representations of M_n(S) are the n-fold amplifications of those of S"},
    {"recovery-check", "boundary points of the matrix range are compressions of a generating family"},
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void expect_inputs(const RunConfig& c, std::size_t count, const std::string& usage) {
  if (c.inputs.size() != count) throw Error(c.command + ": expected " + usage);
}

SystemPtr load_system(const std::string& path, const Tolerance& tol) {
  return std::make_shared<const OperatorSystem>(system_from_json(read_json_file(path), tol));
}

Mat load_matrix(const std::string& path) { return matrix_from_json(read_json_file(path), path); }

Mat field_matrix(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw Error(path + ": missing \"" + key + "\"");
  return matrix_from_json(j.at(key), path + ": " + key);
}

std::vector<GammaElement> gamma_list(const Json& j, const std::string& key, const std::string& path) {
  std::vector<GammaElement> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw Error(path + ": \"" + key + "\" must be a list of matrices");
  for (std::size_t i = 0; i < j.at(key).size(); ++i) {
    const Mat m = matrix_from_json(j.at(key)[i], path + ": " + key + "[" + std::to_string(i) + "]");
    out.push_back({m.rows(), m});
  }
  return out;
}

Json certificate_json(const BoundaryCertificate& c) {
  return Json{{"irrep_label", c.irrep_label},
              {"is_boundary", c.is_boundary},
              {"probe_count", c.probe_count},
              {"max_width", c.max_width},
              {"region_dim", c.region_dim}};
}

Json trace_json(const DilationTrace& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps) steps.push_back({{"size", s.size}, {"corner_norm", s.corner_norm}});
  return Json{{"steps", steps}, {"final_size", t.final_size}, {"maximal", t.maximal}};
}

Json witness_json(const PurityWitness& w) {
  Json out{{"is_pure", w.is_pure}, {"deviation", w.deviation}, {"probes", w.probes}, {"region_dim", w.region_dim}};
  if (w.violating_psi) out["violating_psi"] = cp_to_json(*w.violating_psi);
  return out;
}

const Irrep& irrep_by_label(const Spectrum& sp, int label) {
  for (const Irrep& p : sp.irreps())
    if (p.label == label) return p;
  throw PipelineError("irrep label " + std::to_string(label) + " not in spectrum");
}

struct Outcome {
  Json result;
  std::string summary;
};

Outcome boundary_reps(const RunConfig& c) {
  expect_inputs(c, 1, "<system.json>");
  const SystemPtr s = load_system(c.inputs[0], c.tol);
  const Spectrum sp = compute_spectrum(s, derive_seed(c.seed, 0), c.tol);
  const auto reps = boundary_representations(sp, derive_seed(c.seed, 1), c.tol, c.workers);
  Json classes = Json::array();
  int count = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& e = reps[i];
    count += e.certificate.is_boundary ? 1 : 0;
    classes.push_back({{"label", e.irrep.label},
                       {"dim", e.irrep.dim},
                       {"multiplicity", sp.decomposition.blocks[i].multiplicity},
                       {"embedding", matrix_to_json(e.irrep.embedding)},
                       {"certificate", certificate_json(e.certificate)}});
  }
  Json result{{"system", system_to_json(*s)},
              {"system_dim", s->dim()},
              {"algebra_dim", sp.algebra.dim()},
              {"classes", classes},
              {"boundary_count", count}};
  std::ostringstream os;
  os << "boundary classes: " << count << " of " << reps.size() << "\n";
  for (const auto& e : reps)
    os << "  irrep " << e.irrep.label << " (dim " << e.irrep.dim << "): "
       << (e.certificate.is_boundary ? "boundary" : "not boundary") << ", width "
       << fmt(e.certificate.max_width) << "\n";
  return {result, os.str()};
}

Outcome norm_cert(const RunConfig& c) {
  expect_inputs(c, 2, "<system.json> <element.json>");
  const SystemPtr s = load_system(c.inputs[0], c.tol);
  const Mat e = load_matrix(c.inputs[1]);
  const Spectrum sp = compute_spectrum(s, derive_seed(c.seed, 0), c.tol);
  const auto reps = boundary_representations(sp, derive_seed(c.seed, 1), c.tol, c.workers);
  const NormCertificate n = norm_certificate(sp, e, derive_seed(c.seed, 2), c.tol, &reps);
  const Irrep& pi = irrep_by_label(sp, n.irrep_label);
  Json result{{"element", matrix_to_json(n.element)},
              {"norm", n.norm},
              {"achieved", n.achieved},
              {"irrep_label", n.irrep_label},
              {"irrep_dim", pi.dim},
              {"residual", n.residual},
              {"state_level", n.state_level},
              {"state_pure", n.state_pure},
              {"state_norm", n.state_norm},
              {"certificate", certificate_json(n.certificate)}};
  if (n.v) result["v"] = matrix_to_json(*n.v);
  std::ostringstream os;
  os << "norm " << fmt(n.norm) << ", achieved " << fmt(n.achieved) << " via irrep " << n.irrep_label
     << " (dim " << pi.dim << ", " << (n.certificate.is_boundary ? "boundary" : "not boundary") << ")\n"
     << "intermediate pure state at level " << n.state_level << "\n";
  return {result, os.str()};
}

Outcome purity(const RunConfig& c) {
  expect_inputs(c, 2, "<system.json> <map.json>");
  const SystemPtr s = load_system(c.inputs[0], c.tol);
  const UcpMap phi = ucp_from_json(read_json_file(c.inputs[1]), s, c.tol);
  const PurityWitness w = purity_check(phi, derive_seed(c.seed, 0), c.tol);
  Json result{{"map", ucp_to_json(phi)}, {"witness", witness_json(w)}};
  std::ostringstream os;
  os << (w.is_pure ? "pure" : "not pure") << " (deviation " << fmt(w.deviation) << ", " << w.probes
     << " probes" << (w.violating_psi ? ", witness attached" : "") << ")\n";
  return {result, os.str()};
}

Outcome wrange(const RunConfig& c) {
  expect_inputs(c, 1, "<query.json>");
  const Json q = read_json_file(c.inputs[0]);
  const Mat x = field_matrix(q, "x", c.inputs[0]);
  if (!q.contains("a") && !q.contains("theta")) throw Error(c.inputs[0] + ": expected \"a\" or \"theta\"");
  Json result{{"x", matrix_to_json(x)}};
  std::ostringstream os;
  if (q.contains("a")) {
    const Mat a = field_matrix(q, "a", c.inputs[0]);
    const RangeMembership m = wrange_membership({x, a.rows()}, a, c.tol);
    Json mj{{"level", a.rows()}, {"a", matrix_to_json(a)}, {"member", m.member}, {"residual", m.residual}};
    if (m.phi) mj["phi"] = ucp_to_json(*m.phi);
    if (m.farkas) mj["farkas"] = std::vector<double>(m.farkas->data(), m.farkas->data() + m.farkas->size());
    result["membership"] = mj;
    os << "a " << (m.member ? "is" : "is not") << " in W^" << a.rows() << "(x)\n";
  }
  if (q.contains("theta")) {
    const Mat theta = field_matrix(q, "theta", c.inputs[0]);
    const SupportValue v = wrange_support({x, theta.rows()}, theta, c.tol);
    result["support"] = {{"level", theta.rows()},
                         {"theta", matrix_to_json(theta)},
                         {"value", v.value},
                         {"attained", matrix_to_json(v.attained)}};
    os << "support value " << fmt(v.value) << " at level " << theta.rows() << "\n";
  }
  return {result, os.str()};
}

Outcome morenz(const RunConfig& c) {
  expect_inputs(c, 1, "<query.json>");
  const Json q = read_json_file(c.inputs[0]);
  const Mat x = field_matrix(q, "x", c.inputs[0]);
  const Mat a = field_matrix(q, "a", c.inputs[0]);
  const RangeMembership m = wrange_membership({x, a.rows()}, a, c.tol);
  if (!m.member) throw Error(c.inputs[0] + ": a is not in the matricial range of x");
  const Spectrum sp = compute_spectrum(m.phi->domain, derive_seed(c.seed, 0), c.tol);
  const MorenzDecomposition d = morenz_decomposition(sp, x, *m.phi, derive_seed(c.seed, 1), c.tol, c.max_dilation);
  Json terms = Json::array();
  for (const auto& t : d.terms) {
    Json tj{{"x", matrix_to_json(t.x)},
            {"kind", to_string(t.kind)},
            {"irrep_label", t.irrep_label},
            {"value", matrix_to_json(t.value)},
            {"psi", ucp_to_json(t.psi)}};
    if (t.scalar) tj["scalar"] = complex_to_json(*t.scalar);
    terms.push_back(tj);
  }
  const Index n = a.rows();
  Json result{{"x", matrix_to_json(x)},
              {"a", matrix_to_json(a)},
              {"level", n},
              {"terms", terms},
              {"term_bound", 3 * n * n},
              {"reconstruction_residual", d.reconstruction_residual},
              {"column_residual", d.column_residual},
              {"trace", trace_json(d.trace)}};
  std::ostringstream os;
  os << d.terms.size() << " terms (bound " << 3 * n * n << "), reconstruction residual "
     << fmt(d.reconstruction_residual) << "\n";
  return {result, os.str()};
}

Outcome peak(const RunConfig& c) {
  expect_inputs(c, 2, "<system.json> <element.json>");
  const SystemPtr s = load_system(c.inputs[0], c.tol);
  const Mat e = load_matrix(c.inputs[1]);
  const Index l = s->ambient_dim;
  if (e.rows() != e.cols() || e.rows() % l != 0)
    throw DimensionError(c.inputs[1] + ": element must be square of size n*" + std::to_string(l));
  const Index n = e.rows() / l;
  const Spectrum sp = compute_spectrum(s, derive_seed(c.seed, 0), c.tol);
  const auto reps = boundary_representations(sp, derive_seed(c.seed, 1), c.tol, c.workers);
  Json entries = Json::array();
  int peaking = 0, violations = 0;
  for (const auto& r : reps) {
    const bool p = peak_verify(sp, r.irrep, e, n, c.tol);
    const Mat amp = kron(Mat::Identity(n, n), r.irrep.embedding);
    peaking += p ? 1 : 0;
    violations += p && !r.certificate.is_boundary ? 1 : 0;
    entries.push_back({{"label", r.irrep.label},
                       {"dim", r.irrep.dim},
                       {"norm", operator_norm(amp.adjoint() * e * amp)},
                       {"peaks", p},
                       {"certificate", certificate_json(r.certificate)}});
  }
  Json result{{"element", matrix_to_json(e)},
              {"level", n},
              {"peak_gap", kPeakGap},
              {"irreps", entries},
              {"peaking", peaking},
              {"violations", violations}};
  std::ostringstream os;
  os << peaking << " peaking irrep(s) at level " << n << ", " << violations << " not boundary\n";
  return {result, os.str()};
}

Outcome amplify_check(const RunConfig& c) {
  expect_inputs(c, 1, "<system.json>");
  if (c.level < 1) throw Error("amplify-check: --level must be positive");
  const SystemPtr s = load_system(c.inputs[0], c.tol);
  const Index n = c.level;
  const Spectrum sp = compute_spectrum(s, derive_seed(c.seed, 0), c.tol);
  const auto reps = boundary_representations(sp, derive_seed(c.seed, 1), c.tol, c.workers);
  const SystemPtr amp = std::make_shared<const OperatorSystem>(amplify(*s, n, c.tol));
  const Spectrum spa = compute_spectrum(amp, derive_seed(c.seed, 2), c.tol);
  const auto repa = boundary_representations(spa, derive_seed(c.seed, 3), c.tol, c.workers);

  std::vector<const BoundaryEntry*> found;
  for (const auto& e : repa)
    if (e.certificate.is_boundary) found.push_back(&e);
  std::vector<bool> matched(found.size(), false);
  Json lifted = Json::array();
  bool ok = true;
  for (const auto& e : reps) {
    if (!e.certificate.is_boundary) continue;
    const Irrep lift = make_irrep(spa.algebra, kron(Mat::Identity(n, n), e.irrep.embedding), e.irrep.label);
    Json entry{{"label", e.irrep.label}, {"dim", e.irrep.dim}};
    for (std::size_t k = 0; k < found.size(); ++k) {
      if (auto u = unitary_equivalence(lift, found[k]->irrep, c.tol)) {
        matched[k] = true;
        entry["amplified_label"] = found[k]->irrep.label;
        entry["unitary"] = matrix_to_json(*u);
        break;
      }
    }
    ok = ok && entry.contains("amplified_label");
    lifted.push_back(entry);
  }
  Json extra = Json::array();
  for (std::size_t k = 0; k < found.size(); ++k)
    if (!matched[k]) extra.push_back(found[k]->irrep.label);
  ok = ok && extra.empty();
  Json result{{"level", n},
              {"boundary_of_s", lifted},
              {"boundary_of_amplification", static_cast<int>(found.size())},
              {"unmatched_amplified", extra},
              {"equal", ok}};
  std::ostringstream os;
  os << "boundary classes: " << lifted.size() << " for S, " << found.size() << " for M_" << n << "(S); "
     << (ok ? "they agree up to unitary equivalence" : "mismatch") << "\n";
  return {result, os.str()};
}

Outcome recovery(const RunConfig& c) {
  expect_inputs(c, 1, "<query.json>");
  const Json q = read_json_file(c.inputs[0]);
  const Mat x = field_matrix(q, "x", c.inputs[0]);
  const auto gamma = gamma_list(q, "gamma", c.inputs[0]);
  const auto candidates = gamma_list(q, "candidates", c.inputs[0]);
  const RecoveryReport r = recovery_check(x, gamma, candidates, derive_seed(c.seed, 0), c.tol);
  Json result{{"x", matrix_to_json(x)},
              {"gamma_size", gamma.size()},
              {"candidate_count", candidates.size()},
              {"recovered", r.recovered},
              {"boundary_points", r.boundary_points},
              {"missing", r.missing}};
  std::ostringstream os;
  os << (r.recovered ? "recovered" : "not recovered") << ": " << r.boundary_points << " boundary point(s), "
     << r.missing.size() << " missing\n";
  return {result, os.str()};
}

const std::map<std::string, std::function<Outcome(const RunConfig&)>> kHandlers = {
    {"boundary-reps", boundary_reps}, {"norm-cert", norm_cert},         {"purity", purity},
    {"wrange", wrange},               {"morenz", morenz},               {"peak-verify", peak},
    {"amplify-check", amplify_check}, {"recovery-check", recovery},
};

Json header(const RunConfig& c) {
  return Json{{"command", c.command},
              {"claim", kClaims.at(c.command)},
              {"inputs", c.inputs},
              {"seed", c.seed},
              {"tolerances", {{"eq", c.tol.eq}, {"psd", c.tol.psd}, {"rank", c.tol.rank}}},
              {"max_dilation", c.max_dilation},
              {"workers", c.workers}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(path + ": cannot write");
  f << text;
}

}  // namespace

std::string summary_path(const std::string& json_path) {
  const auto slash = json_path.find_last_of('/');
  const auto dot = json_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return json_path.substr(0, dot) + ".txt";
  return json_path + ".txt";
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env) {
  if (flag) return *flag;
  if (env == nullptr) return 1;
  const std::string text(env);
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw Error("NCB_SEED must be a non-negative integer, got \"" + text + "\"");
  try {
    return std::stoull(text);
  } catch (const std::out_of_range&) {
    throw Error("NCB_SEED does not fit in 64 bits");
  }
}

Report run(const RunConfig& config) {
  const auto h = kHandlers.find(config.command);
  if (h == kHandlers.end()) throw Error("unknown command: " + config.command);
  config.tol.validate();
  if (config.workers < 1) throw Error("--workers must be positive");
  Report r;
  r.certificate = header(config);
  try {
    Outcome o = h->second(config);
    r.certificate["status"] = "ok";
    r.certificate["result"] = std::move(o.result);
    r.summary = std::move(o.summary);
  } catch (const InconclusiveError& e) {
    r.certificate["status"] = "inconclusive";
    r.certificate["reason"] = e.what();
    r.summary = std::string("inconclusive: ") + e.what() + "\n";
    r.exit_code = 2;
  }
  std::ostringstream head;
  head << config.command << " (seed " << config.seed << ", tol eq " << fmt(config.tol.eq) << " psd "
       << fmt(config.tol.psd) << " rank " << fmt(config.tol.rank) << ")\n";
  r.summary = head.str() + r.summary;
  return r;
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Report r = run(config);
    const std::string json = r.certificate.dump(2) + "\n";
    if (config.out.empty()) {
      out << json;
      err << r.summary;
    } else {
      write_file(config.out, json);
      write_file(summary_path(config.out), r.summary);
      out << r.summary;
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ncb::cli
