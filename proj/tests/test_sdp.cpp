#include <doctest.h>

#include "ncb/random.hpp"
#include "ncb/sdp.hpp"
#include "sdp_cases.hpp"

using namespace ncb;
using namespace ncb::sdp;

namespace {

using sdp_cases::sym;
using sdp_cases::trace_problem;
using sdp_cases::unit;

}  // namespace

TEST_CASE("closed-form problems") {
  for (const auto& c : sdp_cases::catalog()) {
    SUBCASE(c.name.c_str()) {
      const SdpSolution s = solve(c.problem);
      INFO(c.name);
      CHECK(sdp_cases::check(c, s) == "");
    }
  }
}

TEST_CASE("catalog has twelve problems") { CHECK(sdp_cases::catalog().size() == 12); }

TEST_CASE("random eigenvalue problems match the eigensolver") {
  Rng rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 2 + trial;
    const Mat c = random_hermitian(n, rng);
    const double lmax = hermitian_eig(c).values(n - 1);
    const SdpSolution s = solve(trace_problem(c, 1.0));
    CHECK(s.status == Status::optimal);
    CHECK(std::abs(s.value - lmax) <= 1e-8);
  }
}

TEST_CASE("region of a pinned corner is a single point") {
  SdpProblem p;
  p.dim = 2;
  p.constraints = {{unit(2, 0, 0), 1.0}, {unit(2, 1, 1), 0.0}};
  const Region r = analyze_region(p, Tolerance{});
  CHECK(r.dimension() == 0);
  CHECK(r.face.cols() == 1);
  CHECK(r.residual <= 1e-12);
  const auto rep = singleton_check(p, {sym(2, 0, 1)}, Tolerance{});
  CHECK(rep.singleton);
}

TEST_CASE("region of a unit-diagonal 2x2 block is a disc") {
  SdpProblem p;
  p.dim = 2;
  p.constraints = {{unit(2, 0, 0), 1.0}, {unit(2, 1, 1), 1.0}};
  const Region r = analyze_region(p, Tolerance{});
  CHECK(r.dimension() == 2);
  CHECK(r.margin > 0.5);
  CHECK(std::abs(width_along(r, sym(2, 0, 1)) - 2.0) <= 1e-8);
  const auto rep = singleton_check(p, {sym(2, 0, 1)}, Tolerance{});
  CHECK_FALSE(rep.singleton);
  CHECK(rep.max_width == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("refinement reaches an extreme point") {
  SdpProblem p;
  p.dim = 3;
  p.constraints = {{Mat::Identity(3, 3), 1.0}};
  const Mat x = extreme_point_refine(p, Mat(), 5, Tolerance{});
  const auto e = hermitian_eig(x);
  CHECK(e.values(2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(e.values(1)) <= 1e-9);
}

TEST_CASE("degenerate region with rank-deficient face") {
  // X >= 0 in M_3 with X_11 = 0 and X_00 + X_22 = 1: face is the {0,2} corner
  SdpProblem p;
  p.dim = 3;
  p.constraints = {{unit(3, 1, 1), 0.0}, {unit(3, 0, 0) + unit(3, 2, 2), 1.0}};
  const Region r = analyze_region(p, Tolerance{});
  CHECK(r.face.cols() == 2);
  CHECK(r.dimension() == 3);
  CHECK(std::abs(width_along(r, unit(3, 0, 0)) - 1.0) <= 1e-8);
}
