#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hull_oracle.hpp"
#include "ncb/mconvex.hpp"
#include "ncb/random.hpp"

using namespace ncb;

namespace {

Mat block_x() {
  Mat x = Mat::Zero(3, 3);
  x(0, 0) = 1.0;
  x(1, 2) = 2.0;
  return x;
}

Mat x2() {
  Mat a = Mat::Zero(2, 2);
  a(0, 1) = 2.0;
  return a;
}

Mat scalar(Scalar z) { return Mat::Constant(1, 1, z); }

Mat diag3() {
  Mat d = Mat::Zero(3, 3);
  d(1, 1) = 1.0;
  d(2, 2) = Scalar(0, 1);
  return d;
}

void check_decomposition(const MorenzDecomposition& m, const Mat& a, Index n, std::uint64_t seed) {
  CHECK(m.reconstruction_residual <= 1e-6);
  CHECK(m.column_residual <= 1e-6);
  CHECK(static_cast<Index>(m.terms.size()) <= 3 * n * n);
  Mat sum = Mat::Zero(n, n);
  for (std::size_t i = 0; i < m.terms.size(); ++i) {
    const auto& t = m.terms[i];
    sum += t.x.adjoint() * t.value * t.x;
    if (t.kind == TermKind::pure) CHECK(purity_check(t.psi, derive_seed(seed, i)).is_pure);
  }
  CHECK((sum - a).norm() <= 1e-6);
}

}  // namespace

TEST_CASE("wrange_membership examples") {
  Rng rng(1);
  const Mat x = random_complex(3, 3, rng);
  const Mat bary = (x.trace() / 3.0) * Mat::Identity(2, 2);
  const auto m1 = wrange_membership({x, 2}, bary);
  CHECK(m1.member);
  REQUIRE(m1.phi);
  CHECK(((*m1.phi)(x) - bary).norm() < 1e-7);

  Mat d = Mat::Zero(2, 2);
  d(1, 1) = 1.0;
  const auto m2 = wrange_membership({d, 1}, scalar(2.0));
  CHECK_FALSE(m2.member);
  CHECK(m2.farkas.has_value());

  CHECK(wrange_membership({x, 3}, x).member);
  CHECK_THROWS_AS(wrange_membership({x, 2}, scalar(1.0)), DimensionError);
}

TEST_CASE("membership agrees with the convex hull of the spectrum for normal x") {
  Rng rng(2);
  for (int inst = 0; inst < 20; ++inst) {
    const Index l = 3 + inst % 3;
    std::vector<Scalar> eig;
    for (Index i = 0; i < l; ++i) eig.push_back(rng.complex_normal());
    const Mat u = random_unitary(l, rng);
    Mat dm = Mat::Zero(l, l);
    for (Index i = 0; i < l; ++i) dm(i, i) = eig[static_cast<std::size_t>(i)];
    const Mat x = u * dm * u.adjoint();
    // alternate random convex combinations and points beyond a supporting line
    const auto hull = oracle::convex_hull(eig);
    Scalar z = 0.0;
    if (inst % 2 == 0) {
      double total = 0.0;
      for (const Scalar& e : eig) {
        const double w = 0.1 + rng.uniform();
        z += w * e;
        total += w;
      }
      z /= total;
    } else {
      const Scalar dir = std::polar(1.0, rng.uniform() * 6.283185307179586);
      z = dir * (oracle::support(hull, dir) + 0.05 + rng.uniform());
    }
    const bool inside = oracle::contains(hull, z);
    CHECK(inside == (inst % 2 == 0));
    CHECK(wrange_membership({x, 1}, scalar(z)).member == inside);
  }
}

TEST_CASE("matricial ranges are closed under compression") {
  Rng rng(3);
  for (int inst = 0; inst < 4; ++inst) {
    const Mat x = random_complex(3, 3, rng);
    const Mat v = random_isometry(3, 2, rng);
    CHECK(wrange_membership({x, 2}, Mat(v.adjoint() * x * v)).member);
    const Mat w = random_isometry(2, 1, rng);
    CHECK(wrange_membership({x, 1}, Mat(w.adjoint() * v.adjoint() * x * v * w)).member);
  }
}

TEST_CASE("wrange_support examples") {
  Rng rng(4);
  const Mat h = random_hermitian(3, rng);
  const double top = hermitian_eig(h).values.maxCoeff();
  CHECK(wrange_support({h, 1}, scalar(1.0)).value == doctest::Approx(top).epsilon(1e-8));
  const auto e = wrange_support({matrix_unit(2, 0, 1), 1}, scalar(1.0));
  CHECK(e.value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(e.attained(0, 0) - Scalar(0.5, 0)) < 1e-6);
  const Mat x = random_complex(3, 3, rng);
  CHECK(std::abs(wrange_support({x, 2}, Mat::Zero(2, 2)).value) < 1e-8);
}

TEST_CASE("matrix extreme points of the block example") {
  const Mat x = block_x();
  CHECK(matrix_extreme_check({x, 2}, x2(), 5).matrix_extreme);
  CHECK(matrix_extreme_check({x, 1}, scalar(1.0), 6).matrix_extreme);
  const auto bary = matrix_extreme_check({x, 1}, scalar(x.trace() / 3.0), 7);
  CHECK_FALSE(bary.matrix_extreme);
  CHECK(bary.witness.violating_psi.has_value());
}

TEST_CASE("boundary points") {
  const Mat x = block_x();
  const Spectrum sp = compute_spectrum(element_system(x), 8);
  const auto b2 = boundary_point_check({x, 2}, x2(), 9, {}, &sp);
  CHECK(b2.is_boundary_point);
  CHECK(b2.is_matrix_extreme);
  REQUIRE(b2.linked_irrep_label);
  for (const auto& p : sp.irreps())
    if (p.label == *b2.linked_irrep_label) CHECK(p.dim == 2);
  CHECK(b2.residual < 1e-6);

  const auto b1 = boundary_point_check({x, 1}, scalar(1.0), 10, {}, &sp);
  CHECK(b1.is_matrix_extreme);
  CHECK_FALSE(b1.is_boundary_point);
  CHECK_FALSE(b1.maximal);

  Rng rng(11);
  const Mat y = random_complex(2, 2, rng);
  CHECK(boundary_point_check({y, 2}, y, 12).is_boundary_point);
}

TEST_CASE("Morenz decompositions") {
  const Mat x = block_x();
  const Spectrum sp = compute_spectrum(element_system(x), 20);

  const auto single = morenz_decomposition({x, 2}, x2(), 21);
  check_decomposition(single, x2(), 2, 22);
  REQUIRE(single.terms.size() == 1);
  CHECK(isometry_defect(single.terms[0].x) < 1e-7);
  CHECK(single.terms[0].x.rows() == 2);

  const auto through = morenz_decomposition({x, 1}, scalar(1.0), 23);
  check_decomposition(through, scalar(1.0), 1, 24);
  REQUIRE(through.terms.size() == 1);
  CHECK(through.terms[0].x.rows() == 2);
  CHECK(through.terms[0].kind == TermKind::pure);

  const Mat d = diag3();
  const auto half = morenz_decomposition({d, 1}, scalar(0.5), 25);
  check_decomposition(half, scalar(0.5), 1, 26);
  CHECK(half.terms.size() == 2);

  const Mat pair = ncb::direct_sum(scalar(0.0), scalar(1.0));
  const auto padded = morenz_decomposition({d, 2}, pair, 27);
  check_decomposition(padded, pair, 2, 28);
  for (const auto& t : padded.terms) {
    CHECK(t.kind == TermKind::pure_plus_scalar);
    REQUIRE(t.scalar);
    CHECK(std::abs(t.value(1, 1) - *t.scalar) < 1e-9);
  }
}

TEST_CASE("Morenz decompositions of random points") {
  Rng rng(30);
  for (int inst = 0; inst < 4; ++inst) {
    const Index l = 3, n = 1 + inst % 2;
    const Mat x = random_complex(l, l, rng);
    const Mat v = random_isometry(l, n, rng);
    const Mat a = v.adjoint() * x * v;
    check_decomposition(morenz_decomposition({x, n}, a, derive_seed(31, inst)), a, n, derive_seed(32, inst));
  }
}

TEST_CASE("boundary points are matrix extreme") {
  Rng rng(40);
  const Mat x = block_x();
  for (int inst = 0; inst < 3; ++inst) {
    const Mat v = random_isometry(3, 1, rng);
    const Mat a = v.adjoint() * x * v;
    const auto c = boundary_point_check({x, 1}, a, derive_seed(41, inst));
    if (c.is_boundary_point) CHECK(c.is_matrix_extreme);
  }
}

TEST_CASE("recovery_check") {
  const Mat x = block_x();
  std::vector<GammaElement> images = {{1, scalar(1.0)}, {2, x2()}};
  CHECK(recovery_check(x, images, {}, 50).recovered);

  const auto bad = recovery_check(x, {{1, scalar(x.trace() / 3.0)}}, {}, 51);
  CHECK_FALSE(bad.recovered);
  CHECK(bad.boundary_points == 1);

  CHECK(recovery_check(x, {{3, x}}, {{2, x2()}}, 52).recovered);
  CHECK(is_compression(x2(), x));
  CHECK_FALSE(is_compression(x2(), scalar(1.0)));
}

TEST_CASE("norm attaining pure states live at level at most two") {
  Rng rng(60);
  for (int inst = 0; inst < 4; ++inst) {
    const Mat s = random_complex(3, 3, rng);
    const auto st = norm_attaining_pure_state(s, derive_seed(61, inst));
    CHECK(st.level <= 2);
    CHECK(st.witness.is_pure);
    CHECK(operator_norm(st.phi(s)) == doctest::Approx(operator_norm(s)).epsilon(1e-7));
  }
}
