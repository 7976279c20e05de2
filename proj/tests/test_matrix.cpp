#include <doctest.h>

#include "ncb/json_io.hpp"
#include "ncb/matrix.hpp"
#include "ncb/random.hpp"

using namespace ncb;

TEST_CASE("hermitian_eig reproduces the matrix") {
  Rng rng(7);
  for (Index n : {1, 2, 5, 9}) {
    const Mat h = random_hermitian(n, rng);
    const auto e = hermitian_eig(h);
    const Mat back = e.vectors * e.values.cast<Scalar>().asDiagonal() * e.vectors.adjoint();
    CHECK((back - h).norm() < 1e-12 * (1 + h.norm()));
    CHECK(isometry_defect(e.vectors) < 1e-12);
    for (Index i = 1; i < n; ++i) CHECK(e.values(i - 1) <= e.values(i));
  }
}

TEST_CASE("eigenvalues of a fixed matrix") {
  // [[2, i], [-i, 2]] has eigenvalues 1 and 3
  Mat m(2, 2);
  m << 2.0, Scalar(0, 1), Scalar(0, -1), 2.0;
  const auto e = hermitian_eig(m);
  CHECK(e.values(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values(1) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("operator norm and psd check") {
  Mat j(2, 2);
  j << 0, 2, 0, 0;
  CHECK(operator_norm(j) == doctest::Approx(2.0));
  Mat p = Mat::Identity(3, 3);
  p(2, 2) = -1e-10;
  CHECK(psd_check(HermitianMatrix(p), Tolerance{}));
  p(2, 2) = -1e-6;
  CHECK_FALSE(psd_check(HermitianMatrix(p), Tolerance{}));
}

TEST_CASE("kron and direct_sum shapes") {
  Mat a = Mat::Identity(2, 2), b = Mat::Ones(3, 1);
  CHECK(kron(a, b).rows() == 6);
  CHECK(kron(a, b).cols() == 2);
  const Mat d = direct_sum(a, b);
  CHECK(d.rows() == 5);
  CHECK(d.cols() == 3);
  CHECK(d(4, 2) == Scalar(1));
  CHECK(d(0, 2) == Scalar(0));
}

TEST_CASE("null_space is orthonormal and annihilated") {
  Rng rng(3);
  const Mat a = random_complex(3, 6, rng);
  const Mat ns = null_space(a, 1e-10);
  CHECK(ns.cols() == 3);
  CHECK((a * ns).norm() < 1e-12);
  CHECK(isometry_defect(ns) < 1e-12);
}

TEST_CASE("json round trip") {
  Rng rng(11);
  const Mat m = random_complex(2, 3, rng);
  const Mat back = matrix_from_json(matrix_to_json(m));
  CHECK((back - m).norm() == 0.0);
  const Json real = Json::parse(R"({"rows":1,"cols":2,"data":[[1, [0, 2]]]})");
  const Mat r = matrix_from_json(real);
  CHECK(r(0, 1) == Scalar(0, 2));
  CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"rows":2,"cols":2,"data":[[1]]})")), DimensionError);
  CHECK_THROWS_WITH_AS(parse_json_text("{\n  \"a\": ,\n}", "in.json"), doctest::Contains("in.json:2:"), Error);
}

TEST_CASE("invalid tolerance rejected") {
  Tolerance t;
  t.eq = -1;
  CHECK_THROWS(t.validate());
}
