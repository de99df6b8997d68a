#include "doctest.h"

#include <random>

#include "opramsey/error.hpp"
#include "opramsey/linalg.hpp"

using namespace opramsey;

TEST_CASE("op_norm on small matrices") {
  CHECK(op_norm(ComplexMatrix::Identity(2, 2)) == doctest::Approx(1.0).epsilon(1e-11));
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 4;
  CHECK(op_norm(d) == doctest::Approx(4.0).epsilon(1e-11));
  ComplexMatrix n = ComplexMatrix::Zero(2, 2);
  n(0, 1) = 2;
  CHECK(op_norm(n) == doctest::Approx(2.0).epsilon(1e-11));
  CHECK_THROWS_AS(op_norm(ComplexMatrix(0, 0)), Error);
}

TEST_CASE("herm_spectrum is descending and rejects non-Hermitian input") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = -1;
  auto s = herm_spectrum(d);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(-1.0));
  for (double v : herm_spectrum(ComplexMatrix::Zero(3, 3))) CHECK(v == 0.0);
  ComplexMatrix x = ComplexMatrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1;
  s = herm_spectrum(x);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(-1.0));
  x(0, 1) = 2;
  try {
    herm_spectrum(x);
    FAIL("expected a symmetry error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::symmetry);
  }
}

TEST_CASE("assemble kinds") {
  const ComplexMatrix i1 = ComplexMatrix::Identity(1, 1);
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK(assemble(AssembleKind::direct_sum, i1, i2).isApprox(ComplexMatrix::Identity(3, 3)));
  std::mt19937_64 rng(3);
  const ComplexMatrix m = random_gaussian(2, 3, rng);
  ComplexMatrix bd = ComplexMatrix::Zero(4, 6);
  bd.block(0, 0, 2, 3) = m;
  bd.block(2, 3, 2, 3) = m;
  CHECK(assemble(AssembleKind::kron, i2, m).isApprox(bd));
  ComplexMatrix z(1, 1);
  z(0, 0) = Complex(0, 1);
  CHECK(assemble(AssembleKind::adjoint, z)(0, 0) == Complex(0, -1));
  try {
    assemble(AssembleKind::kron, i2);
    FAIL("expected an arity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::arity);
  }
}

TEST_CASE("norm laws on random samples") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix a = random_gaussian(1 + t % 3, 2 + t % 2, rng);
    const ComplexMatrix b = random_gaussian(2, 1 + t % 4, rng);
    CHECK(std::abs(op_norm(kron(a, b)) - op_norm(a) * op_norm(b)) <= 1e-9 * std::max(1.0, op_norm(a) * op_norm(b)));
    CHECK(std::abs(op_norm(direct_sum(a, b)) - std::max(op_norm(a), op_norm(b))) <= 1e-10 * std::max(1.0, op_norm(a)));
    const ComplexMatrix g = a.adjoint() * a;
    for (double v : herm_spectrum(hermitian_part(g))) CHECK(v >= -1e-9);
    CHECK(adjoint(adjoint(a)) == a);
  }
}

TEST_CASE("matrix JSON round trip") {
  std::mt19937_64 rng(5);
  const ComplexMatrix m = random_gaussian(3, 2, rng);
  const auto j = matrix_to_json(m);
  CHECK(j["rows"] == 3);
  CHECK(j["cols"] == 2);
  CHECK(j["data"].size() == 6);
  CHECK(matrix_from_json(j) == m);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json{{"rows", 2}}), Error);
}

TEST_CASE("random unitaries are unitary and polar parts are isometries") {
  std::mt19937_64 rng(9);
  const ComplexMatrix u = random_unitary(4, rng);
  CHECK((u.adjoint() * u - ComplexMatrix::Identity(4, 4)).norm() < 1e-12);
  const ComplexMatrix p = polar_part(random_gaussian(2, 3, rng));
  CHECK(op_norm(p) == doctest::Approx(1.0));
}
