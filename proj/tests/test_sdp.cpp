#include "doctest.h"

#include <random>

#include "opramsey/kernels.hpp"
#include "opramsey/sdp.hpp"

using namespace opramsey;

namespace {

SdpProblem min_eig_problem(const ComplexMatrix& c, double trace) {
  SdpProblem p;
  p.block_dims = {static_cast<int>(c.rows())};
  p.objective = {c};
  SdpConstraint tr;
  tr.add_dense(0, ComplexMatrix::Identity(c.rows(), c.rows()));
  tr.rhs = trace;
  p.constraints.push_back(tr);
  return p;
}

}  // namespace

TEST_CASE("minimum eigenvalue of a diagonal") {
  ComplexMatrix c = ComplexMatrix::Zero(2, 2);
  c(0, 0) = 1;
  c(1, 1) = 2;
  const auto s = solve_sdp(min_eig_problem(c, 1.0));
  REQUIRE(s.status == SdpStatus::optimal);
  CHECK(s.primal_value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.primal_value >= s.dual_value - 1e-8);
  CHECK(s.primal_residual <= 1e-8);
}

TEST_CASE("feasibility and infeasibility") {
  const ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  CHECK(solve_sdp(min_eig_problem(zero, 1.0)).status == SdpStatus::optimal);
  const auto bad = solve_sdp(min_eig_problem(zero, -1.0));
  CHECK(bad.status == SdpStatus::infeasible);
  CHECK(bad.certificate_strength > 1e-7);
}

TEST_CASE("random Hermitian minimum eigenvalues, complex and real embedding agree") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t % 5;
    const ComplexMatrix g = random_gaussian(n, n, rng);
    const ComplexMatrix c = hermitian_part(g);
    const auto p = min_eig_problem(c, 1.0);
    const auto s = solve_sdp(p);
    REQUIRE(s.status == SdpStatus::optimal);
    CHECK(std::abs(s.primal_value - min_eigenvalue(c)) <= 1e-6);
    CHECK(s.gap <= 1e-7);
    const auto r = solve_sdp(real_embedding(p));
    REQUIRE(r.status == SdpStatus::optimal);
    CHECK(std::abs(r.primal_value - s.primal_value) <= 2e-8 * std::max(1.0, std::abs(s.primal_value)) + 2e-8);
  }
}

TEST_CASE("problem JSON round trip") {
  ComplexMatrix c = ComplexMatrix::Zero(2, 2);
  c(0, 1) = Complex(0, 1);
  c(1, 0) = Complex(0, -1);
  const auto p = min_eig_problem(c, 1.0);
  const auto q = problem_from_json(problem_to_json(p));
  CHECK(q.block_dims == p.block_dims);
  CHECK(q.coefficient(0, 0).isApprox(p.coefficient(0, 0)));
  CHECK(solve_sdp(q).primal_value == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("parallel kernels match the serial reference") {
  std::mt19937_64 rng(4);
  SdpProblem p;
  p.block_dims = {4, 3};
  p.objective = {ComplexMatrix::Zero(4, 4), ComplexMatrix::Zero(3, 3)};
  for (int i = 0; i < 12; ++i) {
    SdpConstraint c;
    c.add_dense(0, hermitian_part(random_gaussian(4, 4, rng)));
    c.add_dense(1, hermitian_part(random_gaussian(3, 3, rng)));
    p.constraints.push_back(c);
  }
  const auto cc = kernels::compile(p);
  std::vector<ComplexMatrix> x, s;
  for (int d : p.block_dims) {
    const ComplexMatrix a = random_gaussian(d, d, rng);
    const ComplexMatrix b = random_gaussian(d, d, rng);
    x.push_back(a * a.adjoint());
    s.push_back((b * b.adjoint()).inverse());
  }
  CHECK((kernels::schur_serial(cc, x, s) - kernels::schur_parallel(cc, x, s)).norm() < 1e-12);
  CHECK((kernels::pair_serial(cc, x) - kernels::pair_parallel(cc, x)).norm() < 1e-12);
  CHECK(kernels::count_epi_serial(8, 3) == kernels::count_epi_parallel(8, 3));
  CHECK(kernels::count_epi_serial(9, 4) == 7770);
}
