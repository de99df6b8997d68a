#include "doctest.h"

#include <random>

#include "opramsey/error.hpp"
#include "opramsey/nets.hpp"

using namespace opramsey;

namespace {

NetOptions small(int samples = 300) {
  NetOptions o;
  o.samples = samples;
  return o;
}

}  // namespace

TEST_CASE("scalar CQ nets contain zero and the coordinate embeddings") {
  const Nets n = build_nets(QuotientClass::CQ, 2, 2, 1, 1, 0.5, 0.3, small());
  REQUIRE(n.P.grid);
  CHECK(n.P.scalar_column(n.P.zero_index()).cwiseAbs().sum() == 0.0);
  for (int i = 0; i < 2; ++i) {
    const ComplexVector e = n.P.scalar_column(n.P.embedding_index(i));
    CHECK(e(i) == Complex(1.0));
    CHECK(std::abs(e(1 - i)) == 0.0);
  }
  CHECK(n.P.sampled_density <= 0.5);
  for (std::size_t i = 1; i < n.P.size(); ++i) CHECK(n.P.cmp[i - 1] <= n.P.cmp[i]);
  CHECK(n.P.cmp[0] == 0.0);
  CHECK(n.P.cmp[1] > 0.0);
}

TEST_CASE("grid lookup inverts the member tables") {
  const Nets n = build_nets(QuotientClass::CQ, 3, 3, 1, 1, 0.6, 0.5, small(100));
  const ScalarGrid& g = *n.P.grid;
  for (std::size_t p = 0; p < n.P.size(); p += 7)
    CHECK(static_cast<std::size_t>(g.member(&g.level[p * 3], &g.phase[p * 3])) == p);
}

TEST_CASE("scalar TPCQ nets are stochastic and dense") {
  NetOptions o = small(1000);
  const Nets n = build_nets(QuotientClass::TPCQ, 3, 3, 1, 1, 0.3, 0.3, o);
  for (std::size_t p = 0; p < n.P.size(); ++p) {
    const ComplexVector v = n.P.scalar_column(p);
    CHECK(std::abs(v.sum() - 1.0) < 1e-12);
    CHECK(v.real().minCoeff() >= 0.0);
  }
  CHECK(n.P.samples == 1000);
  CHECK(n.P.sampled_density <= 0.3);
  // Least member is the pinned column.
  CHECK(n.P.scalar_column(0)(2) == Complex(1.0));
}

TEST_CASE("Q members are structured isometries") {
  const Nets n = build_nets(QuotientClass::CQ, 2, 3, 1, 1, 0.5, 1.5, small(50));
  // 3 * 2 row choices and the phases +-1 per column.
  CHECK(n.Q.units.members.size() == 2);
  CHECK(n.Q.size() == 6 * 4);
  for (std::size_t b = 0; b < n.Q.size(); ++b) {
    const ComplexMatrix a = n.Q.map(b).action;
    CHECK((a.cwiseAbs().colwise().sum().array() == 1.0).all());
    CHECK((a.cwiseAbs().rowwise().sum().array() <= 1.0 + 1e-15).all());
  }
  const Nets t = build_nets(QuotientClass::TPCQ, 2, 3, 1, 1, 0.5, 1.5, small(50));
  CHECK(t.Q.units.members.size() == 1);
  for (std::size_t b = 0; b < t.Q.size(); ++b) CHECK(t.Q.map(b).action(2, 1) == Complex(1.0));
}

TEST_CASE("unitary nets for matrix blocks") {
  const UnitaryNet coarse = build_unitary_net(2, 2, 4.5, QuotientClass::CQ, 1);
  CHECK(coarse.members.size() == 1);
  const UnitaryNet fine = build_unitary_net(2, 2, 1.5, QuotientClass::TPCQ, 1);
  CHECK(fine.members.size() > 1);
  for (const auto& a : fine.members) CHECK((a.right - a.left.adjoint()).norm() < 1e-12);
  CHECK_THROWS_AS(build_unitary_net(2, 2, 0.01, QuotientClass::CQ, 1), Error);
}

TEST_CASE("encodings pass the structure check") {
  std::mt19937_64 rng(4);
  for (QuotientClass cls : {QuotientClass::CQ, QuotientClass::TPCQ}) {
    const Nets n = build_nets(cls, 2, 2, 1, 1, 0.8, 0.8, small(100));
    std::vector<int> tuple(n.P.size());
    for (std::size_t i = 0; i < tuple.size(); ++i) tuple[i] = static_cast<int>(i);
    tuple.push_back(0);
    tuple.push_back(static_cast<int>(n.P.size()) - 1);
    const auto alpha = encode_alpha(n, tuple);
    const auto r = structure_check(alpha, cls);
    CHECK(r.ok);
    CHECK(r.pattern_violations == 0);
    CHECK(r.norm_residual <= 1e-8);
    tuple[1] = 3;
    CHECK_THROWS_AS(encode_alpha(n, tuple), Error);
  }
}

TEST_CASE("encodings over matrix blocks") {
  NetOptions o = small(20);
  o.extra_members = 2;
  for (QuotientClass cls : {QuotientClass::CQ, QuotientClass::TPCQ}) {
    const Nets n = build_nets(cls, 2, 2, 2, 2, 2.5, 4.5, o);
    CHECK(n.P.size() >= 4);
    std::vector<int> tuple;
    for (std::size_t i = 0; i < n.P.size(); ++i) tuple.push_back(static_cast<int>(i));
    const auto r = structure_check(encode_alpha(n, tuple), cls);
    CHECK(r.pattern_violations == 0);
    CHECK(r.norm_residual <= 1e-8);
    CHECK(r.ok);
  }
}

TEST_CASE("pair encodings follow the antilex order") {
  const Nets n = build_nets(QuotientClass::TPCQ, 2, 2, 1, 1, 0.9, 0.9, small(50));
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t w = 0; w < n.P.size(); ++w)
    for (std::size_t b = 0; b < n.Q.size(); ++b) pairs.emplace_back(static_cast<int>(b), static_cast<int>(w));
  const auto alpha = encode_alpha_pairs(n, pairs);
  CHECK(structure_check(alpha, QuotientClass::TPCQ).ok);
  std::swap(pairs[0], pairs[1]);
  if (n.Q.size() > 1 || n.P.size() > 1) CHECK_THROWS_AS(encode_alpha_pairs(n, pairs), Error);
}

TEST_CASE("tau fixes zero and the near inverse") {
  std::mt19937_64 rng(9);
  const double eps = 0.5;
  const Nets n = build_nets(QuotientClass::CQ, 2, 2, 1, 1, eps, 0.3, small());
  for (int trial = 0; trial < 3; ++trial) {
    const auto rho = random_quotient(QuotientClass::CQ, 2, 2, rng);
    const TauResult t = construct_tau(rho, n, eps);
    CHECK(t.fast_path);
    CHECK(t.rigid);
    CHECK(t.minima_ok);
    CHECK(t.defect <= eps);
    CHECK(t.a_dagger_error <= eps);
    for (std::size_t b = 0; b < n.Q.size(); ++b) CHECK(t.tau(b, 0) == 0);
    for (std::size_t w = 0; w < n.P.size(); ++w) CHECK(t.tau(t.a_dagger, w) == w);
    // The closure agrees with the scan: tau(B, w) never increases the norm.
    for (std::size_t b = 0; b < n.Q.size(); b += 3)
      for (std::size_t w = 1; w < n.P.size(); w += 5)
        if (b != t.a_dagger) CHECK(n.P.cmp_key[t.tau(b, w)] < n.P.cmp_key[w]);
  }
}

TEST_CASE("block scan agrees with pairwise evaluation") {
  std::mt19937_64 rng(12);
  const double eps = 0.7;
  const Nets n = build_nets(QuotientClass::CQ, 2, 2, 1, 1, eps, 0.6, small(100));
  const auto rho = random_quotient(QuotientClass::CQ, 2, 2, rng);
  const TauResult t = construct_tau(rho, n, eps);
  const std::size_t nq = n.Q.size(), np = n.P.size();
  std::vector<std::uint64_t> first(np, UINT64_MAX);
  double defect = 0;
  for (std::size_t w = 0; w < np; ++w)
    for (std::size_t b = 0; b < nq; ++b) {
      const std::size_t out = t.tau(b, w);
      first[out] = std::min(first[out], antilex_key(b, w, nq));
      const ComplexVector v = rho.action * (n.Q.map(b).action * n.P.scalar_column(w));
      defect = std::max(defect, (n.P.scalar_column(out) - v).cwiseAbs().sum());
    }
  CHECK(defect == doctest::Approx(t.defect).epsilon(1e-12));
  for (std::size_t w = 1; w < np; ++w) {
    CHECK(first[w] > first[w - 1]);
    CHECK(first[w] == antilex_key(t.a_dagger, w, nq));
  }
}

TEST_CASE("tau on non-square quotients uses the general path") {
  std::mt19937_64 rng(10);
  const double eps = 0.6;
  const Nets n = build_nets(QuotientClass::CQ, 2, 3, 1, 1, eps, 0.3, small());
  const auto rho = random_quotient(QuotientClass::CQ, 2, 3, rng);
  REQUIRE(structure_check(rho, QuotientClass::CQ).ok);
  const TauResult t = construct_tau(rho, n, eps);
  CHECK_FALSE(t.fast_path);
  CHECK(t.rigid);
  CHECK(t.minima_ok);
  CHECK(t.defect <= eps);
}

TEST_CASE("tau for trace-preserving quotients") {
  std::mt19937_64 rng(11);
  const double eps = 0.4;
  const Nets n = build_nets(QuotientClass::TPCQ, 3, 3, 1, 1, eps, 0.3, small());
  for (int trial = 0; trial < 3; ++trial) {
    const auto rho = random_quotient(QuotientClass::TPCQ, 3, 3, rng);
    REQUIRE(structure_check(rho, QuotientClass::TPCQ).ok);
    const TauResult t = construct_tau(rho, n, eps);
    CHECK(t.rigid);
    CHECK(t.minima_ok);
    CHECK(t.defect <= eps);
    for (std::size_t w = 0; w < n.P.size(); ++w) CHECK(t.tau(t.a_dagger, w) == w);
  }
}

TEST_CASE("tau rejects bad inputs") {
  const Nets n = build_nets(QuotientClass::CQ, 2, 2, 1, 1, 0.5, 0.3, small(50));
  const SpaceDescriptor l1 = SpaceDescriptor::full({{1, 1}, {1, 1}});
  CHECK_THROWS_AS(construct_tau(BlockLinearMap::zero(l1, l1), n, 0.5), Error);
  CHECK_THROWS_AS(construct_tau(BlockLinearMap::identity(l1), n, 0.1), Error);
  TauOptions tiny;
  tiny.budget = 10;
  CHECK_THROWS_AS(construct_tau(BlockLinearMap::identity(l1), n, 0.5, tiny), Error);
}
