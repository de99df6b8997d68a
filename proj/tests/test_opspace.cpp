#include "doctest.h"

#include <cmath>
#include <random>

#include "opramsey/error.hpp"
#include "opramsey/opspace.hpp"

using namespace opramsey;

namespace {

SpaceElement diag_element(const SpaceDescriptor& s, std::vector<double> values) {
  SpaceElement x{s, 1, {}};
  for (double v : values) x.data.push_back(ComplexMatrix::Identity(1, 1) * v);
  return x;
}

}  // namespace

TEST_CASE("level norms of infinity-sums") {
  const auto l2 = SpaceDescriptor::ell_inf(2);
  CHECK(level_norm(diag_element(l2, {1, 1})) == doctest::Approx(1.0));
  CHECK(level_norm(diag_element(l2, {2, 1})) == doctest::Approx(2.0));
  const auto m2 = SpaceDescriptor::matrices(2, 2);
  SpaceElement x{m2, 2, {ComplexMatrix::Zero(4, 4)}};
  x.data[0].block(0, 0, 2, 2) << 0, 2, 0, 0;
  x.data[0].block(2, 2, 2, 2) << 0, 2, 0, 0;
  CHECK(level_norm(x) == doctest::Approx(2.0));
  SpaceElement wrong{m2, 1, {ComplexMatrix::Zero(3, 3)}};
  CHECK_THROWS_AS(level_norm(wrong), Error);
}

TEST_CASE("descriptor invariants") {
  ComplexMatrix dependent(2, 2);
  dependent << 1, 2, 1, 2;
  CHECK_THROWS_AS(SpaceDescriptor::subspace({{1, 1}, {1, 1}}, dependent), Error);
  CHECK_THROWS_AS(SpaceDescriptor::matrices(1, 2, Category::Osy), Error);
  ComplexMatrix first(2, 1);
  first << 1, 0;
  CHECK_THROWS_AS(SpaceDescriptor::subspace({{1, 1}, {1, 1}}, first, Category::Osy), Error);
  ComplexMatrix unit(2, 1);
  unit << 1, 1;
  CHECK_NOTHROW(SpaceDescriptor::subspace({{1, 1}, {1, 1}}, unit, Category::Osy));
}

TEST_CASE("amplification") {
  std::mt19937_64 rng(2);
  const auto m2 = SpaceDescriptor::matrices(2, 2);
  const auto id = BlockLinearMap::identity(m2);
  const auto id3 = amplify(id, 3);
  CHECK(id3.action.isApprox(ComplexMatrix::Identity(36, 36)));
  SpaceElement x{m2, 3, {random_gaussian(6, 6, rng)}};
  CHECK(id.apply(x).data[0].isApprox(x.data[0]));
  CHECK(amplify(id, 1).action == id.action);

  const auto t = transpose_map(2);
  SpaceElement y{m2, 2, {random_gaussian(4, 4, rng)}};
  const auto ty = t.apply(y);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(ty.data[0].block(2 * i, 2 * j, 2, 2).isApprox(y.data[0].block(2 * i, 2 * j, 2, 2).transpose()));
}

TEST_CASE("amplified subspace coordinates round trip") {
  ComplexMatrix basis(4, 2);
  basis << 1, 0, 0, 1, 0, 1, 1, 0;  // span{I, X} in M_2
  const auto s = SpaceDescriptor::subspace({{2, 2}}, basis, Category::Osy);
  std::mt19937_64 rng(4);
  const ComplexVector c = random_gaussian(8, 1, rng).col(0);
  const auto x = SpaceElement::from_coordinates(s, 2, c);
  CHECK_NOTHROW(x.validate());
  CHECK((x.coordinates() - c).norm() < 1e-12);
}

TEST_CASE("sampled amplification norms of the transpose") {
  const auto t = transpose_map(2);
  CHECK(sampled_amplification_norm(t, 1).value == doctest::Approx(1.0).epsilon(1e-9));
  const auto s2 = sampled_amplification_norm(t, 2);
  CHECK(s2.value >= 2.0 - 1e-3);
  CHECK(level_norm(s2.witness) <= 1.0 + 1e-9);
  CHECK(level_norm(t.apply(s2.witness)) == doctest::Approx(s2.value).epsilon(1e-9));
}

TEST_CASE("sampled norms on a subspace domain use ratio ascent") {
  ComplexMatrix basis(4, 2);
  basis << 1, 0, 0, 1, 0, 0, 0, 0;  // span{E11, E12}: a row
  const auto row = SpaceDescriptor::subspace({{2, 2}}, basis);
  const auto col = SpaceDescriptor::matrices(2, 1);
  const BlockLinearMap f{row, col, ComplexMatrix::Identity(2, 2)};
  CHECK(sampled_amplification_norm(f, 1).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sampled_amplification_norm(f, 2).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("level norms are norms and nondecreasing in the level") {
  std::mt19937_64 rng(8);
  const auto s = SpaceDescriptor::full({{2, 2}, {2, 1}});
  for (int t = 0; t < 20; ++t) {
    SpaceElement a{s, 2, {random_gaussian(4, 4, rng), random_gaussian(4, 2, rng)}};
    SpaceElement b{s, 2, {random_gaussian(4, 4, rng), random_gaussian(4, 2, rng)}};
    SpaceElement sum = a;
    SpaceElement scaled = a;
    for (int k = 0; k < 2; ++k) {
      sum.data[k] += b.data[k];
      scaled.data[k] *= Complex(0, -2.5);
    }
    CHECK(level_norm(sum) <= level_norm(a) + level_norm(b) + 1e-9);
    CHECK(std::abs(level_norm(scaled) - 2.5 * level_norm(a)) <= 1e-9 * level_norm(scaled));
    CHECK(level_norm(a) == doctest::Approx(std::max(op_norm(a.data[0]), op_norm(a.data[1]))));
  }
  const BlockLinearMap f{SpaceDescriptor::matrices(2, 2), SpaceDescriptor::matrices(1, 3),
                         random_gaussian(3, 4, rng)};
  double prev = 0.0;
  for (int m = 1; m <= 3; ++m) {
    const double v = sampled_amplification_norm(f, m).value;
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}

TEST_CASE("Ruan axioms") {
  CHECK(ruan_check(SpaceDescriptor::ell_inf(3), 500, 1).violations == 0);
  CHECK(ruan_check(SpaceDescriptor::full({{2, 2}, {2, 1}}), 500, 2).violations == 0);
  const NormFunction fake = [](const SpaceElement& x) {
    return x.level == 2 ? 0.5 * level_norm(x) : level_norm(x);
  };
  const auto report = ruan_check(SpaceDescriptor::ell_inf(3), 500, 3, fake);
  CHECK(report.violations >= 1);
  REQUIRE(!report.witnesses.empty());
  CHECK(report.witnesses[0].lhs > report.witnesses[0].rhs);
}

TEST_CASE("space and map JSON round trip") {
  ComplexMatrix basis(4, 2);
  basis << 1, 0, 0, 1, 0, 1, 1, 0;
  const auto s = SpaceDescriptor::subspace({{2, 2}}, basis, Category::Osy);
  CHECK(space_from_json(space_to_json(s)) == s);
  const auto t = transpose_map(2);
  const auto back = map_from_json(map_to_json(t));
  CHECK(back.action == t.action);
  CHECK(back.domain == t.domain);
  CHECK_THROWS_AS(space_from_json(nlohmann::json{{"blocks", 3}}), Error);
}
