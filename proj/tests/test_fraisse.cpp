#include "doctest.h"

#include <cmath>
#include <random>

#include "opramsey/error.hpp"
#include "opramsey/fraisse.hpp"

using namespace opramsey;

namespace {

SpaceDescriptor linf(int n, Category cat = Category::Osp) {
  return SpaceDescriptor::full(std::vector<BlockShape>(n, BlockShape{1, 1}), cat);
}
SpaceDescriptor mat(int n, int copies = 1, Category cat = Category::Osp) {
  return SpaceDescriptor::full(std::vector<BlockShape>(copies, BlockShape{n, n}), cat);
}

ClassConfig config(Category cat) {
  ClassConfig c;
  c.category = cat;
  return c;
}

}  // namespace

TEST_CASE("identity amalgamation is exact") {
  for (Category cat : {Category::Osp, Category::Osy}) {
    const SpaceDescriptor x = mat(2, 1, cat);
    const auto id = BlockLinearMap::identity(x);
    const AmalgamationWitness w = amalgamate(id, id, config(cat));
    CHECK(w.defect <= 1e-6);
    CHECK(w.ok());
    CHECK(w.V.dim() == 8);
    CHECK(w.unit_residual <= 1e-9);
  }
}

TEST_CASE("coordinate embeddings of l_inf^1 amalgamate exactly") {
  const SpaceDescriptor x = linf(1), y = linf(2);
  const BlockLinearMap e0{x, y, ComplexMatrix{{1.0}, {0.0}}};
  const BlockLinearMap e1{x, y, ComplexMatrix{{0.0}, {1.0}}};
  const AmalgamationWitness w = amalgamate(e0, e1, config(Category::Osp));
  CHECK(w.defect <= 1e-6);
  CHECK(w.i_defect <= 1e-6);
  CHECK(w.j_defect <= 1e-6);
}

TEST_CASE("perturbed embeddings stay within the modulus") {
  std::mt19937_64 rng(21);
  for (Category cat : {Category::Osp, Category::Osy}) {
    const SpaceDescriptor x = mat(2, 1, cat), y = mat(2, 2, cat);
    for (int trial = 0; trial < 2; ++trial) {
      const DeltaEmbedding phi = random_delta_embedding(x, y, 0.1, cat, rng);
      const DeltaEmbedding psi = random_delta_embedding(x, y, 0.1, cat, rng);
      CHECK(phi.delta_defect <= 0.1);
      const AmalgamationWitness w = amalgamate(phi.map, psi.map, config(cat), 1e-6);
      CHECK(w.ok());
      CHECK(w.defect <= config(cat).modulus(w.delta) + 2e-6);
    }
  }
}

TEST_CASE("random embeddings are complete isometries") {
  std::mt19937_64 rng(5);
  for (Category cat : {Category::Osp, Category::Osy}) {
    const SpaceDescriptor x = SpaceDescriptor::full({{1, 1}, {2, 2}}, cat);
    const SpaceDescriptor z = SpaceDescriptor::full({{3, 3}, {2, 2}}, cat);
    for (int t = 0; t < 4; ++t) {
      const auto e = random_embedding(x, z, cat, rng);
      REQUIRE(e.has_value());
      CHECK(delta_defect(*e) <= 1e-6);
    }
  }
  CHECK_FALSE(random_embedding(linf(2), linf(1), Category::Osp, rng).has_value());
  // A 2x2 block cannot tile a 3x3 block unitally without a 1x1 block.
  CHECK_FALSE(random_embedding(mat(2, 1, Category::Osy), mat(3, 1, Category::Osy), Category::Osy, rng).has_value());
}

TEST_CASE("pointed amalgamation") {
  std::mt19937_64 rng(8);
  const SpaceDescriptor R = linf(1);
  SUBCASE("zero states reduce to the plain witness plus a dummy block") {
    const SpaceDescriptor x = linf(1), y = linf(2);
    const PointedSpace px{x, BlockLinearMap::zero(x, R)}, py{y, BlockLinearMap::zero(y, R)};
    const BlockLinearMap e{x, y, ComplexMatrix{{1.0}, {0.0}}};
    const auto w = amalgamate_pointed(px, py, py, e, e, BlockLinearMap::identity(R), config(Category::Osp));
    CHECK(w.defect <= 1e-6);
    CHECK(w.V.dim() == 5);
    CHECK(w.ok());
  }
  SUBCASE("random instances") {
    for (Category cat : {Category::Osp, Category::Osy}) {
      for (double delta : {0.0, 0.1}) {
        const auto inst = random_pointed_instance(linf(2, cat), linf(3, cat), linf(3, cat), linf(1, cat), delta, cat, rng);
        const auto w = amalgamate_pointed(inst.x, inst.y, inst.z, inst.phi.map, inst.psi.map,
                                          BlockLinearMap::identity(linf(1, cat)), config(cat));
        CHECK(w.ok());
        CHECK(w.pointed_residual <= 1e-8);
        if (delta == 0.0) CHECK(w.defect <= 1e-6);
      }
    }
  }
  SUBCASE("theta must see the distinguished images") {
    const SpaceDescriptor x = linf(1), y = linf(1), R2 = linf(2);
    const PointedSpace px{x, BlockLinearMap{x, R2, ComplexMatrix{{0.0}, {1.0}}}};
    const SpaceDescriptor line = SpaceDescriptor::subspace(R2.blocks(), ComplexMatrix{{1.0}, {0.0}});
    const BlockLinearMap theta{line, R, ComplexMatrix{{1.0}}};
    const auto id = BlockLinearMap::identity(x);
    CHECK_THROWS_AS(amalgamate_pointed(px, px, px, id, id, theta, config(Category::Osp)), Error);
  }
}

TEST_CASE("multi-amalgamation") {
  const MultiAmalgamation single = multi_amalgamate({mat(2)}, 0.0, 1e-6, config(Category::Osp), 0, 1);
  CHECK(single.V.blocks() == mat(2).blocks());
  CHECK((single.I[0].action - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  const MultiAmalgamation two = multi_amalgamate({linf(1), linf(2)}, 0.0, 1e-6, config(Category::Osp), 0, 1);
  CHECK(two.V.dim() == 3);
  for (const auto& e : two.I) CHECK(delta_defect(e) <= 1e-6);

  const MultiAmalgamation cover =
      multi_amalgamate({mat(2), mat(2, 2)}, 0.05, 1e-6, config(Category::Osp), 6, 3);
  CHECK(cover.samples.size() == 6);
  for (const auto& s : cover.samples) CHECK(s.defect <= s.bound);
  for (const auto& e : cover.I) CHECK(delta_defect(e) <= 1e-6);

  const MultiAmalgamation capped = multi_amalgamate({linf(2)}, 0.0, 1e-6, config(Category::Osp), 10, 1, 5);
  CHECK(capped.partial);
  CHECK(capped.V.dim() <= 5);
}

TEST_CASE("distance estimates") {
  const DistanceEstimate same = distance_estimate(mat(2), mat(2), 4, 1);
  REQUIRE(same.gh_upper);
  CHECK(*same.gh_upper <= 1e-6);
  CHECK(*same.bm_upper <= 1e-6);

  const DistanceEstimate diff = distance_estimate(linf(1), linf(2), 4, 1);
  CHECK_FALSE(diff.gh_upper);
  CHECK_THROWS_AS(bm_estimate(linf(1), linf(2), 4, 1), Error);

  const DistanceEstimate a = bm_estimate(mat(2), linf(4), 10, 7);
  const DistanceEstimate b = bm_estimate(mat(2), linf(4), 30, 7);
  REQUIRE(a.bm_upper);
  CHECK(*b.bm_upper <= *a.bm_upper);
  CHECK(*b.bm_upper >= std::log(2.0) - 0.05);
}

TEST_CASE("embedding nets") {
  const EmbeddingNet self = emb_net(linf(2), linf(2), 0.5, 1);
  REQUIRE_FALSE(self.members.empty());
  CHECK((self.members[0].action - ComplexMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK(self.sampled_density <= 0.5);
  const EmbeddingNet coarse = emb_net(mat(2), mat(2), 1.9, 1, Category::Osp, 20);
  CHECK((coarse.members[0].action - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  const EmbeddingNet none = emb_net(linf(2), linf(1), 0.5, 1);
  CHECK(none.members.empty());

  const EmbeddingNet lines = emb_net(linf(1), linf(2), 0.5, 2);
  CHECK(lines.sampled_density <= 0.5);
  for (const auto& m : lines.members) CHECK(delta_defect(m) <= 1e-6);

  CHECK_THROWS_AS(emb_net(linf(1), linf(3), 0.01, 2, Category::Osp, 200, 5), Error);
}

TEST_CASE("oscillation") {
  const SpaceDescriptor x = linf(1);
  const auto id = BlockLinearMap::identity(x);
  const ColoringSpec constant = ColoringSpec::discrete(1, ColoringSpec::Rule::constant);
  CHECK(oscillation(constant, {id}).osc == 0.0);
  CHECK(oscillation(constant, {id, id, id}).osc == 0.0);
  const ColoringSpec two = ColoringSpec::lookup(2, {0, 1});
  CHECK(oscillation(two, {id, id}).osc == 1.0);
}

TEST_CASE("approximate Ramsey search") {
  ArpConfig cfg;
  cfg.eps = 0.1;
  const ArpResult r = arp_search(linf(1), linf(1), linf(2), ColoringSpec::discrete(1, ColoringSpec::Rule::constant), cfg);
  REQUIRE(r.gamma_index);
  CHECK(*r.gamma_index == 0);
  CHECK(r.report.osc == 0.0);

  const SpaceDescriptor z = linf(2);
  const ColoringSpec lip = ColoringSpec::lipschitz({BlockLinearMap{linf(1), z, ComplexMatrix{{1.0}, {0.0}}}});
  const ArpResult a = arp_search(linf(1), linf(1), z, lip, cfg);
  const ArpResult b = arp_search(linf(1), linf(1), z, lip, cfg);
  CHECK(arp_to_json(a) == arp_to_json(b));
  CHECK(a.examined >= 1);
}
