#pragma once

// Stable amalgamation witnesses, multi-amalgamation, distance estimates
// between finite-dimensional spaces, embedding nets, oscillation and the
// approximate Ramsey search. All spaces are full l_inf-sums of matrix blocks.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/duality.hpp"
#include "opramsey/ramsey.hpp"

namespace opramsey {

/// V = Y (+)_inf Z with i(y) = (y, Psi(y)) and j(z) = (Phi(z), z); in the
/// pointed form W = V (+)_inf R0 and the distinguished map is the projection
/// onto R0.
struct AmalgamationWitness {
  SpaceDescriptor V;
  BlockLinearMap i, j;
  double delta = 0.0;           // largest input defect (and pointed residual)
  double defect = 0.0;          // ||i phi - j psi||_cb
  double modulus_bound = 0.0;   // varpi(delta) + eps
  double i_defect = 0.0, j_defect = 0.0;
  double unit_residual = 0.0;   // Osy: largest ||i(1) - 1||, ||j(1) - 1||
  std::optional<BlockLinearMap> distinguished;
  double pointed_residual = 0.0;

  bool ok() const;
};

AmalgamationWitness amalgamate(const BlockLinearMap& phi, const BlockLinearMap& psi, const ClassConfig& cfg,
                               double eps = 1e-6);

/// theta maps R (or a subspace of it containing the images of s_Y and s_Z) into R0.
AmalgamationWitness amalgamate_pointed(const PointedSpace& x, const PointedSpace& y, const PointedSpace& z,
                                       const BlockLinearMap& phi, const BlockLinearMap& psi,
                                       const BlockLinearMap& theta, const ClassConfig& cfg, double eps = 1e-6);

// ---- random instances ----------------------------------------------------

/// A random complete isometry X -> Z that places the blocks of X diagonally
/// inside blocks of Z (unitally for Osy), conjugated by random unitaries;
/// nullopt when X does not fit.
std::optional<BlockLinearMap> random_pattern_embedding(const SpaceDescriptor& x, const SpaceDescriptor& z,
                                                       Category cat, std::mt19937_64& rng);
/// As above, plus random contractive filler in unused room (Osp only).
std::optional<BlockLinearMap> random_embedding(const SpaceDescriptor& x, const SpaceDescriptor& z, Category cat,
                                               std::mt19937_64& rng);
BlockLinearMap random_ucp_map(const SpaceDescriptor& x, const SpaceDescriptor& y, std::mt19937_64& rng);
BlockLinearMap random_cc_map(const SpaceDescriptor& x, const SpaceDescriptor& y, std::mt19937_64& rng);

struct DeltaEmbedding {
  BlockLinearMap map;
  BlockLinearMap base;  // the exact embedding it perturbs
  double delta_defect = 0.0;
  double pointed_residual = 0.0;
};

/// A perturbed embedding with delta_defect at most delta (and, when s_x and
/// s_y are given, ||s_y f - s_x||_cb at most delta).
DeltaEmbedding random_delta_embedding(const SpaceDescriptor& x, const SpaceDescriptor& y, double delta, Category cat,
                                      std::mt19937_64& rng, const BlockLinearMap* s_x = nullptr,
                                      const BlockLinearMap* s_y = nullptr);

struct PointedInstance {
  PointedSpace x, y, z;
  DeltaEmbedding phi, psi;
};

/// Pointed spaces toward R with s_Y, s_Z extending s_X along the base embeddings.
PointedInstance random_pointed_instance(const SpaceDescriptor& x, const SpaceDescriptor& y, const SpaceDescriptor& z,
                                        const SpaceDescriptor& r, double delta, Category cat, std::mt19937_64& rng);

// ---- multi-amalgamation ----------------------------------------------------

struct CoveringSample {
  int x = 0, y = 0, z = 0;  // indices into F
  double delta = 0.0;       // largest defect of gamma and eta
  double defect = 0.0;      // ||I_Y gamma - J eta||_cb
  double bound = 0.0;
};

struct MultiAmalgamation {
  SpaceDescriptor V;
  std::vector<BlockLinearMap> I;  // I[k] : F[k] -> V
  std::vector<CoveringSample> samples;
  bool partial = false;  // stopped at the dimension budget
};

/// V starts as the l_inf-sum of F with coordinate inclusions; each sampled
/// pair (gamma, eta) of delta-embeddings is then amalgamated into V.
MultiAmalgamation multi_amalgamate(const std::vector<SpaceDescriptor>& family, double delta, double eps,
                                   const ClassConfig& cfg, int samples, std::uint64_t seed, int max_dim = 4096);

// ---- distances -------------------------------------------------------------

struct DistanceEstimate {
  std::optional<double> gh_upper;  // empty: no pair of embeddings found
  std::optional<double> bm_upper;  // empty: dimensions differ
  std::optional<BlockLinearMap> f, g, t;
  int evaluations = 0;
  int budget = 0;
};

/// Upper bounds for d_C (linear scale) and d_BM = log(||T||_cb ||T^-1||_cb)
/// from a seeded local search over invertible T; more budget never raises them.
DistanceEstimate distance_estimate(const SpaceDescriptor& x, const SpaceDescriptor& y, int budget, std::uint64_t seed);
/// Banach-Mazur part alone; a shape error when the dimensions differ.
DistanceEstimate bm_estimate(const SpaceDescriptor& x, const SpaceDescriptor& y, int budget, std::uint64_t seed);

// ---- embedding nets, oscillation, ARP ----------------------------------------

struct EmbeddingNet {
  std::vector<BlockLinearMap> members;
  double eps = 0.0;
  int samples = 0;
  double sampled_density = 0.0;
};

/// Finite eps-dense subset of Emb(X, Z) (sampled over `samples` random
/// embeddings); empty when X does not embed in Z.
EmbeddingNet emb_net(const SpaceDescriptor& x, const SpaceDescriptor& z, double eps, std::uint64_t seed,
                     Category cat = Category::Osp, int samples = 200, int max_members = 400);

struct OscillationReport {
  std::size_t set_size = 0;
  double osc = 0.0;
  double epsilon = 0.0;
  std::vector<double> values;
};

/// Colors are evaluated with index = position in the set (discrete) or by
/// distance to the references (Lipschitz).
OscillationReport oscillation(const ColoringSpec& coloring, const std::vector<BlockLinearMap>& set, double eps = 0.0);

struct ArpConfig {
  double eps = 0.1;
  double net_eps = 0.5;
  std::uint64_t seed = 1;
  int budget = 64;  // candidate gammas examined
  Category category = Category::Osp;
};

struct ArpResult {
  std::optional<std::size_t> gamma_index;
  std::optional<BlockLinearMap> gamma;
  OscillationReport report;  // for gamma, or the best found
  std::size_t best_index = 0;
  int examined = 0;
};

/// Discrete colorings are keyed by the index of the nearest member of a net of Emb(X, Z).
ArpResult arp_search(const SpaceDescriptor& x, const SpaceDescriptor& y, const SpaceDescriptor& z,
                     const ColoringSpec& coloring, const ArpConfig& cfg);

nlohmann::json witness_to_json(const AmalgamationWitness& w);
nlohmann::json multi_to_json(const MultiAmalgamation& m);
nlohmann::json distance_to_json(const DistanceEstimate& d);
nlohmann::json emb_net_to_json(const EmbeddingNet& n);
nlohmann::json oscillation_to_json(const OscillationReport& r);
nlohmann::json arp_to_json(const ArpResult& r);

}  // namespace opramsey
