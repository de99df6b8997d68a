#pragma once

// Completely bounded norms through the Paulsen system: ||f||_cb <= t exactly
// when [[l, x], [y*, m]] -> [[l, f(x)/t], [f(y)*/t, m]] has a unital
// completely positive extension to the full block algebra.

#include <functional>
#include <optional>
#include <vector>

#include "opramsey/opspace.hpp"
#include "opramsey/sdp.hpp"

namespace opramsey {

struct ChoiMatrix {
  /// Sum of E_uv (x) f(E_uv) over the matrix units of the block-diagonal
  /// embeddings; size (N K) x (N K) with N, K the total block sizes.
  ComplexMatrix matrix;
  int domain_size = 0;
  int codomain_size = 0;
};

struct ChoiReport {
  ChoiMatrix choi;
  bool is_cp = false;
  double min_eig = 0.0;
};

ChoiReport choi_and_cp(const BlockLinearMap& f);
/// Inverse of choi_and_cp for full square-block domains and codomains.
BlockLinearMap map_from_choi(const ChoiMatrix& c, const SpaceDescriptor& domain, const SpaceDescriptor& codomain);

struct CbOptions {
  double tol = 1e-6;
  double sdp_tol = 1e-9;
  /// The feasibility solve at value + tol has a thin interior; it runs at the
  /// solver's default tolerance.
  double feasibility_tol = 1e-8;
  bool lower_witness = true;
  bool upper_witness = true;
  AscentOptions ascent;
};

struct CbCertificate {
  double value = 0.0;
  int critical_block = 0;  // codomain block attaining the maximum
  double lower_value = 0.0;
  int lower_level = 1;
  std::optional<SpaceElement> lower_witness;
  double upper_level = 0.0;
  std::optional<SdpSolution> upper_witness;
  int sdp_iterations = 0;
};

CbCertificate cb_norm(const BlockLinearMap& f, const CbOptions& options);
CbCertificate cb_norm(const BlockLinearMap& f, double tol = 1e-6);
/// Value only; the oracle used by the defect and amalgamation code.
double cb_norm_value(const BlockLinearMap& f, double sdp_tol = 1e-9);

/// Level at which amplification norms reach the cb norm for this codomain.
int smith_level(const SpaceDescriptor& codomain);

/// Completely contractive extension of f from its domain X to the ambient
/// space of X. Agreement on X is exact up to rounding.
BlockLinearMap extend_cc(const BlockLinearMap& f, double budget_tol = 1e-6);

using CbOracle = std::function<double(const BlockLinearMap&)>;

/// Inverse of an injective map, defined on its image (a subspace of the
/// codomain's ambient space) and landing in the domain's ambient space.
BlockLinearMap inverse_on_image(const BlockLinearMap& f);

/// +inf unless f is an injective complete contraction; else ||f^{-1}||_cb - 1.
double delta_defect(const BlockLinearMap& f, const CbOracle& cb = {});

inline constexpr double isometry_threshold = 1e-6;

/// x -> (f_1(x), ..., f_n(x)) into the infinity-sum of the codomains.
BlockLinearMap tuple_maps(const std::vector<BlockLinearMap>& components);

struct LemmaInjectiveResult {
  bool is_complete_isometry = false;
  std::optional<int> witness_index;
  std::vector<double> component_defects;
};

LemmaInjectiveResult lemma_injective_check(const std::vector<BlockLinearMap>& components, const CbOracle& cb = {});

nlohmann::json certificate_to_json(const CbCertificate& c);

}  // namespace opramsey
