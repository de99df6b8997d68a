#pragma once

// Concrete finite-dimensional operator spaces: infinity-sums of rectangular
// matrix blocks, optionally cut down to a subspace given by an explicit basis.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/linalg.hpp"

namespace opramsey {

enum class Category { Osp, Osy };

const char* to_string(Category c);
Category category_from_string(const std::string& s);

struct BlockShape {
  int rows = 1;
  int cols = 1;
  bool operator==(const BlockShape&) const = default;
};

/// Stability modulus per class: delta for Osp, 2 delta for Osy, plus delta
/// more for pointed classes.
struct ClassConfig {
  Category category = Category::Osp;
  bool pointed = false;
  double osp_factor = 1.0;
  double osy_factor = 2.0;
  double pointed_extra = 1.0;

  double modulus(double delta) const {
    const double base = (category == Category::Osp ? osp_factor : osy_factor) * delta;
    return pointed ? base + pointed_extra * delta : base;
  }
};

/// Ambient coordinates are block by block, row-major inside each block.
/// Subspace coordinates are coefficients over the columns of basis().
class SpaceDescriptor {
 public:
  SpaceDescriptor() = default;

  static SpaceDescriptor full(std::vector<BlockShape> blocks, Category category = Category::Osp);
  static SpaceDescriptor subspace(std::vector<BlockShape> blocks, ComplexMatrix basis,
                                  Category category = Category::Osp);
  /// l_inf^n(M_{q,s}).
  static SpaceDescriptor ell_inf(int n, int q = 1, int s = 1, Category category = Category::Osp);
  static SpaceDescriptor matrices(int q, int s, Category category = Category::Osp);

  const std::vector<BlockShape>& blocks() const { return blocks_; }
  Category category() const { return category_; }
  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  bool has_explicit_basis() const { return explicit_basis_; }
  bool spans_ambient() const { return dim() == ambient_dim_; }
  const ComplexMatrix& basis() const { return basis_; }
  int offset(int block) const { return offsets_[block]; }
  int total_rows() const;
  int total_cols() const;
  bool all_square() const;

  SpaceDescriptor ambient_space() const;
  SpaceDescriptor with_category(Category c) const;
  /// M_m(X) as a space with blocks (m q_i, m s_i) and basis E_ij (x) x_t,
  /// coordinate index (i*m + j)*dim + t.
  SpaceDescriptor amplified(int m) const;

  std::vector<ComplexMatrix> unpack(const ComplexVector& ambient) const;
  ComplexVector pack(const std::vector<ComplexMatrix>& per_block) const;
  /// Blocks placed along the diagonal of a total_rows x total_cols matrix.
  ComplexMatrix block_diagonal(const ComplexVector& ambient) const;
  ComplexVector to_ambient(const ComplexVector& coords) const { return basis_ * coords; }
  /// Least-squares coordinates; residual() reports how far from the span.
  ComplexVector coordinates(const ComplexVector& ambient) const;
  double residual(const ComplexVector& ambient) const;

  /// Ambient vector of the all-identity element (square blocks only).
  ComplexVector ambient_unit() const;
  std::optional<ComplexVector> unit_coordinates() const;

  bool operator==(const SpaceDescriptor& o) const;

 private:
  void init(std::vector<BlockShape> blocks, Category category);
  void check_invariants() const;

  std::vector<BlockShape> blocks_;
  std::vector<int> offsets_;
  int ambient_dim_ = 0;
  ComplexMatrix basis_;
  bool explicit_basis_ = false;
  Category category_ = Category::Osp;
};

/// [x_ij] in M_m(X): per block a (m q_i) x (m s_i) matrix.
struct SpaceElement {
  SpaceDescriptor space;
  int level = 1;
  std::vector<ComplexMatrix> data;

  void validate(double tol = 1e-10) const;
  static SpaceElement from_coordinates(const SpaceDescriptor& space, int level, const ComplexVector& coords);
  /// Coordinates in the amplified basis of space.amplified(level).
  ComplexVector coordinates() const;
};

/// The infinity-sum norm: max over blocks of the operator norm.
double level_norm(const SpaceElement& x);

struct BlockLinearMap {
  SpaceDescriptor domain;
  SpaceDescriptor codomain;
  ComplexMatrix action;  // codomain.dim() x domain.dim()

  void validate() const;

  static BlockLinearMap identity(const SpaceDescriptor& space);
  static BlockLinearMap zero(const SpaceDescriptor& domain, const SpaceDescriptor& codomain);
  /// Builds the map from its values on domain basis elements. `f` takes and
  /// returns per-block matrices; values are projected onto the codomain span.
  static BlockLinearMap from_function(
      const SpaceDescriptor& domain, const SpaceDescriptor& codomain,
      const std::function<std::vector<ComplexMatrix>(const std::vector<ComplexMatrix>&)>& f);

  /// Ambient-to-ambient matrix when the domain spans its ambient space.
  ComplexMatrix ambient_action() const;
  SpaceElement apply(const SpaceElement& x) const;
  /// Restriction of the map to one codomain block (codomain must be full).
  BlockLinearMap codomain_block(int k) const;
  /// Same linear map with the codomain replaced by its ambient space.
  BlockLinearMap into_ambient() const;
  bool is_injective(double tol = 1e-10) const;
};

BlockLinearMap compose(const BlockLinearMap& after, const BlockLinearMap& before);
BlockLinearMap operator-(const BlockLinearMap& a, const BlockLinearMap& b);
BlockLinearMap operator*(Complex c, const BlockLinearMap& a);

/// The amplification f^(m) acting entrywise on M_m(domain).
BlockLinearMap amplify(const BlockLinearMap& f, int m);

/// The common transpose / row-column examples.
BlockLinearMap transpose_map(int q);

struct SampledNorm {
  double value = 0.0;
  SpaceElement witness;  // level-m element of the domain with norm <= 1
};

struct AscentOptions {
  int starts = 8;
  int max_iter = 400;
  std::uint64_t seed = 1;
};

/// Lower estimate of ||f^(m)|| by multi-start ascent over the unit ball.
SampledNorm sampled_amplification_norm(const BlockLinearMap& f, int m, const AscentOptions& options = {});

using NormFunction = std::function<double(const SpaceElement&)>;

struct RuanWitness {
  std::vector<SpaceElement> x;
  std::vector<ComplexMatrix> alpha;
  std::vector<ComplexMatrix> beta;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct RuanReport {
  int trials = 0;
  int violations = 0;
  std::vector<RuanWitness> witnesses;
};

/// Samples ||sum a_i* x_i b_i|| <= ||sum a_i* a_i||^(1/2) max||x_i|| ||sum b_i* b_i||^(1/2).
RuanReport ruan_check(const SpaceDescriptor& x, int trials, std::uint64_t seed,
                      const NormFunction& norm = level_norm);

nlohmann::json space_to_json(const SpaceDescriptor& s);
SpaceDescriptor space_from_json(const nlohmann::json& j);
nlohmann::json map_to_json(const BlockLinearMap& f);
BlockLinearMap map_from_json(const nlohmann::json& j);
nlohmann::json element_to_json(const SpaceElement& x);

}  // namespace opramsey
