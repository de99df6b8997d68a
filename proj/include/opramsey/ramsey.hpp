#pragma once

// Rigid surjections between finite ordinals and instance checks of the dual
// Ramsey theorem.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/opspace.hpp"

namespace opramsey {

/// A surjection n -> k whose preimage minima increase: values[0] = 0 and
/// each new value exceeds the running maximum by exactly one.
class RigidSurjection {
 public:
  RigidSurjection() = default;
  /// Throws a rigidity error unless `values` is a rigid surjection onto k.
  RigidSurjection(std::vector<int> values, int codomain_size);
  static RigidSurjection identity(int n);

  int domain_size() const { return static_cast<int>(values_.size()); }
  int codomain_size() const { return k_; }
  const std::vector<int>& values() const { return values_; }
  int operator()(int i) const { return values_[i]; }
  std::string str() const;

  bool operator==(const RigidSurjection&) const = default;
  auto operator<=>(const RigidSurjection&) const = default;

 private:
  std::vector<int> values_;
  int k_ = 0;
};

bool is_rigid_surjection(const std::vector<int>& values, int k);

/// All rigid surjections n -> k in lexicographic order.
std::vector<RigidSurjection> enumerate_epi(int n, int k);
/// Visits Epi(n, k) in lexicographic order until `visit` returns false.
void for_each_epi(int n, int k, const std::function<bool(const std::vector<int>&)>& visit);
/// |Epi(n, k)|, the Stirling number of the second kind; saturates at UINT64_MAX.
std::uint64_t count_epi(int n, int k);
/// Position of f in the lexicographic enumeration of Epi(n, k).
std::uint64_t epi_rank(const RigidSurjection& f);

/// outer o inner.
RigidSurjection compose_epi(const RigidSurjection& outer, const RigidSurjection& inner);

/// Colorings used by the dual Ramsey search and by the approximate Ramsey harness.
struct ColoringSpec {
  enum class Kind { discrete, lipschitz };
  /// Discrete rules: constant (everything 0), table (color = table[index]),
  /// hash (seeded hash of the index), preimage_count (|f^{-1}(0)| mod r).
  enum class Rule { constant, table, hash, preimage_count };

  Kind kind = Kind::discrete;
  int r = 1;
  Rule rule = Rule::constant;
  std::vector<int> table;
  std::uint64_t seed = 0;
  /// Lipschitz form: c(phi) = min over references of d_cb(phi, ref), clipped to [0, 1].
  std::vector<BlockLinearMap> reference;

  static ColoringSpec discrete(int r, Rule rule, std::uint64_t seed = 0);
  static ColoringSpec lookup(int r, std::vector<int> table);
  static ColoringSpec lipschitz(std::vector<BlockLinearMap> reference);

  /// Color of an element known by its enumeration index (and, for
  /// preimage_count, its values).
  int color(std::uint64_t index, const std::vector<int>* values = nullptr) const;
  /// Real-valued coloring of a map; discrete colorings use `index`.
  double value(const BlockLinearMap& f, std::uint64_t index) const;
};

nlohmann::json coloring_to_json(const ColoringSpec& c);
ColoringSpec coloring_from_json(const nlohmann::json& j);

struct DrtResult {
  std::optional<RigidSurjection> gamma;
  std::optional<int> color;
  std::uint64_t examined = 0;
  std::uint64_t candidates = 0;
};

inline constexpr std::uint64_t drt_default_cap = 5'000'000;

/// First gamma in Epi(n, S) whose family {sigma o gamma : sigma in Epi(S, R)}
/// is monochromatic. A budget error when |Epi(n, S)| exceeds `cap`.
DrtResult drt_search(int n, int r_size, int s_size, const ColoringSpec& coloring,
                     std::uint64_t cap = drt_default_cap);

nlohmann::json epi_to_json(const RigidSurjection& f);
RigidSurjection epi_from_json(const nlohmann::json& j);

}  // namespace opramsey
