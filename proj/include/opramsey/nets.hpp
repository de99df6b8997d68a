#pragma once

// Finite nets of column maps T_{s,q} -> l_1^d(T_{s,q}) and of structured
// complete isometries l_1^d(T) -> l_1^m(T), the encodings of rigid
// surjections as complete quotient maps, and the rigid surjection tau used to
// transfer colorings along a quotient rho.
//
// All maps here live on the dual side (see duality.hpp): T_{s,q} is a single
// (s, q) block and l_1^d(T) is d such blocks.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/duality.hpp"
#include "opramsey/ramsey.hpp"

namespace opramsey {

/// a -> left * a * right on T_{s,q}; for the systems class right = left*.
struct Automorphism {
  ComplexMatrix left;
  ComplexMatrix right;
};

struct UnitaryNet {
  int s = 1, q = 1;
  double eps0 = 0.0;
  bool systems = false;
  std::vector<Automorphism> members;  // members[0] is the identity
  /// For s = q = 1 the members are the phases exp(2 pi i k / size).
  bool phase_grid = false;
};

UnitaryNet build_unitary_net(int s, int q, double eps0, QuotientClass cls, std::uint64_t seed);

/// Structured net of scalar columns (q = s = 1). CQ: points of the l_1 ball
/// with magnitudes on a grid of step 1/levels and level-dependent phase
/// counts. TPCQ: points of the simplex with coordinates in (1/levels) Z.
struct ScalarGrid {
  int d = 0;
  int levels = 0;
  std::vector<int> phases;  // phase count at each magnitude level
  /// Member-major: level and phase index of coordinate i of member p at p * d + i.
  std::vector<int> level;
  std::vector<int> phase;
  /// Grid points are also numbered block by block over level tuples; these
  /// translate that numbering into net order.
  std::vector<long> block_offset;  // indexed by the base-(levels + 1) code of the level tuple
  std::vector<int> flat_to_member;

  double magnitude(int m) const { return static_cast<double>(m) / levels; }
  Complex value(int m, int k) const;
  /// Net index of the grid point with the given levels and phase indices.
  int member(const int* lv, const int* ph) const;
};

struct NetP {
  QuotientClass cls = QuotientClass::CQ;
  int d = 0, q = 1, s = 1;
  double eps = 0.0;
  /// Members in net order; exactly one of the two representations is used.
  std::vector<BlockLinearMap> explicit_maps;
  std::optional<ScalarGrid> grid;
  std::vector<double> cmp;  // comparison norm, nondecreasing in net order
  std::vector<long> cmp_key;  // integer comparison key for the grid nets
  int samples = 0;
  double sampled_density = 0.0;  // worst sampled distance to an admissible approximant

  std::size_t size() const { return cmp.size(); }
  BlockLinearMap map(std::size_t i) const;
  /// Entries of member i as a d-vector when q = s = 1.
  ComplexVector scalar_column(std::size_t i) const;
  std::size_t zero_index() const;                 // CQ only
  std::size_t embedding_index(int coordinate) const;
};

struct NetQ {
  QuotientClass cls = QuotientClass::CQ;
  int d = 0, m = 0, q = 1, s = 1;
  UnitaryNet units;
  /// Column j of member i has its single nonzero entry units[unit[i][j]] in row row[i][j].
  std::vector<std::vector<int>> row;
  std::vector<std::vector<int>> unit;

  std::size_t size() const { return row.size(); }
  BlockLinearMap map(std::size_t i) const;
};

struct NetOptions {
  int samples = 1000;
  int max_members = 200000;
  int extra_members = 0;  // random admissible members added after construction
  std::uint64_t seed = 1;
};

struct Nets {
  NetP P;
  NetQ Q;
};

Nets build_nets(QuotientClass cls, int d, int m, int q, int s, double eps, double eps0, const NetOptions& options = {});

/// Comparison norm of a column: its cb norm (CQ) or that of its first d - 1
/// coordinates (TPCQ).
double comparison_norm(const BlockLinearMap& column, QuotientClass cls);

/// Random admissible column: completely contractive (CQ) or trace-preserving CP (TPCQ).
BlockLinearMap random_column(QuotientClass cls, int d, int q, int s, std::mt19937_64& rng);

/// Distance in cb norm between two dual-side maps.
double cb_distance(const BlockLinearMap& a, const BlockLinearMap& b);

/// Block matrix with the given maps T -> l_1^k(T) as columns; TPCQ appends
/// the pinned column (0, ..., 0, Id).
BlockLinearMap columns_to_matrix(const std::vector<BlockLinearMap>& columns, QuotientClass cls);

/// alpha for a tuple over P: the i-th column is P[tuple[i]].
BlockLinearMap encode_alpha(const Nets& nets, const std::vector<int>& tuple);
/// alpha for a tuple over Q x P, pairs indexed b * |P| + w in antilex order
/// (w major): the i-th column is Q[b_i] P[w_i].
BlockLinearMap encode_alpha_pairs(const Nets& nets, const std::vector<std::pair<int, int>>& tuple);

/// Position of (b, w) in the antilexicographic order on Q x P.
inline std::uint64_t antilex_key(std::size_t b, std::size_t w, std::size_t q_size) {
  return static_cast<std::uint64_t>(w) * q_size + b;
}

/// A random complete quotient l_1^m(T) -> l_1^d(T) of the class (scalar case).
BlockLinearMap random_quotient(QuotientClass cls, int d, int m, std::mt19937_64& rng);

struct TauOptions {
  /// Cap on |Q| |P| pair evaluations (scalar fast path) or on distance
  /// evaluations (general path).
  std::uint64_t budget = 4'000'000'000ULL;
};

struct TauResult {
  std::size_t a_dagger = 0;
  double a_dagger_error = 0.0;  // ||A A^dagger - Id||_cb
  double defect = 0.0;          // max ||tau(B, w) - A B w||_cb
  bool rigid = false;
  bool minima_ok = false;       // min tau^{-1}(w) = (A^dagger, w) for w != 0
  std::uint64_t pairs = 0;
  std::uint64_t snapped = 0;    // pairs sent to zero or to the pinned column
  double max_snap_distance = 0.0;
  bool fast_path = false;
  /// Evaluates tau(b, w) as a P index.
  std::function<std::size_t(std::size_t, std::size_t)> tau;
};

TauResult construct_tau(const BlockLinearMap& rho, const Nets& nets, double eps, const TauOptions& options = {});

nlohmann::json nets_summary_json(const Nets& nets);
nlohmann::json tau_to_json(const TauResult& t);

}  // namespace opramsey
