#pragma once

// Trace duality between l_inf-sums of matrix blocks and l_1-sums of trace
// classes, unital and trace-preserving maps, and the structure of complete
// quotient maps between l_1-sums.
//
// A dual-side space is described by a SpaceDescriptor whose blocks are the
// transposed shapes: T_{s,q} holds s x q matrices a paired with x in M_{q,s}
// through Tr(a x), Tr the normalized trace. Only coordinates are meaningful on
// that side; norms are computed through the predual map.

#include <optional>
#include <string>
#include <vector>

#include "opramsey/cbnorm.hpp"
#include "opramsey/opspace.hpp"

namespace opramsey {

/// A state on l_inf^d: nonnegative weights summing to one.
struct StateVector {
  std::vector<double> weights;
  double drift = 0.0;  // |sum - 1| of the raw weights before renormalisation

  static StateVector make(std::vector<double> raw);
  static StateVector vertex(int d, int i);
  int size() const { return static_cast<int>(weights.size()); }
};

/// A state on M_q given by a density matrix, renormalised to trace one.
struct MatrixState {
  ComplexMatrix density;
  double drift = 0.0;

  static MatrixState make(const ComplexMatrix& raw);
  Complex operator()(const ComplexMatrix& x) const { return (density * x).trace(); }
};

/// (x_1, ..., x_d) -> x_d on l_inf^d(M_q).
BlockLinearMap sigma_d(int d, int q);

/// A space with a distinguished map into a fixed R.
struct PointedSpace {
  SpaceDescriptor space;
  BlockLinearMap distinguished;

  /// cb norm at most 1 + 1e-8, and unital when the category is Osy.
  void validate() const;
};

struct UcpReport {
  bool is_ucp = false;
  double unit_residual = 0.0;
  double choi_min_eig = 0.0;
};

UcpReport ucp_report(const BlockLinearMap& f);
bool is_ucp(const BlockLinearMap& f);

/// Transposed block shapes: the dual-side description of an l_inf-sum.
SpaceDescriptor dual_space(const SpaceDescriptor& s);

/// G with <a, x> = a^T G x for a on dual_space(s) and x on s.
ComplexMatrix pairing_matrix(const SpaceDescriptor& s);
Complex pairing(const SpaceDescriptor& s, const ComplexVector& a, const ComplexVector& x);

/// eta : X -> Y becomes eta* : dual(Y) -> dual(X).
BlockLinearMap dualize(const BlockLinearMap& eta);
/// Inverse of dualize: phi : dual(Y) -> dual(X) becomes its predual X -> Y.
BlockLinearMap predualize(const BlockLinearMap& phi);

/// cb norm of a dual-side map, equal to the cb norm of its predual.
double dual_cb_norm(const BlockLinearMap& phi, double sdp_tol = 1e-9);

/// Normalized trace of a dual-side element, per block and summed.
std::vector<Complex> block_traces(const SpaceDescriptor& dual, const ComplexVector& a);
Complex total_trace(const SpaceDescriptor& dual, const ComplexVector& a);
Complex state_trace(const StateVector& lambda, const SpaceDescriptor& dual, const ComplexVector& a);

enum class TraceConvention { plain, per_state };

struct TraceCheck {
  bool ok = false;
  double residual = 0.0;
};

inline constexpr double trace_tol = 1e-9;

TraceCheck trace_preservation_check(const BlockLinearMap& phi, TraceConvention convention = TraceConvention::plain);

enum class QuotientClass { CQ, TPCQ };

const char* to_string(QuotientClass c);
QuotientClass quotient_class_from_string(const std::string& s);

struct StructureReport {
  bool ok = false;
  std::vector<std::string> violations;
  int pattern_violations = 0;
  /// Largest amount by which a column exceeds its norm or trace constraints.
  double norm_residual = 0.0;
};

/// phi : l_1^n(T) -> l_1^d(T) read as a d x n matrix of maps T -> T.
StructureReport structure_check(const BlockLinearMap& phi, QuotientClass cls);

/// Entry (i, j) of a dual-side block matrix as a map T -> T.
BlockLinearMap matrix_entry(const BlockLinearMap& phi, int i, int j);
/// Column j as a map T -> l_1^d(T).
BlockLinearMap matrix_column(const BlockLinearMap& phi, int j);
/// Surjective complete isometry test for a single dual-side entry.
bool is_automorphism_entry(const BlockLinearMap& entry, double tol = isometry_threshold);

struct PerturbResult {
  BlockLinearMap psi_d;
  double unitality_residual = 0.0;
  double distance = 0.0;      // ||psi_d - phi_d||_cb
  double y_defect = 0.0;      // ||y - 1||
  bool one_minus_y_psd = false;
  bool cp_certified = false;  // Choi PSD checked, only when 1 - y >= 0
  bool cp_warning = false;    // 1 - y not PSD, so nothing is claimed
  double choi_min_eig = 0.0;
};

/// psi_d(x) = phi_d(x) + s(x)(1 - y), y = sum_i psi_i(1) + phi_d(1).
PerturbResult perturb_ucp(const std::vector<BlockLinearMap>& psi, const BlockLinearMap& phi_d, const MatrixState& s,
                          double eps);

nlohmann::json perturb_to_json(const PerturbResult& r);
nlohmann::json structure_to_json(const StructureReport& r);

}  // namespace opramsey
