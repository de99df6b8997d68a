#pragma once

// Small dense semidefinite programs over complex Hermitian PSD blocks:
//
//   minimise   sum_b <C_b, X_b>
//   subject to sum_b <A_ib, X_b> = c_i,   X_b >= 0,
//
// with <A, X> = Re tr(A X). Solved by a homogeneous self-dual interior point
// method (HKM direction, Mehrotra predictor-corrector).

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/linalg.hpp"

namespace opramsey {

/// One nonzero A(row, col) = value of a coefficient matrix on `block`.
struct SdpTerm {
  int block = 0;
  int row = 0;
  int col = 0;
  Complex value;
};

struct SdpConstraint {
  std::vector<SdpTerm> terms;  // duplicates are summed
  double rhs = 0.0;

  /// Adds the Hermitian coefficient whose pairing with X equals Re(w * X(p, q)).
  void add_entry_functional(int block, int p, int q, Complex w);
  /// Adds a dense Hermitian coefficient matrix on `block`.
  void add_dense(int block, const ComplexMatrix& coefficient);
};

struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<ComplexMatrix> objective;  // one Hermitian matrix per block
  std::vector<SdpConstraint> constraints;

  int total_dim() const;
  /// Shape and Hermiticity checks; throws a shape or symmetry error.
  void validate() const;
  /// Dense coefficient matrix of constraint i on block b.
  ComplexMatrix coefficient(int i, int b) const;
};

enum class SdpStatus { optimal, infeasible, unbounded, max_iter };

const char* to_string(SdpStatus s);

struct SdpOptions {
  double tol = 1e-8;
  int max_iter = 200;
  int dim_limit = 400;
  bool parallel = true;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iter;
  std::vector<ComplexMatrix> primal_blocks;
  RealVector dual_vector;
  std::vector<ComplexMatrix> dual_slack;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  /// For infeasible/unbounded: how strongly the improving ray certifies it.
  double certificate_strength = 0.0;
};

SdpSolution solve_sdp(const SdpProblem& p, double sdp_tol = 1e-8);
SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& options);

/// <A_i, X> for every constraint.
RealVector apply_constraints(const SdpProblem& p, const std::vector<ComplexMatrix>& x);
/// sum_i y_i A_i per block.
std::vector<ComplexMatrix> adjoint_constraints(const SdpProblem& p, const RealVector& y);

/// Real symmetric embedding: each complex block of size n becomes a real 2n block
/// [[Re, -Im], [Im, Re]]. Same optimal value.
SdpProblem real_embedding(const SdpProblem& p);

nlohmann::json problem_to_json(const SdpProblem& p);
SdpProblem problem_from_json(const nlohmann::json& j);
nlohmann::json solution_to_json(const SdpSolution& s);

}  // namespace opramsey
