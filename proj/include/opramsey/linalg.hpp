#pragma once

// Dense complex matrix primitives shared by every other module.

#include <complex>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace opramsey {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double tol_linalg = 1e-11;
inline constexpr double tol_herm = 1e-10;

/// Largest singular value. Throws a dimension error on an empty matrix.
double op_norm(const ComplexMatrix& m);

/// Sum of singular values.
double trace_norm(const ComplexMatrix& m);

/// Real eigenvalues of a Hermitian matrix, in descending order.
/// Inputs further than tol from Hermitian raise a symmetry error.
std::vector<double> herm_spectrum(const ComplexMatrix& m, double tol = tol_herm);

double min_eigenvalue(const ComplexMatrix& hermitian);

bool is_hermitian(const ComplexMatrix& m, double tol = tol_herm);

enum class AssembleKind { kron, direct_sum, adjoint };

ComplexMatrix assemble(AssembleKind kind, const ComplexMatrix& a,
                       const std::optional<ComplexMatrix>& b = std::nullopt);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix direct_sum(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& a);

/// U V* from the SVD U S V*; the maximiser of Re tr(m* x) over contractions x.
ComplexMatrix polar_part(const ComplexMatrix& m);

/// Hermitian part (m + m*) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

ComplexMatrix random_gaussian(int rows, int cols, std::mt19937_64& rng);
ComplexMatrix random_unitary(int n, std::mt19937_64& rng);

// {"rows": r, "cols": c, "data": [[re, im], ...]} row-major.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace opramsey
