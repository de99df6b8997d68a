#include "opramsey/linalg.hpp"

#include <algorithm>
#include <string>

#include "opramsey/error.hpp"

namespace opramsey {

double op_norm(const ComplexMatrix& m) {
  require(m.size() > 0, ErrorKind::dimension, "op_norm of an empty matrix");
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

double trace_norm(const ComplexMatrix& m) {
  require(m.size() > 0, ErrorKind::dimension, "trace_norm of an empty matrix");
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

std::vector<double> herm_spectrum(const ComplexMatrix& m, double tol) {
  require(m.size() > 0, ErrorKind::dimension, "herm_spectrum of an empty matrix");
  require(m.rows() == m.cols(), ErrorKind::symmetry, "herm_spectrum needs a square matrix");
  require(is_hermitian(m, tol), ErrorKind::symmetry, "matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double min_eigenvalue(const ComplexMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(hermitian), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix direct_sum(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out = ComplexMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& a) { return a.adjoint(); }

ComplexMatrix assemble(AssembleKind kind, const ComplexMatrix& a, const std::optional<ComplexMatrix>& b) {
  switch (kind) {
    case AssembleKind::adjoint:
      return adjoint(a);
    case AssembleKind::kron:
      require(b.has_value(), ErrorKind::arity, "kron needs two operands");
      return kron(a, *b);
    case AssembleKind::direct_sum:
      require(b.has_value(), ErrorKind::arity, "direct_sum needs two operands");
      return direct_sum(a, *b);
  }
  fail(ErrorKind::arity, "unknown assemble kind");
}

ComplexMatrix polar_part(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) * 0.5; }

ComplexMatrix random_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = g(rng);
      const double im = g(rng);
      out(i, j) = Complex(re, im);
    }
  return out;
}

ComplexMatrix random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_gaussian(n, n, rng));
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix column phases so the distribution is Haar.
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto& data = j.at("data");
    require(rows > 0 && cols > 0, ErrorKind::dimension, "matrix dimensions must be positive");
    require(data.is_array() && static_cast<int>(data.size()) == rows * cols, ErrorKind::dimension,
            "matrix data length must equal rows*cols");
    ComplexMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < cols; ++c) {
        const auto& e = data[i * cols + c];
        if (e.is_number()) {
          m(i, c) = Complex(e.get<double>(), 0.0);
        } else {
          m(i, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
      }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::encoding, std::string("bad matrix JSON: ") + e.what());
  }
}

}  // namespace opramsey
