#include "opramsey/duality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opramsey/error.hpp"

namespace opramsey {

StateVector StateVector::make(std::vector<double> raw) {
  require(!raw.empty(), ErrorKind::parameter, "a state needs at least one weight");
  double sum = 0.0;
  for (double w : raw) {
    require(std::isfinite(w) && w >= -1e-12, ErrorKind::parameter, "state weights must be nonnegative");
    sum += std::max(w, 0.0);
  }
  require(sum > 0, ErrorKind::parameter, "state weights sum to zero");
  StateVector s;
  s.drift = std::abs(sum - 1.0);
  for (double w : raw) s.weights.push_back(std::max(w, 0.0) / sum);
  return s;
}

StateVector StateVector::vertex(int d, int i) {
  require(i >= 0 && i < d, ErrorKind::parameter, "vertex index out of range");
  std::vector<double> w(d, 0.0);
  w[i] = 1.0;
  return make(std::move(w));
}

MatrixState MatrixState::make(const ComplexMatrix& raw) {
  require(raw.rows() == raw.cols() && raw.rows() > 0, ErrorKind::shape, "density matrix must be square");
  const ComplexMatrix h = hermitian_part(raw);
  require(min_eigenvalue(h) >= -1e-10, ErrorKind::parameter, "density matrix must be positive semidefinite");
  const double tr = h.trace().real();
  require(tr > 0, ErrorKind::parameter, "density matrix has zero trace");
  return {h / tr, std::abs(tr - 1.0)};
}

BlockLinearMap sigma_d(int d, int q) {
  require(d >= 1 && q >= 1, ErrorKind::parameter, "sigma_d needs d, q >= 1");
  const SpaceDescriptor dom = SpaceDescriptor::ell_inf(d, q, q, Category::Osy);
  const SpaceDescriptor cod = SpaceDescriptor::matrices(q, q, Category::Osy);
  BlockLinearMap f = BlockLinearMap::zero(dom, cod);
  const int k = q * q;
  f.action.rightCols(k) = ComplexMatrix::Identity(k, k);
  return f;
}

UcpReport ucp_report(const BlockLinearMap& f) {
  f.validate();
  require(f.domain.all_square() && f.codomain.all_square(), ErrorKind::category, "ucp needs units on both sides");
  const auto unit = f.domain.unit_coordinates();
  require(unit.has_value(), ErrorKind::category, "domain does not contain the unit");
  UcpReport r;
  const ComplexVector image = f.codomain.basis() * (f.action * *unit);
  r.unit_residual = (image - f.codomain.ambient_unit()).cwiseAbs().maxCoeff();
  const ChoiReport c = choi_and_cp(f);
  r.choi_min_eig = c.min_eig;
  r.is_ucp = r.unit_residual <= 1e-9 && c.is_cp;
  return r;
}

bool is_ucp(const BlockLinearMap& f) { return ucp_report(f).is_ucp; }

void PointedSpace::validate() const {
  distinguished.validate();
  require(distinguished.domain == space, ErrorKind::shape, "distinguished map must start at the space");
  require(cb_norm_value(distinguished) <= 1.0 + 1e-8, ErrorKind::precondition,
          "distinguished map must be completely contractive");
  if (space.category() == Category::Osy)
    require(ucp_report(distinguished).unit_residual <= 1e-9, ErrorKind::precondition,
            "distinguished map of an operator system must be unital");
}

SpaceDescriptor dual_space(const SpaceDescriptor& s) {
  require(!s.has_explicit_basis(), ErrorKind::unsupported, "duality is implemented for full block spaces only");
  std::vector<BlockShape> t;
  for (const auto& b : s.blocks()) t.push_back({b.cols, b.rows});
  return SpaceDescriptor::full(std::move(t), s.category());
}

namespace {

// P maps the M-side index r*s + c of a (q, s) block to the T-side index c*q + r.
Eigen::PermutationMatrix<Eigen::Dynamic> transpose_permutation(const SpaceDescriptor& s) {
  Eigen::VectorXi idx(s.ambient_dim());
  for (int b = 0; b < static_cast<int>(s.blocks().size()); ++b) {
    const auto [q, cols] = s.blocks()[b];
    const int o = s.offset(b);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c < cols; ++c) idx(o + r * cols + c) = o + c * q + r;
  }
  return Eigen::PermutationMatrix<Eigen::Dynamic>(idx);
}

// Normalized trace weight 1/s of each T-side coordinate.
RealVector trace_weights(const SpaceDescriptor& s) {
  RealVector w(s.ambient_dim());
  for (int b = 0; b < static_cast<int>(s.blocks().size()); ++b) {
    const auto [q, cols] = s.blocks()[b];
    w.segment(s.offset(b), q * cols).setConstant(1.0 / cols);
  }
  return w;
}

void require_full(const SpaceDescriptor& s, const char* what) {
  require(!s.has_explicit_basis() && s.spans_ambient(), ErrorKind::unsupported,
          std::string(what) + " must be a full block space");
}

}  // namespace

ComplexMatrix pairing_matrix(const SpaceDescriptor& s) {
  require_full(s, "paired space");
  const ComplexMatrix p = transpose_permutation(s).toDenseMatrix().cast<Complex>();
  return trace_weights(s).cast<Complex>().asDiagonal() * p;
}

Complex pairing(const SpaceDescriptor& s, const ComplexVector& a, const ComplexVector& x) {
  return (a.transpose() * pairing_matrix(s) * x)(0, 0);
}

BlockLinearMap dualize(const BlockLinearMap& eta) {
  eta.validate();
  require_full(eta.domain, "dualize domain");
  require_full(eta.codomain, "dualize codomain");
  const auto pd = transpose_permutation(eta.domain);
  const auto pc = transpose_permutation(eta.codomain);
  const RealVector wd = trace_weights(eta.domain);
  const RealVector wc = trace_weights(eta.codomain);
  // H = D_d^{-1} P_d E^T P_c^T D_c
  ComplexMatrix h = pd * ComplexMatrix(eta.action.transpose()) * pc.transpose();
  h = wd.cwiseInverse().cast<Complex>().asDiagonal() * h * wc.cast<Complex>().asDiagonal();
  return {dual_space(eta.codomain), dual_space(eta.domain), h};
}

BlockLinearMap predualize(const BlockLinearMap& phi) {
  phi.validate();
  require_full(phi.domain, "predual domain");
  require_full(phi.codomain, "predual codomain");
  const SpaceDescriptor x = dual_space(phi.codomain);  // transposing twice restores the shapes
  const SpaceDescriptor y = dual_space(phi.domain);
  const auto pd = transpose_permutation(x);
  const auto pc = transpose_permutation(y);
  const RealVector wd = trace_weights(x);
  const RealVector wc = trace_weights(y);
  // E = P_c^T D_c^{-1} H^T D_d P_d
  ComplexMatrix e = wc.cwiseInverse().cast<Complex>().asDiagonal() * ComplexMatrix(phi.action.transpose()) *
                    wd.cast<Complex>().asDiagonal();
  e = pc.transpose() * e * pd;
  return {x, y, e};
}

double dual_cb_norm(const BlockLinearMap& phi, double sdp_tol) {
  const auto scalar = [](const SpaceDescriptor& s) {
    return std::all_of(s.blocks().begin(), s.blocks().end(), [](BlockShape b) { return b.rows == 1 && b.cols == 1; });
  };
  if (scalar(phi.domain) && scalar(phi.codomain)) {
    // l_1 -> l_1: largest column sum.
    phi.validate();
    if (phi.action.size() == 0) return 0.0;
    return phi.action.cwiseAbs().colwise().sum().maxCoeff();
  }
  return cb_norm_value(predualize(phi), sdp_tol);
}

std::vector<Complex> block_traces(const SpaceDescriptor& dual, const ComplexVector& a) {
  require(a.size() == dual.ambient_dim(), ErrorKind::shape, "element size does not match the space");
  std::vector<Complex> out;
  const auto blocks = dual.unpack(a);
  for (const auto& b : blocks) {
    require(b.rows() == b.cols(), ErrorKind::category, "traces need square blocks");
    out.push_back(b.trace() / static_cast<double>(b.rows()));
  }
  return out;
}

Complex total_trace(const SpaceDescriptor& dual, const ComplexVector& a) {
  const auto t = block_traces(dual, a);
  return std::accumulate(t.begin(), t.end(), Complex(0.0));
}

Complex state_trace(const StateVector& lambda, const SpaceDescriptor& dual, const ComplexVector& a) {
  const auto t = block_traces(dual, a);
  require(lambda.size() == static_cast<int>(t.size()), ErrorKind::shape, "state size differs from the block count");
  Complex out = 0.0;
  for (int i = 0; i < lambda.size(); ++i) out += lambda.weights[i] * t[i];
  return out;
}

TraceCheck trace_preservation_check(const BlockLinearMap& phi, TraceConvention convention) {
  phi.validate();
  require_full(phi.domain, "trace check domain");
  require_full(phi.codomain, "trace check codomain");
  TraceCheck r;
  const int d = static_cast<int>(phi.codomain.blocks().size());
  for (int k = 0; k < phi.domain.ambient_dim(); ++k) {
    const ComplexVector e = ComplexVector::Unit(phi.domain.ambient_dim(), k);
    const Complex before = total_trace(phi.domain, e);
    const ComplexVector image = phi.action.col(k);
    if (convention == TraceConvention::plain) {
      r.residual = std::max(r.residual, std::abs(total_trace(phi.codomain, image) - before));
    } else {
      for (int i = 0; i < d; ++i)
        r.residual = std::max(r.residual, std::abs(state_trace(StateVector::vertex(d, i), phi.codomain, image) - before));
    }
  }
  r.ok = r.residual <= trace_tol;
  return r;
}

const char* to_string(QuotientClass c) { return c == QuotientClass::CQ ? "CQ" : "TPCQ"; }

QuotientClass quotient_class_from_string(const std::string& s) {
  if (s == "CQ") return QuotientClass::CQ;
  if (s == "TPCQ") return QuotientClass::TPCQ;
  fail(ErrorKind::parameter, "unknown quotient class '" + s + "'");
}

namespace {

BlockShape uniform_shape(const SpaceDescriptor& s) {
  require(!s.blocks().empty(), ErrorKind::shape, "block matrix needs at least one block");
  for (const auto& b : s.blocks())
    require(b == s.blocks().front(), ErrorKind::shape, "block matrix entries must share one shape");
  return s.blocks().front();
}

}  // namespace

BlockLinearMap matrix_entry(const BlockLinearMap& phi, int i, int j) {
  const BlockShape t = uniform_shape(phi.codomain);
  require(uniform_shape(phi.domain) == t, ErrorKind::shape, "domain and codomain entries differ in shape");
  const int k = t.rows * t.cols;
  const SpaceDescriptor one = SpaceDescriptor::full({t}, phi.domain.category());
  return {one, one, phi.action.block(phi.codomain.offset(i), phi.domain.offset(j), k, k)};
}

BlockLinearMap matrix_column(const BlockLinearMap& phi, int j) {
  const BlockShape t = uniform_shape(phi.domain);
  const int k = t.rows * t.cols;
  const SpaceDescriptor one = SpaceDescriptor::full({t}, phi.domain.category());
  return {one, phi.codomain, phi.action.middleCols(phi.domain.offset(j), k)};
}

bool is_automorphism_entry(const BlockLinearMap& entry, double tol) {
  if (entry.action.cwiseAbs().maxCoeff() == 0) return false;
  if (entry.action.size() == 1) return std::abs(std::abs(entry.action(0, 0)) - 1.0) <= tol;
  const BlockLinearMap pre = predualize(entry);
  if (!pre.is_injective()) return false;
  return delta_defect(pre) <= tol;
}

StructureReport structure_check(const BlockLinearMap& phi, QuotientClass cls) {
  phi.validate();
  const BlockShape t = uniform_shape(phi.codomain);
  require(uniform_shape(phi.domain) == t, ErrorKind::shape, "domain and codomain entries differ in shape");
  const int d = static_cast<int>(phi.codomain.blocks().size());
  const int n = static_cast<int>(phi.domain.blocks().size());
  StructureReport r;
  const auto violation = [&](std::string what, bool pattern) {
    r.violations.push_back(std::move(what));
    if (pattern) ++r.pattern_violations;
  };

  std::vector<std::vector<char>> iso(d, std::vector<char>(n, 0));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < n; ++j) iso[i][j] = is_automorphism_entry(matrix_entry(phi, i, j));

  for (int i = 0; i < d; ++i)
    if (std::none_of(iso[i].begin(), iso[i].end(), [](char c) { return c != 0; }))
      violation("row " + std::to_string(i) + " has no automorphism entry", true);

  for (int j = 0; j < n; ++j) {
    int count = 0;
    for (int i = 0; i < d; ++i) count += iso[i][j];
    if (count == 0) continue;
    for (int i = 0; i < d; ++i) {
      if (iso[i][j] && count == 1) continue;
      if (matrix_entry(phi, i, j).action.cwiseAbs().maxCoeff() != 0)
        violation("column " + std::to_string(j) + " carries an automorphism but entry " + std::to_string(i) +
                      " is nonzero",
                  true);
    }
  }

  for (int j = 0; j < n; ++j) {
    const BlockLinearMap col = matrix_column(phi, j);
    if (cls == QuotientClass::CQ) {
      const double excess = dual_cb_norm(col) - 1.0;
      r.norm_residual = std::max(r.norm_residual, excess);
      if (excess > 1e-8) violation("column " + std::to_string(j) + " is not completely contractive", false);
    } else {
      const TraceCheck tp = trace_preservation_check(col);
      const double neg = -choi_and_cp(col).min_eig;
      r.norm_residual = std::max({r.norm_residual, tp.residual, neg});
      if (!tp.ok) violation("column " + std::to_string(j) + " is not trace-preserving", false);
      if (neg > 1e-9) violation("column " + std::to_string(j) + " is not completely positive", false);
    }
  }

  if (cls == QuotientClass::TPCQ) {
    const int k = t.rows * t.cols;
    bool pinned = t.rows == t.cols;
    for (int i = 0; i < d && pinned; ++i) {
      const ComplexMatrix e = matrix_entry(phi, i, n - 1).action;
      pinned = i + 1 < d ? (e.cwiseAbs().maxCoeff() == 0) : (e == ComplexMatrix::Identity(k, k));
    }
    if (!pinned) violation("last column is not (0, ..., 0, Id)", true);
  }
  r.ok = r.violations.empty();
  return r;
}

PerturbResult perturb_ucp(const std::vector<BlockLinearMap>& psi, const BlockLinearMap& phi_d, const MatrixState& s,
                          double eps) {
  require(eps > 0, ErrorKind::parameter, "eps must be positive");
  phi_d.validate();
  const SpaceDescriptor& mq = phi_d.domain;
  require(mq.blocks().size() == 1 && mq.all_square() && phi_d.codomain == mq && !mq.has_explicit_basis(),
          ErrorKind::shape, "perturbation maps act on a single full M_q");
  const int q = mq.blocks()[0].rows;
  require(s.density.rows() == q, ErrorKind::shape, "state size differs from q");
  const auto check_cp = [&](const BlockLinearMap& f) {
    require(f.domain == mq && f.codomain == mq, ErrorKind::shape, "perturbation maps act on a single full M_q");
    require(choi_and_cp(f).is_cp, ErrorKind::precondition, "perturbation inputs must be completely positive");
  };
  for (const auto& f : psi) check_cp(f);
  check_cp(phi_d);

  const ComplexVector unit = mq.ambient_unit();
  ComplexVector partial = ComplexVector::Zero(unit.size());
  for (const auto& f : psi) partial += f.action * unit;
  const ComplexVector y = partial + phi_d.action * unit;
  const ComplexMatrix gap = mq.unpack(unit - y)[0];

  PerturbResult r;
  r.y_defect = op_norm(gap);
  require(r.y_defect < eps, ErrorKind::precondition,
          "||y - 1|| = " + std::to_string(r.y_defect) + " is not below eps");

  // s(x) = tr(rho x) = sum_{a,b} rho(b, a) x(a, b)
  Eigen::RowVectorXcd srow(q * q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) srow(a * q + b) = s.density(b, a);
  r.psi_d = phi_d;
  r.psi_d.action += (unit - y) * srow;

  const ComplexVector total = partial + r.psi_d.action * unit;
  r.unitality_residual = (total - unit).cwiseAbs().maxCoeff();
  r.distance = cb_norm_value(r.psi_d - phi_d);
  const double gap_min = min_eigenvalue(hermitian_part(gap));
  r.one_minus_y_psd = gap_min >= -1e-12;
  r.choi_min_eig = choi_and_cp(r.psi_d).min_eig;
  r.cp_certified = r.one_minus_y_psd && r.choi_min_eig >= -1e-9;
  r.cp_warning = !r.one_minus_y_psd;
  return r;
}

nlohmann::json perturb_to_json(const PerturbResult& r) {
  return {{"psi_d", map_to_json(r.psi_d)},
          {"unitality_residual", r.unitality_residual},
          {"distance", r.distance},
          {"y_defect", r.y_defect},
          {"one_minus_y_psd", r.one_minus_y_psd},
          {"cp_certified", r.cp_certified},
          {"cp_warning", r.cp_warning},
          {"choi_min_eig", r.choi_min_eig}};
}

nlohmann::json structure_to_json(const StructureReport& r) {
  return {{"ok", r.ok},
          {"violations", r.violations},
          {"pattern_violations", r.pattern_violations},
          {"norm_residual", r.norm_residual}};
}

}  // namespace opramsey
