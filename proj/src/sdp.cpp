#include "opramsey/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "opramsey/error.hpp"
#include "opramsey/kernels.hpp"

namespace opramsey {

void SdpConstraint::add_entry_functional(int block, int p, int q, Complex w) {
  if (p == q) {
    terms.push_back({block, p, p, Complex(w.real(), 0.0)});
    return;
  }
  terms.push_back({block, q, p, w * 0.5});
  terms.push_back({block, p, q, std::conj(w) * 0.5});
}

void SdpConstraint::add_dense(int block, const ComplexMatrix& coefficient) {
  for (Eigen::Index r = 0; r < coefficient.rows(); ++r)
    for (Eigen::Index c = 0; c < coefficient.cols(); ++c)
      if (coefficient(r, c) != Complex(0.0, 0.0))
        terms.push_back({block, static_cast<int>(r), static_cast<int>(c), coefficient(r, c)});
}

int SdpProblem::total_dim() const {
  int n = 0;
  for (int d : block_dims) n += d;
  return n;
}

ComplexMatrix SdpProblem::coefficient(int i, int b) const {
  ComplexMatrix a = ComplexMatrix::Zero(block_dims[b], block_dims[b]);
  for (const auto& t : constraints[i].terms)
    if (t.block == b) a(t.row, t.col) += t.value;
  return a;
}

void SdpProblem::validate() const {
  require(!block_dims.empty(), ErrorKind::shape, "SDP needs at least one block");
  require(objective.size() == block_dims.size(), ErrorKind::shape, "one objective matrix per block");
  for (std::size_t b = 0; b < block_dims.size(); ++b) {
    require(block_dims[b] > 0, ErrorKind::shape, "block dimensions must be positive");
    require(objective[b].rows() == block_dims[b] && objective[b].cols() == block_dims[b], ErrorKind::shape,
            "objective block " + std::to_string(b) + " has the wrong size");
    require(is_hermitian(objective[b], 1e-10), ErrorKind::symmetry, "objective block is not Hermitian");
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    for (const auto& t : constraints[i].terms) {
      require(t.block >= 0 && t.block < static_cast<int>(block_dims.size()), ErrorKind::shape,
              "constraint term on a missing block");
      require(t.row >= 0 && t.col >= 0 && t.row < block_dims[t.block] && t.col < block_dims[t.block],
              ErrorKind::shape, "constraint term outside its block");
    }
    for (std::size_t b = 0; b < block_dims.size(); ++b) {
      const ComplexMatrix a = coefficient(static_cast<int>(i), static_cast<int>(b));
      require(is_hermitian(a, 1e-10), ErrorKind::symmetry,
              "constraint " + std::to_string(i) + " is not Hermitian on block " + std::to_string(b));
    }
  }
}

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

RealVector apply_constraints(const SdpProblem& p, const std::vector<ComplexMatrix>& x) {
  return kernels::pair_serial(kernels::compile(p), x);
}

std::vector<ComplexMatrix> adjoint_constraints(const SdpProblem& p, const RealVector& y) {
  std::vector<ComplexMatrix> out;
  for (int d : p.block_dims) out.push_back(ComplexMatrix::Zero(d, d));
  for (std::size_t i = 0; i < p.constraints.size(); ++i)
    for (const auto& t : p.constraints[i].terms) out[t.block](t.row, t.col) += y(i) * t.value;
  return out;
}

namespace {

using Blocks = std::vector<ComplexMatrix>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k].conjugate().cwiseProduct(b[k])).sum().real();
  return s;
}

// Re tr(A B) for Hermitian A.
double re_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum().real();
}

double re_trace_product(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += re_trace_product(a[k], b[k]);
  return s;
}

// Largest alpha in (0, cap] with m + alpha*dm PSD (m positive definite).
double max_step(const ComplexMatrix& m, const ComplexMatrix& dm, double cap) {
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  ComplexMatrix l_inv = llt.matrixL().solve(ComplexMatrix::Identity(m.rows(), m.cols()));
  ComplexMatrix t = hermitian_part(l_inv * dm * l_inv.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(t, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0) return cap;
  return std::min(cap, -1.0 / lmin);
}

struct Direction {
  Blocks dx;
  Blocks ds;
  RealVector dy;
  double dtau = 0.0;
  double dkappa = 0.0;
};

class HsdSolver {
 public:
  HsdSolver(const SdpProblem& p, const SdpOptions& o) : p_(p), o_(o), c_(kernels::compile(p)) {
    m_ = static_cast<int>(p.constraints.size());
    b_ = RealVector(m_);
    for (int i = 0; i < m_; ++i) b_(i) = p.constraints[i].rhs;
    nu_ = p.total_dim() + 1;
    for (int d : p.block_dims) {
      x_.push_back(ComplexMatrix::Identity(d, d));
      s_.push_back(ComplexMatrix::Identity(d, d));
    }
    y_ = RealVector::Zero(m_);
    b_norm_ = m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0;
    c_norm_ = 0.0;
    for (const auto& cb : p.objective) c_norm_ = std::max(c_norm_, cb.norm());
  }

  SdpSolution run() {
    SdpSolution out;
    double prev_mu = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < o_.max_iter; ++it) {
      out.iterations = it;
      residuals();
      if (converged(out)) return out;
      if (certify_infeasible(out)) return out;

      for (std::size_t k = 0; k < s_.size(); ++k) {
        Eigen::LLT<ComplexMatrix> llt(hermitian_part(s_[k]));
        s_inv_.resize(s_.size());
        s_inv_[k] = hermitian_part(llt.solve(ComplexMatrix::Identity(s_[k].rows(), s_[k].cols())));
      }
      RealMatrix schur = o_.parallel ? kernels::schur_parallel(c_, x_, s_inv_) : kernels::schur_serial(c_, x_, s_inv_);
      const double reg = 1e-15 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += reg;
      ldlt_.compute(schur);
      schur_ = std::move(schur);

      Blocks xc_sinv(x_.size()), xf2_sinv(x_.size());
      for (std::size_t k = 0; k < x_.size(); ++k) {
        xc_sinv[k] = x_[k] * p_.objective[k] * s_inv_[k];
        xf2_sinv[k] = x_[k] * f2_[k] * s_inv_[k];
      }
      g_ = pair(xc_sinv);
      h_ = pair(xf2_sinv);
      gc_ = re_trace_product(p_.objective, xc_sinv);
      hc_ = re_trace_product(p_.objective, xf2_sinv);

      const double mu = mu_value();

      // Predictor.
      Blocks rc_aff(x_.size());
      for (std::size_t k = 0; k < x_.size(); ++k) rc_aff[k] = -x_[k];
      Direction aff = solve_direction(rc_aff, -tau_ * kappa_, 1.0);
      const double a_aff = step_length(aff, 1.0);
      const double mu_aff = trial_mu(aff, a_aff);
      double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
      sigma = std::clamp(sigma, 0.0, 1.0);

      // Corrector with the second-order term.
      Blocks rc(x_.size());
      for (std::size_t k = 0; k < x_.size(); ++k)
        rc[k] = sigma * mu * s_inv_[k] - x_[k] - hermitian_part(aff.dx[k] * aff.ds[k] * s_inv_[k]);
      const double rc_scalar = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
      Direction dir = solve_direction(rc, rc_scalar, 1.0 - sigma);
      double alpha = std::min(1.0, 0.98 * step_length(dir, 1.0 / 0.98));

      apply(dir, alpha);

      const double new_mu = mu_value();
      if (new_mu > 0.999 * prev_mu || alpha < 1e-8) {
        if (++stall > 8) break;
      } else {
        stall = 0;
      }
      prev_mu = new_mu;
    }
    residuals();
    if (converged(out)) return out;
    if (certify_infeasible(out)) return out;
    fill(out, SdpStatus::max_iter);
    return out;
  }

 private:
  RealVector pair(const Blocks& z) const {
    return o_.parallel ? kernels::pair_parallel(c_, z) : kernels::pair_serial(c_, z);
  }

  Blocks adjoint_of(const RealVector& y) const { return adjoint_constraints(p_, y); }

  void residuals() {
    const RealVector ax = pair(x_);
    f1_ = ax - b_ * tau_;
    const Blocks aty = adjoint_of(y_);
    f2_.resize(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) f2_[k] = aty[k] + s_[k] - p_.objective[k] * tau_;
    cx_ = re_trace_product(p_.objective, x_);
    by_ = b_.dot(y_);
    f3_ = cx_ - by_ + kappa_;
  }

  double mu_value() const { return (inner(x_, s_) + tau_ * kappa_) / nu_; }

  double trial_mu(const Direction& d, double a) const {
    Blocks xn(x_.size()), sn(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) {
      xn[k] = x_[k] + a * d.dx[k];
      sn[k] = s_[k] + a * d.ds[k];
    }
    return (inner(xn, sn) + (tau_ + a * d.dtau) * (kappa_ + a * d.dkappa)) / nu_;
  }

  Direction solve_direction(const Blocks& rc, double rc_scalar, double eta) {
    Direction d;
    const RealVector p = pair(rc);
    const double pc = re_trace_product(p_.objective, rc);
    RealVector r1 = -eta * f1_ - p - eta * h_;
    const double r2 = -eta * f3_ - pc - eta * hc_ - rc_scalar / tau_;
    RealVector u = refined_solve(r1);
    RealVector gb = g_ + b_;
    RealVector w = refined_solve(gb);
    RealVector gmb = g_ - b_;
    const double denom = gmb.dot(w) - gc_ - kappa_ / tau_;
    d.dtau = (r2 - gmb.dot(u)) / denom;
    d.dy = u + d.dtau * w;
    const Blocks aty = adjoint_of(d.dy);
    d.ds.resize(x_.size());
    d.dx.resize(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) {
      d.ds[k] = hermitian_part(-eta * f2_[k] - aty[k] + p_.objective[k] * d.dtau);
      d.dx[k] = hermitian_part(rc[k] - hermitian_part(x_[k] * d.ds[k] * s_inv_[k]));
    }
    d.dkappa = (rc_scalar - kappa_ * d.dtau) / tau_;
    return d;
  }

  // One round of iterative refinement against the stored Schur matrix.
  RealVector refined_solve(const RealVector& r) const {
    if (m_ == 0) return RealVector(0);
    RealVector u = ldlt_.solve(r);
    u += ldlt_.solve(r - schur_ * u);
    return u;
  }

  double step_length(const Direction& d, double cap) const {
    double a = cap;
    for (std::size_t k = 0; k < x_.size(); ++k) {
      a = std::min(a, max_step(x_[k], d.dx[k], a));
      a = std::min(a, max_step(s_[k], d.ds[k], a));
    }
    if (d.dtau < 0) a = std::min(a, -tau_ / d.dtau);
    if (d.dkappa < 0) a = std::min(a, -kappa_ / d.dkappa);
    return a;
  }

  void apply(const Direction& d, double a) {
    for (std::size_t k = 0; k < x_.size(); ++k) {
      x_[k] = hermitian_part(x_[k] + a * d.dx[k]);
      s_[k] = hermitian_part(s_[k] + a * d.ds[k]);
    }
    y_ += a * d.dy;
    tau_ += a * d.dtau;
    kappa_ += a * d.dkappa;
  }

  bool converged(SdpSolution& out) {
    const double pres = (m_ > 0 ? f1_.cwiseAbs().maxCoeff() : 0.0) / tau_;
    double dres = 0.0;
    for (const auto& f : f2_) dres = std::max(dres, f.cwiseAbs().maxCoeff() / tau_);
    const double pobj = cx_ / tau_;
    const double dobj = by_ / tau_;
    const double gap = pobj - dobj;
    const double scale = std::max(1.0, std::abs(pobj));
    if (pres <= o_.tol * (1.0 + b_norm_) && dres <= o_.tol * (1.0 + c_norm_) && std::abs(gap) <= o_.tol * scale) {
      fill(out, SdpStatus::optimal);
      return true;
    }
    return false;
  }

  bool certify_infeasible(SdpSolution& out) {
    // Improving rays of the homogeneous embedding once tau has collapsed.
    if (by_ > 0) {
      const Blocks aty = adjoint_of(y_);
      double viol = 0.0;
      for (std::size_t k = 0; k < aty.size(); ++k)
        viol = std::max(viol, (aty[k] + s_[k]).cwiseAbs().maxCoeff());
      if (viol / by_ <= o_.tol && tau_ / by_ < 1e-3) {
        fill(out, SdpStatus::infeasible);
        out.dual_vector = y_ / by_;
        out.certificate_strength = by_ / std::max(viol, 1e-300);
        return true;
      }
    }
    if (cx_ < 0) {
      const double viol = (m_ > 0 ? pair(x_).cwiseAbs().maxCoeff() : 0.0);
      if (viol / -cx_ <= o_.tol && tau_ / -cx_ < 1e-3) {
        fill(out, SdpStatus::unbounded);
        out.primal_blocks = x_;
        for (auto& xb : out.primal_blocks) xb /= -cx_;
        out.certificate_strength = -cx_ / std::max(viol, 1e-300);
        return true;
      }
    }
    return false;
  }

  void fill(SdpSolution& out, SdpStatus status) const {
    out.status = status;
    out.primal_blocks.clear();
    out.dual_slack.clear();
    for (std::size_t k = 0; k < x_.size(); ++k) {
      out.primal_blocks.push_back(x_[k] / tau_);
      out.dual_slack.push_back(s_[k] / tau_);
    }
    out.dual_vector = y_ / tau_;
    out.primal_value = cx_ / tau_;
    out.dual_value = by_ / tau_;
    out.gap = out.primal_value - out.dual_value;
    out.primal_residual = (m_ > 0 ? f1_.cwiseAbs().maxCoeff() : 0.0) / tau_;
    double dres = 0.0;
    for (const auto& f : f2_) dres = std::max(dres, f.cwiseAbs().maxCoeff() / tau_);
    out.dual_residual = dres;
  }

  const SdpProblem& p_;
  SdpOptions o_;
  kernels::CompiledConstraints c_;
  int m_ = 0;
  double nu_ = 1.0;
  RealVector b_;
  double b_norm_ = 0.0;
  double c_norm_ = 0.0;

  Blocks x_, s_, s_inv_;
  RealVector y_;
  double tau_ = 1.0;
  double kappa_ = 1.0;

  RealVector f1_;
  Blocks f2_;
  double f3_ = 0.0;
  double cx_ = 0.0;
  double by_ = 0.0;

  Eigen::LDLT<RealMatrix> ldlt_;
  RealMatrix schur_;
  RealVector g_, h_;
  double gc_ = 0.0;
  double hc_ = 0.0;
};

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, double sdp_tol) {
  SdpOptions o;
  o.tol = sdp_tol;
  return solve_sdp(p, o);
}

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& options) {
  require(options.tol > 0, ErrorKind::parameter, "sdp_tol must be positive");
  p.validate();
  require(p.total_dim() <= options.dim_limit, ErrorKind::shape,
          "total block dimension " + std::to_string(p.total_dim()) + " exceeds the limit");
  HsdSolver solver(p, options);
  return solver.run();
}

SdpProblem real_embedding(const SdpProblem& p) {
  SdpProblem r;
  for (int d : p.block_dims) r.block_dims.push_back(2 * d);
  auto embed = [](const ComplexMatrix& a) {
    const Eigen::Index n = a.rows();
    ComplexMatrix e = ComplexMatrix::Zero(2 * n, 2 * n);
    e.topLeftCorner(n, n) = a.real().cast<Complex>();
    e.bottomRightCorner(n, n) = a.real().cast<Complex>();
    e.topRightCorner(n, n) = (-a.imag()).cast<Complex>();
    e.bottomLeftCorner(n, n) = a.imag().cast<Complex>();
    return e;
  };
  // <embed(A), embed(X)> = 2 <A, X>, so halve the data.
  for (const auto& c : p.objective) r.objective.push_back(embed(c) * 0.5);
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    SdpConstraint c;
    c.rhs = p.constraints[i].rhs;
    for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
      const ComplexMatrix a = p.coefficient(static_cast<int>(i), static_cast<int>(b));
      if (a.cwiseAbs().maxCoeff() > 0) c.add_dense(static_cast<int>(b), embed(a) * 0.5);
    }
    r.constraints.push_back(std::move(c));
  }
  return r;
}

nlohmann::json problem_to_json(const SdpProblem& p) {
  nlohmann::json j;
  j["block_dims"] = p.block_dims;
  j["objective"] = nlohmann::json::array();
  for (const auto& c : p.objective) j["objective"].push_back(matrix_to_json(c));
  j["constraints"] = nlohmann::json::array();
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (std::size_t b = 0; b < p.block_dims.size(); ++b) {
      const ComplexMatrix a = p.coefficient(static_cast<int>(i), static_cast<int>(b));
      if (a.cwiseAbs().maxCoeff() == 0.0)
        coeffs.push_back(nullptr);
      else
        coeffs.push_back(matrix_to_json(a));
    }
    j["constraints"].push_back({{"coefficients", coeffs}, {"rhs", p.constraints[i].rhs}});
  }
  return j;
}

SdpProblem problem_from_json(const nlohmann::json& j) {
  SdpProblem p;
  try {
    p.block_dims = j.at("block_dims").get<std::vector<int>>();
    for (const auto& c : j.at("objective")) p.objective.push_back(matrix_from_json(c));
    for (const auto& cj : j.at("constraints")) {
      SdpConstraint c;
      c.rhs = cj.at("rhs").get<double>();
      const auto& coeffs = cj.at("coefficients");
      require(coeffs.size() == p.block_dims.size(), ErrorKind::shape, "one coefficient entry per block");
      for (std::size_t b = 0; b < coeffs.size(); ++b) {
        if (coeffs[b].is_null()) continue;
        const ComplexMatrix a = matrix_from_json(coeffs[b]);
        require(a.rows() == p.block_dims[b] && a.cols() == p.block_dims[b], ErrorKind::shape,
                "coefficient size does not match its block");
        c.add_dense(static_cast<int>(b), a);
      }
      p.constraints.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::encoding, std::string("bad SDP problem JSON: ") + e.what());
  }
  return p;
}

nlohmann::json solution_to_json(const SdpSolution& s) {
  nlohmann::json j;
  j["status"] = to_string(s.status);
  j["primal_blocks"] = nlohmann::json::array();
  for (const auto& x : s.primal_blocks) j["primal_blocks"].push_back(matrix_to_json(x));
  j["dual_vector"] = std::vector<double>(s.dual_vector.data(), s.dual_vector.data() + s.dual_vector.size());
  j["primal_value"] = s.primal_value;
  j["dual_value"] = s.dual_value;
  j["gap"] = s.gap;
  j["primal_residual"] = s.primal_residual;
  j["dual_residual"] = s.dual_residual;
  j["iterations"] = s.iterations;
  if (s.status == SdpStatus::infeasible || s.status == SdpStatus::unbounded)
    j["certificate_strength"] = s.certificate_strength;
  return j;
}

}  // namespace opramsey
