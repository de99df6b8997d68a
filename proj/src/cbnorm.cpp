#include "opramsey/cbnorm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "opramsey/error.hpp"

namespace opramsey {

namespace {

// Domain basis placed block-diagonally in M_{Q,S}; images in one codomain
// block of shape kr x kc.
struct Paulsen {
  int q = 0, s = 0, kr = 0, kc = 0;
  std::vector<ComplexMatrix> x;
  std::vector<ComplexMatrix> fx;
  int k() const { return kr + kc; }
  int n() const { return (q + s) * k(); }
};

BlockLinearMap with_full_codomain(const BlockLinearMap& f) {
  f.validate();
  return f.codomain.spans_ambient() && !f.codomain.has_explicit_basis() ? f : f.into_ambient();
}

Paulsen paulsen_data(const BlockLinearMap& f, int block) {
  Paulsen p;
  p.q = f.domain.total_rows();
  p.s = f.domain.total_cols();
  const BlockShape shape = f.codomain.blocks()[block];
  p.kr = shape.rows;
  p.kc = shape.cols;
  const ComplexMatrix image = f.codomain.basis() * f.action;
  for (int j = 0; j < f.domain.dim(); ++j) {
    p.x.push_back(f.domain.block_diagonal(f.domain.basis().col(j)));
    p.fx.push_back(f.codomain.unpack(image.col(j))[block]);
  }
  return p;
}

bool image_is_zero(const Paulsen& p) {
  for (const auto& m : p.fx)
    if (m.cwiseAbs().maxCoeff() > 0) return false;
  return true;
}

// Unital CP map on M_{Q+S} through its Choi matrix C[uK+a, vK+b] = Psi(E_uv)(a, b),
// agreeing with the Paulsen map. With `fixed_t` the corner equals f(x)/t;
// otherwise a scalar block s multiplies f(x) and s is maximised.
SdpProblem paulsen_problem(const Paulsen& p, std::optional<double> fixed_t) {
  const int kk = p.k();
  SdpProblem prob;
  prob.block_dims = {p.n()};
  prob.objective = {ComplexMatrix::Zero(p.n(), p.n())};
  if (!fixed_t) {
    prob.block_dims.push_back(1);
    prob.objective.push_back(ComplexMatrix::Constant(1, 1, -1.0));
  }
  auto unit_part = [&](int u_begin, int u_end, bool top) {
    for (int a = 0; a < kk; ++a)
      for (int b = a; b < kk; ++b) {
        SdpConstraint re;
        for (int u = u_begin; u < u_end; ++u) re.add_entry_functional(0, u * kk + a, u * kk + b, 1.0);
        re.rhs = (a == b && ((a < p.kr) == top)) ? 1.0 : 0.0;
        prob.constraints.push_back(std::move(re));
        if (a == b) continue;
        SdpConstraint im;
        for (int u = u_begin; u < u_end; ++u) im.add_entry_functional(0, u * kk + a, u * kk + b, Complex(0, -1));
        prob.constraints.push_back(std::move(im));
      }
  };
  unit_part(0, p.q, true);
  unit_part(p.q, p.q + p.s, false);
  for (std::size_t j = 0; j < p.x.size(); ++j) {
    const ComplexMatrix& xj = p.x[j];
    for (int a = 0; a < kk; ++a)
      for (int b = 0; b < kk; ++b) {
        const Complex t = (a < p.kr && b >= p.kr) ? p.fx[j](a, b - p.kr) : Complex(0.0);
        SdpConstraint re, im;
        for (int u = 0; u < p.q; ++u)
          for (int v = 0; v < p.s; ++v) {
            const Complex w = xj(u, v);
            if (w == Complex(0.0)) continue;
            re.add_entry_functional(0, u * kk + a, (p.q + v) * kk + b, w);
            im.add_entry_functional(0, u * kk + a, (p.q + v) * kk + b, Complex(0, -1) * w);
          }
        if (fixed_t) {
          re.rhs = t.real() / *fixed_t;
          im.rhs = t.imag() / *fixed_t;
        } else {
          re.add_entry_functional(1, 0, 0, -t.real());
          im.add_entry_functional(1, 0, 0, -t.imag());
        }
        prob.constraints.push_back(std::move(re));
        prob.constraints.push_back(std::move(im));
      }
  }
  return prob;
}

SdpOptions sdp_options(double sdp_tol) {
  SdpOptions o;
  o.tol = sdp_tol;
  o.dim_limit = 100000;
  o.max_iter = 300;
  return o;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// A stalled iterate a hundredfold from the target still pins the value far
// below the tolerances quoted downstream.
bool near_optimal(const SdpSolution& sol, double sdp_tol) {
  const double slack = 100 * sdp_tol;
  return sol.status == SdpStatus::max_iter && sol.primal_residual <= slack && sol.dual_residual <= slack &&
         std::abs(sol.gap) <= slack * std::max(1.0, std::abs(sol.primal_value));
}

struct BlockValue {
  double value = 0.0;
  int iterations = 0;
};

BlockValue block_cb_value(Paulsen p, double sdp_tol) {
  if (image_is_zero(p)) return {};
  // The value is homogeneous in f; solving for f / c keeps the scale block near 1.
  double c = 0.0;
  for (const auto& m : p.fx) c = std::max(c, m.norm());
  for (auto& m : p.fx) m /= c;
  // A rare stalled solve is retried on a unitarily rotated copy of the image,
  // which has the same cb norm.
  std::mt19937_64 rng(0x5eed);
  SdpSolution sol;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) {
      const ComplexMatrix w = random_unitary(p.kr, rng), v = random_unitary(p.kc, rng);
      for (auto& m : p.fx) m = w * m * v;
    }
    sol = solve_sdp(paulsen_problem(p, std::nullopt), sdp_options(sdp_tol));
    if (sol.status == SdpStatus::optimal || near_optimal(sol, sdp_tol)) break;
  }
  if (sol.status != SdpStatus::optimal && !near_optimal(sol, sdp_tol))
    fail(ErrorKind::sdp_failure, std::string("cb-norm SDP ended with status ") + to_string(sol.status) +
                                     " after " + std::to_string(sol.iterations) + " iterations (gap " +
                                     fmt(sol.gap) + ", primal residual " +
                                     fmt(sol.primal_residual) + ", dual residual " +
                                     fmt(sol.dual_residual) + ")");
  const double s = sol.primal_blocks[1](0, 0).real();
  require(s > 0, ErrorKind::sdp_failure, "cb-norm SDP returned a nonpositive scale");
  return {c / s, sol.iterations};
}

}  // namespace

int smith_level(const SpaceDescriptor& codomain) {
  int level = 1;
  for (const auto& b : codomain.blocks()) level = std::max({level, b.rows, b.cols});
  return level;
}

double cb_norm_value(const BlockLinearMap& f, double sdp_tol) {
  require(sdp_tol > 0, ErrorKind::parameter, "sdp_tol must be positive");
  const BlockLinearMap g = with_full_codomain(f);
  const auto scalar = [](const SpaceDescriptor& s) {
    return std::all_of(s.blocks().begin(), s.blocks().end(), [](BlockShape b) { return b.rows == 1 && b.cols == 1; });
  };
  if (g.domain.spans_ambient() && scalar(g.domain) && scalar(g.codomain)) {
    // l_inf^n -> l_inf^m: the largest row sum of the ambient matrix.
    if (g.action.size() == 0) return 0.0;
    return g.ambient_action().cwiseAbs().rowwise().sum().maxCoeff();
  }
  // Functionals are automatically cb; on a full domain their norm is the sum
  // of the trace norms of the representing blocks.
  const bool full_domain = g.domain.spans_ambient();
  const ComplexMatrix amb = full_domain ? g.ambient_action() : ComplexMatrix();
  double value = 0.0;
  for (int k = 0; k < static_cast<int>(g.codomain.blocks().size()); ++k) {
    const BlockShape b = g.codomain.blocks()[k];
    if (full_domain && b.rows == 1 && b.cols == 1) {
      double v = 0.0;
      for (const auto& a : g.domain.unpack(amb.row(g.codomain.offset(k)).transpose()))
        v += Eigen::JacobiSVD<ComplexMatrix>(a).singularValues().sum();
      value = std::max(value, v);
      continue;
    }
    value = std::max(value, block_cb_value(paulsen_data(g, k), sdp_tol).value);
  }
  return value;
}

CbCertificate cb_norm(const BlockLinearMap& f, double tol) {
  CbOptions o;
  o.tol = tol;
  return cb_norm(f, o);
}

CbCertificate cb_norm(const BlockLinearMap& f, const CbOptions& options) {
  require(options.tol > 0, ErrorKind::parameter, "tol must be positive");
  const BlockLinearMap g = with_full_codomain(f);
  CbCertificate cert;
  std::vector<Paulsen> data;
  for (int k = 0; k < static_cast<int>(g.codomain.blocks().size()); ++k) {
    data.push_back(paulsen_data(g, k));
    const BlockValue bv = block_cb_value(data.back(), std::min(options.sdp_tol, options.tol * 1e-2));
    cert.sdp_iterations += bv.iterations;
    if (bv.value > cert.value) {
      cert.value = bv.value;
      cert.critical_block = k;
    }
  }
  if (options.upper_witness && cert.value > 0) {
    cert.upper_level = cert.value + options.tol;
    cert.upper_witness =
        solve_sdp(paulsen_problem(data[cert.critical_block], cert.upper_level), sdp_options(options.feasibility_tol));
  }
  if (options.lower_witness) {
    cert.lower_level = smith_level(g.codomain);
    SampledNorm s = sampled_amplification_norm(f, cert.lower_level, options.ascent);
    cert.lower_value = s.value;
    cert.lower_witness = std::move(s.witness);
  }
  return cert;
}

ChoiReport choi_and_cp(const BlockLinearMap& f) {
  f.validate();
  require(f.domain.all_square() && f.codomain.all_square(), ErrorKind::category,
          "Choi matrices need square blocks on both sides");
  require(f.domain.spans_ambient() && f.codomain.spans_ambient(), ErrorKind::category,
          "Choi matrices need full block algebras");
  const int n = f.domain.total_rows();
  const int k = f.codomain.total_rows();
  const ComplexMatrix amb = f.codomain.basis() * f.ambient_action();
  ChoiReport r;
  r.choi.domain_size = n;
  r.choi.codomain_size = k;
  r.choi.matrix = ComplexMatrix::Zero(n * k, n * k);
  int base = 0;
  for (std::size_t b = 0; b < f.domain.blocks().size(); ++b) {
    const int nb = f.domain.blocks()[b].rows;
    for (int u = 0; u < nb; ++u)
      for (int v = 0; v < nb; ++v) {
        const int idx = f.domain.offset(static_cast<int>(b)) + u * nb + v;
        const ComplexMatrix image = f.codomain.block_diagonal(amb.col(idx));
        r.choi.matrix.block((base + u) * k, (base + v) * k, k, k) = image;
      }
    base += nb;
  }
  r.min_eig = herm_spectrum(hermitian_part(r.choi.matrix)).back();
  r.is_cp = r.min_eig >= -1e-9 && is_hermitian(r.choi.matrix, 1e-9);
  return r;
}

BlockLinearMap map_from_choi(const ChoiMatrix& c, const SpaceDescriptor& domain, const SpaceDescriptor& codomain) {
  require(domain.all_square() && codomain.all_square() && domain.spans_ambient() && codomain.spans_ambient(),
          ErrorKind::category, "Choi reconstruction needs full square-block algebras");
  const int n = domain.total_rows();
  const int k = codomain.total_rows();
  require(c.matrix.rows() == n * k && c.matrix.cols() == n * k, ErrorKind::shape, "Choi matrix has the wrong size");
  ComplexMatrix amb = ComplexMatrix::Zero(codomain.ambient_dim(), domain.ambient_dim());
  int base = 0;
  for (std::size_t b = 0; b < domain.blocks().size(); ++b) {
    const int nb = domain.blocks()[b].rows;
    for (int u = 0; u < nb; ++u)
      for (int v = 0; v < nb; ++v) {
        const ComplexMatrix image = c.matrix.block((base + u) * k, (base + v) * k, k, k);
        std::vector<ComplexMatrix> parts;
        int r0 = 0;
        for (const auto& cb : codomain.blocks()) {
          parts.push_back(image.block(r0, r0, cb.rows, cb.cols));
          r0 += cb.rows;
        }
        amb.col(domain.offset(static_cast<int>(b)) + u * nb + v) = codomain.pack(parts);
      }
    base += nb;
  }
  return {domain, codomain, amb};
}

BlockLinearMap extend_cc(const BlockLinearMap& f, double budget_tol) {
  require(budget_tol > 0, ErrorKind::parameter, "budget_tol must be positive");
  const BlockLinearMap g = with_full_codomain(f);
  const SpaceDescriptor w = g.domain.ambient_space();
  if (g.domain.spans_ambient()) return {w, g.codomain, g.ambient_action()};

  const double cb = cb_norm_value(g);
  require(cb <= 1.0 + 1e-8, ErrorKind::precondition,
          "extend_cc needs a complete contraction (cb norm " + std::to_string(cb) + ")");
  ComplexMatrix ext = ComplexMatrix::Zero(g.codomain.ambient_dim(), w.ambient_dim());
  for (int k = 0; k < static_cast<int>(g.codomain.blocks().size()); ++k) {
    const Paulsen p = paulsen_data(g, k);
    if (image_is_zero(p)) continue;
    // At the optimum s* = 1/||f_k||_cb the corner of Psi is s* f on X, so
    // corner/s* extends f with cb norm at most ||f_k||_cb <= 1.
    const SdpSolution sol = solve_sdp(paulsen_problem(p, std::nullopt), sdp_options(1e-9));
    require(sol.status == SdpStatus::optimal || near_optimal(sol, 1e-9), ErrorKind::internal,
            std::string("extension SDP failed for an injective codomain: ") + to_string(sol.status));
    const double t = 1.0 / sol.primal_blocks[1](0, 0).real();
    const ComplexMatrix& c = sol.primal_blocks[0];
    const int kk = p.k();
    const int off = g.codomain.offset(k);
    int row0 = 0, col0 = 0;
    for (std::size_t b = 0; b < w.blocks().size(); ++b) {
      const BlockShape sh = w.blocks()[b];
      for (int r = 0; r < sh.rows; ++r)
        for (int cc = 0; cc < sh.cols; ++cc) {
          const int col = w.offset(static_cast<int>(b)) + r * sh.cols + cc;
          const int u = row0 + r;
          const int v = col0 + cc;
          for (int a = 0; a < p.kr; ++a)
            for (int bb = 0; bb < p.kc; ++bb)
              ext(off + a * p.kc + bb, col) = t * c(u * kk + a, (p.q + v) * kk + p.kr + bb);
        }
      row0 += sh.rows;
      col0 += sh.cols;
    }
  }
  // Remove the solver residue on X so that agreement is exact.
  const ComplexMatrix& basis = g.domain.basis();
  const ComplexMatrix target = g.codomain.basis() * g.action;
  const ComplexMatrix pinv = (basis.adjoint() * basis).ldlt().solve(basis.adjoint());
  ext += (target - ext * basis) * pinv;
  BlockLinearMap out{w, g.codomain, ext};
  require(cb_norm_value(out) <= 1.0 + budget_tol, ErrorKind::internal, "extension exceeds the norm budget");
  return out;
}

BlockLinearMap inverse_on_image(const BlockLinearMap& f) {
  f.validate();
  require(f.is_injective(), ErrorKind::domain, "map is not injective");
  const SpaceDescriptor image =
      SpaceDescriptor::subspace(f.codomain.blocks(), f.codomain.basis() * f.action, Category::Osp);
  const SpaceDescriptor target = SpaceDescriptor::full(f.domain.blocks(), Category::Osp);
  return {image, target, f.domain.basis()};
}

namespace {

// True when a run of codomain blocks reproduces a full domain exactly. The
// inverse on the image is then the restriction of a coordinate projection,
// so its cb norm is at most 1.
bool has_identity_coordinates(const BlockLinearMap& f) {
  if (f.domain.has_explicit_basis() || f.codomain.has_explicit_basis()) return false;
  const auto& db = f.domain.blocks();
  const auto& cbk = f.codomain.blocks();
  const int d = f.domain.dim();
  for (std::size_t start = 0; start + db.size() <= cbk.size(); ++start) {
    if (!std::equal(db.begin(), db.end(), cbk.begin() + static_cast<long>(start))) continue;
    const ComplexMatrix rows = f.action.middleRows(f.codomain.offset(static_cast<int>(start)), d);
    if (rows == ComplexMatrix::Identity(d, d)) return true;
  }
  return false;
}

}  // namespace

double delta_defect(const BlockLinearMap& f, const CbOracle& cb) {
  const CbOracle oracle = cb ? cb : CbOracle([](const BlockLinearMap& g) { return cb_norm_value(g); });
  if (!f.is_injective()) return std::numeric_limits<double>::infinity();
  if (oracle(f) > 1.0 + 1e-7) return std::numeric_limits<double>::infinity();
  if (has_identity_coordinates(f)) return 0.0;
  return std::max(0.0, oracle(inverse_on_image(f)) - 1.0);
}

BlockLinearMap tuple_maps(const std::vector<BlockLinearMap>& components) {
  require(!components.empty(), ErrorKind::shape, "need at least one component");
  std::vector<BlockShape> blocks;
  Eigen::Index rows = 0;
  for (const auto& c : components) {
    require(c.domain == components.front().domain, ErrorKind::shape, "components must share their domain");
    for (const auto& b : c.codomain.blocks()) blocks.push_back(b);
    rows += c.codomain.ambient_dim();
  }
  ComplexMatrix action(rows, components.front().domain.dim());
  Eigen::Index r = 0;
  for (const auto& c : components) {
    action.middleRows(r, c.codomain.ambient_dim()) = c.codomain.basis() * c.action;
    r += c.codomain.ambient_dim();
  }
  return {components.front().domain, SpaceDescriptor::full(blocks), action};
}

LemmaInjectiveResult lemma_injective_check(const std::vector<BlockLinearMap>& components, const CbOracle& cb) {
  const CbOracle oracle = cb ? cb : CbOracle([](const BlockLinearMap& g) { return cb_norm_value(g); });
  LemmaInjectiveResult out;
  for (std::size_t i = 0; i < components.size(); ++i) {
    require(oracle(components[i]) <= 1.0 + 1e-7, ErrorKind::precondition,
            "component " + std::to_string(i) + " is not completely contractive");
    const double d = delta_defect(components[i], oracle);
    out.component_defects.push_back(d);
    if (d <= isometry_threshold && !out.witness_index) out.witness_index = static_cast<int>(i);
  }
  out.is_complete_isometry = out.witness_index.has_value();
  return out;
}

nlohmann::json certificate_to_json(const CbCertificate& c) {
  nlohmann::json j;
  j["value"] = c.value;
  j["critical_block"] = c.critical_block;
  j["sdp_iterations"] = c.sdp_iterations;
  if (c.lower_witness) {
    j["lower_witness"] = {{"level", c.lower_level}, {"value", c.lower_value}, {"element", element_to_json(*c.lower_witness)}};
  }
  if (c.upper_witness) {
    j["upper_witness"] = {{"level", c.upper_level},
                          {"status", to_string(c.upper_witness->status)},
                          {"primal_residual", c.upper_witness->primal_residual},
                          {"iterations", c.upper_witness->iterations}};
  }
  return j;
}

}  // namespace opramsey
