#include "opramsey/fraisse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "opramsey/error.hpp"
#include "opramsey/parallel.hpp"

namespace opramsey {

namespace {

void require_full(const SpaceDescriptor& s, const char* what) {
  require(!s.has_explicit_basis(), ErrorKind::unsupported,
          std::string(what) + " must be a full l_inf-sum of matrix blocks");
}

SpaceDescriptor concat(const SpaceDescriptor& a, const SpaceDescriptor& b, Category cat) {
  std::vector<BlockShape> blocks = a.blocks();
  blocks.insert(blocks.end(), b.blocks().begin(), b.blocks().end());
  return SpaceDescriptor::full(std::move(blocks), cat);
}

SpaceDescriptor recategorized(const SpaceDescriptor& s, Category cat) { return SpaceDescriptor::full(s.blocks(), cat); }

double cb(const BlockLinearMap& f) { return cb_norm_value(f); }

// c -> b(a^{-1}(c)) on a(X), scaled to a complete contraction and extended to
// all of a's codomain. Returns the extension and the scale it was divided by.
std::pair<BlockLinearMap, double> cross_extension(const BlockLinearMap& a, const BlockLinearMap& b) {
  const SpaceDescriptor image =
      SpaceDescriptor::subspace(a.codomain.blocks(), a.codomain.basis() * a.action, Category::Osp);
  BlockLinearMap f{image, recategorized(b.codomain, Category::Osp), b.codomain.basis() * b.action};
  const double c = std::max(1.0, cb(f));
  f.action /= c;
  const BlockLinearMap ext = extend_cc(f);
  return {BlockLinearMap{a.codomain, b.codomain, ext.action}, c};
}

double unit_residual(const BlockLinearMap& f) {
  const ComplexVector u = f.domain.ambient_unit();
  const ComplexVector fu = f.codomain.basis() * (f.action * f.domain.coordinates(u));
  return (fu - f.codomain.ambient_unit()).cwiseAbs().maxCoeff();
}

ComplexMatrix stack(const ComplexMatrix& top, const ComplexMatrix& bottom) {
  ComplexMatrix m(top.rows() + bottom.rows(), top.cols());
  m << top, bottom;
  return m;
}

double finite_defect(const BlockLinearMap& f, const char* name) {
  const double d = delta_defect(f);
  require(std::isfinite(d), ErrorKind::precondition, std::string(name) + " is not an injective complete contraction");
  return d;
}

}  // namespace

bool AmalgamationWitness::ok() const {
  return i_defect <= isometry_threshold && j_defect <= isometry_threshold && defect <= modulus_bound + 1e-6 &&
         pointed_residual <= 1e-8;
}

AmalgamationWitness amalgamate(const BlockLinearMap& phi, const BlockLinearMap& psi, const ClassConfig& cfg,
                               double eps) {
  require(phi.domain.blocks() == psi.domain.blocks(), ErrorKind::shape, "phi and psi must share their domain");
  for (const auto* s : {&phi.domain, &phi.codomain, &psi.codomain}) require_full(*s, "amalgamated spaces");
  if (cfg.category == Category::Osy)
    for (const auto* s : {&phi.domain, &phi.codomain, &psi.codomain})
      require(s->all_square(), ErrorKind::category, "operator systems need square blocks");

  AmalgamationWitness w;
  w.delta = std::max(finite_defect(phi, "phi"), finite_defect(psi, "psi"));
  const SpaceDescriptor Y = recategorized(phi.codomain, cfg.category);
  const SpaceDescriptor Z = recategorized(psi.codomain, cfg.category);
  const auto [Psi, c1] = cross_extension(phi, psi);  // Y -> Z
  const auto [Phi, c2] = cross_extension(psi, phi);  // Z -> Y
  w.V = concat(Y, Z, cfg.category);
  w.i = {Y, w.V, stack(ComplexMatrix::Identity(Y.dim(), Y.dim()), Psi.action)};
  w.j = {Z, w.V, stack(Phi.action, ComplexMatrix::Identity(Z.dim(), Z.dim()))};
  w.defect = cb({phi.domain, w.V, w.i.action * phi.action - w.j.action * psi.action});
  w.modulus_bound = cfg.modulus(w.delta) + eps;
  w.i_defect = delta_defect(w.i);
  w.j_defect = delta_defect(w.j);
  if (cfg.category == Category::Osy) w.unit_residual = std::max(unit_residual(w.i), unit_residual(w.j));
  return w;
}

AmalgamationWitness amalgamate_pointed(const PointedSpace& x, const PointedSpace& y, const PointedSpace& z,
                                       const BlockLinearMap& phi, const BlockLinearMap& psi,
                                       const BlockLinearMap& theta, const ClassConfig& cfg, double eps) {
  x.validate();
  y.validate();
  z.validate();
  require(phi.domain.blocks() == x.space.blocks() && phi.codomain.blocks() == y.space.blocks() &&
              psi.domain.blocks() == x.space.blocks() && psi.codomain.blocks() == z.space.blocks(),
          ErrorKind::shape, "phi : X -> Y and psi : X -> Z expected");
  const SpaceDescriptor& R = y.distinguished.codomain;
  require(x.distinguished.codomain.blocks() == R.blocks() && z.distinguished.codomain.blocks() == R.blocks(),
          ErrorKind::shape, "the three spaces must be pointed toward the same R");
  require(theta.domain.blocks() == R.blocks(), ErrorKind::shape, "theta must start in R");
  require(cb(theta) <= 1.0 + 1e-8, ErrorKind::precondition, "theta must be completely contractive");

  // theta o s for s with values in the ambient space of R.
  const auto through_theta = [&](const BlockLinearMap& s) {
    const ComplexMatrix vals = s.codomain.basis() * s.action;
    ComplexMatrix coords(theta.domain.dim(), vals.cols());
    for (Eigen::Index c = 0; c < vals.cols(); ++c) {
      require(theta.domain.residual(vals.col(c)) <= 1e-9, ErrorKind::domain,
              "theta is not defined on the span of the distinguished images");
      coords.col(c) = theta.domain.coordinates(vals.col(c));
    }
    return ComplexMatrix(theta.action * coords);
  };

  ClassConfig pcfg = cfg;
  pcfg.pointed = true;
  AmalgamationWitness base = amalgamate(phi, psi, cfg, eps);
  AmalgamationWitness w;
  const double pres = std::max(cb({x.space, R, y.distinguished.action * phi.action - x.distinguished.action}),
                               cb({x.space, R, z.distinguished.action * psi.action - x.distinguished.action}));
  w.delta = std::max(base.delta, pres);
  const SpaceDescriptor R0 = recategorized(theta.codomain, cfg.category);
  w.V = concat(base.V, R0, cfg.category);
  const ComplexMatrix ty = through_theta(y.distinguished), tz = through_theta(z.distinguished);
  w.i = {base.i.domain, w.V, stack(base.i.action, ty)};
  w.j = {base.j.domain, w.V, stack(base.j.action, tz)};
  ComplexMatrix proj = ComplexMatrix::Zero(R0.dim(), w.V.dim());
  proj.rightCols(R0.dim()).setIdentity();
  w.distinguished = BlockLinearMap{w.V, R0, proj};
  w.pointed_residual = std::max((proj * w.i.action - ty).cwiseAbs().maxCoeff(),
                                (proj * w.j.action - tz).cwiseAbs().maxCoeff());
  w.defect = cb({phi.domain, w.V, w.i.action * phi.action - w.j.action * psi.action});
  w.modulus_bound = pcfg.modulus(w.delta) + eps;
  w.i_defect = delta_defect(w.i);
  w.j_defect = delta_defect(w.j);
  if (cfg.category == Category::Osy) w.unit_residual = std::max(unit_residual(w.i), unit_residual(w.j));
  return w;
}

// ---- random instances ----------------------------------------------------------

namespace {

struct Placement {
  int target = -1;        // block of Z
  int row = 0, col = 0;   // top-left corner inside it
};

// Each block of Z receives a list of (X block, corner) placements.
struct Pattern {
  std::vector<std::vector<std::pair<int, Placement>>> hosted;
  std::vector<int> rows_used, cols_used;
};

std::optional<Pattern> random_pattern(const SpaceDescriptor& x, const SpaceDescriptor& z, Category cat,
                                      std::mt19937_64& rng) {
  const auto& xb = x.blocks();
  const auto& zb = z.blocks();
  const int nx = static_cast<int>(xb.size()), nz = static_cast<int>(zb.size());
  if (x.dim() > z.dim() || nx == 0) return std::nullopt;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Pattern p;
    p.hosted.assign(nz, {});
    p.rows_used.assign(nz, 0);
    p.cols_used.assign(nz, 0);
    bool ok = true;
    if (cat == Category::Osp) {
      std::vector<int> order(nx);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (int b : order) {
        std::vector<int> fits;
        for (int k = 0; k < nz; ++k)
          if (zb[k].rows - p.rows_used[k] >= xb[b].rows && zb[k].cols - p.cols_used[k] >= xb[b].cols) fits.push_back(k);
        if (fits.empty()) {
          ok = false;
          break;
        }
        const int k = fits[std::uniform_int_distribution<int>(0, static_cast<int>(fits.size()) - 1)(rng)];
        p.hosted[k].push_back({b, {k, p.rows_used[k], p.cols_used[k]}});
        p.rows_used[k] += xb[b].rows;
        p.cols_used[k] += xb[b].cols;
      }
    } else {
      // Unital: every block of Z is tiled exactly by copies of blocks of X.
      std::vector<char> covered(nx, 0);
      std::vector<int> zorder(nz);
      std::iota(zorder.begin(), zorder.end(), 0);
      std::shuffle(zorder.begin(), zorder.end(), rng);
      for (int k : zorder) {
        const int n = zb[k].rows;
        // reach[r]: r more rows can be tiled.
        std::vector<char> reach(n + 1, 0);
        reach[0] = 1;
        for (int r = 1; r <= n; ++r)
          for (const auto& b : xb)
            if (b.rows <= r && reach[r - b.rows]) reach[r] = 1;
        if (!reach[n]) {
          ok = false;
          break;
        }
        int left = n;
        while (left > 0) {
          std::vector<int> options, fresh;
          for (int b = 0; b < nx; ++b)
            if (xb[b].rows <= left && reach[left - xb[b].rows]) {
              options.push_back(b);
              if (!covered[b]) fresh.push_back(b);
            }
          const auto& pool = fresh.empty() ? options : fresh;
          const int b = pool[std::uniform_int_distribution<int>(0, static_cast<int>(pool.size()) - 1)(rng)];
          covered[b] = 1;
          p.hosted[k].push_back({b, {k, p.rows_used[k], p.cols_used[k]}});
          p.rows_used[k] += xb[b].rows;
          p.cols_used[k] += xb[b].cols;
          left -= xb[b].rows;
        }
      }
      ok = ok && std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
    }
    if (!ok) continue;
    std::vector<char> used(nx, 0);
    for (const auto& h : p.hosted)
      for (const auto& [b, pl] : h) used[b] = 1;
    if (std::all_of(used.begin(), used.end(), [](char c) { return c != 0; })) return p;
  }
  return std::nullopt;
}

BlockLinearMap realize(const SpaceDescriptor& x, const SpaceDescriptor& z, Category cat, const Pattern& p,
                       std::mt19937_64& rng, bool filler) {
  const auto& zb = z.blocks();
  const int nz = static_cast<int>(zb.size());
  std::vector<ComplexMatrix> left(nz), right(nz);
  std::vector<std::optional<BlockLinearMap>> fill(nz);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < nz; ++k) {
    left[k] = random_unitary(zb[k].rows, rng);
    right[k] = cat == Category::Osy ? ComplexMatrix(left[k].adjoint()) : random_unitary(zb[k].cols, rng);
    const int fr = zb[k].rows - p.rows_used[k], fc = zb[k].cols - p.cols_used[k];
    if (filler && cat == Category::Osp && fr > 0 && fc > 0 && unif(rng) < 0.5) {
      BlockLinearMap f = random_cc_map(x, SpaceDescriptor::full({{fr, fc}}), rng);
      f.action *= unif(rng);
      fill[k] = f;
    }
  }
  return BlockLinearMap::from_function(
      recategorized(x, cat == Category::Osy ? Category::Osy : x.category()), z,
      [&](const std::vector<ComplexMatrix>& xs) {
        std::vector<ComplexMatrix> out;
        for (int k = 0; k < nz; ++k) {
          ComplexMatrix m = ComplexMatrix::Zero(zb[k].rows, zb[k].cols);
          for (const auto& [b, pl] : p.hosted[k]) m.block(pl.row, pl.col, xs[b].rows(), xs[b].cols()) = xs[b];
          if (fill[k]) {
            const ComplexVector v = fill[k]->action * x.pack(xs);
            const int fr = zb[k].rows - p.rows_used[k], fc = zb[k].cols - p.cols_used[k];
            for (int r = 0; r < fr; ++r)
              for (int c = 0; c < fc; ++c) m(p.rows_used[k] + r, p.cols_used[k] + c) = v(r * fc + c);
          }
          out.push_back(left[k] * m * right[k]);
        }
        return out;
      });
}

BlockLinearMap perturb(const BlockLinearMap& base, double t, const BlockLinearMap& noise, Category cat) {
  if (cat == Category::Osy) return {base.domain, base.codomain, (1.0 - t) * base.action + t * noise.action};
  BlockLinearMap f{base.domain, base.codomain, base.action + t * noise.action};
  f.action /= std::max(1.0, cb(f));
  return f;
}

DeltaEmbedding perturb_embedding(const BlockLinearMap& base, double delta, Category cat, std::mt19937_64& rng,
                                 const BlockLinearMap* s_x, const BlockLinearMap* s_y) {
  DeltaEmbedding out{base, base, 0.0, 0.0};
  const auto residual = [&](const BlockLinearMap& f) {
    if (!s_x || !s_y) return 0.0;
    return cb({f.domain, s_x->codomain, s_y->action * f.action - s_x->action});
  };
  out.delta_defect = delta_defect(base);
  out.pointed_residual = residual(base);
  if (delta <= 0) return out;
  const BlockLinearMap noise = cat == Category::Osy ? random_ucp_map(base.domain, base.codomain, rng)
                                                    : random_cc_map(base.domain, base.codomain, rng);
  double t = delta;
  for (int attempt = 0; attempt < 30; ++attempt, t /= 2) {
    const BlockLinearMap f = perturb(base, t, noise, cat);
    const double dd = delta_defect(f);
    if (dd > delta) continue;
    const double pr = residual(f);
    if (pr > delta) continue;
    out.map = f;
    out.delta_defect = dd;
    out.pointed_residual = pr;
    return out;
  }
  return out;
}

}  // namespace

BlockLinearMap random_cc_map(const SpaceDescriptor& x, const SpaceDescriptor& y, std::mt19937_64& rng) {
  BlockLinearMap f{x, y, random_gaussian(y.dim(), x.dim(), rng)};
  f.action /= cb(f);
  return f;
}

BlockLinearMap random_ucp_map(const SpaceDescriptor& x, const SpaceDescriptor& y, std::mt19937_64& rng) {
  require(x.all_square() && y.all_square(), ErrorKind::category, "ucp maps need square blocks");
  const int total = x.total_rows();
  std::vector<ComplexMatrix> kraus;  // per block of Y: stacked (copies * total) x n isometry
  std::vector<int> copies;
  for (const auto& b : y.blocks()) {
    const int n = b.rows;
    const int c = std::max(1, (n + total - 1) / total);
    Eigen::HouseholderQR<ComplexMatrix> qr(random_gaussian(c * total, n, rng));
    kraus.push_back(qr.householderQ() * ComplexMatrix::Identity(c * total, n));
    copies.push_back(c);
  }
  return BlockLinearMap::from_function(x, y, [&](const std::vector<ComplexMatrix>& xs) {
    std::vector<ComplexMatrix> out;
    for (std::size_t k = 0; k < y.blocks().size(); ++k) {
      const int n = y.blocks()[k].rows;
      ComplexMatrix acc = ComplexMatrix::Zero(n, n);
      int row = 0;
      for (int c = 0; c < copies[k]; ++c)
        for (std::size_t b = 0; b < xs.size(); ++b) {
          const int q = static_cast<int>(xs[b].rows());
          const ComplexMatrix kb = kraus[k].middleRows(row, q);
          acc += kb.adjoint() * xs[b] * kb;
          row += q;
        }
      out.push_back(acc);
    }
    return out;
  });
}

std::optional<BlockLinearMap> random_pattern_embedding(const SpaceDescriptor& x, const SpaceDescriptor& z,
                                                       Category cat, std::mt19937_64& rng) {
  require_full(x, "embedded spaces");
  require_full(z, "embedded spaces");
  const auto p = random_pattern(x, z, cat, rng);
  if (!p) return std::nullopt;
  return realize(x, z, cat, *p, rng, false);
}

std::optional<BlockLinearMap> random_embedding(const SpaceDescriptor& x, const SpaceDescriptor& z, Category cat,
                                               std::mt19937_64& rng) {
  require_full(x, "embedded spaces");
  require_full(z, "embedded spaces");
  const auto p = random_pattern(x, z, cat, rng);
  if (!p) return std::nullopt;
  return realize(x, z, cat, *p, rng, true);
}

DeltaEmbedding random_delta_embedding(const SpaceDescriptor& x, const SpaceDescriptor& y, double delta, Category cat,
                                      std::mt19937_64& rng, const BlockLinearMap* s_x, const BlockLinearMap* s_y) {
  require(delta >= 0, ErrorKind::parameter, "delta must be nonnegative");
  const auto base = random_pattern_embedding(x, y, cat, rng);
  require(base.has_value(), ErrorKind::precondition, "the first space does not embed in the second");
  return perturb_embedding(*base, delta, cat, rng, s_x, s_y);
}

PointedInstance random_pointed_instance(const SpaceDescriptor& x, const SpaceDescriptor& y, const SpaceDescriptor& z,
                                        const SpaceDescriptor& r, double delta, Category cat, std::mt19937_64& rng) {
  const SpaceDescriptor X = recategorized(x, cat), Y = recategorized(y, cat), Z = recategorized(z, cat),
                        R = recategorized(r, cat);
  const BlockLinearMap s_x = cat == Category::Osy ? random_ucp_map(X, R, rng) : random_cc_map(X, R, rng);
  const auto pointed_over = [&](const SpaceDescriptor& target) {
    const auto e = random_pattern_embedding(X, target, cat, rng);
    require(e.has_value(), ErrorKind::precondition, "X does not embed");
    // s_target extends s_x along e; e is a complete isometry so no scaling is needed.
    BlockLinearMap s = cross_extension(*e, s_x).first;
    s.domain = target;
    s.codomain = R;
    return std::pair{*e, s};
  };
  const auto [ey, sy] = pointed_over(Y);
  const auto [ez, sz] = pointed_over(Z);
  PointedInstance inst{{X, s_x}, {Y, sy}, {Z, sz}, {}, {}};
  inst.phi = perturb_embedding(ey, delta, cat, rng, &s_x, &sy);
  inst.psi = perturb_embedding(ez, delta, cat, rng, &s_x, &sz);
  return inst;
}

// ---- multi-amalgamation ------------------------------------------------------

MultiAmalgamation multi_amalgamate(const std::vector<SpaceDescriptor>& family, double delta, double eps,
                                   const ClassConfig& cfg, int samples, std::uint64_t seed, int max_dim) {
  require(!family.empty() && family.size() <= 5, ErrorKind::parameter, "the family must have 1 to 5 members");
  require(delta >= 0 && eps >= 0 && samples >= 0, ErrorKind::parameter, "delta, eps and samples must be nonnegative");
  std::vector<SpaceDescriptor> F;
  for (const auto& s : family) {
    require_full(s, "family members");
    F.push_back(recategorized(s, cfg.category));
  }
  const int n = static_cast<int>(F.size());
  MultiAmalgamation out;
  std::vector<BlockShape> blocks;
  std::vector<int> slot(n);
  int dim = 0;
  for (int k = 0; k < n; ++k) {
    slot[k] = dim;
    dim += F[k].dim();
    blocks.insert(blocks.end(), F[k].blocks().begin(), F[k].blocks().end());
  }
  out.V = SpaceDescriptor::full(blocks, cfg.category);
  for (int k = 0; k < n; ++k) {
    ComplexMatrix a = ComplexMatrix::Zero(dim, F[k].dim());
    a.middleRows(slot[k], F[k].dim()).setIdentity();
    out.I.push_back({F[k], out.V, a});
  }

  // Triples (x, y, z) with x embedding in both y and z.
  std::vector<std::array<int, 3>> triples;
  {
    std::mt19937_64 rng(split_seed(seed, 0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (random_pattern(F[a], F[b], cfg.category, rng) && random_pattern(F[a], F[c], cfg.category, rng))
            triples.push_back({a, b, c});
  }
  if (triples.empty()) return out;

  for (int s = 0; s < samples; ++s) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(s) + 1));
    const auto [x, y, z] = triples[std::uniform_int_distribution<int>(0, static_cast<int>(triples.size()) - 1)(rng)];
    if (out.V.dim() + F[z].dim() > max_dim) {
      out.partial = true;
      break;
    }
    const DeltaEmbedding gamma = random_delta_embedding(F[x], F[y], delta, cfg.category, rng);
    const DeltaEmbedding eta = random_delta_embedding(F[x], F[z], delta, cfg.category, rng);
    const auto [psi_yz, c1] = cross_extension(gamma.map, eta.map);  // Y -> Z
    const auto [phi_zy, c2] = cross_extension(eta.map, gamma.map);  // Z -> Y
    // Psi : V -> Z reads the Y slot; Phi = I_Y o phi_zy.
    const int vd = out.V.dim();
    ComplexMatrix psi = ComplexMatrix::Zero(F[z].dim(), vd);
    psi.middleCols(slot[y], F[y].dim()) = psi_yz.action;
    const ComplexMatrix phi = out.I[y].action * phi_zy.action;
    const SpaceDescriptor V2 = concat(out.V, F[z], cfg.category);
    const ComplexMatrix i = stack(ComplexMatrix::Identity(vd, vd), psi);
    const ComplexMatrix j = stack(phi, ComplexMatrix::Identity(F[z].dim(), F[z].dim()));

    CoveringSample cs;
    cs.x = x;
    cs.y = y;
    cs.z = z;
    cs.delta = std::max(gamma.delta_defect, eta.delta_defect);
    cs.bound = cfg.modulus(cs.delta) + eps;
    // I_Y is a complete isometry, so ||i I_Y gamma - j eta|| splits into
    // the Y-slot part and the new Z part, both computed on small spaces.
    const double part_y = cb({F[x], F[y], gamma.map.action - phi_zy.action * eta.map.action});
    const double part_z = cb({F[x], F[z], psi_yz.action * gamma.map.action - eta.map.action});
    cs.defect = std::max(part_y, part_z);
    out.samples.push_back(cs);

    for (auto& m : out.I) m = {m.domain, V2, i * m.action};
    out.V = V2;
  }
  return out;
}

// ---- distances -------------------------------------------------------------

namespace {

struct Conditioned {
  double kappa = std::numeric_limits<double>::infinity();
  ComplexMatrix t;
};

double condition(const SpaceDescriptor& x, const SpaceDescriptor& y, const ComplexMatrix& t) {
  const Eigen::FullPivLU<ComplexMatrix> lu(t);
  if (!lu.isInvertible() || lu.rcond() < 1e-10) return std::numeric_limits<double>::infinity();
  const ComplexMatrix inv = lu.inverse();
  return cb({x, y, t}) * cb({y, x, inv});
}

DistanceEstimate search(const SpaceDescriptor& x0, const SpaceDescriptor& y0, int budget, std::uint64_t seed) {
  require_full(x0, "compared spaces");
  require_full(y0, "compared spaces");
  require(budget >= 1, ErrorKind::parameter, "budget must be at least 1");
  const SpaceDescriptor x = recategorized(x0, Category::Osp), y = recategorized(y0, Category::Osp);
  DistanceEstimate est;
  est.budget = budget;
  const int n = x.dim();
  Conditioned best, local;
  constexpr int restart = 8;
  double step = 0.3;
  for (int k = 0; k < budget; ++k) {
    std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(k)));
    ComplexMatrix t;
    if (k == 0) {
      t = ComplexMatrix::Identity(n, n);
    } else if (k % restart == 1) {
      t = random_gaussian(n, n, rng);
      step = 0.3;
      local = {};
    } else {
      t = local.t + step * local.t.norm() / std::sqrt(static_cast<double>(n * n)) * random_gaussian(n, n, rng);
    }
    const double kappa = condition(x, y, t);
    ++est.evaluations;
    if (kappa < local.kappa) {
      local = {kappa, t};
      step *= 1.2;
    } else {
      step *= 0.7;
    }
    if (kappa < best.kappa) best = {kappa, t};
  }
  if (!std::isfinite(best.kappa)) return est;
  const ComplexMatrix inv = best.t.inverse();
  BlockLinearMap T{x, y, best.t};
  est.bm_upper = std::log(std::max(1.0, best.kappa));
  est.t = T;
  // d_C witness: f = T / ||T||, g = T^-1 / ||T^-1||, re-verified directly.
  BlockLinearMap f{x, y, best.t / cb(T)};
  BlockLinearMap g{y, x, inv / cb({y, x, inv})};
  const double gh = std::max({delta_defect(f), delta_defect(g),
                              cb({x, x, g.action * f.action - ComplexMatrix::Identity(n, n)}),
                              cb({y, y, f.action * g.action - ComplexMatrix::Identity(n, n)})});
  est.gh_upper = gh;
  est.f = f;
  est.g = g;
  return est;
}

}  // namespace

DistanceEstimate distance_estimate(const SpaceDescriptor& x, const SpaceDescriptor& y, int budget,
                                   std::uint64_t seed) {
  if (x.dim() != y.dim()) {
    // No injective maps in both directions.
    DistanceEstimate est;
    est.budget = budget;
    return est;
  }
  return search(x, y, budget, seed);
}

DistanceEstimate bm_estimate(const SpaceDescriptor& x, const SpaceDescriptor& y, int budget, std::uint64_t seed) {
  require(x.dim() == y.dim(), ErrorKind::shape, "Banach-Mazur distance needs equal dimensions");
  DistanceEstimate est = search(x, y, budget, seed);
  est.gh_upper.reset();
  est.f.reset();
  est.g.reset();
  return est;
}

// ---- embedding nets, oscillation, ARP ----------------------------------------

namespace {

// Unit-norm probes of a full domain: matrix units, block units and a few
// fixed random unitaries. ||f(x)|| over them bounds ||f||_cb from below.
std::vector<ComplexVector> probes(const SpaceDescriptor& x) {
  std::vector<ComplexVector> out;
  for (int e = 0; e < x.dim(); ++e) out.push_back(ComplexVector::Unit(x.dim(), e));
  std::mt19937_64 rng(0x70726f);
  for (int t = 0; t < 4; ++t) {
    std::vector<ComplexMatrix> parts;
    for (const auto& b : x.blocks())
      parts.push_back(random_unitary(std::max(b.rows, b.cols), rng).topLeftCorner(b.rows, b.cols));
    out.push_back(x.pack(parts));
  }
  return out;
}

double lower_bound(const BlockLinearMap& f, const std::vector<ComplexVector>& xs) {
  double lb = 0.0;
  for (const auto& v : xs)
    for (const auto& m : f.codomain.unpack(f.action * v))
      lb = std::max(lb, m.size() == 0 ? 0.0 : Eigen::JacobiSVD<ComplexMatrix>(m).singularValues()(0));
  return lb;
}

// Nearest member in cb distance; ties go to the lower index. With stop_below
// the search returns the first member found within that distance.
std::pair<std::size_t, double> nearest(const std::vector<BlockLinearMap>& members, const BlockLinearMap& f,
                                       double stop_below = -1.0) {
  if (members.empty()) return {0, std::numeric_limits<double>::infinity()};
  const auto xs = probes(f.domain);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t k = 0; k < members.size(); ++k) order.push_back({lower_bound(members[k] - f, xs), k});
  std::sort(order.begin(), order.end());
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& [lb, k] : order) {
    if (lb > dist || (stop_below >= 0 && lb > stop_below && dist <= stop_below)) break;
    const double d = cb(members[k] - f);
    if (d < dist || (d == dist && k < best)) {
      dist = d;
      best = k;
    }
    if (stop_below >= 0 && dist <= stop_below) break;
  }
  return {best, dist};
}

}  // namespace

EmbeddingNet emb_net(const SpaceDescriptor& x, const SpaceDescriptor& z, double eps, std::uint64_t seed, Category cat,
                     int samples, int max_members) {
  require(eps > 0, ErrorKind::parameter, "eps must be positive");
  require_full(x, "embedded spaces");
  require_full(z, "embedded spaces");
  EmbeddingNet net;
  net.eps = eps;
  net.samples = samples;
  const SpaceDescriptor X = recategorized(x, cat), Z = recategorized(z, cat);
  std::mt19937_64 rng(split_seed(seed, 0x656d62));
  if (X.blocks() == Z.blocks()) {
    net.members.push_back(BlockLinearMap{X, Z, ComplexMatrix::Identity(X.dim(), X.dim())});
  } else {
    auto e = random_pattern(X, Z, cat, rng);
    if (!e) return net;
    // The pattern itself with identity unitaries is the canonical member.
    net.members.push_back(BlockLinearMap::from_function(X, Z, [&](const std::vector<ComplexMatrix>& xs) {
      std::vector<ComplexMatrix> out;
      for (std::size_t k = 0; k < Z.blocks().size(); ++k) {
        ComplexMatrix m = ComplexMatrix::Zero(Z.blocks()[k].rows, Z.blocks()[k].cols);
        for (const auto& [b, pl] : e->hosted[k]) m.block(pl.row, pl.col, xs[b].rows(), xs[b].cols()) = xs[b];
        out.push_back(m);
      }
      return out;
    }));
  }
  // Rounds of `samples` random embeddings until one round adds nothing.
  for (int round = 0;; ++round) {
    bool added = false;
    double worst = 0;
    for (int t = 0; t < samples; ++t) {
      const auto f = random_embedding(X, Z, cat, rng);
      if (!f) continue;
      const double d = nearest(net.members, *f, eps).second;
      if (d <= eps) {
        worst = std::max(worst, d);
        continue;
      }
      if (static_cast<int>(net.members.size()) >= max_members)
        fail(ErrorKind::net_construction, "embedding net exceeds " + std::to_string(max_members) +
                                              " members; uncovered at distance " + std::to_string(d) + ": " +
                                              map_to_json(*f).dump());
      net.members.push_back(*f);
      added = true;
    }
    net.sampled_density = worst;
    if (!added) break;
  }
  return net;
}

OscillationReport oscillation(const ColoringSpec& coloring, const std::vector<BlockLinearMap>& set, double eps) {
  OscillationReport r;
  r.set_size = set.size();
  r.epsilon = eps;
  for (std::size_t k = 0; k < set.size(); ++k) r.values.push_back(coloring.value(set[k], k));
  if (!r.values.empty()) {
    const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
    r.osc = *hi - *lo;
  }
  return r;
}

ArpResult arp_search(const SpaceDescriptor& x, const SpaceDescriptor& y, const SpaceDescriptor& z,
                     const ColoringSpec& coloring, const ArpConfig& cfg) {
  require(cfg.budget >= 1, ErrorKind::parameter, "budget must be at least 1");
  const EmbeddingNet nxy = emb_net(x, y, cfg.net_eps, split_seed(cfg.seed, 1), cfg.category);
  const EmbeddingNet nyz = emb_net(y, z, cfg.net_eps, split_seed(cfg.seed, 2), cfg.category);
  ArpResult res;
  if (nxy.members.empty() || nyz.members.empty()) return res;
  // Discrete colorings other than the constant one are keyed by a net of Emb(X, Z).
  const bool keyed = coloring.kind == ColoringSpec::Kind::discrete && coloring.rule != ColoringSpec::Rule::constant;
  const EmbeddingNet nxz = keyed ? emb_net(x, z, cfg.net_eps, split_seed(cfg.seed, 3), cfg.category) : EmbeddingNet{};

  const auto report_for = [&](std::size_t g) {
    OscillationReport r;
    r.epsilon = cfg.eps;
    r.set_size = nxy.members.size();
    for (const auto& phi : nxy.members) {
      const BlockLinearMap f = compose(nyz.members[g], phi);
      if (keyed) {
        const auto [k, d] = nearest(nxz.members, f);
        (void)d;
        r.values.push_back(static_cast<double>(coloring.color(k)));
      } else {
        r.values.push_back(coloring.value(f, 0));
      }
    }
    const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
    r.osc = *hi - *lo;
    return r;
  };

  const long total = std::min<long>(cfg.budget, static_cast<long>(nyz.members.size()));
  std::vector<OscillationReport> reports(total);
  const int threads = max_threads();
  long first = total;
#pragma omp parallel for schedule(dynamic) num_threads(threads) reduction(min : first)
  for (long g = 0; g < total; ++g) {
    reports[g] = report_for(static_cast<std::size_t>(g));
    if (reports[g].osc <= cfg.eps) first = std::min(first, g);
  }
  if (first < total) {
    res.gamma_index = static_cast<std::size_t>(first);
    res.gamma = nyz.members[first];
    res.report = reports[first];
    res.best_index = static_cast<std::size_t>(first);
    res.examined = static_cast<int>(first) + 1;
    return res;
  }
  std::size_t best = 0;
  for (long g = 1; g < total; ++g)
    if (reports[g].osc < reports[best].osc) best = static_cast<std::size_t>(g);
  res.best_index = best;
  res.report = reports[best];
  res.examined = static_cast<int>(total);
  return res;
}

// ---- JSON --------------------------------------------------------------------

nlohmann::json witness_to_json(const AmalgamationWitness& w) {
  nlohmann::json j = {{"V", space_to_json(w.V)},
                      {"i", map_to_json(w.i)},
                      {"j", map_to_json(w.j)},
                      {"delta", w.delta},
                      {"defect", w.defect},
                      {"modulus_bound", w.modulus_bound},
                      {"i_defect", w.i_defect},
                      {"j_defect", w.j_defect},
                      {"unit_residual", w.unit_residual},
                      {"pointed_residual", w.pointed_residual},
                      {"ok", w.ok()}};
  if (w.distinguished) j["distinguished"] = map_to_json(*w.distinguished);
  return j;
}

nlohmann::json multi_to_json(const MultiAmalgamation& m) {
  nlohmann::json samples = nlohmann::json::array();
  bool all = true;
  for (const auto& s : m.samples) {
    samples.push_back({{"x", s.x}, {"y", s.y}, {"z", s.z}, {"delta", s.delta}, {"defect", s.defect}, {"bound", s.bound}});
    all = all && s.defect <= s.bound;
  }
  return {{"V", space_to_json(m.V)},
          {"V_dim", m.V.dim()},
          {"embeddings", m.I.size()},
          {"samples", samples},
          {"all_within_bound", all},
          {"partial", m.partial}};
}

nlohmann::json distance_to_json(const DistanceEstimate& d) {
  nlohmann::json j = {{"evaluations", d.evaluations}, {"budget", d.budget}};
  j["gh_upper"] = d.gh_upper ? nlohmann::json(*d.gh_upper) : nlohmann::json(nullptr);
  j["bm_upper"] = d.bm_upper ? nlohmann::json(*d.bm_upper) : nlohmann::json(nullptr);
  if (d.t) j["T"] = map_to_json(*d.t);
  if (d.f) j["f"] = map_to_json(*d.f);
  if (d.g) j["g"] = map_to_json(*d.g);
  return j;
}

nlohmann::json emb_net_to_json(const EmbeddingNet& n) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : n.members) members.push_back(map_to_json(m));
  return {{"size", n.members.size()},
          {"eps", n.eps},
          {"samples", n.samples},
          {"sampled_density", n.sampled_density},
          {"members", members}};
}

nlohmann::json oscillation_to_json(const OscillationReport& r) {
  return {{"set_size", r.set_size}, {"osc", r.osc}, {"epsilon", r.epsilon}, {"values", r.values},
          {"stabilizes", r.osc <= r.epsilon}};
}

nlohmann::json arp_to_json(const ArpResult& r) {
  nlohmann::json j = {{"found", r.gamma.has_value()},
                      {"examined", r.examined},
                      {"best_index", r.best_index},
                      {"report", oscillation_to_json(r.report)}};
  j["gamma_index"] = r.gamma_index ? nlohmann::json(*r.gamma_index) : nlohmann::json(nullptr);
  if (r.gamma) j["gamma"] = map_to_json(*r.gamma);
  return j;
}

}  // namespace opramsey
