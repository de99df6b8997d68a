#include "opramsey/opspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "opramsey/error.hpp"
#include "opramsey/sdp.hpp"

namespace opramsey {

const char* to_string(Category c) { return c == Category::Osp ? "Osp" : "Osy"; }

Category category_from_string(const std::string& s) {
  if (s == "Osp") return Category::Osp;
  if (s == "Osy") return Category::Osy;
  fail(ErrorKind::category, "unknown category '" + s + "'");
}

// ---------------------------------------------------------------------------
// SpaceDescriptor

void SpaceDescriptor::init(std::vector<BlockShape> blocks, Category category) {
  require(!blocks.empty(), ErrorKind::shape, "a space needs at least one block");
  blocks_ = std::move(blocks);
  category_ = category;
  offsets_.clear();
  ambient_dim_ = 0;
  for (const auto& b : blocks_) {
    require(b.rows > 0 && b.cols > 0, ErrorKind::shape, "block sizes must be positive");
    offsets_.push_back(ambient_dim_);
    ambient_dim_ += b.rows * b.cols;
  }
}

SpaceDescriptor SpaceDescriptor::full(std::vector<BlockShape> blocks, Category category) {
  SpaceDescriptor s;
  s.init(std::move(blocks), category);
  s.basis_ = ComplexMatrix::Identity(s.ambient_dim_, s.ambient_dim_);
  s.explicit_basis_ = false;
  s.check_invariants();
  return s;
}

SpaceDescriptor SpaceDescriptor::subspace(std::vector<BlockShape> blocks, ComplexMatrix basis, Category category) {
  SpaceDescriptor s;
  s.init(std::move(blocks), category);
  require(basis.rows() == s.ambient_dim_, ErrorKind::shape, "basis vectors must live in the ambient space");
  require(basis.cols() >= 1, ErrorKind::shape, "a subspace basis needs at least one element");
  s.basis_ = std::move(basis);
  s.explicit_basis_ = true;
  s.check_invariants();
  return s;
}

SpaceDescriptor SpaceDescriptor::ell_inf(int n, int q, int s, Category category) {
  return full(std::vector<BlockShape>(n, BlockShape{q, s}), category);
}

SpaceDescriptor SpaceDescriptor::matrices(int q, int s, Category category) {
  return full({BlockShape{q, s}}, category);
}

void SpaceDescriptor::check_invariants() const {
  if (explicit_basis_) {
    ComplexMatrix normalized = basis_;
    for (Eigen::Index j = 0; j < normalized.cols(); ++j) {
      const double n = normalized.col(j).norm();
      require(n > 0, ErrorKind::shape, "basis contains a zero vector");
      normalized.col(j) /= n;
    }
    const double gram_det = std::abs((normalized.adjoint() * normalized).determinant());
    require(gram_det > 1e-12, ErrorKind::shape, "subspace basis is not linearly independent");
  }
  if (category_ == Category::Osy) {
    require(all_square(), ErrorKind::category, "operator systems need square blocks");
    require(unit_coordinates().has_value(), ErrorKind::category, "the unit is not in the subspace");
  }
}

int SpaceDescriptor::total_rows() const {
  int r = 0;
  for (const auto& b : blocks_) r += b.rows;
  return r;
}

int SpaceDescriptor::total_cols() const {
  int c = 0;
  for (const auto& b : blocks_) c += b.cols;
  return c;
}

bool SpaceDescriptor::all_square() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const BlockShape& b) { return b.rows == b.cols; });
}

SpaceDescriptor SpaceDescriptor::ambient_space() const {
  return full(blocks_, all_square() ? category_ : Category::Osp);
}

SpaceDescriptor SpaceDescriptor::with_category(Category c) const {
  SpaceDescriptor s = *this;
  s.category_ = c;
  s.check_invariants();
  return s;
}

SpaceDescriptor SpaceDescriptor::amplified(int m) const {
  require(m >= 1, ErrorKind::parameter, "amplification level must be >= 1");
  if (m == 1) return *this;
  std::vector<BlockShape> blocks;
  for (const auto& b : blocks_) blocks.push_back({m * b.rows, m * b.cols});
  SpaceDescriptor s;
  s.init(std::move(blocks), category_);
  const int d = dim();
  s.basis_ = ComplexMatrix::Zero(s.ambient_dim_, static_cast<Eigen::Index>(m) * m * d);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const int q = blocks_[b].rows;
    const int w = blocks_[b].cols;
    const int wide = m * w;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int t = 0; t < d; ++t) {
          const int col = (i * m + j) * d + t;
          for (int r = 0; r < q; ++r)
            for (int c = 0; c < w; ++c)
              s.basis_(s.offsets_[b] + (i * q + r) * wide + (j * w + c), col) = basis_(offsets_[b] + r * w + c, t);
        }
  }
  s.explicit_basis_ = true;
  return s;
}

std::vector<ComplexMatrix> SpaceDescriptor::unpack(const ComplexVector& ambient) const {
  require(ambient.size() == ambient_dim_, ErrorKind::shape, "ambient vector has the wrong length");
  std::vector<ComplexMatrix> out;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    ComplexMatrix m(blocks_[b].rows, blocks_[b].cols);
    for (int r = 0; r < blocks_[b].rows; ++r)
      for (int c = 0; c < blocks_[b].cols; ++c) m(r, c) = ambient(offsets_[b] + r * blocks_[b].cols + c);
    out.push_back(std::move(m));
  }
  return out;
}

ComplexVector SpaceDescriptor::pack(const std::vector<ComplexMatrix>& per_block) const {
  require(per_block.size() == blocks_.size(), ErrorKind::shape, "one matrix per block expected");
  ComplexVector v(ambient_dim_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    require(per_block[b].rows() == blocks_[b].rows && per_block[b].cols() == blocks_[b].cols, ErrorKind::shape,
            "block matrix has the wrong shape");
    for (int r = 0; r < blocks_[b].rows; ++r)
      for (int c = 0; c < blocks_[b].cols; ++c) v(offsets_[b] + r * blocks_[b].cols + c) = per_block[b](r, c);
  }
  return v;
}

ComplexMatrix SpaceDescriptor::block_diagonal(const ComplexVector& ambient) const {
  const auto parts = unpack(ambient);
  ComplexMatrix out = ComplexMatrix::Zero(total_rows(), total_cols());
  int r0 = 0, c0 = 0;
  for (std::size_t b = 0; b < parts.size(); ++b) {
    out.block(r0, c0, blocks_[b].rows, blocks_[b].cols) = parts[b];
    r0 += blocks_[b].rows;
    c0 += blocks_[b].cols;
  }
  return out;
}

ComplexVector SpaceDescriptor::coordinates(const ComplexVector& ambient) const {
  require(ambient.size() == ambient_dim_, ErrorKind::shape, "ambient vector has the wrong length");
  if (!explicit_basis_) return ambient;
  return basis_.colPivHouseholderQr().solve(ambient);
}

double SpaceDescriptor::residual(const ComplexVector& ambient) const {
  if (!explicit_basis_) return 0.0;
  return (basis_ * coordinates(ambient) - ambient).norm();
}

ComplexVector SpaceDescriptor::ambient_unit() const {
  require(all_square(), ErrorKind::category, "unit needs square blocks");
  std::vector<ComplexMatrix> parts;
  for (const auto& b : blocks_) parts.push_back(ComplexMatrix::Identity(b.rows, b.cols));
  return pack(parts);
}

std::optional<ComplexVector> SpaceDescriptor::unit_coordinates() const {
  if (!all_square()) return std::nullopt;
  const ComplexVector u = ambient_unit();
  if (residual(u) > 1e-9) return std::nullopt;
  return coordinates(u);
}

bool SpaceDescriptor::operator==(const SpaceDescriptor& o) const {
  if (blocks_ != o.blocks_ || category_ != o.category_ || dim() != o.dim()) return false;
  if (explicit_basis_ == o.explicit_basis_ && !explicit_basis_) return true;
  return (basis_ - o.basis_).cwiseAbs().maxCoeff() <= 1e-12;
}

// ---------------------------------------------------------------------------
// SpaceElement

void SpaceElement::validate(double tol) const {
  require(level >= 1, ErrorKind::shape, "level must be >= 1");
  require(data.size() == space.blocks().size(), ErrorKind::shape, "one matrix per block expected");
  for (std::size_t b = 0; b < data.size(); ++b)
    require(data[b].rows() == level * space.blocks()[b].rows && data[b].cols() == level * space.blocks()[b].cols,
            ErrorKind::shape, "element block has the wrong shape for its level");
  if (space.has_explicit_basis()) {
    const SpaceDescriptor amp = space.amplified(level);
    const ComplexVector v = amp.pack(data);
    require(amp.residual(v) <= tol * std::max(1.0, v.norm()), ErrorKind::shape, "element is outside M_m(span)");
  }
}

SpaceElement SpaceElement::from_coordinates(const SpaceDescriptor& space, int level, const ComplexVector& coords) {
  const SpaceDescriptor amp = space.amplified(level);
  require(coords.size() == amp.dim(), ErrorKind::shape, "coordinate vector has the wrong length");
  return SpaceElement{space, level, amp.unpack(amp.to_ambient(coords))};
}

ComplexVector SpaceElement::coordinates() const {
  const SpaceDescriptor amp = space.amplified(level);
  return amp.coordinates(amp.pack(data));
}

double level_norm(const SpaceElement& x) {
  x.validate(1e-8);
  double n = 0.0;
  for (const auto& b : x.data) n = std::max(n, op_norm(b));
  return n;
}

// ---------------------------------------------------------------------------
// BlockLinearMap

void BlockLinearMap::validate() const {
  require(action.rows() == codomain.dim() && action.cols() == domain.dim(), ErrorKind::shape,
          "action must be (dim codomain) x (dim domain)");
}

BlockLinearMap BlockLinearMap::identity(const SpaceDescriptor& space) {
  return {space, space, ComplexMatrix::Identity(space.dim(), space.dim())};
}

BlockLinearMap BlockLinearMap::zero(const SpaceDescriptor& domain, const SpaceDescriptor& codomain) {
  return {domain, codomain, ComplexMatrix::Zero(codomain.dim(), domain.dim())};
}

BlockLinearMap BlockLinearMap::from_function(
    const SpaceDescriptor& domain, const SpaceDescriptor& codomain,
    const std::function<std::vector<ComplexMatrix>(const std::vector<ComplexMatrix>&)>& f) {
  BlockLinearMap out{domain, codomain, ComplexMatrix::Zero(codomain.dim(), domain.dim())};
  for (int t = 0; t < domain.dim(); ++t) {
    const auto image = f(domain.unpack(domain.basis().col(t)));
    out.action.col(t) = codomain.coordinates(codomain.pack(image));
  }
  return out;
}

ComplexMatrix BlockLinearMap::ambient_action() const {
  require(domain.spans_ambient(), ErrorKind::unsupported, "ambient action needs a domain spanning its ambient space");
  ComplexMatrix m = codomain.basis() * action;
  if (domain.has_explicit_basis()) m = m * domain.basis().inverse();
  return m;
}

SpaceElement BlockLinearMap::apply(const SpaceElement& x) const {
  validate();
  require(x.space.blocks() == domain.blocks(), ErrorKind::shape, "element does not belong to the domain");
  const int m = x.level;
  const ComplexVector c = x.coordinates();
  const int d = domain.dim();
  const int k = codomain.dim();
  ComplexVector out(static_cast<Eigen::Index>(m) * m * k);
  for (int ij = 0; ij < m * m; ++ij) out.segment(ij * k, k) = action * c.segment(ij * d, d);
  return SpaceElement::from_coordinates(codomain, m, out);
}

BlockLinearMap BlockLinearMap::codomain_block(int k) const {
  require(codomain.spans_ambient(), ErrorKind::unsupported, "codomain block restriction needs a full codomain");
  require(k >= 0 && k < static_cast<int>(codomain.blocks().size()), ErrorKind::shape, "no such codomain block");
  const BlockShape shape = codomain.blocks()[k];
  const ComplexMatrix amb = codomain.basis() * action;
  SpaceDescriptor target = SpaceDescriptor::full({shape}, shape.rows == shape.cols ? codomain.category() : Category::Osp);
  return {domain, target, amb.middleRows(codomain.offset(k), shape.rows * shape.cols)};
}

BlockLinearMap BlockLinearMap::into_ambient() const {
  return {domain, codomain.ambient_space(), codomain.basis() * action};
}

bool BlockLinearMap::is_injective(double tol) const {
  if (action.cols() == 0) return true;
  if (action.rows() < action.cols()) return false;
  Eigen::JacobiSVD<ComplexMatrix> svd(action);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > tol * std::max(1.0, sv(0));
}

BlockLinearMap compose(const BlockLinearMap& after, const BlockLinearMap& before) {
  require(after.domain.dim() == before.codomain.dim() && after.domain.blocks() == before.codomain.blocks(),
          ErrorKind::shape, "composition of incompatible maps");
  return {before.domain, after.codomain, after.action * before.action};
}

BlockLinearMap operator-(const BlockLinearMap& a, const BlockLinearMap& b) {
  require(a.action.rows() == b.action.rows() && a.action.cols() == b.action.cols(), ErrorKind::shape,
          "difference of maps with different shapes");
  return {a.domain, a.codomain, a.action - b.action};
}

BlockLinearMap operator*(Complex c, const BlockLinearMap& a) { return {a.domain, a.codomain, c * a.action}; }

BlockLinearMap amplify(const BlockLinearMap& f, int m) {
  require(m >= 1, ErrorKind::parameter, "amplification level must be >= 1");
  f.validate();
  if (m == 1) return f;
  return {f.domain.amplified(m), f.codomain.amplified(m),
          kron(ComplexMatrix::Identity(static_cast<Eigen::Index>(m) * m, static_cast<Eigen::Index>(m) * m), f.action)};
}

BlockLinearMap transpose_map(int q) {
  const SpaceDescriptor mq = SpaceDescriptor::matrices(q, q);
  return BlockLinearMap::from_function(mq, mq, [](const std::vector<ComplexMatrix>& x) {
    return std::vector<ComplexMatrix>{x[0].transpose()};
  });
}

// ---------------------------------------------------------------------------
// Sampled amplification norms

namespace {

struct TopBlock {
  double norm = 0.0;
  int block = 0;
  ComplexVector u, v;
};

TopBlock top_block(const SpaceDescriptor& s, const ComplexVector& ambient) {
  TopBlock best;
  best.norm = -1.0;
  const auto parts = s.unpack(ambient);
  for (std::size_t b = 0; b < parts.size(); ++b) {
    Eigen::JacobiSVD<ComplexMatrix> svd(parts[b], Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double n = svd.singularValues()(0);
    if (n > best.norm) {
      best.norm = n;
      best.block = static_cast<int>(b);
      best.u = svd.matrixU().col(0);
      best.v = svd.matrixV().col(0);
    }
  }
  return best;
}

// w with Re(w^T y) = Re(u* Y_k v).
ComplexVector functional(const SpaceDescriptor& s, const TopBlock& t) {
  ComplexVector w = ComplexVector::Zero(s.ambient_dim());
  const BlockShape shape = s.blocks()[t.block];
  for (int r = 0; r < shape.rows; ++r)
    for (int c = 0; c < shape.cols; ++c) w(s.offset(t.block) + r * shape.cols + c) = std::conj(t.u(r)) * t.v(c);
  return w;
}

SampledNorm ascend_full(const BlockLinearMap& f, const BlockLinearMap& g, const AscentOptions& o) {
  const ComplexMatrix t = g.ambient_action();
  const SpaceDescriptor& dom = g.domain;
  const SpaceDescriptor& cod = g.codomain;
  std::mt19937_64 rng(o.seed);
  SampledNorm best;
  best.value = -1.0;
  for (int start = 0; start < o.starts; ++start) {
    std::vector<ComplexMatrix> x;
    for (const auto& b : dom.blocks()) x.push_back(polar_part(random_gaussian(b.rows, b.cols, rng)));
    ComplexVector xa = dom.pack(x);
    double value = top_block(cod, t * xa).norm;
    for (int it = 0; it < o.max_iter; ++it) {
      const TopBlock tb = top_block(cod, t * xa);
      if (tb.norm <= 0) break;
      const ComplexVector grad = t.transpose() * functional(cod, tb);
      const auto gparts = dom.unpack(grad);
      std::vector<ComplexMatrix> next;
      for (const auto& gb : gparts) next.push_back(polar_part(gb.conjugate()));
      const ComplexVector xn = dom.pack(next);
      const double nv = top_block(cod, t * xn).norm;
      const bool improved = nv > value + 1e-15 * std::max(1.0, value);
      if (nv >= value) {
        xa = xn;
        value = nv;
      }
      if (!improved && it > 2) break;
    }
    if (value > best.value) {
      best.value = value;
      best.witness = SpaceElement{f.domain, 0, dom.unpack(xa)};
    }
  }
  return best;
}

// argmax Re(g^T x) over the unit ball of span(basis) inside the ambient
// infinity-sum, via [[I, x], [x*, I]] >= 0 blockwise.
std::optional<ComplexVector> maximize_functional(const SpaceDescriptor& s, const ComplexVector& g) {
  const Eigen::Index amb = s.ambient_dim();
  Eigen::HouseholderQR<ComplexMatrix> qr(s.basis());
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(amb, amb);
  SdpProblem p;
  for (const auto& b : s.blocks()) {
    p.block_dims.push_back(b.rows + b.cols);
    p.objective.push_back(ComplexMatrix::Zero(b.rows + b.cols, b.rows + b.cols));
  }
  auto unit_diagonal = [&](int block, int start, int size) {
    for (int i = 0; i < size; ++i)
      for (int j = i; j < size; ++j) {
        SdpConstraint re;
        re.add_entry_functional(block, start + i, start + j, 1.0);
        re.rhs = i == j ? 1.0 : 0.0;
        p.constraints.push_back(re);
        if (i == j) continue;
        SdpConstraint im;
        im.add_entry_functional(block, start + i, start + j, Complex(0, -1));
        p.constraints.push_back(im);
      }
  };
  for (std::size_t b = 0; b < s.blocks().size(); ++b) {
    const BlockShape sh = s.blocks()[b];
    unit_diagonal(static_cast<int>(b), 0, sh.rows);
    unit_diagonal(static_cast<int>(b), sh.rows, sh.cols);
    for (int r = 0; r < sh.rows; ++r)
      for (int c = 0; c < sh.cols; ++c) {
        const Complex w = g(s.offset(static_cast<int>(b)) + r * sh.cols + c);
        p.objective[b](sh.rows + c, r) -= w * 0.5;
        p.objective[b](r, sh.rows + c) -= std::conj(w) * 0.5;
      }
  }
  for (Eigen::Index k = s.dim(); k < amb; ++k) {
    SdpConstraint re, im;
    for (std::size_t b = 0; b < s.blocks().size(); ++b) {
      const BlockShape sh = s.blocks()[b];
      for (int r = 0; r < sh.rows; ++r)
        for (int c = 0; c < sh.cols; ++c) {
          const Complex n = std::conj(q(s.offset(static_cast<int>(b)) + r * sh.cols + c, k));
          if (std::abs(n) < 1e-14) continue;
          re.add_entry_functional(static_cast<int>(b), r, sh.rows + c, n);
          im.add_entry_functional(static_cast<int>(b), r, sh.rows + c, Complex(0, -1) * n);
        }
    }
    p.constraints.push_back(re);
    p.constraints.push_back(im);
  }
  SdpOptions o;
  o.tol = 1e-10;
  o.dim_limit = 100000;
  const SdpSolution sol = solve_sdp(p, o);
  if (sol.status != SdpStatus::optimal) return std::nullopt;
  std::vector<ComplexMatrix> parts;
  for (std::size_t b = 0; b < s.blocks().size(); ++b) {
    const BlockShape sh = s.blocks()[b];
    parts.push_back(sol.primal_blocks[b].block(0, sh.rows, sh.rows, sh.cols));
  }
  // Project back onto the span to remove solver residue.
  return s.to_ambient(s.coordinates(s.pack(parts)));
}

// Monotone ascent: linearize the output norm at x, maximize the linearization.
SampledNorm polish(const BlockLinearMap& f, const BlockLinearMap& g, SampledNorm best) {
  if (best.value <= 0) return best;
  const SpaceDescriptor& dom = g.domain;
  const ComplexMatrix tc = g.codomain.basis() * g.action;
  const ComplexMatrix to_coords = dom.basis().colPivHouseholderQr().solve(ComplexMatrix::Identity(dom.ambient_dim(), dom.ambient_dim()));
  const ComplexMatrix t = tc * to_coords;
  ComplexVector x = dom.pack(best.witness.data);
  for (int it = 0; it < 40; ++it) {
    const TopBlock ty = top_block(g.codomain, t * x);
    const ComplexVector grad = t.transpose() * functional(g.codomain, ty);
    const auto next = maximize_functional(dom, grad);
    if (!next) break;
    const double nx = top_block(dom, *next).norm;
    if (nx <= 0) break;
    const ComplexVector xn = *next / std::max(1.0, nx);
    const double v = top_block(g.codomain, t * xn).norm;
    if (v <= best.value * (1 + 1e-13)) break;
    best.value = v;
    x = xn;
  }
  best.witness = SpaceElement{f.domain, 0, dom.unpack(x)};
  return best;
}

SampledNorm ascend_ratio(const BlockLinearMap& f, const BlockLinearMap& g, const AscentOptions& o) {
  const ComplexMatrix& bd = g.domain.basis();
  const ComplexMatrix tc = g.codomain.basis() * g.action;
  std::mt19937_64 rng(o.seed);
  SampledNorm best;
  best.value = -1.0;
  auto ratio = [&](const ComplexVector& c) {
    const double nx = top_block(g.domain, bd * c).norm;
    return nx > 0 ? top_block(g.codomain, tc * c).norm / nx : 0.0;
  };
  for (int start = 0; start < o.starts; ++start) {
    ComplexVector c = random_gaussian(g.domain.dim(), 1, rng).col(0);
    double r = ratio(c);
    double step = 0.5;
    for (int it = 0; it < o.max_iter && step > 1e-12; ++it) {
      const TopBlock tx = top_block(g.domain, bd * c);
      const TopBlock ty = top_block(g.codomain, tc * c);
      c /= tx.norm;
      const ComplexVector gy = (tc.transpose() * functional(g.codomain, ty)).conjugate();
      const ComplexVector gx = (bd.transpose() * functional(g.domain, tx)).conjugate();
      const ComplexVector dir = (gy - r * gx);
      const double dn = dir.norm();
      if (dn < 1e-14) break;
      const ComplexVector cand = c + (step / dn) * dir;
      const double rc = ratio(cand);
      if (rc > r) {
        c = cand;
        r = rc;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (r > best.value) {
      const ComplexVector xa = bd * c;
      const double nx = top_block(g.domain, xa).norm;
      best.value = r;
      best.witness = SpaceElement{f.domain, 0, g.domain.unpack(xa / nx)};
    }
  }
  return polish(f, g, best);
}

}  // namespace

SampledNorm sampled_amplification_norm(const BlockLinearMap& f, int m, const AscentOptions& options) {
  f.validate();
  const BlockLinearMap g = amplify(f, m);
  if (g.action.cwiseAbs().maxCoeff() == 0.0) {
    SampledNorm z;
    std::vector<ComplexMatrix> data;
    for (const auto& b : g.domain.blocks()) data.push_back(ComplexMatrix::Zero(b.rows, b.cols));
    z.witness = SpaceElement{f.domain, m, data};
    return z;
  }
  SampledNorm out = g.domain.spans_ambient() ? ascend_full(f, g, options) : ascend_ratio(f, g, options);
  out.witness.level = m;
  return out;
}

// ---------------------------------------------------------------------------
// Ruan axioms

namespace {

SpaceElement sandwich(const SpaceElement& x, const ComplexMatrix& alpha, const ComplexMatrix& beta) {
  // alpha*, beta act on the level index: (alpha* (x) I_q) x (beta (x) I_s).
  SpaceElement out{x.space, static_cast<int>(alpha.cols()), {}};
  for (std::size_t b = 0; b < x.data.size(); ++b) {
    const BlockShape s = x.space.blocks()[b];
    out.data.push_back(kron(alpha.adjoint(), ComplexMatrix::Identity(s.rows, s.rows)) * x.data[b] *
                       kron(beta, ComplexMatrix::Identity(s.cols, s.cols)));
  }
  return out;
}

}  // namespace

RuanReport ruan_check(const SpaceDescriptor& x, int trials, std::uint64_t seed, const NormFunction& norm) {
  require(trials >= 1, ErrorKind::parameter, "trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> small(1, 3);
  std::uniform_real_distribution<double> scale(0.1, 2.0);
  RuanReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const int ell = small(rng);
    const int n = small(rng);
    RuanWitness w;
    SpaceElement total{x, n, {}};
    for (const auto& b : x.blocks()) total.data.push_back(ComplexMatrix::Zero(n * b.rows, n * b.cols));
    ComplexMatrix aa = ComplexMatrix::Zero(n, n), bb = ComplexMatrix::Zero(n, n);
    double max_x = 0.0;
    for (int i = 0; i < ell; ++i) {
      const int ni = small(rng);
      const SpaceDescriptor amp = x.amplified(ni);
      const ComplexVector coords = random_gaussian(amp.dim(), 1, rng).col(0) * scale(rng);
      SpaceElement xi = SpaceElement::from_coordinates(x, ni, coords);
      const ComplexMatrix a = random_gaussian(ni, n, rng) * scale(rng);
      const ComplexMatrix b = random_gaussian(ni, n, rng) * scale(rng);
      const SpaceElement term = sandwich(xi, a, b);
      for (std::size_t k = 0; k < total.data.size(); ++k) total.data[k] += term.data[k];
      aa += a.adjoint() * a;
      bb += b.adjoint() * b;
      max_x = std::max(max_x, norm(xi));
      w.x.push_back(std::move(xi));
      w.alpha.push_back(a);
      w.beta.push_back(b);
    }
    w.lhs = norm(total);
    w.rhs = std::sqrt(op_norm(aa)) * max_x * std::sqrt(op_norm(bb));
    if (w.lhs > w.rhs + 1e-8 * std::max(1.0, w.rhs)) {
      ++report.violations;
      if (report.witnesses.size() < 10) report.witnesses.push_back(std::move(w));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json space_to_json(const SpaceDescriptor& s) {
  nlohmann::json j;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : s.blocks()) j["blocks"].push_back({b.rows, b.cols});
  j["category"] = to_string(s.category());
  if (s.has_explicit_basis()) {
    j["basis"] = nlohmann::json::array();
    for (int t = 0; t < s.dim(); ++t) {
      nlohmann::json elem = nlohmann::json::array();
      for (const auto& m : s.unpack(s.basis().col(t))) elem.push_back(matrix_to_json(m));
      j["basis"].push_back(elem);
    }
  }
  return j;
}

SpaceDescriptor space_from_json(const nlohmann::json& j) {
  try {
    std::vector<BlockShape> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
    const Category cat = j.contains("category") ? category_from_string(j["category"].get<std::string>()) : Category::Osp;
    if (!j.contains("basis") || j["basis"].is_null()) return SpaceDescriptor::full(blocks, cat);
    const SpaceDescriptor amb = SpaceDescriptor::full(blocks);
    ComplexMatrix basis(amb.ambient_dim(), j["basis"].size());
    for (std::size_t t = 0; t < j["basis"].size(); ++t) {
      std::vector<ComplexMatrix> parts;
      for (const auto& m : j["basis"][t]) parts.push_back(matrix_from_json(m));
      basis.col(t) = amb.pack(parts);
    }
    return SpaceDescriptor::subspace(blocks, basis, cat);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::encoding, std::string("bad space JSON: ") + e.what());
  }
}

nlohmann::json map_to_json(const BlockLinearMap& f) {
  return {{"domain", space_to_json(f.domain)}, {"codomain", space_to_json(f.codomain)},
          {"action", matrix_to_json(f.action)}};
}

BlockLinearMap map_from_json(const nlohmann::json& j) {
  try {
    BlockLinearMap f{space_from_json(j.at("domain")), space_from_json(j.at("codomain")),
                     matrix_from_json(j.at("action"))};
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::encoding, std::string("bad map JSON: ") + e.what());
  }
}

nlohmann::json element_to_json(const SpaceElement& x) {
  nlohmann::json data = nlohmann::json::array();
  for (const auto& m : x.data) data.push_back(matrix_to_json(m));
  return {{"space", space_to_json(x.space)}, {"level", x.level}, {"data", data}};
}

}  // namespace opramsey
