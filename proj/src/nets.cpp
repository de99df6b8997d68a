#include "opramsey/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>

#include "opramsey/error.hpp"
#include "opramsey/parallel.hpp"

namespace opramsey {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
// Strictness margin for norm comparisons of floating-point columns.
constexpr double cmp_margin = 1e-7;

Category category_of(QuotientClass cls) { return cls == QuotientClass::TPCQ ? Category::Osy : Category::Osp; }

SpaceDescriptor t_space(int s, int q, Category cat) { return SpaceDescriptor::full({{s, q}}, cat); }

SpaceDescriptor l1_space(int d, int s, int q, Category cat) {
  return SpaceDescriptor::full(std::vector<BlockShape>(d, BlockShape{s, q}), cat);
}

// Matrix of a -> left a right on row-major coordinates of an s x q block.
ComplexMatrix automorphism_matrix(const Automorphism& a) {
  return kron(a.left, a.right.transpose());
}

// Crude upper bound for the cb distance between two automorphisms, after
// aligning the global phase that the pair (u, v) leaves undetermined.
double automorphism_distance_bound(const Automorphism& a, const Automorphism& b) {
  const Complex t = (b.left.adjoint() * a.left).trace();
  const Complex phase = std::abs(t) > 0 ? t / std::abs(t) : Complex(1.0);
  return op_norm(a.left - phase * b.left) + op_norm(a.right - std::conj(phase) * b.right);
}

Automorphism random_automorphism(int s, int q, bool systems, std::mt19937_64& rng) {
  Automorphism a{random_unitary(s, rng), ComplexMatrix()};
  a.right = systems ? ComplexMatrix(a.left.adjoint()) : random_unitary(q, rng);
  return a;
}

// Chord length 2 sin(pi / K) between neighbours is the covering diameter of K phases.
int phase_count(double radius, double tol) {
  if (radius <= 0.0 || tol >= 2.0 * radius) return 1;
  return static_cast<int>(std::ceil(std::numbers::pi / (2.0 * std::asin(tol / (2.0 * radius))) - 1e-12));
}

long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

int wrap(long k, int n) {
  const long r = k % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

UnitaryNet build_unitary_net(int s, int q, double eps0, QuotientClass cls, std::uint64_t seed) {
  require(s >= 1 && q >= 1, ErrorKind::parameter, "block sizes must be positive");
  require(eps0 > 0, ErrorKind::parameter, "eps0 must be positive");
  const bool systems = cls == QuotientClass::TPCQ;
  require(!systems || s == q, ErrorKind::category, "the systems class needs square blocks");
  UnitaryNet net;
  net.s = s;
  net.q = q;
  net.eps0 = eps0;
  net.systems = systems;
  net.members.push_back({ComplexMatrix::Identity(s, s), ComplexMatrix::Identity(q, q)});

  if (s == 1 && q == 1) {
    // a -> u a u* is trivial on scalars, so only the CQ class sees phases.
    if (systems) return net;
    net.phase_grid = true;
    const int k = phase_count(1.0, eps0);
    for (int j = 1; j < k; ++j)
      net.members.push_back({ComplexMatrix::Constant(1, 1, std::polar(1.0, two_pi * j / k)), ComplexMatrix::Identity(1, 1)});
    return net;
  }

  // Greedy covering of random samples; the distance used is an upper bound,
  // so a covered sample is genuinely within eps0.
  std::mt19937_64 rng(split_seed(seed, 0x756e6974));
  constexpr int samples = 400, max_members = 4000;
  const auto covered = [&](const Automorphism& a) {
    return std::any_of(net.members.begin(), net.members.end(),
                       [&](const Automorphism& b) { return automorphism_distance_bound(a, b) <= eps0; });
  };
  for (int t = 0; t < samples; ++t) {
    Automorphism a = random_automorphism(s, q, systems, rng);
    if (covered(a)) continue;
    require(static_cast<int>(net.members.size()) < max_members, ErrorKind::net_construction,
            "unitary net at eps0 = " + std::to_string(eps0) + " needs more than " + std::to_string(max_members) +
                " members");
    net.members.push_back(std::move(a));
  }
  for (int t = 0; t < samples; ++t) {
    const Automorphism a = random_automorphism(s, q, systems, rng);
    require(covered(a), ErrorKind::net_construction,
            "unitary net misses a sampled automorphism at eps0 = " + std::to_string(eps0));
  }
  return net;
}

Complex ScalarGrid::value(int m, int k) const {
  if (m == 0) return 0.0;
  return std::polar(magnitude(m), two_pi * k / phases[m]);
}

int ScalarGrid::member(const int* lv, const int* ph) const {
  long code = 0, stride = 1;
  for (int i = 0; i < d; ++i) {
    code += lv[i] * stride;
    stride *= levels + 1;
  }
  long flat = block_offset[code];
  require(flat >= 0, ErrorKind::internal, "level tuple outside the grid");
  long pstride = 1;
  for (int i = 0; i < d; ++i) {
    flat += ph[i] * pstride;
    pstride *= phases[lv[i]];
  }
  return flat_to_member[flat];
}

ComplexVector NetP::scalar_column(std::size_t i) const {
  require(q == 1 && s == 1, ErrorKind::shape, "scalar columns need q = s = 1");
  ComplexVector v(d);
  if (grid) {
    for (int c = 0; c < d; ++c) v(c) = grid->value(grid->level[i * d + c], grid->phase[i * d + c]);
  } else {
    v = explicit_maps.at(i).action.col(0);
  }
  return v;
}

BlockLinearMap NetP::map(std::size_t i) const {
  require(i < size(), ErrorKind::parameter, "net index out of range");
  if (!grid) return explicit_maps[i];
  const Category cat = category_of(cls);
  return {t_space(1, 1, cat), l1_space(d, 1, 1, cat), ComplexMatrix(scalar_column(i))};
}

std::size_t NetP::zero_index() const {
  require(cls == QuotientClass::CQ, ErrorKind::category, "only CQ nets contain the zero map");
  return 0;
}

std::size_t NetP::embedding_index(int coordinate) const {
  require(coordinate >= 0 && coordinate < d, ErrorKind::parameter, "coordinate out of range");
  const int k = s * q;
  for (std::size_t i = 0; i < size(); ++i) {
    const BlockLinearMap f = map(i);
    ComplexMatrix e = ComplexMatrix::Zero(d * k, k);
    e.middleRows(coordinate * k, k).setIdentity();
    if (f.action == e) return i;
  }
  fail(ErrorKind::internal, "coordinate embedding missing from the net");
}

BlockLinearMap NetQ::map(std::size_t i) const {
  require(i < size(), ErrorKind::parameter, "net index out of range");
  const Category cat = category_of(cls);
  const int k = s * q;
  ComplexMatrix a = ComplexMatrix::Zero(m * k, d * k);
  for (int j = 0; j < d; ++j) a.block(row[i][j] * k, j * k, k, k) = automorphism_matrix(units.members[unit[i][j]]);
  return {l1_space(d, s, q, cat), l1_space(m, s, q, cat), a};
}

double cb_distance(const BlockLinearMap& a, const BlockLinearMap& b) { return dual_cb_norm(a - b); }

double comparison_norm(const BlockLinearMap& column, QuotientClass cls) {
  if (cls == QuotientClass::CQ) return dual_cb_norm(column);
  const int d = static_cast<int>(column.codomain.blocks().size());
  if (d <= 1) return 0.0;
  std::vector<BlockShape> first(column.codomain.blocks().begin(), column.codomain.blocks().end() - 1);
  const SpaceDescriptor cod = SpaceDescriptor::full(std::move(first), column.codomain.category());
  return dual_cb_norm({column.domain, cod, column.action.topRows(cod.ambient_dim())});
}

BlockLinearMap random_column(QuotientClass cls, int d, int q, int s, std::mt19937_64& rng) {
  require(d >= 1 && q >= 1 && s >= 1, ErrorKind::parameter, "dimensions must be positive");
  const Category cat = category_of(cls);
  const SpaceDescriptor dom = t_space(s, q, cat), cod = l1_space(d, s, q, cat);
  const int k = s * q;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Some samples live on a coordinate face, where nets are hardest to make dense.
  std::vector<char> keep(d, 1);
  if (d > 1 && unif(rng) < 0.3) keep[std::uniform_int_distribution<int>(0, d - 1)(rng)] = 0;

  if (cls == QuotientClass::CQ) {
    ComplexMatrix a = random_gaussian(d * k, k, rng);
    for (int i = 0; i < d; ++i)
      if (!keep[i]) a.middleRows(i * k, k).setZero();
    BlockLinearMap f{dom, cod, a};
    const double norm = dual_cb_norm(f);
    f.action *= std::sqrt(unif(rng)) / norm;
    return f;
  }
  require(s == q, ErrorKind::category, "trace-preserving columns need square blocks");
  // Kraus operators from an isometry: a -> (sum_l K_il a K_il*)_i.
  const int kraus = q;
  Eigen::HouseholderQR<ComplexMatrix> qr(random_gaussian(d * kraus * q, q, rng));
  ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(d * kraus * q, q);
  for (int i = 0; i < d; ++i) {
    const double w = keep[i] ? 0.2 + unif(rng) : 0.0;
    v.middleRows(i * kraus * q, kraus * q) *= w;
  }
  // Restore sum K* K = Id after reweighting.
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(v.adjoint() * v);
  v = v * (es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
  return BlockLinearMap::from_function(dom, cod, [&](const std::vector<ComplexMatrix>& x) {
    std::vector<ComplexMatrix> y;
    for (int i = 0; i < d; ++i) {
      ComplexMatrix acc = ComplexMatrix::Zero(q, q);
      for (int l = 0; l < kraus; ++l) {
        const ComplexMatrix kil = v.middleRows((i * kraus + l) * q, q);
        acc += kil * x[0] * kil.adjoint();
      }
      y.push_back(acc);
    }
    return y;
  });
}

namespace {

// ---- scalar grids -------------------------------------------------------

// Nearest admissible grid point to v (CQ): magnitudes rounded to the nearest
// level, then lowered until the level sum is strictly below ||v||_1.
void round_cq(const ScalarGrid& g, const ComplexVector& v, int* lv, int* ph) {
  const int d = g.d, L = g.levels;
  double norm = 0;
  for (int i = 0; i < d; ++i) norm += std::abs(v(i));
  long sum = 0;
  for (int i = 0; i < d; ++i) {
    lv[i] = static_cast<int>(std::clamp<long>(std::lround(std::abs(v(i)) * L), 0, L));
    sum += lv[i];
  }
  while (sum > 0 && static_cast<double>(sum) / L >= norm - 1e-12) {
    int best = -1;
    double excess = 0;
    for (int i = 0; i < d; ++i) {
      if (lv[i] == 0) continue;
      const double e = static_cast<double>(lv[i]) / L - std::abs(v(i));
      if (best < 0 || e > excess + 1e-15 || (std::abs(e - excess) <= 1e-15 && lv[i] > lv[best])) {
        excess = e;
        best = i;
      }
    }
    --lv[best];
    --sum;
  }
  for (int i = 0; i < d; ++i) {
    const int k = g.phases[lv[i]];
    ph[i] = k == 1 ? 0 : wrap(std::lround(std::arg(v(i)) / two_pi * k), k);
  }
}

// TPCQ: floor the first d - 1 coordinates, lower once more if that is not a
// strict decrease, and put the remaining mass in the last coordinate.
void round_tpcq(const ScalarGrid& g, const ComplexVector& v, int* lv, int* ph) {
  const int d = g.d, L = g.levels;
  double first = 0;
  long sum = 0;
  for (int i = 0; i + 1 < d; ++i) {
    const double x = std::abs(v(i));
    first += x;
    lv[i] = static_cast<int>(std::clamp<long>(static_cast<long>(std::floor(x * L + 1e-12)), 0, L));
    sum += lv[i];
  }
  if (sum > 0 && static_cast<double>(sum) / L >= first - 1e-12) {
    int best = 0;
    for (int i = 1; i + 1 < d; ++i)
      if (lv[i] > lv[best]) best = i;
    --lv[best];
    --sum;
  }
  lv[d - 1] = static_cast<int>(L - sum);
  for (int i = 0; i < d; ++i) ph[i] = 0;
}

struct GridBuild {
  ScalarGrid grid;
  std::vector<long> key;
};

// Enumerates level tuples in base-(L + 1) code order, keeping those accepted
// by `admit`; each tuple expands into its phase combinations.
template <class Admit>
GridBuild enumerate_grid(int d, int levels, std::vector<int> phases, Admit admit, long max_members) {
  GridBuild b;
  ScalarGrid& g = b.grid;
  g.d = d;
  g.levels = levels;
  g.phases = std::move(phases);
  const long codes = ipow(levels + 1, d);
  require(codes <= 50'000'000, ErrorKind::budget, "scalar grid too fine");
  g.block_offset.assign(codes, -1);
  std::vector<int> lv(d, 0);
  long flat = 0;
  for (long code = 0; code < codes; ++code) {
    long c = code;
    for (int i = 0; i < d; ++i) {
      lv[i] = static_cast<int>(c % (levels + 1));
      c /= levels + 1;
    }
    if (!admit(lv)) continue;
    g.block_offset[code] = flat;
    long count = 1;
    for (int i = 0; i < d; ++i) count *= g.phases[lv[i]];
    require(flat + count <= max_members, ErrorKind::net_construction,
            "scalar net needs more than " + std::to_string(max_members) + " members");
    for (long p = 0; p < count; ++p) {
      long r = p;
      for (int i = 0; i < d; ++i) {
        g.level.push_back(lv[i]);
        g.phase.push_back(static_cast<int>(r % g.phases[lv[i]]));
        r /= g.phases[lv[i]];
      }
    }
    flat += count;
  }
  return b;
}

// Sorts grid members by (key, serialized entries) and records the permutation.
void order_grid(GridBuild& b, const std::function<long(const int*)>& key_of) {
  ScalarGrid& g = b.grid;
  const int d = g.d;
  const long n = static_cast<long>(g.level.size() / std::max(d, 1));
  std::vector<long> key(n);
  for (long p = 0; p < n; ++p) key[p] = key_of(&g.level[p * d]);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](int a, int c) {
    if (key[a] != key[c]) return key[a] < key[c];
    for (int i = 0; i < d; ++i) {
      const Complex x = g.value(g.level[a * d + i], g.phase[a * d + i]);
      const Complex y = g.value(g.level[c * d + i], g.phase[c * d + i]);
      if (x.real() != y.real()) return x.real() < y.real();
      if (x.imag() != y.imag()) return x.imag() < y.imag();
    }
    return a < c;
  });
  std::vector<int> level(g.level.size()), phase(g.phase.size());
  g.flat_to_member.assign(n, 0);
  b.key.resize(n);
  for (long r = 0; r < n; ++r) {
    const int p = perm[r];
    g.flat_to_member[p] = static_cast<int>(r);
    b.key[r] = key[p];
    for (int i = 0; i < d; ++i) {
      level[r * d + i] = g.level[p * d + i];
      phase[r * d + i] = g.phase[p * d + i];
    }
  }
  g.level = std::move(level);
  g.phase = std::move(phase);
}

ComplexVector grid_point(const ScalarGrid& g, const int* lv, const int* ph) {
  ComplexVector v(g.d);
  for (int i = 0; i < g.d; ++i) v(i) = g.value(lv[i], ph[i]);
  return v;
}

ComplexVector random_scalar_column(QuotientClass cls, int d, std::mt19937_64& rng) {
  return random_column(cls, d, 1, 1, rng).action.col(0);
}

void build_scalar_grid(NetP& p, const NetOptions& options) {
  const int d = p.d;
  const double budget = 0.97 * p.eps;
  GridBuild b;
  if (p.cls == QuotientClass::CQ) {
    // Worst rounding error a h + d c with a = (d + 1) / 2: magnitude rounding
    // costs h / 2 per coordinate plus one extra step, phases c per coordinate.
    const double a = (d + 1) / 2.0;
    const int levels = std::max(1, static_cast<int>(std::ceil(2.0 * a / budget)));
    const double h = 1.0 / levels;
    const double c = (budget - a * h) / d;
    require(c > 0, ErrorKind::internal, "phase tolerance must be positive");
    std::vector<int> phases(levels + 1, 1);
    for (int m = 1; m <= levels; ++m) phases[m] = phase_count(static_cast<double>(m) / levels, c);
    b = enumerate_grid(
        d, levels, phases,
        [&](const std::vector<int>& lv) { return std::accumulate(lv.begin(), lv.end(), 0L) <= levels; },
        options.max_members);
    order_grid(b, [d](const int* lv) { return std::accumulate(lv, lv + d, 0L); });
  } else {
    // Floor error below h on each of the first d - 1 coordinates, mirrored in the last.
    const int levels = d == 1 ? 1 : std::max(1, static_cast<int>(std::ceil(2.0 * (d - 1) / budget)));
    b = enumerate_grid(
        d, levels, std::vector<int>(levels + 1, 1),
        [&](const std::vector<int>& lv) { return std::accumulate(lv.begin(), lv.end(), 0L) == levels; },
        options.max_members);
    order_grid(b, [d](const int* lv) { return std::accumulate(lv, lv + d - 1, 0L); });
  }
  const ScalarGrid& g = b.grid;
  p.cmp_key = b.key;
  p.cmp.resize(b.key.size());
  for (std::size_t i = 0; i < b.key.size(); ++i) p.cmp[i] = static_cast<double>(b.key[i]) / g.levels;
  p.grid = std::move(b.grid);

  // Sampled density: distance from random admissible columns to their rounding.
  std::mt19937_64 rng(split_seed(options.seed, 0x64656e73));
  std::vector<int> lv(d), ph(d);
  p.samples = options.samples;
  p.sampled_density = 0;
  for (int t = 0; t < options.samples; ++t) {
    const ComplexVector v = random_scalar_column(p.cls, d, rng);
    if (p.cls == QuotientClass::CQ)
      round_cq(*p.grid, v, lv.data(), ph.data());
    else
      round_tpcq(*p.grid, v, lv.data(), ph.data());
    const double dist = (grid_point(*p.grid, lv.data(), ph.data()) - v).cwiseAbs().sum();
    if (dist > p.eps)
      fail(ErrorKind::net_construction, "sampled column at distance " + std::to_string(dist) + " > eps: " +
                                            matrix_to_json(ComplexMatrix(v)).dump());
    p.sampled_density = std::max(p.sampled_density, dist);
  }
}

// ---- explicit nets ------------------------------------------------------

// Admissible approximant of phi: smallest distance among members whose
// comparison norm is strictly smaller (TPCQ: also not pinned, with the pinned
// members as the fallback). Returns (index, distance); index -1 if none.
std::pair<long, double> explicit_approximant(const NetP& p, const BlockLinearMap& phi, double phi_cmp,
                                             bool stop_at_eps) {
  long best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  const auto consider = [&](std::size_t i) {
    // ||P_i - phi|| <= ||P_i|| + ||phi|| settles CQ candidates without an SDP.
    if (p.cls == QuotientClass::CQ && stop_at_eps && p.cmp[i] + phi_cmp < p.eps) {
      best = static_cast<long>(i);
      best_dist = p.cmp[i] + phi_cmp;
      return true;
    }
    const double dist = cb_distance(p.explicit_maps[i], phi);
    if (dist < best_dist) {
      best = static_cast<long>(i);
      best_dist = dist;
    }
    return stop_at_eps && best_dist <= p.eps;
  };
  const bool pinned = p.cls == QuotientClass::TPCQ && phi_cmp <= cmp_margin;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (pinned) {
      if (p.cmp[i] > cmp_margin) break;
    } else {
      if (p.cmp[i] >= phi_cmp - cmp_margin) break;
      if (p.cls == QuotientClass::TPCQ && p.cmp[i] <= cmp_margin) continue;
    }
    if (consider(i)) return {best, best_dist};
  }
  if (p.cls == QuotientClass::TPCQ && !pinned && best_dist > p.eps) {
    // Snap to the pinned forms.
    for (std::size_t i = 0; i < p.size() && p.cmp[i] <= cmp_margin; ++i)
      if (consider(i)) break;
  }
  return {best, best_dist};
}

void sort_explicit(NetP& p) {
  std::vector<std::size_t> perm(p.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(p.cmp[a] - p.cmp[b]) > 1e-12) return p.cmp[a] < p.cmp[b];
    const auto& x = p.explicit_maps[a].action;
    const auto& y = p.explicit_maps[b].action;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Complex u = x.data()[i], v = y.data()[i];
      if (u.real() != v.real()) return u.real() < v.real();
      if (u.imag() != v.imag()) return u.imag() < v.imag();
    }
    return false;
  });
  std::vector<BlockLinearMap> maps;
  std::vector<double> cmp;
  for (std::size_t i : perm) {
    maps.push_back(p.explicit_maps[i]);
    cmp.push_back(p.cmp[i]);
  }
  p.explicit_maps = std::move(maps);
  p.cmp = std::move(cmp);
}

// Shrinks a column so that it sits strictly inside its own comparison level.
BlockLinearMap shrink(const BlockLinearMap& phi, double phi_cmp, QuotientClass cls, double eps) {
  BlockLinearMap f = phi;
  const double eta = std::min(eps / 2.0, phi_cmp);
  if (cls == QuotientClass::CQ) {
    f.action *= (phi_cmp - eta) / phi_cmp;
    return f;
  }
  // Move mass from the first d - 1 coordinates into the last one.
  const int k = phi.domain.ambient_dim();
  const int d = static_cast<int>(phi.codomain.blocks().size());
  const double t = eta / phi_cmp;
  const ComplexMatrix first = f.action.topRows((d - 1) * k);
  f.action.topRows((d - 1) * k) *= 1.0 - t;
  for (int i = 0; i + 1 < d; ++i) f.action.bottomRows(k) += t * first.middleRows(i * k, k);
  return f;
}

void build_explicit(NetP& p, const NetOptions& options) {
  const Category cat = category_of(p.cls);
  const int d = p.d, k = p.s * p.q;
  const SpaceDescriptor dom = t_space(p.s, p.q, cat), cod = l1_space(d, p.s, p.q, cat);
  const auto add = [&](BlockLinearMap f) {
    require(static_cast<int>(p.explicit_maps.size()) < options.max_members, ErrorKind::net_construction,
            "net needs more than " + std::to_string(options.max_members) + " members");
    p.cmp.push_back(comparison_norm(f, p.cls));
    p.explicit_maps.push_back(std::move(f));
  };
  if (p.cls == QuotientClass::CQ) add(BlockLinearMap::zero(dom, cod));
  for (int i = 0; i < d; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(d * k, k);
    e.middleRows(i * k, k).setIdentity();
    add({dom, cod, e});
  }
  sort_explicit(p);

  std::mt19937_64 rng(split_seed(options.seed, 0x6e657450));
  for (int t = 0; t < options.samples; ++t) {
    const BlockLinearMap phi = random_column(p.cls, d, p.q, p.s, rng);
    const double c = comparison_norm(phi, p.cls);
    if (explicit_approximant(p, phi, c, true).second <= p.eps) continue;
    add(shrink(phi, c, p.cls, p.eps));
    sort_explicit(p);
  }
  for (int t = 0; t < options.extra_members; ++t) {
    const BlockLinearMap phi = random_column(p.cls, d, p.q, p.s, rng);
    add(shrink(phi, comparison_norm(phi, p.cls), p.cls, p.eps));
  }
  sort_explicit(p);

  p.samples = options.samples;
  p.sampled_density = 0;
  for (int t = 0; t < options.samples; ++t) {
    const BlockLinearMap phi = random_column(p.cls, d, p.q, p.s, rng);
    const double dist = explicit_approximant(p, phi, comparison_norm(phi, p.cls), true).second;
    if (dist > p.eps)
      fail(ErrorKind::net_construction,
           "sampled column at distance " + std::to_string(dist) + " > eps: " + map_to_json(phi).dump());
    p.sampled_density = std::max(p.sampled_density, dist);
  }
}

NetQ build_q(QuotientClass cls, int d, int m, int q, int s, double eps0, const NetOptions& options) {
  NetQ Q;
  Q.cls = cls;
  Q.d = d;
  Q.m = m;
  Q.q = q;
  Q.s = s;
  Q.units = build_unitary_net(s, q, eps0, cls, options.seed);
  if (!(s == 1 && q == 1)) {
    std::mt19937_64 rng(split_seed(options.seed, 0x51657874));
    for (int t = 0; t < options.extra_members; ++t)
      Q.units.members.push_back(random_automorphism(s, q, Q.units.systems, rng));
  }
  const int nu = static_cast<int>(Q.units.members.size());
  const bool tp = cls == QuotientClass::TPCQ;
  // Free columns: all of them (CQ) or all but the pinned last one (TPCQ).
  const int free_cols = tp ? d - 1 : d;
  const int free_rows = tp ? m - 1 : m;
  require(free_cols <= free_rows, ErrorKind::parameter, "need d <= m");
  double count = std::pow(static_cast<double>(nu), free_cols);
  for (int j = 0; j < free_cols; ++j) count *= free_rows - j;
  require(count <= options.max_members, ErrorKind::net_construction,
          "Q needs " + std::to_string(static_cast<long long>(count)) + " members");

  std::vector<int> rows(free_cols), units(free_cols, 0);
  std::vector<char> used(free_rows, 0);
  const std::function<void(int)> place = [&](int j) {
    if (j == free_cols) {
      std::vector<int> r = rows, u = units;
      if (tp) {
        r.push_back(m - 1);
        u.push_back(0);
      }
      Q.row.push_back(r);
      Q.unit.push_back(u);
      return;
    }
    for (int r = 0; r < free_rows; ++r) {
      if (used[r]) continue;
      used[r] = 1;
      rows[j] = r;
      for (int u = 0; u < nu; ++u) {
        units[j] = u;
        place(j + 1);
      }
      used[r] = 0;
    }
  };
  place(0);

  // Order by the serialized action entries.
  const int k = s * q;
  std::vector<ComplexMatrix> unit_mats;
  for (const auto& a : Q.units.members) unit_mats.push_back(automorphism_matrix(a));
  const auto entry = [&](std::size_t i, int r, int c) -> Complex {
    const int j = c / k;
    if (Q.row[i][j] != r / k) return 0.0;
    return unit_mats[Q.unit[i][j]](r % k, c % k);
  };
  std::vector<std::size_t> perm(Q.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    for (int r = 0; r < m * k; ++r)
      for (int c = 0; c < d * k; ++c) {
        const Complex x = entry(a, r, c), y = entry(b, r, c);
        if (x.real() != y.real()) return x.real() < y.real();
        if (x.imag() != y.imag()) return x.imag() < y.imag();
      }
    return a < b;
  });
  NetQ sorted = Q;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    sorted.row[i] = Q.row[perm[i]];
    sorted.unit[i] = Q.unit[perm[i]];
  }
  return sorted;
}

}  // namespace

Nets build_nets(QuotientClass cls, int d, int m, int q, int s, double eps, double eps0, const NetOptions& options) {
  require(d >= 1 && m >= d, ErrorKind::parameter, "need 1 <= d <= m");
  require(q >= 1 && s >= 1, ErrorKind::parameter, "block sizes must be positive");
  require(eps > 0 && eps0 > 0, ErrorKind::parameter, "eps and eps0 must be positive");
  require(cls == QuotientClass::CQ || q == s, ErrorKind::category, "the systems class needs square blocks");
  Nets nets;
  NetP& p = nets.P;
  p.cls = cls;
  p.d = d;
  p.q = q;
  p.s = s;
  p.eps = eps;
  if (q == 1 && s == 1 && options.extra_members == 0)
    build_scalar_grid(p, options);
  else
    build_explicit(p, options);
  nets.Q = build_q(cls, d, m, q, s, eps0, options);
  return nets;
}

BlockLinearMap columns_to_matrix(const std::vector<BlockLinearMap>& columns, QuotientClass cls) {
  require(!columns.empty() || cls == QuotientClass::TPCQ, ErrorKind::parameter, "need at least one column");
  require(!columns.empty(), ErrorKind::parameter, "need at least one column to fix the codomain");
  const SpaceDescriptor& dom1 = columns[0].domain;
  const SpaceDescriptor& cod = columns[0].codomain;
  require(dom1.blocks().size() == 1, ErrorKind::shape, "columns must have a single-block domain");
  const BlockShape t = dom1.blocks()[0];
  const int k = t.rows * t.cols;
  const int n = static_cast<int>(columns.size()) + (cls == QuotientClass::TPCQ ? 1 : 0);
  ComplexMatrix a(cod.ambient_dim(), n * k);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    require(columns[j].domain == dom1 && columns[j].codomain == cod, ErrorKind::shape, "columns differ in shape");
    a.middleCols(j * k, k) = columns[j].action;
  }
  if (cls == QuotientClass::TPCQ) {
    a.rightCols(k).setZero();
    a.bottomRightCorner(k, k).setIdentity();
  }
  return {SpaceDescriptor::full(std::vector<BlockShape>(n, t), dom1.category()), cod, a};
}

BlockLinearMap encode_alpha(const Nets& nets, const std::vector<int>& tuple) {
  require(is_rigid_surjection(tuple, static_cast<int>(nets.P.size())), ErrorKind::rigidity,
          "tuple is not a rigid surjection onto P");
  std::vector<BlockLinearMap> cols;
  for (int w : tuple) cols.push_back(nets.P.map(w));
  return columns_to_matrix(cols, nets.P.cls);
}

BlockLinearMap encode_alpha_pairs(const Nets& nets, const std::vector<std::pair<int, int>>& tuple) {
  const std::size_t nq = nets.Q.size(), np = nets.P.size();
  std::uint64_t next = 0;
  std::vector<BlockLinearMap> cols;
  for (const auto& [b, w] : tuple) {
    require(b >= 0 && static_cast<std::size_t>(b) < nq && w >= 0 && static_cast<std::size_t>(w) < np,
            ErrorKind::parameter, "pair outside Q x P");
    const std::uint64_t key = antilex_key(b, w, nq);
    require(key <= next, ErrorKind::rigidity, "pair tuple violates first-occurrence order");
    if (key == next) ++next;
    cols.push_back(compose(nets.Q.map(b), nets.P.map(w)));
  }
  require(next == static_cast<std::uint64_t>(nq) * np, ErrorKind::rigidity, "pair tuple does not cover Q x P");
  return columns_to_matrix(cols, nets.P.cls);
}

BlockLinearMap random_quotient(QuotientClass cls, int d, int m, std::mt19937_64& rng) {
  require(d >= 1 && m >= d, ErrorKind::parameter, "need 1 <= d <= m");
  const Category cat = category_of(cls);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ComplexMatrix a = ComplexMatrix::Zero(d, m);
  std::vector<int> cols(cls == QuotientClass::TPCQ ? m - 1 : m);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(cols.begin(), cols.end(), rng);
  std::vector<char> fixed(m, 0);
  const int free_rows = cls == QuotientClass::TPCQ ? d - 1 : d;
  for (int i = 0; i < free_rows; ++i) {
    const int c = cols[i];
    fixed[c] = 1;
    a(i, c) = cls == QuotientClass::CQ ? std::polar(1.0, two_pi * unif(rng)) : Complex(1.0);
  }
  if (cls == QuotientClass::TPCQ) {
    fixed[m - 1] = 1;
    a(d - 1, m - 1) = 1.0;
  }
  for (int c = 0; c < m; ++c) {
    if (fixed[c]) continue;
    a.col(c) = random_scalar_column(cls, d, rng);
  }
  return {l1_space(m, 1, 1, cat), l1_space(d, 1, 1, cat), a};
}

// ---- tau --------------------------------------------------------------

namespace {

struct MinTracker {
  std::vector<std::uint64_t> first;
  double defect = 0.0;
  std::uint64_t snapped = 0;
  double max_snap = 0.0;

  explicit MinTracker(std::size_t n) : first(n, std::numeric_limits<std::uint64_t>::max()) {}
  void merge(const MinTracker& o) {
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = std::min(first[i], o.first[i]);
    defect = std::max(defect, o.defect);
    snapped += o.snapped;
    max_snap = std::max(max_snap, o.max_snap);
  }
};

void finish(TauResult& r, const MinTracker& t, std::size_t nq) {
  r.defect = t.defect;
  r.snapped = t.snapped;
  r.max_snap_distance = t.max_snap;
  r.rigid = true;
  r.minima_ok = true;
  std::uint64_t prev = 0;
  for (std::size_t w = 0; w < t.first.size(); ++w) {
    const std::uint64_t f = t.first[w];
    if (f == std::numeric_limits<std::uint64_t>::max() || (w > 0 && f <= prev)) r.rigid = false;
    prev = f;
    // For the least member (zero or pinned) the minimum is (Q[0], w).
    const std::uint64_t expected = w == 0 ? antilex_key(0, 0, nq) : antilex_key(r.a_dagger, w, nq);
    if (f != expected) r.minima_ok = false;
  }
}

// Entries of the scalar matrix A of a dual-side map with 1 x 1 blocks.
bool scalar_blocks(const BlockLinearMap& f) {
  const auto one = [](const SpaceDescriptor& s) {
    return std::all_of(s.blocks().begin(), s.blocks().end(), [](BlockShape b) { return b.rows == 1 && b.cols == 1; });
  };
  return one(f.domain) && one(f.codomain);
}

// Phase index at level mp of mu * value(m, k), rounded to the nearest.
int rotated_phase(const ScalarGrid& g, int m, int k, int mp, double psi) {
  const int kp = g.phases[mp];
  if (kp == 1) return 0;
  const double frac = static_cast<double>(k) / g.phases[m] + psi;
  return wrap(std::lround(frac * kp), kp);
}

}  // namespace

TauResult construct_tau(const BlockLinearMap& rho, const Nets& nets, double eps, const TauOptions& options) {
  const NetP& P = nets.P;
  const NetQ& Q = nets.Q;
  require(eps > 0, ErrorKind::parameter, "eps must be positive");
  require(P.cls == Q.cls && P.d == Q.d && P.q == Q.q && P.s == Q.s, ErrorKind::parameter, "P and Q do not match");
  const int d = P.d, m = Q.m;
  require(rho.codomain.blocks().size() == static_cast<std::size_t>(d) &&
              rho.domain.blocks().size() == static_cast<std::size_t>(m),
          ErrorKind::shape, "rho must map l_1^m to l_1^d");
  require(eps + 1e-12 >= P.eps, ErrorKind::precondition, "eps is below the net resolution");
  const StructureReport sr = structure_check(rho, P.cls);
  require(sr.ok, ErrorKind::precondition,
          "rho is not a " + std::string(to_string(P.cls)) + " map: " + (sr.violations.empty() ? "" : sr.violations[0]));

  const std::size_t nq = Q.size(), np = P.size();
  TauResult r;
  r.pairs = static_cast<std::uint64_t>(nq) * np;
  const bool scalar = scalar_blocks(rho);
  const ComplexMatrix A = rho.action;

  // A^dagger: the Q member closest to a right inverse.
  std::vector<ComplexMatrix> qmat(nq);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < nq; ++b) {
    qmat[b] = Q.map(b).action;
    const BlockLinearMap ab{l1_space(d, P.s, P.q, rho.domain.category()), rho.codomain, A * qmat[b]};
    const double e = cb_distance(ab, BlockLinearMap::identity(rho.codomain));
    if (e < best - 1e-12) {
      best = e;
      r.a_dagger = b;
    }
  }
  r.a_dagger_error = best;
  require(best <= eps, ErrorKind::net_resolution,
          "no member of Q is within eps of a right inverse (best " + std::to_string(best) + ")");
  const std::size_t ad = r.a_dagger;
  const bool tp = P.cls == QuotientClass::TPCQ;

  // Monomial unimodular A with d = m: tau reduces to table lookups.
  bool monomial = scalar && P.grid && d == m && !tp;
  std::vector<int> sigma(d, -1);
  if (monomial) {
    std::vector<char> hit(m, 0);
    for (int i = 0; i < d && monomial; ++i)
      for (int c = 0; c < m; ++c) {
        if (A(i, c) == 0.0) continue;
        if (sigma[i] >= 0 || hit[c] || std::abs(std::abs(A(i, c)) - 1.0) > 1e-12) {
          monomial = false;
          break;
        }
        sigma[i] = c;
        hit[c] = 1;
      }
    for (int i = 0; i < d; ++i) monomial = monomial && sigma[i] >= 0;
  }

  const int threads = max_threads();
  if (monomial) {
    r.fast_path = true;
    require(r.pairs <= options.budget, ErrorKind::budget, "tau needs " + std::to_string(r.pairs) + " pair evaluations");
    const ScalarGrid& g = *P.grid;
    const int L = g.levels;
    // Per member of Q: source coordinate pi(i) and phase psi(i) / 2 pi of (AB)_{i, pi(i)}.
    std::vector<std::vector<int>> pi(nq, std::vector<int>(d));
    std::vector<std::vector<double>> psi(nq, std::vector<double>(d));
    for (std::size_t b = 0; b < nq; ++b) {
      const ComplexMatrix M = A * qmat[b];
      for (int i = 0; i < d; ++i) {
        int j = 0;
        while (M(i, j) == 0.0) ++j;
        pi[b][i] = j;
        psi[b][i] = std::arg(M(i, j)) / two_pi;
      }
    }
    std::vector<long> level_base(L + 1, 0);
    for (int lv = 1; lv <= L; ++lv) level_base[lv] = level_base[lv - 1] + g.phases[lv - 1];
    const long table_size = level_base[L] + g.phases[L];

    std::vector<Complex> value(table_size);
    for (int mm = 0; mm <= L; ++mm)
      for (int kk = 0; kk < g.phases[mm]; ++kk) value[level_base[mm] + kk] = g.value(mm, kk);
    std::vector<long> member_to_flat(np);
    for (std::size_t f = 0; f < np; ++f) member_to_flat[g.flat_to_member[f]] = static_cast<long>(f);
    // Input level blocks in flat order.
    struct LevelBlock {
      std::vector<int> lv;
      long offset, size;
    };
    std::vector<LevelBlock> blocks;
    for (long code = 0; code < static_cast<long>(g.block_offset.size()); ++code) {
      if (g.block_offset[code] < 0) continue;
      LevelBlock blk{std::vector<int>(d), g.block_offset[code], 1};
      long c = code;
      for (int i = 0; i < d; ++i) {
        blk.lv[i] = static_cast<int>(c % (L + 1));
        c /= L + 1;
        blk.size *= g.phases[blk.lv[i]];
      }
      blocks.push_back(std::move(blk));
    }
    const int max_k = *std::max_element(g.phases.begin(), g.phases.end());

    // Within a block the output levels are fixed and output phase i depends
    // only on input phase pi(i), so each pair costs a handful of additions.
    // Minima are tracked by flat grid position and translated at the end.
    MinTracker total(np);
#pragma omp parallel num_threads(threads)
    {
      MinTracker local(np);
      // New phase index and error at levels m and m - 1, indexed by level_base[m] + k.
      std::vector<int> same_k(d * table_size), low_k(d * table_size);
      std::vector<double> same_e(d * table_size), low_e(d * table_size);
      std::vector<std::vector<long>> contrib(d, std::vector<long>(max_k));
      std::vector<int> lv(d), ol(d), idx(d);
      std::vector<long> ostride(d);
#pragma omp for schedule(dynamic)
      for (long bl = 0; bl < static_cast<long>(nq); ++bl) {
        const std::size_t b = static_cast<std::size_t>(bl);
        if (b == ad) {
          for (std::size_t w = 0; w < np; ++w) {
            const ComplexVector x = P.scalar_column(w);
            local.defect = std::max(local.defect, (x - A * (qmat[b] * x)).cwiseAbs().sum());
            auto& f = local.first[member_to_flat[w]];
            f = std::min(f, antilex_key(b, w, nq));
          }
          continue;
        }
        for (int i = 0; i < d; ++i) {
          const Complex mu = std::polar(1.0, two_pi * psi[b][i]);
          const long o = static_cast<long>(i) * table_size;
          for (int mm = 0; mm <= L; ++mm)
            for (int kk = 0; kk < g.phases[mm]; ++kk) {
              const long t = level_base[mm] + kk;
              const Complex target = mu * value[t];
              same_k[o + t] = rotated_phase(g, mm, kk, mm, psi[b][i]);
              same_e[o + t] = std::abs(value[level_base[mm] + same_k[o + t]] - target);
              if (mm > 0) {
                low_k[o + t] = rotated_phase(g, mm, kk, mm - 1, psi[b][i]);
                low_e[o + t] = std::abs(value[level_base[mm - 1] + low_k[o + t]] - target);
              }
            }
        }
        for (const LevelBlock& blk : blocks) {
          int top = 0;
          bool zero = true;
          for (int i = 0; i < d; ++i) {
            lv[i] = blk.lv[pi[b][i]];
            if (lv[i] > lv[top]) top = i;
            zero = zero && lv[i] == 0;
          }
          if (zero) {  // w = 0
            auto& f = local.first[member_to_flat[0]];
            f = std::min(f, antilex_key(b, 0, nq));
            continue;
          }
          long code = 0, stride = 1, pstride = 1;
          bool out_zero = true;
          for (int i = 0; i < d; ++i) {
            ol[i] = i == top ? lv[i] - 1 : lv[i];
            out_zero = out_zero && ol[i] == 0;
            code += ol[i] * stride;
            stride *= L + 1;
            ostride[i] = pstride;
            pstride *= g.phases[ol[i]];
          }
          const long out_offset = g.block_offset[code];
          double block_err = 0;
          for (int i = 0; i < d; ++i) {
            const int j = pi[b][i];
            const long o = static_cast<long>(i) * table_size + level_base[lv[i]];
            const int* kt = (i == top ? low_k.data() : same_k.data()) + o;
            const double* et = (i == top ? low_e.data() : same_e.data()) + o;
            double worst = 0;
            for (int p = 0; p < g.phases[lv[i]]; ++p) {
              contrib[j][p] = kt[p] * ostride[i];
              worst = std::max(worst, et[p]);
            }
            block_err += worst;
          }
          local.defect = std::max(local.defect, block_err);
          if (out_zero) {
            local.snapped += blk.size;
            local.max_snap = std::max(local.max_snap, block_err);
          }
          // Odometer over input phases, coordinate 0 fastest.
          const int k0 = g.phases[blk.lv[0]];
          const long* c0 = contrib[0].data();
          std::fill(idx.begin(), idx.end(), 0);
          for (long t = 0; t < blk.size; t += k0) {
            long base = out_offset;
            for (int j = 1; j < d; ++j) base += contrib[j][idx[j]];
            const int* members = g.flat_to_member.data() + blk.offset + t;
            for (int p = 0; p < k0; ++p) {
              auto& f = local.first[base + c0[p]];
              f = std::min(f, antilex_key(b, members[p], nq));
            }
            for (int j = 1; j < d; ++j) {
              if (++idx[j] < g.phases[blk.lv[j]]) break;
              idx[j] = 0;
            }
          }
        }
      }
#pragma omp critical
      total.merge(local);
    }
    {
      std::vector<std::uint64_t> by_member(np);
      for (std::size_t f = 0; f < np; ++f) by_member[g.flat_to_member[f]] = total.first[f];
      total.first = std::move(by_member);
    }
    finish(r, total, nq);
    const std::vector<std::vector<int>> pi_c = pi;
    const std::vector<std::vector<double>> psi_c = psi;
    const NetP* pp = &P;
    r.tau = [pp, pi_c, psi_c, ad, d](std::size_t b, std::size_t w) -> std::size_t {
      if (w == 0 || b == ad) return w;
      const ScalarGrid& g = *pp->grid;
      std::vector<int> lv(d), ph(d);
      int top = 0;
      for (int i = 0; i < d; ++i) {
        lv[i] = g.level[w * d + pi_c[b][i]];
        ph[i] = g.phase[w * d + pi_c[b][i]];
        if (lv[i] > lv[top]) top = i;
      }
      std::vector<int> ol(d), ok(d);
      for (int i = 0; i < d; ++i) {
        ol[i] = i == top ? lv[i] - 1 : lv[i];
        ok[i] = rotated_phase(g, lv[i], ph[i], ol[i], psi_c[b][i]);
      }
      return static_cast<std::size_t>(g.member(ol.data(), ok.data()));
    };
    require(r.defect <= eps, ErrorKind::net_resolution, "tau defect exceeds eps");
    require(r.rigid, ErrorKind::internal, "tau is not a rigid surjection");
    return r;
  }

  // General path: every pair is evaluated directly.
  const std::uint64_t cost = P.grid ? r.pairs : r.pairs * static_cast<std::uint64_t>(np);
  require(cost <= options.budget, ErrorKind::budget, "tau needs about " + std::to_string(cost) + " evaluations");
  const Category cat = P.cls == QuotientClass::TPCQ ? Category::Osy : Category::Osp;
  const SpaceDescriptor dom = t_space(P.s, P.q, cat), cod = l1_space(d, P.s, P.q, cat);
  // Shared so that the returned closure owns them.
  auto qshared = std::make_shared<const std::vector<ComplexMatrix>>(std::move(qmat));
  auto pshared = std::make_shared<std::vector<ComplexMatrix>>(np);
  for (std::size_t w = 0; w < np; ++w)
    (*pshared)[w] = P.grid ? ComplexMatrix(P.scalar_column(w)) : P.explicit_maps[w].action;
  const NetP* pp = &P;

  // One evaluation: (tau index, ||tau - ABw||, snapped).
  const auto eval = [pp, qshared, pshared, A, ad, tp, dom, cod, d](std::size_t b, std::size_t w) {
    const auto& qmat = *qshared;
    const auto& pmat = *pshared;
    struct Out {
      std::size_t idx;
      double err;
      bool snap;
    };
    if ((!tp && w == 0) || b == ad) {
      const ComplexMatrix v = A * (qmat[b] * pmat[w]);
      return Out{w, dual_cb_norm({dom, cod, pmat[w] - v}), false};
    }
    const ComplexMatrix v = A * (qmat[b] * pmat[w]);
    if (pp->grid) {
      const ScalarGrid& g = *pp->grid;
      std::vector<int> lv(d), ph(d);
      const ComplexVector col = v.col(0);
      if (tp)
        round_tpcq(g, col, lv.data(), ph.data());
      else
        round_cq(g, col, lv.data(), ph.data());
      const std::size_t idx = static_cast<std::size_t>(g.member(lv.data(), ph.data()));
      return Out{idx, (pmat[idx].col(0) - col).cwiseAbs().sum(), idx == 0};
    }
    const BlockLinearMap phi{dom, cod, v};
    const double c = comparison_norm(phi, pp->cls);
    const auto [idx, dist] = explicit_approximant(*pp, phi, c, false);
    require(idx >= 0, ErrorKind::net_resolution, "no admissible approximant in P");
    return Out{static_cast<std::size_t>(idx), dist, pp->cmp[idx] <= cmp_margin};
  };

  MinTracker total(np);
#pragma omp parallel num_threads(threads)
  {
    MinTracker local(np);
#pragma omp for schedule(dynamic)
    for (long bl = 0; bl < static_cast<long>(nq); ++bl)
      for (std::size_t w = 0; w < np; ++w) {
        const std::size_t b = static_cast<std::size_t>(bl);
        const auto o = eval(b, w);
        local.defect = std::max(local.defect, o.err);
        if (o.snap && w != 0) {
          ++local.snapped;
          local.max_snap = std::max(local.max_snap, o.err);
        }
        local.first[o.idx] = std::min(local.first[o.idx], antilex_key(b, w, nq));
      }
#pragma omp critical
    total.merge(local);
  }
  finish(r, total, nq);
  r.tau = [eval](std::size_t b, std::size_t w) { return eval(b, w).idx; };
  require(r.defect <= eps, ErrorKind::net_resolution, "tau defect exceeds eps");
  require(r.rigid, ErrorKind::internal, "tau is not a rigid surjection");
  return r;
}

nlohmann::json nets_summary_json(const Nets& nets) {
  const NetP& p = nets.P;
  nlohmann::json j;
  j["class"] = to_string(p.cls);
  j["d"] = p.d;
  j["m"] = nets.Q.m;
  j["q"] = p.q;
  j["s"] = p.s;
  j["eps"] = p.eps;
  j["eps0"] = nets.Q.units.eps0;
  j["P_size"] = p.size();
  j["Q_size"] = nets.Q.size();
  j["unitary_net_size"] = nets.Q.units.members.size();
  j["samples"] = p.samples;
  j["sampled_density"] = p.sampled_density;
  j["representation"] = p.grid ? "grid" : "explicit";
  if (p.grid) {
    j["levels"] = p.grid->levels;
    j["phase_counts"] = p.grid->phases;
  }
  return j;
}

nlohmann::json tau_to_json(const TauResult& t) {
  return {{"a_dagger", t.a_dagger},
          {"a_dagger_error", t.a_dagger_error},
          {"defect", t.defect},
          {"rigid", t.rigid},
          {"minima_ok", t.minima_ok},
          {"pairs", t.pairs},
          {"snapped", t.snapped},
          {"max_snap_distance", t.max_snap_distance},
          {"fast_path", t.fast_path}};
}

}  // namespace opramsey
