// Acceptance run: one PASS/FAIL line per criterion. Arguments select a
// subset by number ("acceptance 3 5"); the exit status is the failure count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opramsey/cbnorm.hpp"
#include "opramsey/cli.hpp"
#include "opramsey/duality.hpp"
#include "opramsey/error.hpp"
#include "opramsey/fraisse.hpp"
#include "opramsey/nets.hpp"
#include "opramsey/parallel.hpp"
#include "opramsey/ramsey.hpp"
#include "opramsey/report.hpp"
#include "opramsey/sdp.hpp"
#include "support.hpp"

using namespace opramsey;
using namespace opramsey::testing;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Keeps the first few failure descriptions for the summary line.
struct Tally {
  int total = 0, failed = 0;
  std::vector<std::string> notes;
  void record(bool ok, const std::string& why) {
    ++total;
    if (ok) return;
    ++failed;
    if (notes.size() < 3) notes.push_back(why);
  }
  std::string summary() const {
    std::string s = std::to_string(total - failed) + "/" + std::to_string(total) + " ok";
    for (const auto& n : notes) s += "; " + n;
    return s;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SpaceDescriptor linf(int d, Category cat = Category::Osp) { return SpaceDescriptor::ell_inf(d, 1, 1, cat); }

// ---- 1 -------------------------------------------------------------------

Outcome transpose_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Tally t;
  std::string values;
  for (int q : {2, 3}) {
    const BlockLinearMap tr = transpose_map(q);
    const double sdp = cb_norm(tr).value;
    const double ascent = sampled_amplification_norm(tr, smith_level(tr.codomain)).value;
    const bool ok = std::abs(sdp - q) <= 1e-5 && std::abs(ascent - q) <= 1e-5 && std::abs(sdp - ascent) <= 1e-5;
    t.record(ok, "q=" + std::to_string(q));
    values += " q=" + std::to_string(q) + ": sdp " + fmt("%.9f", sdp) + ", ascent " + fmt("%.9f", ascent) + ";";
  }
  const double secs = seconds_since(t0);
  t.record(secs <= 60.0, "over 60 s");
  return {t.failed == 0, t.summary() + ";" + values + " " + fmt("%.1f s", secs)};
}

// ---- 2 -------------------------------------------------------------------

Outcome smith_stabilization() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2002);
  const std::vector<SpaceDescriptor> domains = {SpaceDescriptor::matrices(1, 2), SpaceDescriptor::matrices(2, 1),
                                                SpaceDescriptor::matrices(2, 2), linf(2), linf(3),
                                                SpaceDescriptor::full({{1, 1}, {1, 2}})};
  Tally t;
  int stable_at_max = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int q = 1 + trial % 3, s = 1 + (trial / 3) % 3;
    const SpaceDescriptor& dom = domains[trial % domains.size()];
    const BlockLinearMap f = random_map(dom, SpaceDescriptor::matrices(q, s), rng);
    const double cb = cb_norm_value(f);
    const int lo = std::min(q, s), hi = std::max(q, s);
    std::vector<double> v;
    for (int m = 1; m <= hi + 1; ++m) {
      AscentOptions o;
      o.seed = split_seed(trial, m);
      v.push_back(sampled_amplification_norm(f, m, o).value);
    }
    bool monotone = true, constant = true, at_max = true;
    for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] >= v[i - 1] - 1e-5;
    for (int m = lo; m <= hi + 1; ++m) constant = constant && std::abs(v[m - 1] - cb) <= 1e-5;
    for (int m = hi; m <= hi + 1; ++m) at_max = at_max && std::abs(v[m - 1] - cb) <= 1e-5;
    stable_at_max += at_max;
    t.record(monotone && constant, "map " + std::to_string(trial) + " into M_" + std::to_string(q) + "," +
                                       std::to_string(s) + ": level " + std::to_string(lo) + " gives " +
                                       fmt("%.6f", v[lo - 1]) + " vs cb " + fmt("%.6f", cb));
  }
  const double secs = seconds_since(t0);
  t.record(secs <= 300.0, "over 5 min");
  return {t.failed == 0, t.summary() + "; stable from level max(q,s) in " + std::to_string(stable_at_max) +
                             "/50; " + fmt("%.1f s", secs)};
}

// ---- 3 -------------------------------------------------------------------

Outcome coordinate_isometry_lemma() {
  std::mt19937_64 rng(3003);
  Tally t;
  int isometric = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int q = 1 + trial % 2, s = 1 + (trial / 2) % 2, n = 1 + (trial / 4) % 3;
    const SpaceDescriptor x = SpaceDescriptor::matrices(q, s);
    std::vector<BlockLinearMap> components;
    std::bernoulli_distribution iso(0.35);
    std::uniform_real_distribution<double> shrink(0.5, 1.0);
    for (int k = 0; k < n; ++k) {
      const SpaceDescriptor y = (trial + k) % 2 ? x : SpaceDescriptor::full({{q, s}, {1, 1}});
      if (iso(rng)) {
        components.push_back(*random_pattern_embedding(x, y, Category::Osp, rng));
      } else {
        components.push_back(scaled(random_cc_map(x, y, rng), shrink(rng)));
      }
    }
    const bool lemma = lemma_injective_check(components).is_complete_isometry;
    const bool direct = delta_defect(tuple_maps(components)) <= isometry_threshold;
    isometric += direct;
    t.record(lemma == direct, "tuple " + std::to_string(trial));
  }
  return {t.failed == 0, t.summary() + "; " + std::to_string(isometric) + " complete isometries"};
}

// ---- 4 -------------------------------------------------------------------

Outcome duality_suite() {
  std::mt19937_64 rng(4004);
  Tally t;
  int unital = 0, cp = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int q = 1 + trial % 2, d = 1 + (trial / 2) % 3, n = 1 + (trial / 6) % 3;
    BlockLinearMap eta;
    switch ((trial / 18) % 4) {
      case 0: eta = random_ucp(d, n, q, rng); break;
      case 1: eta = random_unital_non_cp(d, n, q, rng); break;
      case 2: eta = random_cp_non_unital(d, n, q, rng); break;
      default:
        eta = random_map(SpaceDescriptor::ell_inf(d, q, q, Category::Osy),
                         SpaceDescriptor::ell_inf(n, q, q, Category::Osy), rng);
    }
    const BlockLinearMap star = dualize(eta);
    const ComplexVector a = random_gaussian(eta.codomain.ambient_dim(), 1, rng).col(0);
    const ComplexVector v = random_gaussian(eta.domain.ambient_dim(), 1, rng).col(0);
    const Complex lhs = pairing(eta.domain, star.action * a, v);
    const Complex rhs = pairing(eta.codomain, a, eta.action * v);
    const bool pair_ok = std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(rhs));
    const bool double_ok = (dualize(star).action - eta.action).cwiseAbs().maxCoeff() <= 1e-10;
    const bool is_unital = ucp_report(eta).unit_residual <= trace_tol;
    const bool is_tp = trace_preservation_check(star, TraceConvention::plain).ok;
    const bool is_cp = choi_and_cp(eta).is_cp;
    const bool dual_cp = choi_and_cp(star).is_cp;
    unital += is_unital;
    cp += is_cp;
    std::string why = "map " + std::to_string(trial) + ":";
    if (!pair_ok) why += " pairing";
    if (!double_ok) why += " double dual";
    if (is_unital != is_tp) why += " unital/trace";
    if (is_cp != dual_cp) why += " CP";
    t.record(pair_ok && double_ok && is_unital == is_tp && is_cp == dual_cp, why);
  }
  return {t.failed == 0,
          t.summary() + "; " + std::to_string(unital) + " unital, " + std::to_string(cp) + " CP samples"};
}

// ---- 5 -------------------------------------------------------------------

Outcome rigid_surjections() {
  const auto t0 = std::chrono::steady_clock::now();
  Tally t;
  std::vector<std::vector<std::uint64_t>> S(11, std::vector<std::uint64_t>(11, 0));
  S[0][0] = 1;
  for (int n = 1; n <= 10; ++n)
    for (int k = 1; k <= n; ++k) S[n][k] = k * S[n - 1][k] + S[n - 1][k - 1];
  for (int n = 1; n <= 10; ++n)
    for (int k = 1; k <= n; ++k) {
      const bool counted = count_epi(n, k) == S[n][k];
      const bool listed = enumerate_epi(n, k).size() == S[n][k];
      t.record(counted && listed, "S(" + std::to_string(n) + "," + std::to_string(k) + ")");
    }
  std::uint64_t compositions = 0;
  for (int n = 1; n <= 6; ++n)
    for (int m = 1; m <= n; ++m) {
      const auto inner = enumerate_epi(n, m);
      for (int k = 1; k <= m; ++k) {
        const auto outer = enumerate_epi(m, k);
        std::set<std::vector<int>> image;
        bool closed = true;
        for (const auto& g : outer)
          for (const auto& f : inner) {
            const RigidSurjection h = compose_epi(g, f);
            closed = closed && h.codomain_size() == k && is_rigid_surjection(h.values(), k);
            image.insert(h.values());
            ++compositions;
          }
        // Every member of Epi(n, k) factors through some m-point order.
        t.record(closed && image.size() == S[n][k],
                 "composition " + std::to_string(n) + "->" + std::to_string(m) + "->" + std::to_string(k));
      }
    }
  const double secs = seconds_since(t0);
  t.record(secs <= 30.0, "over 30 s");
  return {t.failed == 0,
          t.summary() + "; " + std::to_string(compositions) + " compositions; " + fmt("%.1f s", secs)};
}

// ---- 6 -------------------------------------------------------------------

Outcome tau_construction() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(6006);
  const double eps = 0.15, eps0 = 0.05;
  Tally t;
  double worst = 0.0;
  for (QuotientClass cls : {QuotientClass::CQ, QuotientClass::TPCQ}) {
    const Nets nets = build_nets(cls, 2, 2, 1, 1, eps, eps0);
    for (int trial = 0; trial < 25; ++trial) {
      const BlockLinearMap rho = random_quotient(cls, 2, 2, rng);
      const TauResult r = construct_tau(rho, nets, eps);
      worst = std::max(worst, r.defect);
      t.record(r.rigid && r.minima_ok && r.defect <= eps,
               std::string(to_string(cls)) + " map " + std::to_string(trial) + fmt(" defect %.4f", r.defect));
    }
  }
  const double secs = seconds_since(t0);
  t.record(secs <= 300.0, "over 5 min");
  return {t.failed == 0, t.summary() + fmt("; worst defect %.4f", worst) + fmt("; %.1f s", secs)};
}

// ---- 7 -------------------------------------------------------------------

// A random rigid surjection of length len onto {0, ..., k - 1}.
std::vector<int> random_rigid_tuple(int k, int len, std::mt19937_64& rng) {
  std::vector<int> positions(len - 1);
  for (int i = 0; i < len - 1; ++i) positions[i] = i + 1;
  std::shuffle(positions.begin(), positions.end(), rng);
  std::vector<bool> first(len, false);
  first[0] = true;
  for (int i = 0; i < k - 1; ++i) first[positions[i]] = true;
  std::vector<int> out(len);
  int seen = 0;
  for (int i = 0; i < len; ++i) {
    if (first[i]) {
      out[i] = seen++;
    } else {
      out[i] = std::uniform_int_distribution<int>(0, seen - 1)(rng);
    }
  }
  return out;
}

Outcome encoding_soundness() {
  std::mt19937_64 rng(7007);
  NetOptions scalar;
  scalar.samples = 100;
  NetOptions blocks;
  blocks.samples = 20;
  blocks.extra_members = 2;
  std::vector<Nets> nets;
  for (QuotientClass cls : {QuotientClass::CQ, QuotientClass::TPCQ}) {
    nets.push_back(build_nets(cls, 2, 2, 1, 1, 0.8, 0.8, scalar));
    nets.push_back(build_nets(cls, 2, 2, 2, 2, 2.5, 4.5, blocks));
  }
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Nets& n = nets[trial % nets.size()];
    const int k = static_cast<int>(n.P.size());
    const int len = k + std::uniform_int_distribution<int>(0, 4)(rng);
    const BlockLinearMap alpha = encode_alpha(n, random_rigid_tuple(k, len, rng));
    const StructureReport r = structure_check(alpha, n.P.cls);
    worst = std::max(worst, r.norm_residual);
    t.record(r.ok && r.pattern_violations == 0 && r.norm_residual <= 1e-8, "encoding " + std::to_string(trial));
  }
  return {t.failed == 0, t.summary() + fmt("; largest norm residual %.2e", worst)};
}

// ---- 8 -------------------------------------------------------------------

std::vector<SpaceDescriptor> amalgamation_pool(Category cat) {
  using S = SpaceDescriptor;
  if (cat == Category::Osp)
    return {linf(1), linf(2), linf(3), S::matrices(1, 2), S::matrices(2, 2), S::full({{1, 1}, {2, 2}}),
            S::matrices(2, 3), S::ell_inf(2, 2, 2)};
  return {linf(1, cat), linf(2, cat), linf(3, cat), linf(4, cat), S::matrices(2, 2, cat),
          S::full({{1, 1}, {2, 2}}, cat), S::full({{1, 1}, {1, 1}, {2, 2}}, cat), S::ell_inf(2, 2, 2, cat)};
}

struct Triple {
  SpaceDescriptor x, y, z;
};

// Random X, Y, Z from the pool with X embedding into both.
Triple random_triple(Category cat, std::mt19937_64& rng) {
  const auto pool = amalgamation_pool(cat);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (;;) {
    const SpaceDescriptor& x = pool[pick(rng)];
    const SpaceDescriptor& y = pool[pick(rng)];
    const SpaceDescriptor& z = pool[pick(rng)];
    if (random_pattern_embedding(x, y, cat, rng) && random_pattern_embedding(x, z, cat, rng)) return {x, y, z};
  }
}

ClassConfig class_config(Category cat, bool pointed) {
  ClassConfig c;
  c.category = cat;
  c.pointed = pointed;
  return c;
}

Outcome amalgamation_moduli() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(8008);
  const double deltas[] = {0.0, 0.05, 0.1};
  const double slack = 0.01;
  Tally t;
  double worst_margin = -1.0;
  std::string per_class;
  for (int cls = 0; cls < 3; ++cls) {
    const auto c0 = std::chrono::steady_clock::now();
    const bool pointed = cls == 2;
    for (int trial = 0; trial < 50; ++trial) {
      const Category cat = cls == 1 || (pointed && trial % 2) ? Category::Osy : Category::Osp;
      const ClassConfig cfg = class_config(cat, pointed);
      const double delta = deltas[trial % 3];
      const Triple tr = random_triple(cat, rng);
      AmalgamationWitness w;
      if (pointed) {
        const SpaceDescriptor r = trial % 4 < 2 ? linf(1, cat) : SpaceDescriptor::matrices(2, 2, cat);
        const PointedInstance p = random_pointed_instance(tr.x, tr.y, tr.z, r, delta, cat, rng);
        w = amalgamate_pointed(p.x, p.y, p.z, p.phi.map, p.psi.map, BlockLinearMap::identity(r), cfg, slack);
      } else {
        const auto phi = random_delta_embedding(tr.x, tr.y, delta, cat, rng);
        const auto psi = random_delta_embedding(tr.x, tr.z, delta, cat, rng);
        w = amalgamate(phi.map, psi.map, cfg, slack);
      }
      const bool ok = w.delta <= delta + isometry_threshold && w.i_defect <= isometry_threshold &&
                      w.j_defect <= isometry_threshold && w.pointed_residual <= isometry_threshold &&
                      w.defect <= cfg.modulus(w.delta) + slack;
      worst_margin = std::max(worst_margin, w.defect - cfg.modulus(w.delta) - slack);
      static const char* names[] = {"Osp", "Osy", "pointed"};
      t.record(ok, std::string(names[cls]) + " instance " + std::to_string(trial) + fmt(" defect %.4f", w.defect) +
                       fmt(" bound %.4f", cfg.modulus(w.delta) + slack));
    }
    per_class += fmt(" %.0f s", seconds_since(c0));
  }
  const double secs = seconds_since(t0);
  t.record(secs <= 600.0, "over 10 min");
  return {t.failed == 0, t.summary() + fmt("; largest defect minus bound %.4f", worst_margin) + ";" + per_class +
                             fmt(" (total %.1f s)", secs)};
}

// ---- 9 -------------------------------------------------------------------

Outcome perturbation() {
  std::mt19937_64 rng(9009);
  std::uniform_real_distribution<double> small(0.01, 0.1);
  const double eps = 0.2;
  Tally t;
  int psd = 0, certified = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int q = 1 + trial % 2, pieces = 2 + (trial / 2) % 2;
    const SpaceDescriptor mq = SpaceDescriptor::matrices(q, q, Category::Osy);
    const BlockLinearMap eta = random_ucp(pieces, 1, q, rng);
    const int k = q * q;
    std::vector<BlockLinearMap> psi;
    for (int i = 0; i + 1 < pieces; ++i) psi.push_back({mq, mq, eta.action.middleCols(i * k, k)});
    // Shrinking the last piece keeps 1 - y >= 0; growing it makes 1 - y <= 0.
    const double factor = trial % 3 == 0 ? 1.0 : trial % 3 == 1 ? 1.0 - small(rng) : 1.0 + small(rng);
    const BlockLinearMap phi_d{mq, mq, factor * eta.action.rightCols(k)};
    const ComplexMatrix g = random_gaussian(q, q, rng);
    const PerturbResult r = perturb_ucp(psi, phi_d, MatrixState::make(g * g.adjoint()), eps);
    psd += r.one_minus_y_psd;
    certified += r.cp_certified;
    t.record(r.unitality_residual <= 1e-12 && r.distance < eps && (!r.one_minus_y_psd || r.cp_certified),
             "instance " + std::to_string(trial));
  }
  return {t.failed == 0, t.summary() + "; 1 - y >= 0 in " + std::to_string(psd) + ", CP certified in " +
                             std::to_string(certified)};
}

// ---- 10 ------------------------------------------------------------------

SdpProblem min_eig_problem(const std::vector<ComplexMatrix>& blocks, double trace) {
  SdpProblem p;
  SdpConstraint tr;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int n = static_cast<int>(blocks[b].rows());
    p.block_dims.push_back(n);
    p.objective.push_back(blocks[b]);
    tr.add_dense(static_cast<int>(b), ComplexMatrix::Identity(n, n));
  }
  tr.rhs = trace;
  p.constraints.push_back(tr);
  return p;
}

Outcome sdp_conformance() {
  std::mt19937_64 rng(10010);
  std::uniform_int_distribution<int> dim(1, 20), count(1, 3);
  Tally t;
  double worst_err = 0.0, worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ComplexMatrix> blocks;
    double analytic = INFINITY;
    for (int b = count(rng); b > 0; --b) {
      const int n = dim(rng);
      blocks.push_back(hermitian_part(random_gaussian(n, n, rng)));
      analytic = std::min(analytic, min_eigenvalue(blocks.back()));
    }
    const SdpSolution s = solve_sdp(min_eig_problem(blocks, 1.0));
    const double err = std::abs(s.primal_value - analytic);
    worst_err = std::max(worst_err, err);
    worst_gap = std::max(worst_gap, s.gap);
    t.record(s.status == SdpStatus::optimal && err <= 1e-6 && s.gap <= 1e-7,
             "instance " + std::to_string(trial) + " " + to_string(s.status) + fmt(" error %.2e", err));
  }
  int infeasible = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = dim(rng);
    const SdpSolution s = solve_sdp(min_eig_problem({hermitian_part(random_gaussian(n, n, rng))}, -1.0 - trial));
    const bool ok = s.status == SdpStatus::infeasible && s.certificate_strength > 1e-7;
    infeasible += ok;
    t.record(ok, "infeasible instance " + std::to_string(trial) + " " + to_string(s.status));
  }
  return {t.failed == 0, t.summary() + fmt("; largest error %.2e", worst_err) + fmt(", largest gap %.2e", worst_gap) +
                             "; " + std::to_string(infeasible) + "/10 infeasible certified"};
}

// ---- 11 ------------------------------------------------------------------

std::vector<std::vector<std::string>> cli_commands() {
  const auto m2 = SpaceDescriptor::matrices(2, 2);
  const std::string t2 = map_to_json(transpose_map(2)).dump();
  ComplexMatrix c(2, 2);
  c << 1.0, Complex(0.0, 0.5), Complex(0.0, -0.5), 2.0;
  SdpProblem p;
  p.block_dims = {2};
  p.objective = {c};
  SdpConstraint tr;
  tr.add_dense(0, ComplexMatrix::Identity(2, 2));
  tr.rhs = 1.0;
  p.constraints.push_back(tr);
  const auto sc = SpaceDescriptor::matrices(1, 1, Category::Osy);
  const json perturb = {{"psi", {map_to_json(BlockLinearMap{sc, sc, ComplexMatrix::Constant(1, 1, 0.7)})}},
                        {"phi_d", map_to_json(BlockLinearMap{sc, sc, ComplexMatrix::Constant(1, 1, 0.25)})},
                        {"state", matrix_to_json(ComplexMatrix::Identity(1, 1))}};
  const json constant = {{"kind", "discrete"}, {"colors", 2}, {"rule", "constant"}};
  const json hashed = {{"kind", "discrete"}, {"colors", 2}, {"rule", "hash"}, {"seed", 5}};
  const std::string l1 = space_to_json(linf(1)).dump(), l2 = space_to_json(linf(2)).dump(),
                    l2y = space_to_json(linf(2, Category::Osy)).dump(), l1y = space_to_json(linf(1, Category::Osy)).dump(),
                    l3y = space_to_json(linf(3, Category::Osy)).dump(), sm2 = space_to_json(m2).dump();
  NetOptions o;
  o.samples = 100;
  const Nets nets = build_nets(QuotientClass::CQ, 2, 2, 1, 1, 0.8, 0.8, o);
  std::vector<int> tuple;
  for (std::size_t i = 0; i < nets.P.size(); ++i) tuple.push_back(static_cast<int>(i));
  tuple.push_back(0);
  const std::vector<std::string> net_flags = {"--class", "CQ", "--d", "2", "--m", "2", "--eps", "0.8",
                                              "--eps0", "0.8", "--samples", "100"};
  auto with_net = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), net_flags.begin(), net_flags.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const json arp = {{"x", space_to_json(linf(1))}, {"y", space_to_json(linf(2))}, {"z", space_to_json(linf(2))},
                    {"coloring", hashed}, {"eps", 0.1}, {"net_eps", 0.5}, {"budget", 8}};
  return {
      {"sdp", "solve", "--in", problem_to_json(p).dump()},
      {"cbnorm", "--map", t2},
      {"choi", "--map", t2},
      {"choi", "--map", t2, "--format", "csv"},
      {"dualize", "--map", t2},
      {"ucp", "check", "--map", t2},
      {"perturb", "--data", perturb.dump(), "--eps", "0.1"},
      {"epi", "count", "7", "3"},
      {"epi", "list", "4", "2"},
      {"drt", "search", "--n", "4", "--r", "2", "--s", "3", "--coloring", constant.dump()},
      with_net({"nets", "build"}, {}),
      with_net({"alpha", "encode"}, {"--tuple", json(tuple).dump()}),
      with_net({"tau", "demo"}, {}),
      {"amalgamate", "--x", l1, "--y", l2, "--z", sm2, "--delta", "0.05"},
      {"amalgamate", "--x", l1y, "--y", l2y, "--z", l3y, "--class", "Osy", "--delta", "0.1"},
      {"amalgamate-pointed", "--x", l1y, "--y", l2y, "--z", l2y, "--r", l1y, "--class", "Osy", "--delta", "0.05"},
      {"ghdist", "--x", l2, "--y", l2, "--budget", "8"},
      {"embnet", "--x", l1, "--z", l2, "--eps", "0.5", "--samples", "50"},
      {"arp", "search", "--config", arp.dump()},
  };
}

Outcome cli_determinism() {
  Tally t;
  for (auto args : cli_commands()) {
    args.push_back("--seed");
    args.push_back("17");
    std::ostringstream first, err;
    const std::string name = args[0] + (args.size() > 1 && args[1].rfind("--", 0) != 0 ? " " + args[1] : "");
    if (run_command(args, first, err) != exit_code::ok) {
      t.record(false, name + " failed: " + err.str().substr(0, 80));
      continue;
    }
    const bool csv = std::find(args.begin(), args.end(), "csv") != args.end();
    if (csv) {
      // The CSV body follows the manifest comment lines.
      std::ostringstream second, err2;
      run_command(args, second, err2);
      auto body = [](const std::string& s) {
        std::string out, line;
        std::istringstream in(s);
        while (std::getline(in, line))
          if (line.empty() || line[0] != '#') out += line + "\n";
        return out;
      };
      t.record(body(first.str()) == body(second.str()) && !body(first.str()).empty(), name + " csv differs");
      continue;
    }
    const json report = json::parse(first.str());
    const RunManifest m = manifest_from_json(report.at("manifest"));
    std::vector<std::string> argv = m.argv;
    argv.push_back("--seed");
    argv.push_back(std::to_string(m.seed));
    std::ostringstream again, err2;
    const int code = run_command(argv, again, err2);
    const bool same = code == exit_code::ok && payload_bytes(json::parse(again.str())) == payload_bytes(report) &&
                      json::parse(again.str()).at("manifest").at("config_hash") == report.at("manifest").at("config_hash");
    t.record(same, name + " replay differs");
  }
  return {t.failed == 0, t.summary() + " commands replayed"};
}

struct Criterion {
  int number;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "cb norm of the transpose", transpose_exactness},
      {2, "Smith stabilization of amplification norms", smith_stabilization},
      {3, "tuples and the coordinate-isometry lemma", coordinate_isometry_lemma},
      {4, "duality suite", duality_suite},
      {5, "rigid surjection counts and composition", rigid_surjections},
      {6, "tau construction", tau_construction},
      {7, "encoding soundness", encoding_soundness},
      {8, "amalgamation moduli", amalgamation_moduli},
      {9, "unital perturbation", perturbation},
      {10, "SDP conformance", sdp_conformance},
      {11, "CLI replay determinism", cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << c.number << ": " << (o.pass ? "PASS" : "FAIL") << " | " << c.title << " | "
              << o.detail << std::endl;
  }
  return failures;
}
