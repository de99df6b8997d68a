#include "opramsey/kernels.hpp"

#include <functional>

#include "opramsey/parallel.hpp"

namespace opramsey::kernels {

CompiledConstraints compile(const SdpProblem& p) {
  CompiledConstraints c;
  c.num_blocks = static_cast<int>(p.block_dims.size());
  c.terms.resize(p.constraints.size());
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    c.terms[i].resize(c.num_blocks);
    for (const auto& t : p.constraints[i].terms) c.terms[i][t.block].push_back({t.row, t.col, t.value});
  }
  return c;
}

namespace {

// Dense constraint blocks get G = X A_j S^{-1} up front, so that
// tr(A_i X A_j S^{-1}) is one pass over the terms of A_i.
struct SchurCache {
  std::vector<std::vector<ComplexMatrix>> g;  // g[j][b], empty when the block is sparse
};

constexpr std::size_t cache_limit_bytes = std::size_t{256} << 20;

bool dense_enough(const std::vector<CompiledConstraints::Term>& t, long n) {
  return static_cast<long>(t.size()) >= n;
}

ComplexMatrix product(const std::vector<CompiledConstraints::Term>& t, const ComplexMatrix& x,
                      const ComplexMatrix& s_inv) {
  const long n = x.rows();
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (const auto& e : t) a(e.row, e.col) += e.value;
  return x * a * s_inv;
}

SchurCache prepare(const CompiledConstraints& c, const std::vector<ComplexMatrix>& x,
                   const std::vector<ComplexMatrix>& s_inv, bool parallel) {
  SchurCache cache;
  const long m = static_cast<long>(c.terms.size());
  std::size_t bytes = 0;
  for (long j = 0; j < m; ++j)
    for (int b = 0; b < c.num_blocks; ++b)
      if (dense_enough(c.terms[j][b], x[b].rows())) bytes += x[b].size() * sizeof(Complex);
  if (bytes == 0 || bytes > cache_limit_bytes) return cache;
  cache.g.assign(m, std::vector<ComplexMatrix>(c.num_blocks));
  const int threads = parallel ? max_threads() : 1;
#pragma omp parallel for schedule(dynamic, 2) num_threads(threads)
  for (long j = 0; j < m; ++j)
    for (int b = 0; b < c.num_blocks; ++b)
      if (dense_enough(c.terms[j][b], x[b].rows())) cache.g[j][b] = product(c.terms[j][b], x[b], s_inv[b]);
  return cache;
}

double schur_entry(const CompiledConstraints& c, const SchurCache& cache, std::size_t i, std::size_t j,
                   const std::vector<ComplexMatrix>& x, const std::vector<ComplexMatrix>& s_inv) {
  Complex acc(0.0, 0.0);
  for (int b = 0; b < c.num_blocks; ++b) {
    const auto& ti = c.terms[i][b];
    const auto& tj = c.terms[j][b];
    if (ti.empty() || tj.empty()) continue;
    if (!cache.g.empty() && cache.g[j][b].size() > 0) {
      const ComplexMatrix& g = cache.g[j][b];
      for (const auto& a : ti) acc += a.value * g(a.col, a.row);
      continue;
    }
    const ComplexMatrix& xb = x[b];
    const ComplexMatrix& sb = s_inv[b];
    for (const auto& a : ti)
      for (const auto& e : tj) acc += a.value * xb(a.col, e.row) * e.value * sb(e.col, a.row);
  }
  return acc.real();
}

double pair_entry(const CompiledConstraints& c, std::size_t i, const std::vector<ComplexMatrix>& z) {
  double acc = 0.0;
  for (int b = 0; b < c.num_blocks; ++b)
    for (const auto& a : c.terms[i][b]) acc += (a.value * z[b](a.col, a.row)).real();
  return acc;
}

}  // namespace

RealMatrix schur_serial(const CompiledConstraints& c, const std::vector<ComplexMatrix>& x,
                        const std::vector<ComplexMatrix>& s_inv) {
  const std::size_t m = c.terms.size();
  RealMatrix out(m, m);
  const SchurCache cache = prepare(c, x, s_inv, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double v = schur_entry(c, cache, i, j, x, s_inv);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

RealMatrix schur_parallel(const CompiledConstraints& c, const std::vector<ComplexMatrix>& x,
                          const std::vector<ComplexMatrix>& s_inv) {
  const long m = static_cast<long>(c.terms.size());
  RealMatrix out(m, m);
  const int threads = max_threads();
  const SchurCache cache = prepare(c, x, s_inv, true);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (long i = 0; i < m; ++i)
    for (long j = i; j < m; ++j) {
      const double v = schur_entry(c, cache, i, j, x, s_inv);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

RealVector pair_serial(const CompiledConstraints& c, const std::vector<ComplexMatrix>& z) {
  RealVector out(c.terms.size());
  for (std::size_t i = 0; i < c.terms.size(); ++i) out(i) = pair_entry(c, i, z);
  return out;
}

RealVector pair_parallel(const CompiledConstraints& c, const std::vector<ComplexMatrix>& z) {
  const long m = static_cast<long>(c.terms.size());
  RealVector out(m);
  const int threads = max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long i = 0; i < m; ++i) out(i) = pair_entry(c, i, z);
  return out;
}

namespace {

// Restricted growth strings: position `pos` may take any value up to max+1.
std::uint64_t count_from(int pos, int max_used, int n, int k) {
  const int used = max_used + 1;
  if (n - pos < k - used) return 0;
  if (pos == n) return used == k ? 1 : 0;
  std::uint64_t total = 0;
  const int hi = std::min(max_used + 1, k - 1);
  for (int v = 0; v <= hi; ++v) total += count_from(pos + 1, std::max(max_used, v), n, k);
  return total;
}

void prefixes(int len, int n, int k, std::vector<int>& cur, int max_used,
              std::vector<std::pair<int, int>>& out_state, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == len) {
    out.push_back(cur);
    out_state.push_back({len, max_used});
    return;
  }
  const int hi = std::min(max_used + 1, k - 1);
  for (int v = 0; v <= hi; ++v) {
    cur.push_back(v);
    prefixes(len, n, k, cur, std::max(max_used, v), out_state, out);
    cur.pop_back();
  }
}

}  // namespace

std::uint64_t count_epi_serial(int n, int k) {
  if (k == 0) return n == 0 ? 1 : 0;
  if (n < k) return 0;
  return count_from(1, 0, n, k);
}

std::uint64_t count_epi_parallel(int n, int k) {
  if (k == 0) return n == 0 ? 1 : 0;
  if (n < k) return 0;
  const int len = std::min(n, 6);
  std::vector<int> cur{0};
  std::vector<std::pair<int, int>> state;
  std::vector<std::vector<int>> pre;
  prefixes(len, n, k, cur, 0, state, pre);
  const long np = static_cast<long>(pre.size());
  std::uint64_t total = 0;
  const int threads = max_threads();
#pragma omp parallel for schedule(dynamic) reduction(+ : total) num_threads(threads)
  for (long t = 0; t < np; ++t) total += count_from(state[t].first, state[t].second, n, k);
  return total;
}

}  // namespace opramsey::kernels
