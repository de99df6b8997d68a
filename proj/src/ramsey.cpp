#include "opramsey/ramsey.hpp"

#include <algorithm>
#include <limits>

#include "opramsey/cbnorm.hpp"
#include "opramsey/error.hpp"
#include "opramsey/parallel.hpp"

namespace opramsey {

bool is_rigid_surjection(const std::vector<int>& values, int k) {
  int max_used = -1;
  for (int v : values) {
    if (v < 0 || v >= k || v > max_used + 1) return false;
    max_used = std::max(max_used, v);
  }
  return max_used + 1 == k;
}

RigidSurjection::RigidSurjection(std::vector<int> values, int codomain_size)
    : values_(std::move(values)), k_(codomain_size) {
  require(codomain_size >= 0, ErrorKind::parameter, "codomain size must be nonnegative");
  require(is_rigid_surjection(values_, k_), ErrorKind::rigidity, "values '" + str() + "' are not a rigid surjection onto " +
                                                                     std::to_string(k_));
}

RigidSurjection RigidSurjection::identity(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return {std::move(v), n};
}

std::string RigidSurjection::str() const {
  std::string s;
  for (int v : values_) {
    if (!s.empty() && k_ > 10) s += ',';
    s += std::to_string(v);
  }
  return s;
}

namespace {

constexpr std::uint64_t saturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > saturated - b ? saturated : a + b; }

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > saturated / b ? saturated : a * b;
}

// completions[rem][used]: ways to fill `rem` more positions ending with exactly k values used.
std::vector<std::vector<std::uint64_t>> completions(int n, int k) {
  std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(k + 2, 0));
  if (k >= 0) c[0][k] = 1;
  for (int rem = 1; rem <= n; ++rem)
    for (int used = 0; used <= k; ++used) {
      std::uint64_t v = sat_mul(static_cast<std::uint64_t>(used), c[rem - 1][used]);
      if (used < k) v = sat_add(v, c[rem - 1][used + 1]);
      c[rem][used] = v;
    }
  return c;
}

bool visit_from(int pos, int max_used, int n, int k, std::vector<int>& cur,
                const std::function<bool(const std::vector<int>&)>& visit) {
  if (n - pos < k - (max_used + 1)) return true;
  if (pos == n) return max_used + 1 == k ? visit(cur) : true;
  const int hi = std::min(max_used + 1, k - 1);
  for (int v = 0; v <= hi; ++v) {
    cur[pos] = v;
    if (!visit_from(pos + 1, std::max(max_used, v), n, k, cur, visit)) return false;
  }
  return true;
}

}  // namespace

void for_each_epi(int n, int k, const std::function<bool(const std::vector<int>&)>& visit) {
  require(n >= 0 && k >= 0, ErrorKind::parameter, "Epi(n, k) needs n, k >= 0");
  if (n < k) return;
  std::vector<int> cur(n, 0);
  if (n == 0) {
    visit(cur);
    return;
  }
  if (k == 0) return;
  visit_from(1, 0, n, k, cur, visit);
}

std::vector<RigidSurjection> enumerate_epi(int n, int k) {
  std::vector<RigidSurjection> out;
  for_each_epi(n, k, [&](const std::vector<int>& v) {
    out.emplace_back(v, k);
    return true;
  });
  return out;
}

std::uint64_t count_epi(int n, int k) {
  require(n >= 0 && k >= 0, ErrorKind::parameter, "Epi(n, k) needs n, k >= 0");
  if (n < k) return 0;
  if (n == 0) return 1;
  if (k == 0) return 0;
  return completions(n, k)[n - 1][1];
}

std::uint64_t epi_rank(const RigidSurjection& f) {
  const int n = f.domain_size(), k = f.codomain_size();
  if (n == 0) return 0;
  const auto c = completions(n, k);
  std::uint64_t rank = 0;
  int max_used = 0;
  for (int pos = 1; pos < n; ++pos) {
    for (int v = 0; v < f(pos); ++v) rank = sat_add(rank, c[n - pos - 1][std::max(max_used, v) + 1]);
    max_used = std::max(max_used, f(pos));
  }
  return rank;
}

RigidSurjection compose_epi(const RigidSurjection& outer, const RigidSurjection& inner) {
  require(inner.codomain_size() == outer.domain_size(), ErrorKind::shape,
          "inner codomain must equal outer domain");
  std::vector<int> v(inner.domain_size());
  for (int i = 0; i < inner.domain_size(); ++i) v[i] = outer(inner(i));
  return {std::move(v), outer.codomain_size()};
}

ColoringSpec ColoringSpec::discrete(int r, Rule rule, std::uint64_t seed) {
  require(r >= 1, ErrorKind::parameter, "a coloring needs at least one color");
  ColoringSpec c;
  c.r = r;
  c.rule = rule;
  c.seed = seed;
  return c;
}

ColoringSpec ColoringSpec::lookup(int r, std::vector<int> table) {
  ColoringSpec c = discrete(r, Rule::table);
  for (int v : table) require(v >= 0 && v < r, ErrorKind::parameter, "table color out of range");
  c.table = std::move(table);
  return c;
}

ColoringSpec ColoringSpec::lipschitz(std::vector<BlockLinearMap> reference) {
  require(!reference.empty(), ErrorKind::parameter, "a Lipschitz coloring needs a reference set");
  ColoringSpec c;
  c.kind = Kind::lipschitz;
  c.reference = std::move(reference);
  return c;
}

int ColoringSpec::color(std::uint64_t index, const std::vector<int>* values) const {
  require(kind == Kind::discrete, ErrorKind::parameter, "integer colors need a discrete coloring");
  switch (rule) {
    case Rule::constant:
      return 0;
    case Rule::table:
      require(index < table.size(), ErrorKind::parameter, "coloring table too short");
      return table[index];
    case Rule::hash:
      return static_cast<int>(split_seed(seed, index) % static_cast<std::uint64_t>(r));
    case Rule::preimage_count: {
      require(values != nullptr, ErrorKind::parameter, "preimage_count colors need the map values");
      return static_cast<int>(std::count(values->begin(), values->end(), 0) % r);
    }
  }
  return 0;
}

double ColoringSpec::value(const BlockLinearMap& f, std::uint64_t index) const {
  if (kind == Kind::discrete) return static_cast<double>(color(index));
  double best = 1.0;
  for (const auto& ref : reference) best = std::min(best, cb_norm_value(f - ref));
  return std::clamp(best, 0.0, 1.0);
}

namespace {

const char* rule_name(ColoringSpec::Rule r) {
  switch (r) {
    case ColoringSpec::Rule::constant:
      return "constant";
    case ColoringSpec::Rule::table:
      return "table";
    case ColoringSpec::Rule::hash:
      return "hash";
    case ColoringSpec::Rule::preimage_count:
      return "preimage_count";
  }
  return "constant";
}

}  // namespace

nlohmann::json coloring_to_json(const ColoringSpec& c) {
  if (c.kind == ColoringSpec::Kind::lipschitz) {
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& f : c.reference) refs.push_back(map_to_json(f));
    return {{"kind", "lipschitz"}, {"reference", refs}};
  }
  nlohmann::json j = {{"kind", "discrete"}, {"r", c.r}, {"rule", rule_name(c.rule)}, {"seed", c.seed}};
  if (c.rule == ColoringSpec::Rule::table) j["table"] = c.table;
  return j;
}

ColoringSpec coloring_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "discrete");
  if (kind == "lipschitz") {
    std::vector<BlockLinearMap> refs;
    for (const auto& f : j.at("reference")) refs.push_back(map_from_json(f));
    return ColoringSpec::lipschitz(std::move(refs));
  }
  require(kind == "discrete", ErrorKind::parameter, "unknown coloring kind '" + kind + "'");
  const int r = j.value("r", 1);
  const std::string rule = j.value("rule", r == 1 ? "constant" : "hash");
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});
  if (rule == "constant") return ColoringSpec::discrete(r, ColoringSpec::Rule::constant, seed);
  if (rule == "hash") return ColoringSpec::discrete(r, ColoringSpec::Rule::hash, seed);
  if (rule == "preimage_count") return ColoringSpec::discrete(r, ColoringSpec::Rule::preimage_count, seed);
  if (rule == "table") return ColoringSpec::lookup(r, j.at("table").get<std::vector<int>>());
  fail(ErrorKind::parameter, "unknown coloring rule '" + rule + "'");
}

DrtResult drt_search(int n, int r_size, int s_size, const ColoringSpec& coloring, std::uint64_t cap) {
  require(coloring.kind == ColoringSpec::Kind::discrete, ErrorKind::precondition,
          "the dual Ramsey search needs a discrete coloring");
  require(n >= s_size && s_size >= r_size && r_size >= 0, ErrorKind::parameter, "need n >= S >= R >= 0");
  DrtResult res;
  res.candidates = count_epi(n, s_size);
  require(res.candidates <= cap, ErrorKind::budget,
          "|Epi(n, S)| = " + std::to_string(res.candidates) + " exceeds the cap " + std::to_string(cap));
  const std::vector<RigidSurjection> sigmas = enumerate_epi(s_size, r_size);

  // Color of the family sigma o gamma, or -1 when it is not monochromatic.
  const auto family_color = [&](const std::vector<int>& gamma) {
    int color = -1;
    std::vector<int> comp(gamma.size());
    for (const auto& sigma : sigmas) {
      for (std::size_t i = 0; i < gamma.size(); ++i) comp[i] = sigma(gamma[i]);
      const int c = coloring.color(epi_rank(RigidSurjection(comp, r_size)), &comp);
      if (color >= 0 && c != color) return -1;
      color = c;
    }
    return color;
  };

  constexpr std::size_t chunk = 4096;
  std::vector<std::vector<int>> batch;
  bool found = false;
  const auto flush = [&] {
    const long nb = static_cast<long>(batch.size());
    long first = nb;
    std::vector<int> colors(batch.size(), -1);
    const int threads = max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads) reduction(min : first)
    for (long t = 0; t < nb; ++t) {
      colors[t] = family_color(batch[t]);
      if (colors[t] >= 0) first = std::min(first, t);
    }
    if (first < nb) {
      res.gamma = RigidSurjection(batch[first], s_size);
      res.color = colors[first];
      res.examined += first + 1;
      found = true;
    } else {
      res.examined += nb;
    }
    batch.clear();
  };
  for_each_epi(n, s_size, [&](const std::vector<int>& g) {
    batch.push_back(g);
    if (batch.size() == chunk) flush();
    return !found;
  });
  if (!found && !batch.empty()) flush();
  return res;
}

nlohmann::json epi_to_json(const RigidSurjection& f) {
  return {{"domain_size", f.domain_size()}, {"codomain_size", f.codomain_size()}, {"values", f.values()}};
}

RigidSurjection epi_from_json(const nlohmann::json& j) {
  return {j.at("values").get<std::vector<int>>(), j.at("codomain_size").get<int>()};
}

}  // namespace opramsey
