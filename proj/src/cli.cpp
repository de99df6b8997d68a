#include "opramsey/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "opramsey/duality.hpp"
#include "opramsey/error.hpp"
#include "opramsey/fraisse.hpp"
#include "opramsey/nets.hpp"
#include "opramsey/parallel.hpp"
#include "opramsey/ramsey.hpp"
#include "opramsey/report.hpp"

namespace opramsey {

namespace {

using nlohmann::json;

struct Flag {
  std::string name;
  std::optional<json> fallback;  // empty: required; null: optional without value
  std::string help;
};

class Inputs {
 public:
  json values = json::object();
  std::uint64_t seed = 1;

  const json& at(const std::string& k) const { return values.at(k); }
  bool given(const std::string& k) const { return values.contains(k) && !values[k].is_null(); }
  double real(const std::string& k) const { return at(k).get<double>(); }
  int integer(const std::string& k) const { return at(k).get<int>(); }
  std::string text(const std::string& k) const { return at(k).get<std::string>(); }
  SpaceDescriptor space(const std::string& k) const { return space_from_json(at(k)); }
  BlockLinearMap map(const std::string& k) const { return map_from_json(at(k)); }
};

struct Command {
  std::string module, verb;
  std::string summary;
  std::vector<std::string> positionals;
  std::vector<Flag> flags;
  std::function<json(const Inputs&)> run;

  std::string name() const { return verb.empty() ? module : module + " " + verb; }
};

ClassConfig class_config(const std::string& name) {
  ClassConfig c;
  c.category = category_from_string(name);
  return c;
}

json ucp_json(const UcpReport& r) {
  return {{"is_ucp", r.is_ucp}, {"unit_residual", r.unit_residual}, {"choi_min_eig", r.choi_min_eig}};
}

json drt_json(const DrtResult& r) {
  json j = {{"found", r.gamma.has_value()}, {"examined", r.examined}, {"candidates", r.candidates}};
  j["gamma"] = r.gamma ? epi_to_json(*r.gamma) : json(nullptr);
  j["color"] = r.color ? json(*r.color) : json(nullptr);
  return j;
}

Nets nets_from(const Inputs& in) {
  NetOptions o;
  o.samples = in.integer("samples");
  o.extra_members = in.integer("extra");
  o.seed = in.seed;
  return build_nets(quotient_class_from_string(in.text("class")), in.integer("d"), in.integer("m"), in.integer("q"),
                    in.integer("s"), in.real("eps"), in.real("eps0"), o);
}

std::vector<Flag> net_flags(double eps, double eps0) {
  return {{"class", json("CQ"), "CQ or TPCQ"},
          {"d", json(2), "target dimension"},
          {"m", json(2), "source dimension"},
          {"q", json(1), "block rows"},
          {"s", json(1), "block columns"},
          {"eps", json(eps), "net radius for P"},
          {"eps0", json(eps0), "net radius for the unitary part of Q"},
          {"samples", json(1000), "density samples"},
          {"extra", json(0), "random members added to explicit nets"}};
}

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {
      {"sdp", "solve", "solve a block SDP given as JSON", {},
       {{"in", std::nullopt, "problem JSON"}, {"tol", json(1e-8), "tolerance"}, {"max_iter", json(200), "iterations"}},
       [](const Inputs& in) {
         SdpOptions o;
         o.tol = in.real("tol");
         o.max_iter = in.integer("max_iter");
         return solution_to_json(solve_sdp(problem_from_json(in.at("in")), o));
       }},
      {"cbnorm", "", "cb norm with certificates", {},
       {{"map", std::nullopt, "map JSON"}, {"tol", json(1e-6), "certificate tolerance"}},
       [](const Inputs& in) { return certificate_to_json(cb_norm(in.map("map"), in.real("tol"))); }},
      {"choi", "", "Choi matrix and complete positivity", {}, {{"map", std::nullopt, "map JSON"}},
       [](const Inputs& in) {
         const ChoiReport r = choi_and_cp(in.map("map"));
         return json{{"choi", matrix_to_json(r.choi.matrix)},
                     {"domain_size", r.choi.domain_size},
                     {"codomain_size", r.choi.codomain_size},
                     {"is_cp", r.is_cp},
                     {"min_eig", r.min_eig}};
       }},
      {"dualize", "", "trace dual of a map", {}, {{"map", std::nullopt, "map JSON"}},
       [](const Inputs& in) {
         const BlockLinearMap f = in.map("map");
         return json{{"dual", map_to_json(dualize(f))}};
       }},
      {"ucp", "check", "unital complete positivity", {}, {{"map", std::nullopt, "map JSON"}},
       [](const Inputs& in) { return ucp_json(ucp_report(in.map("map"))); }},
      {"perturb", "", "unital perturbation of a completely positive sum", {},
       {{"data", std::nullopt, "{\"psi\": [maps], \"phi_d\": map, \"state\": density matrix}"},
        {"eps", json(0.1), "target distance"}},
       [](const Inputs& in) {
         const json& d = in.at("data");
         std::vector<BlockLinearMap> psi;
         for (const auto& m : d.at("psi")) psi.push_back(map_from_json(m));
         const MatrixState s = MatrixState::make(matrix_from_json(d.at("state")));
         return perturb_to_json(perturb_ucp(psi, map_from_json(d.at("phi_d")), s, in.real("eps")));
       }},
      {"epi", "count", "number of rigid surjections n -> k", {"n", "k"}, {},
       [](const Inputs& in) {
         return json{{"n", in.integer("n")}, {"k", in.integer("k")},
                     {"count", count_epi(in.integer("n"), in.integer("k"))}};
       }},
      {"epi", "list", "rigid surjections n -> k in lexicographic order", {"n", "k"},
       {{"limit", json(100000), "largest list written"}},
       [](const Inputs& in) {
         const int n = in.integer("n"), k = in.integer("k");
         const std::uint64_t count = count_epi(n, k);
         require(count <= static_cast<std::uint64_t>(in.integer("limit")), ErrorKind::budget,
                 "Epi(" + std::to_string(n) + ", " + std::to_string(k) + ") has " + std::to_string(count) +
                     " members, above --limit");
         json list = json::array();
         for (const auto& f : enumerate_epi(n, k)) list.push_back(epi_to_json(f));
         return json{{"n", n}, {"k", k}, {"count", count}, {"surjections", list}};
       }},
      {"drt", "search", "monochromatic family search", {},
       {{"n", std::nullopt, "domain size"},
        {"r", std::nullopt, "|R|"},
        {"s", std::nullopt, "|S|"},
        {"coloring", std::nullopt, "coloring JSON"},
        {"cap", json(drt_default_cap), "candidate cap"}},
       [](const Inputs& in) {
         return drt_json(drt_search(in.integer("n"), in.integer("r"), in.integer("s"),
                                    coloring_from_json(in.at("coloring")), in.at("cap").get<std::uint64_t>()));
       }},
      {"nets", "build", "nets P and Q for the encodings", {}, net_flags(0.5, 0.3),
       [](const Inputs& in) { return nets_summary_json(nets_from(in)); }},
      {"alpha", "encode", "encode a tuple over P (or pairs over Q x P)", {},
       [] {
         auto f = net_flags(0.5, 0.3);
         f.push_back({"tuple", json(nullptr), "indices into P"});
         f.push_back({"pairs", json(nullptr), "[[b, w], ...] over Q x P"});
         return f;
       }(),
       [](const Inputs& in) {
         const Nets n = nets_from(in);
         require(in.given("tuple") != in.given("pairs"), ErrorKind::parameter, "give exactly one of --tuple, --pairs");
         const BlockLinearMap alpha =
             in.given("tuple") ? encode_alpha(n, in.at("tuple").get<std::vector<int>>())
                               : encode_alpha_pairs(n, in.at("pairs").get<std::vector<std::pair<int, int>>>());
         return json{{"alpha", map_to_json(alpha)}, {"structure", structure_to_json(structure_check(alpha, n.P.cls))}};
       }},
      {"tau", "demo", "rigid surjection transferring colorings along a quotient", {},
       [] {
         auto f = net_flags(0.5, 0.3);
         f.push_back({"rho", json(nullptr), "quotient map (random when absent)"});
         f.push_back({"budget", json(4'000'000'000ULL), "pair evaluations"});
         return f;
       }(),
       [](const Inputs& in) {
         const Nets n = nets_from(in);
         BlockLinearMap rho;
         if (in.given("rho")) {
           rho = in.map("rho");
         } else {
           require(in.integer("q") == 1 && in.integer("s") == 1, ErrorKind::unsupported,
                   "random quotients are scalar; pass --rho for matrix blocks");
           std::mt19937_64 rng(split_seed(in.seed, 0x726f));
           rho = random_quotient(n.P.cls, in.integer("d"), in.integer("m"), rng);
         }
         TauOptions o;
         o.budget = in.at("budget").get<std::uint64_t>();
         return json{{"rho", map_to_json(rho)},
                     {"nets", nets_summary_json(n)},
                     {"tau", tau_to_json(construct_tau(rho, n, in.real("eps"), o))}};
       }},
      {"amalgamate", "", "stable amalgamation witness", {},
       {{"x", std::nullopt, "space X"},
        {"y", std::nullopt, "space Y"},
        {"z", std::nullopt, "space Z"},
        {"class", json("Osp"), "Osp or Osy"},
        {"delta", json(0.0), "defect of the random embeddings"},
        {"eps", json(1e-6), "slack added to the modulus"},
        {"phi", json(nullptr), "X -> Y (random when absent)"},
        {"psi", json(nullptr), "X -> Z (random when absent)"}},
       [](const Inputs& in) {
         const ClassConfig cfg = class_config(in.text("class"));
         std::mt19937_64 rng(split_seed(in.seed, 0x616d));
         const BlockLinearMap phi = in.given("phi") ? in.map("phi")
                                                    : random_delta_embedding(in.space("x"), in.space("y"),
                                                                             in.real("delta"), cfg.category, rng)
                                                          .map;
         const BlockLinearMap psi = in.given("psi") ? in.map("psi")
                                                    : random_delta_embedding(in.space("x"), in.space("z"),
                                                                             in.real("delta"), cfg.category, rng)
                                                          .map;
         return json{{"phi", map_to_json(phi)},
                     {"psi", map_to_json(psi)},
                     {"witness", witness_to_json(amalgamate(phi, psi, cfg, in.real("eps")))}};
       }},
      {"amalgamate-pointed", "", "pointed amalgamation witness on a random instance", {},
       {{"x", std::nullopt, "space X"},
        {"y", std::nullopt, "space Y"},
        {"z", std::nullopt, "space Z"},
        {"r", std::nullopt, "space R"},
        {"class", json("Osp"), "Osp or Osy"},
        {"delta", json(0.0), "defect of the random embeddings"},
        {"eps", json(1e-6), "slack added to the modulus"},
        {"theta", json(nullptr), "R -> R0 (identity when absent)"}},
       [](const Inputs& in) {
         const ClassConfig cfg = class_config(in.text("class"));
         std::mt19937_64 rng(split_seed(in.seed, 0x706f));
         const PointedInstance p = random_pointed_instance(in.space("x"), in.space("y"), in.space("z"),
                                                           in.space("r"), in.real("delta"), cfg.category, rng);
         const BlockLinearMap theta =
             in.given("theta") ? in.map("theta") : BlockLinearMap::identity(p.x.distinguished.codomain);
         const auto w = amalgamate_pointed(p.x, p.y, p.z, p.phi.map, p.psi.map, theta, cfg, in.real("eps"));
         return json{{"s_x", map_to_json(p.x.distinguished)},
                     {"s_y", map_to_json(p.y.distinguished)},
                     {"s_z", map_to_json(p.z.distinguished)},
                     {"phi", map_to_json(p.phi.map)},
                     {"psi", map_to_json(p.psi.map)},
                     {"witness", witness_to_json(w)}};
       }},
      {"ghdist", "", "upper bounds for d_C and d_BM", {},
       {{"x", std::nullopt, "space X"}, {"y", std::nullopt, "space Y"}, {"budget", json(32), "evaluations"}},
       [](const Inputs& in) {
         return distance_to_json(distance_estimate(in.space("x"), in.space("y"), in.integer("budget"), in.seed));
       }},
      {"embnet", "", "finite net of embeddings", {},
       {{"x", std::nullopt, "space X"},
        {"z", std::nullopt, "space Z"},
        {"eps", json(0.5), "net radius"},
        {"class", json("Osp"), "Osp or Osy"},
        {"samples", json(200), "samples per density round"},
        {"max_members", json(400), "member cap"}},
       [](const Inputs& in) {
         return emb_net_to_json(emb_net(in.space("x"), in.space("z"), in.real("eps"), in.seed,
                                        category_from_string(in.text("class")), in.integer("samples"),
                                        in.integer("max_members")));
       }},
      {"arp", "search", "approximate Ramsey search over embedding nets", {},
       {{"config", std::nullopt, "{x, y, z, coloring, eps, net_eps, budget, category}"}},
       [](const Inputs& in) {
         const json& c = in.at("config");
         ArpConfig cfg;
         cfg.eps = c.value("eps", cfg.eps);
         cfg.net_eps = c.value("net_eps", cfg.net_eps);
         cfg.budget = c.value("budget", cfg.budget);
         cfg.seed = c.value("seed", in.seed);
         cfg.category = category_from_string(c.value("category", std::string("Osp")));
         return arp_to_json(arp_search(space_from_json(c.at("x")), space_from_json(c.at("y")),
                                       space_from_json(c.at("z")), coloring_from_json(c.at("coloring")), cfg));
       }},
  };
  return all;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::parameter, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Inline JSON, @file, or a bare word taken as a string.
std::pair<std::string, json> resolve(const std::string& raw) {
  const std::string text = !raw.empty() && raw[0] == '@' ? read_file(raw.substr(1)) : raw;
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  return {text, value};
}

int exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::budget:
      return exit_code::budget;
    case ErrorKind::internal:
    case ErrorKind::sdp_failure:
    case ErrorKind::net_construction:
    case ErrorKind::net_resolution:
      return exit_code::failure;
    default:
      return exit_code::precondition;
  }
}

void write_atomically(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), ErrorKind::parameter, "cannot write " + path);
    f << bytes;
  }
  std::filesystem::rename(tmp, path);
}

const Command* find_command(const std::vector<std::string>& args, std::size_t& consumed) {
  if (args.empty()) return nullptr;
  for (const auto& c : commands()) {
    if (c.module != args[0]) continue;
    if (c.verb.empty()) {
      consumed = 1;
      return &c;
    }
    if (args.size() > 1 && args[1] == c.verb) {
      consumed = 2;
      return &c;
    }
  }
  return nullptr;
}

int replay(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  require(args.size() == 2, ErrorKind::parameter, "usage: opramsey replay <report.json>");
  const json report = json::parse(resolve("@" + args[1]).first);
  const RunManifest m = manifest_from_json(report.at("manifest"));
  std::vector<std::string> argv = m.argv;
  argv.push_back("--seed");
  argv.push_back(std::to_string(m.seed));
  std::ostringstream fresh, diag;
  const int code = run_command(argv, fresh, diag);
  if (code != exit_code::ok) {
    err << diag.str();
    return code;
  }
  const json again = json::parse(fresh.str());
  const bool identical = payload_bytes(again) == payload_bytes(report);
  const bool same_hash = again.at("manifest").at("config_hash").get<std::uint64_t>() == m.config_hash;
  out << canonical_json({{"command", m.command}, {"identical", identical}, {"config_hash_match", same_hash}}) << "\n";
  return identical && same_hash ? exit_code::ok : exit_code::failure;
}

}  // namespace

std::string usage_text() {
  std::string s = "usage: opramsey <module> [verb] [flags]\n\ncommands:\n";
  for (const auto& c : commands()) {
    std::string line = "  " + c.name();
    for (const auto& p : c.positionals) line += " <" + p + ">";
    line.resize(std::max<std::size_t>(line.size() + 1, 28), ' ');
    s += line + c.summary + "\n";
  }
  s += "  replay <report.json>      rerun a report from its manifest and compare payloads\n";
  s += "\ncommon flags: --seed N, --format json|csv, --out FILE, --help\n"
       "flag values are inline JSON, @file, or bare words; OPRAMSEY_THREADS caps parallelism\n";
  return s;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && args[0] == "replay") {
    try {
      return replay(args, out, err);
    } catch (const Error& e) {
      err << e.what() << "\n";
      return exit_for(e.kind());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return exit_code::precondition;
    }
  }
  if (!args.empty() && (args[0] == "--help" || args[0] == "-h" || args[0] == "help")) {
    out << usage_text();
    return exit_code::ok;
  }
  std::size_t consumed = 0;
  const Command* cmd = find_command(args, consumed);
  if (!cmd) {
    err << (args.empty() ? "missing subcommand" : "unknown subcommand '" + args[0] + "'") << "\n\n" << usage_text();
    return exit_code::usage;
  }

  CLI::App app(cmd->summary, "opramsey " + cmd->name());
  std::map<std::string, std::string> raw;
  std::vector<std::string> positional(cmd->positionals.size());
  for (std::size_t i = 0; i < cmd->positionals.size(); ++i)
    app.add_option(cmd->positionals[i], positional[i], cmd->positionals[i])->required();
  for (const auto& f : cmd->flags) {
    auto* opt = app.add_option("--" + f.name, raw[f.name], f.help);
    if (!f.fallback) opt->required();
  }
  std::string seed_text = "1", format_text = "json", out_path;
  app.add_option("--seed", seed_text, "64-bit seed");
  app.add_option("--format", format_text, "json or csv");
  app.add_option("--out", out_path, "report file (default stdout)");
  std::vector<std::string> rest(args.begin() + static_cast<long>(consumed), args.end());
  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return exit_code::precondition;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    Inputs in;
    RunManifest manifest;
    manifest.command = cmd->name();
    manifest.argv = {cmd->module};
    if (!cmd->verb.empty()) manifest.argv.push_back(cmd->verb);
    for (std::size_t i = 0; i < positional.size(); ++i) {
      const auto [text, value] = resolve(positional[i]);
      in.values[cmd->positionals[i]] = value;
      manifest.argv.push_back(text);
    }
    for (const auto& f : cmd->flags) {
      if (!raw[f.name].empty()) {
        const auto [text, value] = resolve(raw[f.name]);
        in.values[f.name] = value;
        manifest.argv.push_back("--" + f.name);
        manifest.argv.push_back(text);
      } else {
        in.values[f.name] = *f.fallback;
      }
    }
    try {
      in.seed = std::stoull(seed_text);
    } catch (const std::exception&) {
      fail(ErrorKind::parameter, "--seed must be a nonnegative integer");
    }
    const ReportFormat format = report_format_from_string(format_text);
    manifest.seed = in.seed;
    manifest.config_hash = config_hash({{"command", manifest.command}, {"inputs", in.values}, {"seed", in.seed}});

    const json payload = cmd->run(in);
    manifest.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    const std::string bytes = emit_report(payload, manifest, format);
    if (out_path.empty())
      out << bytes;
    else
      write_atomically(out_path, bytes);
    return exit_code::ok;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return exit_code::precondition;
  }
}

}  // namespace opramsey
