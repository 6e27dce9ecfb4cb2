// chipfire: labeled chip-firing games on directed k-ary trees.
//
// Subcommands: catalan, kappa, simulate, enumerate, analyze. Exit code 0
// on success, 3 when a verification mode reports a finding (conjecture
// violation or fuzz escape), nonzero otherwise.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chipfire/combinatorics.hpp"
#include "chipfire/search.hpp"
#include "chipfire/strategy.hpp"
#include "chipfire/tree.hpp"
#include "chipfire/version.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::json;
using namespace chipfire;

constexpr int kExitFinding = 3;

json big_to_json(const BigCount& v) {
  if (v >= std::numeric_limits<int64_t>::min() &&
      v <= std::numeric_limits<int64_t>::max()) {
    return v.convert_to<int64_t>();
  }
  return v.str();
}

GuardOptions guard_from_env(bool force) {
  GuardOptions guard;
  guard.force = force;
  if (const char* cap = std::getenv("CHIPFIRE_MAX_CONFIGS")) {
    guard.cap = BigCount(cap);
  }
  return guard;
}

class Stopwatch {
 public:
  int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string perm_to_text(const std::vector<ChipLabel>& seq) {
  std::ostringstream out;
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) out << ' ';
    out << seq[i];
  }
  return out.str();
}

std::string csv_quote(const std::string& s) { return '"' + s + '"'; }

struct SimulateArgs {
  int k = 2;
  int ell = 0;
  std::string strategy = "identity";
  bool plan = false;
  bool dump = false;
  std::string format = "text";
};

int run_simulate(const SimulateArgs& args) {
  TreeParams p(args.k, args.ell);
  Strategy strat = args.strategy.rfind("compose:", 0) == 0
                       ? [&] {
                           std::ifstream in(args.strategy.substr(8));
                           if (!in) {
                             throw std::invalid_argument("cannot open compose spec file: " +
                                                         args.strategy.substr(8));
                           }
                           std::stringstream buf;
                           buf << in.rdbuf();
                           return parse_compose_spec(buf.str(), args.k);
                         }()
                       : strategy_from_name(args.strategy);

  Stopwatch timer;
  auto outcome = stabilize_full(Configuration::initial(p), strat);

  if (args.format == "json") {
    json doc;
    doc["k"] = args.k;
    doc["ell"] = args.ell;
    doc["strategy"] = strat.name();
    doc["perm"] = outcome.perm.seq();
    if (args.plan) {
      json events = json::array();
      for (const auto& e : outcome.plan.events) {
        events.push_back({{"vertex", e.vertex}, {"tuple", e.tuple}});
      }
      doc["plan"] = std::move(events);
    }
    doc["duration_ms"] = timer.ms();
    doc["version"] = std::string(kVersion);
    doc["command"] = "simulate --k " + std::to_string(args.k) + " --ell " +
                     std::to_string(args.ell) + " --strategy " + args.strategy;
    std::cout << doc.dump() << "\n";
    return 0;
  }

  if (args.dump) {
    Configuration c = Configuration::initial(p);
    std::cout << "# initial\n" << c.dump();
    for (const auto& e : outcome.plan.events) {
      c.apply_fire(e);
      std::cout << "# after v" << e.vertex << " fires " << perm_to_text(e.tuple)
                << "\n"
                << c.dump();
    }
    std::cout << "# stable\n";
  }
  std::cout << outcome.perm.to_string() << "\n";
  if (args.plan) {
    for (const auto& e : outcome.plan.events) {
      std::cout << 'v' << e.vertex << ": " << perm_to_text(e.tuple) << "\n";
    }
  }
  return 0;
}

struct EnumerateArgs {
  int k = 2;
  int ell = 0;
  std::string mode = "count";
  int jobs = 1;
  std::optional<uint64_t> limit;
  bool force = false;
  std::string format = "text";
  uint64_t seed = 0;
  uint64_t trials = 1000;
};

void emit_report(const EnumerateArgs& args, const json& fields,
                 const std::string& witness_text, int64_t duration_ms) {
  json doc = fields;
  doc["k"] = args.k;
  doc["ell"] = args.ell;
  doc["mode"] = args.mode;
  doc["duration_ms"] = duration_ms;
  doc["version"] = std::string(kVersion);
  std::ostringstream cmd;
  cmd << "enumerate --k " << args.k << " --ell " << args.ell << " --mode "
      << args.mode << " --jobs " << args.jobs;
  if (args.mode == "fuzz") cmd << " --seed " << args.seed << " --trials " << args.trials;
  if (args.force) cmd << " --force";
  doc["command"] = cmd.str();

  if (args.format == "json") {
    std::cout << doc.dump() << "\n";
    return;
  }
  if (args.format == "csv") {
    std::cout << "k,ell,mode,value,closed_form,verdict,explored,pruned,duration_ms,witness\n";
    auto cell = [&](const char* key) {
      if (!doc.contains(key)) return std::string();
      const auto& v = doc[key];
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    std::cout << args.k << ',' << args.ell << ',' << args.mode << ',' << cell("value")
              << ',' << cell("closed_form") << ',' << cell("verdict") << ','
              << cell("explored") << ',' << cell("pruned") << ',' << duration_ms << ','
              << csv_quote(witness_text) << "\n";
    return;
  }
  // text
  if (args.mode == "count") {
    std::cout << doc["value"] << "\n";
    return;
  }
  std::cout << args.mode << ": value=" << doc["value"].dump();
  if (doc.contains("closed_form")) std::cout << " closed_form=" << doc["closed_form"].dump();
  if (doc.contains("verdict")) std::cout << " verdict=" << doc["verdict"].get<std::string>();
  if (doc.contains("explored")) std::cout << " explored=" << doc["explored"].dump();
  if (doc.contains("pruned")) std::cout << " pruned=" << doc["pruned"].dump();
  std::cout << "\n";
  if (!witness_text.empty()) std::cout << "witness: " << witness_text << "\n";
}

int run_enumerate(const EnumerateArgs& args) {
  TreeParams p(args.k, args.ell);
  GuardOptions guard = guard_from_env(args.force);
  Stopwatch timer;

  if (args.mode == "list") {
    BigCount total = kappa(args.k, args.ell);
    if (total > guard.cap) {
      if (!args.force) {
        throw SizeGuardError(
            "listing this size exceeds the cap; pass --force with an explicit --limit");
      }
      if (!args.limit) {
        throw SizeGuardError("listing a guarded size needs an explicit --limit");
      }
    }
    auto perms = list_stable(p, args.jobs, args.limit, guard);
    if (args.format == "json") {
      json doc;
      doc["k"] = args.k;
      doc["ell"] = args.ell;
      doc["mode"] = "list";
      doc["value"] = perms.size();
      json list = json::array();
      for (const auto& sp : perms) list.push_back(sp.seq());
      doc["perms"] = std::move(list);
      doc["duration_ms"] = timer.ms();
      doc["version"] = std::string(kVersion);
      std::cout << doc.dump() << "\n";
    } else {
      for (const auto& sp : perms) std::cout << sp.to_string() << "\n";
    }
    return 0;
  }
  if (args.mode == "count") {
    uint64_t n = count_stable(p, args.jobs, guard);
    emit_report(args, json{{"value", n}}, "", timer.ms());
    return 0;
  }
  if (args.mode == "max-inversions") {
    auto r = max_inversions_search(p, args.jobs, guard);
    emit_report(args,
                json{{"value", big_to_json(r.value)},
                     {"closed_form", big_to_json(r.closed_form)},
                     {"witness", r.witness.seq()},
                     {"explored", r.explored},
                     {"pruned", r.pruned}},
                r.witness.to_string(), timer.ms());
    return 0;
  }
  if (args.mode == "max-lds") {
    auto r = max_lds_search(p, args.jobs, true, guard);
    emit_report(args,
                json{{"value", big_to_json(r.value)},
                     {"closed_form", big_to_json(r.closed_form)},
                     {"witness", r.witness.seq()},
                     {"explored", r.explored},
                     {"pruned", r.pruned}},
                r.witness.to_string(), timer.ms());
    return 0;
  }
  if (args.mode == "conjecture") {
    auto r = verify_conjecture(p, args.jobs, guard);
    json fields{{"value", r.d_value},
                {"closed_form", r.z_value},
                {"verdict", r.consistent ? "CONSISTENT" : "VIOLATED"},
                {"witness", r.witness.seq()},
                {"explored", r.explored},
                {"pruned", r.pruned}};
    if (r.violation_plan) {
      json events = json::array();
      for (const auto& e : r.violation_plan->events) {
        events.push_back({{"vertex", e.vertex}, {"tuple", e.tuple}});
      }
      fields["violation_plan"] = std::move(events);
    }
    emit_report(args, fields, r.witness.to_string(), timer.ms());
    return r.consistent ? 0 : kExitFinding;
  }
  if (args.mode == "fuzz") {
    auto r = reachability_fuzz(p, args.trials, args.seed, guard);
    json fields{{"value", r.escapes},
                {"verdict", r.escapes == 0 ? "CONSISTENT" : "VIOLATED"},
                {"trials", r.trials},
                {"seed", r.seed},
                {"rng", std::string(kRngName)}};
    std::string witness_text;
    if (r.first_escape) {
      fields["escape_trial"] = r.first_escape->trial;
      fields["escape_perm"] = r.first_escape->perm;
      witness_text = perm_to_text(r.first_escape->perm);
    }
    emit_report(args, fields, witness_text, timer.ms());
    return r.escapes == 0 ? 0 : kExitFinding;
  }
  throw CLI::ValidationError("unknown mode: " + args.mode);
}

struct AnalyzeArgs {
  std::vector<std::string> tokens;
  std::string file;
  std::vector<int> pattern;
  std::string format = "text";
};

int run_analyze(const AnalyzeArgs& args) {
  std::vector<int> perm;
  if (!args.file.empty()) {
    std::ifstream in(args.file);
    if (!in) throw std::invalid_argument("cannot open file: " + args.file);
    int x;
    while (in >> x) perm.push_back(x);
  } else {
    for (const auto& t : args.tokens) perm.push_back(std::stoi(t));
  }
  if (perm.empty()) throw std::invalid_argument("no permutation given");
  {
    std::vector<char> seen(perm.size() + 1, 0);
    for (int x : perm) {
      if (x < 1 || static_cast<size_t>(x) > perm.size() ||
          seen[static_cast<size_t>(x)]) {
        throw std::invalid_argument("input is not a permutation of 1..n");
      }
      seen[static_cast<size_t>(x)] = 1;
    }
  }

  uint64_t inv = inversions_u64(perm);
  int d = lds(perm);
  std::optional<PatternMatch> match;
  if (!args.pattern.empty()) match = contains_pattern(perm, args.pattern);

  if (args.format == "json") {
    json doc;
    doc["perm"] = perm;
    doc["inversions"] = inv;
    doc["lds"] = d;
    if (match) {
      doc["pattern"] = args.pattern;
      doc["contains"] = match->found;
      if (match->found) doc["witness_positions"] = match->positions;
    }
    doc["version"] = std::string(kVersion);
    std::cout << doc.dump() << "\n";
    return 0;
  }
  std::cout << "inversions: " << inv << "\n";
  std::cout << "lds: " << d << "\n";
  if (match) {
    if (match->found) {
      std::cout << "pattern: contains at positions";
      for (auto pos : match->positions) std::cout << ' ' << pos;
      std::cout << "\n";
    } else {
      std::cout << "pattern: absent\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labeled chip-firing on directed k-ary trees"};
  app.set_version_flag("--version", "chipfire " + std::string(kVersion));
  app.require_subcommand(1);

  auto* catalan_cmd =
      app.add_subcommand("catalan", "k-dimensional Catalan number C_{k,m}");
  int cat_k = 2;
  int64_t cat_m = 0;
  catalan_cmd->add_option("--k", cat_k, "dimension")->required();
  catalan_cmd->add_option("--m", cat_m, "index")->required();

  auto* kappa_cmd =
      app.add_subcommand("kappa", "number of stable configurations of the k^ell game");
  int kap_k = 2, kap_ell = 0;
  kappa_cmd->add_option("--k", kap_k, "branching factor")->required();
  kappa_cmd->add_option("--ell", kap_ell, "exponent")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "stabilize one game under a strategy");
  sim_cmd->add_option("--k", sim.k, "branching factor")->required();
  sim_cmd->add_option("--ell", sim.ell, "exponent")->required();
  sim_cmd->add_option("--strategy", sim.strategy,
                      "identity | unbundle | random:<seed> | compose:<spec-file>")
      ->required();
  sim_cmd->add_flag("--plan", sim.plan, "print every firing event in order");
  sim_cmd->add_flag("--dump", sim.dump, "print the configuration after each firing");
  sim_cmd->add_option("--format", sim.format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));

  EnumerateArgs en;
  auto* en_cmd =
      app.add_subcommand("enumerate", "exhaustive search over stable configurations");
  en_cmd->add_option("--k", en.k, "branching factor")->required();
  en_cmd->add_option("--ell", en.ell, "exponent")->required();
  en_cmd->add_option("--mode", en.mode,
                     "list | count | max-inversions | max-lds | conjecture | fuzz")
      ->required()
      ->check(CLI::IsMember(
          {"list", "count", "max-inversions", "max-lds", "conjecture", "fuzz"}));
  en_cmd->add_option("--jobs", en.jobs, "worker threads");
  uint64_t limit_raw = 0;
  auto* limit_opt = en_cmd->add_option("--limit", limit_raw, "cap on listed results");
  en_cmd->add_flag("--force", en.force, "override the size guard");
  en_cmd->add_option("--format", en.format, "text | json | csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  en_cmd->add_option("--seed", en.seed, "fuzz seed");
  en_cmd->add_option("--trials", en.trials, "fuzz trials");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "statistics of an arbitrary permutation");
  an_cmd->add_option("perm", an.tokens, "permutation as space-separated integers");
  an_cmd->add_option("--file", an.file, "read the permutation from a file");
  an_cmd->add_option("--pattern", an.pattern, "report containment of this pattern");
  an_cmd->add_option("--format", an.format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*catalan_cmd) {
      std::cout << kd_catalan(cat_k, cat_m) << "\n";
      return 0;
    }
    if (*kappa_cmd) {
      std::cout << kappa(kap_k, kap_ell) << "\n";
      return 0;
    }
    if (*sim_cmd) return run_simulate(sim);
    if (*en_cmd) {
      if (*limit_opt) en.limit = limit_raw;
      return run_enumerate(en);
    }
    if (*an_cmd) return run_analyze(an);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
