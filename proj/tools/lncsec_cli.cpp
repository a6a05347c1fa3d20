// lncsec: analytical and Monte Carlo exposure experiments over a scenario.
//
//   lncsec run --mode compare --policy both --k 4,8 --r 0,1,2,3 --out results.csv
//   lncsec validate --scenario scenarios/nsfnet.cfg
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lncsec/analysis.hpp"
#include "lncsec/sim.hpp"

namespace {

using namespace lncsec;

constexpr int exit_usage = 1;
constexpr int exit_validation = 2;
constexpr int exit_runtime = 3;

const char* const metric_names[] = {"lambda_fraction", "lambda_star",  "theta_eavesdrop",  "theta_jam",
                                    "blocking",        "jam_success", "eavesdrop_success"};
constexpr std::size_t metric_count = std::size(metric_names);

struct run_options {
  std::string scenario_path;
  std::string mode = "compare";
  std::string policy = "both";
  std::vector<std::size_t> k{4, 8};
  std::vector<std::size_t> r{0, 1, 2, 3};
  std::vector<std::string> attack_edges;
  std::string subsets = "all";
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  std::size_t blocks = 20;
  std::string out;
  std::string summary;
  bool exercise_codec = false;
  std::size_t block_length = default_block_length;
  unsigned field_bits = 8;
  std::uint32_t field_poly = 0x11D;
  unsigned threads = 0;
  bool quiet = false;
};

std::string default_scenario() {
  const std::string local = "scenarios/nsfnet.cfg";
  if (std::filesystem::exists(local)) return local;
  return std::string(LNCSEC_SCENARIO_DIR) + "/nsfnet.cfg";
}

// Opens `file` for writing, creating missing parent directories.
std::optional<std::ofstream> open_output(const std::string& file) {
  const auto parent = std::filesystem::path(file).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream f(file, std::ios::binary);
  if (!f) return std::nullopt;
  return f;
}

std::string subset_label(const edge_set& s) {
  std::string out;
  for (const auto& e : s) {
    if (!out.empty()) out += '+';
    out += e.str();
  }
  return out;
}

std::vector<edge_set> attack_subsets(const std::vector<edge_key>& edges, const std::string& which) {
  std::vector<edge_set> out;
  if (edges.empty()) return out;
  if (which == "single") {
    for (const auto& e : edges) out.push_back({e});
  } else if (which == "union") {
    out.emplace_back(edges.begin(), edges.end());
  } else {
    // non-empty subsets ordered by size, then by bitmask
    const std::size_t n = edges.size();
    for (std::size_t size = 1; size <= n; ++size) {
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
        edge_set s;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask >> i & 1u) s.insert(edges[i]);
        }
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

struct cell_values {
  std::optional<double> analytical, operational;
  std::optional<metric_estimate> simulated;
};

std::string fmt(const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string{}; }

std::array<double, metric_count> report_metrics(const exposure_report& rep) {
  // decode outcomes follow path counts, so *_success equals the matching theta
  return {rep.lambda_fraction(), rep.lambda_star,     rep.theta_eavesdrop, rep.theta_jam,
          rep.blocking,          rep.theta_jam,       rep.theta_eavesdrop};
}

std::optional<exposure_report> try_evaluate(const scenario& sc, const edge_set& wiretap, selection kind,
                                            std::size_t k, std::size_t r, std::size_t m, rnd_model model) {
  try {
    return evaluate(sc.paths, wiretap, kind, k, r, m, model);
  } catch (const undefined_expectation_error&) {
    return std::nullopt;
  }
}

int run(const run_options& opt) {
  if (opt.mode != "analyze" && opt.mode != "simulate" && opt.mode != "compare") {
    std::cerr << "error: --mode must be analyze, simulate or compare\n";
    return exit_usage;
  }
  if (opt.policy != "opt" && opt.policy != "rnd" && opt.policy != "both") {
    std::cerr << "error: --policy must be opt, rnd or both\n";
    return exit_usage;
  }
  if (opt.subsets != "all" && opt.subsets != "single" && opt.subsets != "union") {
    std::cerr << "error: --subsets must be all, single or union\n";
    return exit_usage;
  }
  if (opt.k.empty() || opt.r.empty()) {
    std::cerr << "error: --k and --r sweeps must be non-empty\n";
    return exit_usage;
  }
  if (std::find(opt.k.begin(), opt.k.end(), 0u) != opt.k.end()) {
    std::cerr << "error: every k must be >= 1\n";
    return exit_usage;
  }

  const std::string file = opt.scenario_path.empty() ? default_scenario() : opt.scenario_path;
  std::optional<scenario> loaded;
  try {
    loaded = load_scenario_file(file);
  } catch (const load_error& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return exit_validation;
  }
  const scenario& sc = *loaded;

  std::vector<edge_key> edges;
  if (opt.attack_edges.empty()) {
    edges.assign(sc.attack.eavesdrop.begin(), sc.attack.eavesdrop.end());
  } else {
    try {
      for (const auto& text : opt.attack_edges) edges.push_back(parse_edge_key(text));
    } catch (const precondition_error& e) {
      std::cerr << "error: --attack-edges: " << e.what() << "\n";
      return exit_usage;
    }
  }
  for (const auto& e : edges) {
    if (!sc.topo.contains(e)) {
      std::cerr << "error: attack edge " << e.str() << " is not in the topology\n";
      return exit_validation;
    }
  }
  const auto subsets = attack_subsets(edges, opt.subsets);
  if (subsets.empty()) {
    std::cerr << "error: no attack edges given and the scenario declares none\n";
    return exit_usage;
  }
  for (auto k : opt.k) {
    for (auto r : opt.r) {
      if (k + r > sc.paths.size()) {
        std::cerr << "error: xi = " << k + r << " exceeds the " << sc.paths.size() << " declared paths\n";
        return exit_validation;
      }
    }
  }

  std::vector<selection> policies;
  if (opt.policy != "rnd") policies.push_back(selection::opt);
  if (opt.policy != "opt") policies.push_back(selection::rnd);

  const bool analyze = opt.mode != "simulate";
  const bool simulate = opt.mode != "analyze";
  std::optional<galois_field> field;
  if (opt.exercise_codec) field.emplace(field_spec{opt.field_bits, opt.field_poly});

  std::ostringstream csv;
  csv << "scenario,policy,k,r,xi,attack,metric,analytical,analytical_operational,simulated,ci_halfwidth\n";
  nlohmann::json cells = nlohmann::json::array();
  std::size_t in_ci = 0, compared = 0;

  const std::size_t total = policies.size() * opt.k.size() * opt.r.size();
  std::size_t done = 0;
  for (auto kind : policies) {
    for (auto k : opt.k) {
      for (auto r : opt.r) {
        std::optional<sim_report> sim;
        if (simulate) {
          trial_config cfg;
          cfg.scene = &sc;
          cfg.policy = kind;
          cfg.k = k;
          cfg.r = r;
          cfg.secret_blocks = opt.blocks;
          cfg.trials = opt.trials;
          cfg.seed = opt.seed;
          cfg.attack_subsets = subsets;
          cfg.threads = opt.threads;
          if (field) cfg.codec = codec_options{&*field, opt.block_length};
          sim = run_experiment(cfg, false);
        }
        for (std::size_t s = 0; s < subsets.size(); ++s) {
          std::array<cell_values, metric_count> vals;
          if (analyze) {
            const auto verbatim = try_evaluate(sc, subsets[s], kind, k, r, opt.blocks, rnd_model::verbatim);
            const auto operational =
                try_evaluate(sc, subsets[s], kind, k, r, opt.blocks, rnd_model::operational);
            for (std::size_t i = 0; i < metric_count; ++i) {
              if (verbatim) vals[i].analytical = report_metrics(*verbatim)[i];
              if (operational) vals[i].operational = report_metrics(*operational)[i];
            }
          }
          if (sim) {
            const auto& est = sim->subsets[s];
            const metric_estimate m[] = {est.lambda_fraction, est.lambda_star, est.theta_eavesdrop, est.theta_jam,
                                         sim->blocking,       est.jam_success, est.eavesdrop_success};
            for (std::size_t i = 0; i < metric_count; ++i) vals[i].simulated = m[i];
          }

          nlohmann::json cell{{"policy", to_string(kind)}, {"k", k},   {"r", r},
                              {"xi", k + r},               {"attack", subset_label(subsets[s])}};
          for (std::size_t i = 0; i < metric_count; ++i) {
            const auto& v = vals[i];
            csv << sc.name << ',' << to_string(kind) << ',' << k << ',' << r << ',' << k + r << ','
                << subset_label(subsets[s]) << ',' << metric_names[i] << ',' << fmt(v.analytical) << ','
                << fmt(v.operational) << ','
                << (v.simulated ? detail::format_double(v.simulated->mean) : std::string{}) << ','
                << (v.simulated ? detail::format_double(v.simulated->half_width) : std::string{}) << '\n';
            nlohmann::json entry = nlohmann::json::object();
            if (v.analytical) entry["analytical"] = *v.analytical;
            if (v.operational) entry["analytical_operational"] = *v.operational;
            if (v.simulated) {
              entry["simulated"] = v.simulated->mean;
              entry["ci_halfwidth"] = v.simulated->half_width;
            }
            if (v.simulated && v.operational) {
              const bool ok = std::abs(v.simulated->mean - *v.operational) <= v.simulated->half_width + 1e-12;
              entry["within_ci"] = ok;
              in_ci += ok;
              ++compared;
            }
            cell[metric_names[i]] = entry;
          }
          cells.push_back(std::move(cell));
        }
        ++done;
        if (!opt.quiet) std::cerr << "[" << done << "/" << total << "] " << to_string(kind) << " k=" << k << " r=" << r << "\n";
      }
    }
  }

  if (opt.out.empty() || opt.out == "-") {
    std::cout << csv.str();
  } else {
    auto f = open_output(opt.out);
    if (!f) {
      std::cerr << "error: cannot write " << opt.out << "\n";
      return exit_runtime;
    }
    *f << csv.str();
  }

  if (!opt.summary.empty()) {
    nlohmann::json doc{{"scenario", sc.name},
                       {"scenario_file", file},
                       {"mode", opt.mode},
                       {"trials", simulate ? nlohmann::json(opt.trials) : nlohmann::json(nullptr)},
                       {"seed", opt.seed},
                       {"secret_blocks", opt.blocks},
                       {"cells", cells}};
    if (compared > 0) {
      doc["agreement"] = {{"compared", compared},
                          {"within_ci", in_ci},
                          {"fraction", static_cast<double>(in_ci) / static_cast<double>(compared)}};
    }
    auto f = open_output(opt.summary);
    if (!f) {
      std::cerr << "error: cannot write " << opt.summary << "\n";
      return exit_runtime;
    }
    *f << doc.dump(2) << "\n";
  }
  return 0;
}

struct validate_options {
  std::string scenario_path;
  std::vector<std::size_t> k{4, 8};
  std::vector<std::size_t> r{0, 1, 2, 3};
};

int validate(const validate_options& opt) {
  const std::string file = opt.scenario_path.empty() ? default_scenario() : opt.scenario_path;
  std::cout << "scenario " << file << "\n";
  bool ok = true;
  auto line = [&](bool pass, const std::string& what) {
    std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
    ok = ok && pass;
  };

  std::optional<scenario> loaded;
  try {
    loaded = load_scenario_file(file);
  } catch (const load_error& e) {
    line(false, std::string("load: ") + e.what());
    std::cout << "result: FAIL\n";
    return exit_validation;
  }
  const scenario& sc = *loaded;
  line(true, "load: " + std::to_string(sc.topo.nodes().size()) + " nodes, " +
                 std::to_string(sc.topo.edges().size()) + " edges, " + std::to_string(sc.paths.size()) +
                 " paths");

  bool sorted = true;
  for (std::size_t l = 1; l < sc.paths.size(); ++l) {
    const auto& a = sc.paths[l - 1];
    const auto& b = sc.paths[l];
    if (b.delay < a.delay || (b.delay == a.delay && b.id < a.id)) sorted = false;
  }
  line(sorted, "paths ordered by (delay, id)");

  std::string overloaded;
  for (const auto& e : sc.topo.edges()) {
    const auto load = static_cast<std::uint32_t>(
        std::count_if(sc.paths.begin(), sc.paths.end(), [&](const path& p) { return p.traverses(e.key); }));
    if (load > e.capacity) {
      overloaded += " " + e.key.str() + " (" + std::to_string(load) + " > " + std::to_string(e.capacity) + ")";
    }
  }
  line(overloaded.empty(), "edge capacity covers lightpath load" + (overloaded.empty() ? "" : ":" + overloaded));

  try {
    check_attack(sc.topo, sc.attack);
    line(true, "attack edges exist, eavesdrop and jam sets disjoint");
  } catch (const load_error& e) {
    line(false, std::string("attack: ") + e.what());
  }

  std::size_t largest = 0;
  for (auto k : opt.k) {
    for (auto r : opt.r) largest = std::max(largest, k + r);
  }
  const auto flow = max_flow(sc.topo);
  line(flow >= largest, "min cut " + std::to_string(flow) + " >= largest xi " + std::to_string(largest));
  line(largest <= sc.paths.size(),
       "largest xi " + std::to_string(largest) + " <= " + std::to_string(sc.paths.size()) + " declared paths");

  std::cout << "result: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : exit_validation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exposure of multipath network-coded transfers to fiber eavesdropping and jamming"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file with option values (section per subcommand)");

  run_options ro;
  auto* run_cmd = app.add_subcommand("run", "Analyze and/or simulate a parameter sweep, write CSV");
  run_cmd->add_option("--scenario", ro.scenario_path, "Scenario file (default: bundled nsfnet.cfg)");
  run_cmd->add_option("--mode", ro.mode, "analyze | simulate | compare")->capture_default_str();
  run_cmd->add_option("--policy", ro.policy, "opt | rnd | both")->capture_default_str();
  run_cmd->add_option("--k", ro.k, "Generation sizes")->delimiter(',')->capture_default_str();
  run_cmd->add_option("--r", ro.r, "Redundant blocks per generation")->delimiter(',')->capture_default_str();
  run_cmd->add_option("--attack-edges", ro.attack_edges, "Wiretap edges as tail-head (default: scenario's)")
      ->delimiter(',');
  run_cmd->add_option("--subsets", ro.subsets, "Attack subsets: all | single | union")->capture_default_str();
  run_cmd->add_option("--trials", ro.trials, "Monte Carlo trials per cell")->capture_default_str()->check(
      CLI::PositiveNumber);
  run_cmd->add_option("--seed", ro.seed, "Base seed")->capture_default_str();
  run_cmd->add_option("--blocks", ro.blocks, "Secret size M in blocks")->capture_default_str()->check(
      CLI::PositiveNumber);
  run_cmd->add_option("--out", ro.out, "CSV output file (default: stdout)");
  run_cmd->add_option("--summary", ro.summary, "Also write a JSON summary");
  run_cmd->add_flag("--exercise-codec", ro.exercise_codec, "Push real coded blocks through encode/decode");
  run_cmd->add_option("--block-length", ro.block_length, "Symbols per block with --exercise-codec")
      ->capture_default_str();
  run_cmd->add_option("--field-bits", ro.field_bits, "Field GF(2^m) with --exercise-codec")->capture_default_str();
  run_cmd->add_option("--field-poly", ro.field_poly, "Reduction polynomial with --exercise-codec")
      ->capture_default_str();
  run_cmd->add_option("--threads", ro.threads, "Simulation threads (0 = all cores)")->capture_default_str();
  run_cmd->add_flag("--quiet", ro.quiet, "No progress on stderr");

  validate_options vo;
  auto* val_cmd = app.add_subcommand("validate", "Check a scenario file and report pass/fail per invariant");
  val_cmd->add_option("--scenario", vo.scenario_path, "Scenario file (default: bundled nsfnet.cfg)");
  val_cmd->add_option("--k", vo.k, "Generation sizes to be supported")->delimiter(',')->capture_default_str();
  val_cmd->add_option("--r", vo.r, "Redundancies to be supported")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (*run_cmd) return run(ro);
    return validate(vo);
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const load_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}
