// Command-line front end: plan, simulate, sweep, compare. Every command can
// read a scenario file or generate one, and when --out is given it writes a
// manifest next to the data files so a run can be reproduced byte for byte.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgeplan/errors.hpp"
#include "edgeplan/planner.hpp"
#include "edgeplan/queueing.hpp"
#include "edgeplan/rng.hpp"
#include "edgeplan/risk.hpp"
#include "edgeplan/scenario.hpp"
#include "edgeplan/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgeplan;

namespace {

constexpr const char* kVersion = "1.0.0";

// 9 significant digits, shortest form; enough to round-trip the plots and
// stable across runs.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                               std::chars_format::general, 9);
  (void)ec;
  return std::string(buf, p);
}

struct CommonArgs {
  std::string scenario_path;
  std::string generate;  // "M,N,seed"
  double alpha = -1.0;   // <0 means keep the scenario's value
  double beta = -1.0;
  std::string out;
  bool full_pk = false;
  bool corrected_rho_s = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  auto* sc = cmd->add_option("--scenario", a.scenario_path,
                             "Scenario JSON file");
  auto* gen = cmd->add_option(
      "--generate", a.generate,
      "Generate a scenario: <devices>,<servers>,<seed>");
  sc->excludes(gen);
  gen->excludes(sc);
  cmd->add_option("--alpha", a.alpha, "Override the CVaR confidence level");
  cmd->add_option("--beta", a.beta, "Override the risk weight");
  cmd->add_option("--out", a.out, "Output directory (written with a manifest)");
  cmd->add_flag("--full-pk", a.full_pk,
                "Use the full Pollaczek-Khinchine device-wait mean");
  cmd->add_flag("--corrected-rho-s", a.corrected_rho_s,
                "Use the compute-side server utilization in the wait bound");
}

Scenario resolve_scenario(const CommonArgs& a) {
  Scenario s;
  if (!a.generate.empty()) {
    int m = 0, n = 0;
    std::uint64_t seed = 0;
    char extra = 0;
    if (std::sscanf(a.generate.c_str(), "%d,%d,%llu%c", &m, &n,
                    reinterpret_cast<unsigned long long*>(&seed),
                    &extra) != 3 ||
        m <= 0 || n <= 0)
      throw ValidationError("--generate expects <devices>,<servers>,<seed>");
    s = generate_scenario(seed, m, n);
  } else if (!a.scenario_path.empty()) {
    s = load_scenario(a.scenario_path);
  } else {
    throw ValidationError("one of --scenario or --generate is required");
  }
  if (a.alpha >= 0) s.risk.alpha = a.alpha;
  if (a.beta >= 0) s.risk.beta = a.beta;
  require_valid(s);
  return s;
}

queueing::AnalyticsOptions analytics_options(const CommonArgs& a) {
  queueing::AnalyticsOptions opts;
  opts.full_pk = a.full_pk;
  opts.corrected_rho_s = a.corrected_rho_s;
  return opts;
}

json common_manifest(const std::string& command, const CommonArgs& a) {
  json m;
  m["schema"] = 1;
  m["tool"] = "edgeplan";
  m["version"] = kVersion;
  m["command"] = command;
  if (!a.generate.empty())
    m["scenario"] = {{"generate", a.generate}};
  else
    m["scenario"] = {{"path", a.scenario_path}};
  m["alpha_override"] = a.alpha >= 0 ? json(a.alpha) : json(nullptr);
  m["beta_override"] = a.beta >= 0 ? json(a.beta) : json(nullptr);
  m["options"] = {{"full_pk", a.full_pk},
                  {"corrected_rho_s", a.corrected_rho_s}};
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Output sink: files under --out when given, stdout tables always.
struct OutDir {
  fs::path dir;
  bool enabled = false;
  std::vector<std::string> written;

  explicit OutDir(const std::string& out) {
    if (!out.empty()) {
      dir = out;
      fs::create_directories(dir);
      enabled = true;
    }
  }
  void write(const std::string& name, const std::string& text) {
    if (!enabled) return;
    write_text(dir / name, text);
    written.push_back(name);
  }
  void finish(json manifest) {
    if (!enabled) return;
    manifest["outputs"] = written;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  }
};

std::vector<planner::StrategyKind> parse_strategies(
    const std::vector<std::string>& names) {
  std::vector<planner::StrategyKind> out;
  for (const auto& n : names) out.push_back(planner::parse_strategy(n));
  if (out.empty()) out.push_back(planner::StrategyKind::q_r);
  return out;
}

std::vector<std::uint64_t> ensemble_seeds(const Scenario& s, int count) {
  if (count <= 0) throw ValidationError("--seeds must be positive");
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < count; ++k)
    seeds.push_back(rng::derive_seed(s.seed, rng::kEnsemble, k));
  return seeds;
}

struct EnsembleStats {
  double mean = 0.0;
  double p99 = 0.0;
  double cvar = 0.0;
  bool unstable = false;
};

// Per-seed pooled summary, averaged across the ensemble.
EnsembleStats simulate_ensemble(const Scenario& s, const planner::Plan& plan,
                                const std::vector<std::uint64_t>& seeds,
                                double horizon, double warmup) {
  EnsembleStats agg;
  for (auto seed : seeds) {
    sim::SimOptions opts;
    opts.horizon = horizon;
    opts.warmup = warmup;
    opts.seed = seed;
    const auto r = sim::run(s, plan, opts);
    const auto summary = risk::summarize(r.totals(), s.risk.alpha);
    agg.mean += summary.mean;
    agg.p99 += summary.p99;
    agg.cvar += summary.cvar_alpha;
    for (const auto& d : r.devices) agg.unstable |= d.flagged_unstable;
  }
  const auto n = static_cast<double>(seeds.size());
  agg.mean /= n;
  agg.p99 /= n;
  agg.cvar /= n;
  return agg;
}

int cmd_plan(const CommonArgs& common, const std::vector<std::string>& names) {
  const Scenario s = resolve_scenario(common);
  const auto opts = analytics_options(common);
  const auto strategies = parse_strategies(names);
  const auto links = queueing::analyze_links(s, opts);

  OutDir out(common.out);
  if (!common.generate.empty()) out.write("scenario.json", scenario_to_json(s));
  for (auto k : strategies) {
    const auto plan = planner::solve(s, k, links, opts);
    std::cout << "strategy " << planner::strategy_name(k) << "\n";
    std::cout << "  objective " << fmt(plan.objective) << "\n";
    std::cout << "  device,server,frequency_hz,mean_total,cvar_total\n";
    for (int i = 0; i < s.device_count(); ++i) {
      const int j = plan.assignment[i];
      std::cout << "  " << i << "," << j << "," << fmt(plan.frequency[i][j])
                << "," << fmt(plan.per_device[i].mean_total) << ","
                << fmt(plan.per_device[i].cvar_total) << "\n";
    }
    out.write(std::string("plan_") + planner::strategy_name(k) + ".json",
              planner::plan_to_json(plan));
  }

  json manifest = common_manifest("plan", common);
  json snames = json::array();
  for (auto k : strategies) snames.push_back(planner::strategy_name(k));
  manifest["strategies"] = snames;
  out.finish(manifest);
  return 0;
}

int cmd_simulate(const CommonArgs& common, const std::string& strategy,
                 const std::string& plan_file, double horizon, double warmup,
                 std::optional<std::uint64_t> seed,
                 const std::string& dump_samples,
                 const std::string& dump_tx_samples) {
  const Scenario s = resolve_scenario(common);
  const auto opts = analytics_options(common);
  const auto links = queueing::analyze_links(s, opts);

  planner::Plan plan;
  if (!plan_file.empty()) {
    std::ifstream in(plan_file, std::ios::binary);
    if (!in) throw ValidationError("cannot read plan file " + plan_file);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    plan = planner::plan_from_json(text, s, links, opts);
  } else {
    plan = planner::solve(s, planner::parse_strategy(strategy), links, opts);
  }

  sim::SimOptions sopts;
  sopts.horizon = horizon;
  sopts.warmup = warmup;
  sopts.seed = seed.value_or(s.seed);
  const auto r = sim::run(s, plan, sopts);
  const auto stats = sim::statistics(r, s.risk.alpha);

  std::cout << "strategy " << planner::strategy_name(plan.strategy)
            << " seed " << sopts.seed << " horizon " << fmt(sopts.horizon)
            << "\n";
  std::cout << "device,count,mean,var_alpha,cvar_alpha,p99,bound_mean,"
               "bound_cvar,unstable\n";
  std::string summary_csv =
      "device,count,mean,var_alpha,cvar_alpha,p99,bound_mean,bound_cvar,"
      "unstable\n";
  for (const auto& st : stats) {
    const auto& b = plan.per_device[st.device];
    std::string row = std::to_string(st.device) + "," +
                      std::to_string(st.count) + "," + fmt(st.summary.mean) +
                      "," + fmt(st.summary.var_alpha) + "," +
                      fmt(st.summary.cvar_alpha) + "," + fmt(st.summary.p99) +
                      "," + fmt(b.mean_total) + "," + fmt(b.cvar_total) + "," +
                      (st.flagged_unstable ? "1" : "0") + "\n";
    std::cout << row;
    summary_csv += row;
  }

  auto totals = r.totals();
  const double top = *std::max_element(totals.begin(), totals.end());
  std::vector<double> grid;
  for (int k = 1; k <= 200; ++k) grid.push_back(top * k / 200.0);
  const auto tail = sim::ccdf(r, -1, grid);
  std::string ccdf_csv = "w,ccdf\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    ccdf_csv += fmt(grid[k]) + "," + fmt(tail[k]) + "\n";

  OutDir out(common.out);
  if (!common.generate.empty()) out.write("scenario.json", scenario_to_json(s));
  out.write("summary.csv", summary_csv);
  out.write("ccdf.csv", ccdf_csv);
  out.write("plan.json", planner::plan_to_json(plan));

  if (!dump_samples.empty()) {
    std::string csv = "device,arrival,w_d,t_d,w_s,t_s,total\n";
    for (const auto& d : r.devices)
      for (const auto& rec : d.records)
        csv += std::to_string(rec.device) + "," + fmt(rec.arrival) + "," +
               fmt(rec.device_wait) + "," + fmt(rec.tx) + "," +
               fmt(rec.server_wait) + "," + fmt(rec.compute) + "," +
               fmt(rec.total) + "\n";
    write_text(dump_samples, csv);
  }
  if (!dump_tx_samples.empty()) {
    std::string csv = "t_d\n";
    for (const auto& d : r.devices)
      for (const auto& rec : d.records) csv += fmt(rec.tx) + "\n";
    write_text(dump_tx_samples, csv);
  }

  json manifest = common_manifest("simulate", common);
  manifest["strategy"] = planner::strategy_name(plan.strategy);
  manifest["plan_file"] = plan_file.empty() ? json(nullptr) : json(plan_file);
  manifest["horizon"] = horizon;
  manifest["warmup"] = warmup;
  manifest["seed"] = sopts.seed;
  out.finish(manifest);
  return 0;
}

int cmd_sweep(const CommonArgs& common, const std::string& axis,
              std::vector<double> values, const std::vector<std::string>& names,
              int seed_count, double horizon, double warmup) {
  if (axis != "frequency" && axis != "task_size")
    throw ValidationError("--axis must be frequency or task_size");
  if (values.empty()) throw ValidationError("--values is required");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] <= 0) throw ValidationError("sweep values must be positive");
    if (k > 0 && values[k] <= values[k - 1])
      throw ValidationError("sweep values must be strictly ascending");
  }
  const Scenario base = resolve_scenario(common);
  const auto opts = analytics_options(common);
  auto strategies = parse_strategies(names);
  if (names.empty())
    strategies = {planner::StrategyKind::q_r, planner::StrategyKind::q_nr};
  const auto seeds = ensemble_seeds(base, seed_count);

  std::string csv = "strategy,axis,value,mean_total,p99,unstable\n";
  for (auto k : strategies) {
    for (double v : values) {
      Scenario s = base;
      if (axis == "frequency")
        for (auto& srv : s.servers) srv.total_frequency_hz = v;
      else
        for (auto& dev : s.devices) dev.data_size_bits = v;
      std::string row = std::string(planner::strategy_name(k)) + "," + axis +
                        "," + fmt(v) + ",";
      try {
        const auto links = queueing::analyze_links(s, opts);
        const auto plan = planner::solve(s, k, links, opts);
        const auto st = simulate_ensemble(s, plan, seeds, horizon, warmup);
        row += fmt(st.mean) + "," + fmt(st.p99) + "," +
               (st.unstable ? "1" : "0");
      } catch (const InfeasibleError&) {
        row += "nan,nan,1";
      } catch (const InstabilityError&) {
        row += "nan,nan,1";
      }
      csv += row + "\n";
    }
  }
  std::cout << csv;

  OutDir out(common.out);
  if (!common.generate.empty())
    out.write("scenario.json", scenario_to_json(base));
  out.write("sweep.csv", csv);
  json manifest = common_manifest("sweep", common);
  json snames = json::array();
  for (auto k : strategies) snames.push_back(planner::strategy_name(k));
  manifest["strategies"] = snames;
  manifest["axis"] = axis;
  manifest["values"] = values;
  manifest["seeds"] = seeds;
  manifest["horizon"] = horizon;
  manifest["warmup"] = warmup;
  out.finish(manifest);
  return 0;
}

int cmd_compare(const CommonArgs& common, int seed_count, double horizon,
                double warmup) {
  const Scenario s = resolve_scenario(common);
  const auto opts = analytics_options(common);
  const auto links = queueing::analyze_links(s, opts);
  const auto seeds = ensemble_seeds(s, seed_count);

  struct Row {
    std::string status = "ok";
    double objective = std::nan("");
    EnsembleStats stats;
  };
  const auto strategies = planner::all_strategies();
  std::vector<Row> rows(strategies.size());
  for (std::size_t idx = 0; idx < strategies.size(); ++idx) {
    auto& row = rows[idx];
    try {
      const auto plan = planner::solve(s, strategies[idx], links, opts);
      row.objective = plan.objective;
      row.stats = simulate_ensemble(s, plan, seeds, horizon, warmup);
    } catch (const GuardError&) {
      row.status = "skipped";
    } catch (const InfeasibleError&) {
      row.status = "infeasible";
    }
  }

  auto find = [&](planner::StrategyKind k) -> const Row* {
    for (std::size_t idx = 0; idx < strategies.size(); ++idx)
      if (strategies[idx] == k) return &rows[idx];
    return nullptr;
  };
  auto gap_vs = [&](planner::StrategyKind heur, planner::StrategyKind opt,
                    planner::StrategyKind self) -> std::string {
    if (self != heur) return "";
    const Row* h = find(heur);
    const Row* o = find(opt);
    if (!h || !o || h->status != "ok" || o->status != "ok") return "";
    return fmt((h->objective - o->objective) / o->objective);
  };

  std::string csv = "strategy,status,objective,mean_total,p99,cvar_alpha,"
                    "gap_vs_opt\n";
  for (std::size_t idx = 0; idx < strategies.size(); ++idx) {
    const auto k = strategies[idx];
    const auto& row = rows[idx];
    std::string gap = gap_vs(planner::StrategyKind::q_r,
                             planner::StrategyKind::q_r_opt, k);
    if (gap.empty())
      gap = gap_vs(planner::StrategyKind::q_nr, planner::StrategyKind::q_nr_opt,
                   k);
    csv += std::string(planner::strategy_name(k)) + "," + row.status + ",";
    if (row.status == "ok")
      csv += fmt(row.objective) + "," + fmt(row.stats.mean) + "," +
             fmt(row.stats.p99) + "," + fmt(row.stats.cvar) + "," + gap;
    else
      csv += "nan,nan,nan,nan,";
    csv += "\n";
  }
  std::cout << csv;

  OutDir out(common.out);
  if (!common.generate.empty()) out.write("scenario.json", scenario_to_json(s));
  out.write("compare.csv", csv);
  json manifest = common_manifest("compare", common);
  manifest["seeds"] = seeds;
  manifest["horizon"] = horizon;
  manifest["warmup"] = warmup;
  out.finish(manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive task offloading planner and simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs plan_args;
  std::vector<std::string> plan_strategies{"Q-R"};
  auto* plan_cmd = app.add_subcommand("plan", "Compute an offloading plan");
  add_common(plan_cmd, plan_args);
  plan_cmd->add_option("--strategy", plan_strategies,
                       "Strategies: Q-R, Q-NR, NQ-R, NQ-NR, Q-R-Opt, Q-NR-Opt")
      ->delimiter(',');

  CommonArgs sim_args;
  std::string sim_strategy = "Q-R";
  std::string sim_plan_file;
  double sim_horizon = 300.0, sim_warmup = -1.0;
  std::optional<std::uint64_t> sim_seed;
  std::string dump_samples, dump_tx_samples;
  auto* sim_cmd =
      app.add_subcommand("simulate", "Simulate a plan and compare to bounds");
  add_common(sim_cmd, sim_args);
  auto* strat_opt = sim_cmd->add_option("--strategy", sim_strategy,
                                        "Strategy to plan and simulate");
  auto* planf_opt =
      sim_cmd->add_option("--plan", sim_plan_file, "Use a saved plan JSON");
  strat_opt->excludes(planf_opt);
  planf_opt->excludes(strat_opt);
  sim_cmd->add_option("--horizon", sim_horizon, "Arrival horizon in seconds");
  sim_cmd->add_option("--warmup", sim_warmup,
                      "Warmup cutoff in seconds (<0: 10% of horizon)");
  sim_cmd->add_option("--seed", sim_seed,
                      "Simulation seed (default: scenario seed)");
  sim_cmd->add_option("--dump-samples", dump_samples,
                      "Write every task record to this CSV file");
  sim_cmd->add_option("--dump-tx-samples", dump_tx_samples,
                      "Write the transmission-time column to this CSV file");

  CommonArgs sweep_args;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_strategies;
  int sweep_seeds = 10;
  double sweep_horizon = 300.0, sweep_warmup = -1.0;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Sweep a parameter and tabulate delays");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--axis", sweep_axis, "frequency or task_size")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "Ascending sweep values")
      ->required()
      ->delimiter(',');
  sweep_cmd
      ->add_option("--strategy", sweep_strategies,
                   "Strategies to sweep (default Q-R,Q-NR)")
      ->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_seeds, "Ensemble size per point");
  sweep_cmd->add_option("--horizon", sweep_horizon, "Arrival horizon");
  sweep_cmd->add_option("--warmup", sweep_warmup, "Warmup cutoff");

  CommonArgs cmp_args;
  int cmp_seeds = 10;
  double cmp_horizon = 300.0, cmp_warmup = -1.0;
  auto* cmp_cmd =
      app.add_subcommand("compare", "Compare all six strategies on one scenario");
  add_common(cmp_cmd, cmp_args);
  cmp_cmd->add_option("--seeds", cmp_seeds, "Ensemble size");
  cmp_cmd->add_option("--horizon", cmp_horizon, "Arrival horizon");
  cmp_cmd->add_option("--warmup", cmp_warmup, "Warmup cutoff");

  try {
    app.parse(argc, argv);
    if (plan_cmd->parsed()) return cmd_plan(plan_args, plan_strategies);
    if (sim_cmd->parsed())
      return cmd_simulate(sim_args, sim_strategy, sim_plan_file, sim_horizon,
                          sim_warmup, sim_seed, dump_samples, dump_tx_samples);
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_args, sweep_axis, sweep_values, sweep_strategies,
                       sweep_seeds, sweep_horizon, sweep_warmup);
    if (cmp_cmd->parsed())
      return cmd_compare(cmp_args, cmp_seeds, cmp_horizon, cmp_warmup);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  } catch (const GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InstabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ZeroRateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InsufficientSamplesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
