#include "edgeplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "edgeplan/errors.hpp"
#include "edgeplan/risk.hpp"

namespace edgeplan::planner {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEpiTol = 1e-9;   // on the epigraph value (s), relative above 1
constexpr double kCapTol = 1e-6;   // relative, on capacity feasibility
constexpr double kEnumGuard = 1e6;

// Planning always evaluates the server queue under the published
// utilization convention (frequency-independent), which is what makes the
// per-device epigraph terms separate into constant + weight / f.
queueing::AnalyticsOptions plan_opts(const queueing::AnalyticsOptions& opts) {
  auto o = opts;
  o.corrected_rho_s = false;
  return o;
}

double wait_mean(const queueing::LinkAnalytics& link,
                 const queueing::AnalyticsOptions& opts) {
  return opts.full_pk
             ? queueing::device_wait_mean_full_pk(link.arrival_rate, link.mu,
                                                  link.tx_variance)
             : queueing::device_wait_mean(link.arrival_rate, link.mu);
}

// Frequency-independent part of one device's planning objective.
double load_constant(const queueing::LinkAnalytics& link,
                     const ObjectiveSpec& spec, double alpha,
                     const queueing::AnalyticsOptions& opts) {
  double k = link.tx_mean;
  double risk_part = link.cvar_tx;
  if (spec.queueing_terms) {
    k += wait_mean(link, opts) + queueing::server_wait_bound(link);
    risk_part += risk::cvar_exponential_wait(link.arrival_rate,
                                             link.tx_variance, link.rho, alpha);
    risk_part += risk::cvar_exponential_wait(link.dep_rate,
                                             link.dep_interval_var, link.rho_s,
                                             alpha);
  }
  return k + spec.beta * risk_part;
}

std::vector<int> server_capacities(const Scenario& s) {
  std::vector<int> caps;
  caps.reserve(s.servers.size());
  for (const auto& srv : s.servers) caps.push_back(srv.cores);
  return caps;
}

}  // namespace

const char* strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::q_r: return "Q-R";
    case StrategyKind::q_nr: return "Q-NR";
    case StrategyKind::nq_r: return "NQ-R";
    case StrategyKind::nq_nr: return "NQ-NR";
    case StrategyKind::q_r_opt: return "Q-R-Opt";
    case StrategyKind::q_nr_opt: return "Q-NR-Opt";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view name) {
  for (StrategyKind k : all_strategies())
    if (name == strategy_name(k)) return k;
  throw ValidationError("unknown strategy '" + std::string(name) +
                        "' (expected Q-R, Q-NR, NQ-R, NQ-NR, Q-R-Opt, Q-NR-Opt)");
}

std::vector<StrategyKind> all_strategies() {
  return {StrategyKind::q_r,     StrategyKind::q_nr,
          StrategyKind::nq_r,    StrategyKind::nq_nr,
          StrategyKind::q_r_opt, StrategyKind::q_nr_opt};
}

ObjectiveSpec objective_for(StrategyKind k, double scenario_beta) {
  switch (k) {
    case StrategyKind::q_r:
    case StrategyKind::q_r_opt:
      return {true, scenario_beta};
    case StrategyKind::q_nr:
    case StrategyKind::q_nr_opt:
      return {true, 0.0};
    case StrategyKind::nq_r:
      return {false, scenario_beta};
    case StrategyKind::nq_nr:
      return {false, 0.0};
  }
  return {true, scenario_beta};
}

AssignCost assign_costs(const Scenario& s, const queueing::LinkMatrix& links,
                        const ObjectiveSpec& spec,
                        const queueing::AnalyticsOptions& opts) {
  const auto o = plan_opts(opts);
  const int m = s.device_count();
  const int n = s.server_count();
  AssignCost out;
  out.value.assign(m, std::vector<double>(n, kInf));
  out.feasible.assign(m, std::vector<char>(n, 0));
  for (int i = 0; i < m; ++i) {
    bool any = false;
    for (int j = 0; j < n; ++j) {
      const auto& link = links[i][j];
      if (!link.stable) continue;
      double cost = link.tx_mean;
      double risk_part = link.cvar_tx;
      if (spec.queueing_terms) {
        cost += wait_mean(link, o);
        risk_part += risk::cvar_exponential_wait(
            link.arrival_rate, link.tx_variance, link.rho, s.risk.alpha);
      }
      cost += spec.beta * risk_part;
      out.value[i][j] = cost;
      out.feasible[i][j] = 1;
      any = true;
    }
    if (!any)
      throw InfeasibleError("device " + std::to_string(i) +
                            ": no stable link to any server");
  }
  return out;
}

std::vector<int> solve_bottleneck_assignment(
    const AssignCost& costs, const std::vector<int>& capacities) {
  const int m = static_cast<int>(costs.value.size());
  const int n = static_cast<int>(capacities.size());

  std::vector<int> slot_server;
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < capacities[j]; ++c) slot_server.push_back(j);
  const int slots = static_cast<int>(slot_server.size());
  if (slots < m)
    throw InfeasibleError("insufficient cores: " + std::to_string(slots) +
                          " for " + std::to_string(m) + " devices");

  std::vector<double> thresholds;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (costs.feasible[i][j]) thresholds.push_back(costs.value[i][j]);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  if (thresholds.empty()) throw InfeasibleError("no feasible link at all");

  // Kuhn's augmenting paths over server slots; edges are the links whose
  // cost does not exceed the trial threshold.
  std::vector<int> slot_match;
  auto try_match = [&](double thr) {
    slot_match.assign(slots, -1);
    auto edge = [&](int i, int sl) {
      const int j = slot_server[sl];
      return costs.feasible[i][j] && costs.value[i][j] <= thr;
    };
    std::function<bool(int, std::vector<char>&)> augment =
        [&](int i, std::vector<char>& vis) {
          for (int sl = 0; sl < slots; ++sl) {
            if (vis[sl] || !edge(i, sl)) continue;
            vis[sl] = 1;
            if (slot_match[sl] < 0 || augment(slot_match[sl], vis)) {
              slot_match[sl] = i;
              return true;
            }
          }
          return false;
        };
    int matched = 0;
    for (int i = 0; i < m; ++i) {
      std::vector<char> vis(slots, 0);
      if (augment(i, vis)) ++matched;
    }
    return matched == m;
  };

  // Smallest threshold admitting a perfect capacitated matching.
  int lo = 0, hi = static_cast<int>(thresholds.size()) - 1;
  if (!try_match(thresholds[hi]))
    throw InfeasibleError("no assignment satisfies the core capacities");
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (try_match(thresholds[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  try_match(thresholds[lo]);

  std::vector<int> assignment(m, -1);
  for (int sl = 0; sl < slots; ++sl)
    if (slot_match[sl] >= 0) assignment[slot_match[sl]] = slot_server[sl];
  return assignment;
}

ServerAllocation allocate_server(const std::vector<DeviceLoad>& loads,
                                 double capacity_hz) {
  if (loads.empty()) throw std::invalid_argument("allocate_server: no loads");
  if (!(capacity_hz > 0.0))
    throw std::invalid_argument("allocate_server: capacity must be > 0");

  double sum_floor = 0.0, sum_weight = 0.0;
  for (const auto& l : loads) {
    if (!(l.weight > 0.0))
      throw std::invalid_argument("allocate_server: weights must be > 0");
    if (l.floor < 0.0)
      throw std::invalid_argument("allocate_server: floors must be >= 0");
    sum_floor += l.floor;
    sum_weight += l.weight;
  }
  if (sum_floor > capacity_hz * (1.0 + kCapTol)) {
    std::ostringstream msg;
    msg << "stability floors need " << sum_floor << " Hz, capacity is "
        << capacity_hz << " Hz";
    throw InfeasibleError(msg.str());
  }

  const int n = static_cast<int>(loads.size());
  auto required = [&](double t) {
    // Minimal total frequency achieving T_i <= t for everyone.
    double need = 0.0;
    for (const auto& l : loads) {
      if (t <= l.constant) return kInf;
      need += std::max(l.floor, l.weight / (t - l.constant));
    }
    return need;
  };
  auto feasible = [&](double t) {
    return required(t) <= capacity_hz * (1.0 + kCapTol);
  };

  double t_lo = 0.0;
  for (const auto& l : loads)
    t_lo = std::max(t_lo, l.constant + l.weight / capacity_hz);

  double t_hi = t_lo;
  if (!feasible(t_lo)) {
    // Feasible starting point: floors plus leftover spread by weight.
    const double leftover = std::max(0.0, capacity_hz - sum_floor);
    for (int i = 0; i < n; ++i) {
      const double f = loads[i].floor + leftover * loads[i].weight / sum_weight;
      if (!(f > 0.0))
        throw InfeasibleError("no capacity left for a device with zero floor");
      t_hi = std::max(t_hi, loads[i].constant + loads[i].weight / f);
    }
    // Tolerance scales with the epigraph value: near-critical links can push
    // it past 1e6 seconds, where an absolute 1e-9 is below one ulp and a
    // fixed-tolerance loop would never terminate.
    for (int it = 0;
         it < 200 && t_hi - t_lo > kEpiTol * std::max(1.0, t_hi); ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (feasible(mid))
        t_hi = mid;
      else
        t_lo = mid;
    }
  }

  ServerAllocation out;
  out.frequency.resize(n);
  out.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f =
        std::max(loads[i].floor, loads[i].weight / (t_hi - loads[i].constant));
    out.frequency[i] = f;
    out.objective =
        std::max(out.objective, loads[i].constant + loads[i].weight / f);
  }
  return out;
}

Allocation allocate_frequencies(const std::vector<int>& assignment,
                                const Scenario& s,
                                const queueing::LinkMatrix& links,
                                const ObjectiveSpec& spec,
                                const queueing::AnalyticsOptions& opts) {
  const auto o = plan_opts(opts);
  const int m = s.device_count();
  const int n = s.server_count();
  if (static_cast<int>(assignment.size()) != m)
    throw std::invalid_argument("assignment size mismatch");

  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < m; ++i) {
    const int j = assignment[i];
    if (j < 0 || j >= n)
      throw std::invalid_argument("assignment entry out of range");
    if (static_cast<int>(members[j].size()) >= s.servers[j].cores)
      throw InfeasibleError("server " + std::to_string(j) +
                            ": more devices than cores");
    members[j].push_back(i);
  }

  Allocation out;
  out.frequency.assign(m, std::vector<double>(n, 0.0));
  out.objective = 0.0;
  for (int j = 0; j < n; ++j) {
    if (members[j].empty()) continue;
    std::vector<DeviceLoad> loads;
    loads.reserve(members[j].size());
    for (int i : members[j]) {
      const auto& link = links[i][j];
      if (!link.stable)
        throw InfeasibleError("device " + std::to_string(i) +
                              " assigned to unstable link (server " +
                              std::to_string(j) + ")");
      DeviceLoad l;
      l.constant = load_constant(link, spec, s.risk.alpha, o);
      l.weight = (1.0 + spec.beta) * link.task_cycles;
      l.floor = link.dep_rate * link.task_cycles;
      loads.push_back(l);
    }
    ServerAllocation alloc;
    try {
      alloc = allocate_server(loads, s.servers[j].total_frequency_hz);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("server " + std::to_string(j) + ": " + e.what());
    }
    for (size_t k = 0; k < members[j].size(); ++k)
      out.frequency[members[j][k]][j] = alloc.frequency[k];
    out.objective = std::max(out.objective, alloc.objective);
  }
  return out;
}

namespace {

queueing::DelayBound inf_bound() {
  queueing::DelayBound b;
  b.mean.device_wait = b.mean.tx = b.mean.server_wait = b.mean.compute = kInf;
  b.cvar = b.mean;
  b.mean_total = b.cvar_total = kInf;
  return b;
}

// Assembles the reported plan: bounds and objective under the full metric
// with the scenario's beta. Unstable chosen links (possible in hand-written
// plan files) report unbounded delay instead of throwing.
Plan finalize_plan(const Scenario& s, const queueing::LinkMatrix& links,
                   std::vector<int> assignment,
                   std::vector<std::vector<double>> frequency,
                   StrategyKind strategy,
                   const queueing::AnalyticsOptions& opts) {
  const auto o = plan_opts(opts);
  Plan p;
  p.strategy = strategy;
  p.assignment = std::move(assignment);
  p.frequency = std::move(frequency);
  p.objective = 0.0;
  const double beta = s.risk.beta;
  for (int i = 0; i < s.device_count(); ++i) {
    const int j = p.assignment[i];
    const auto& link = links[i][j];
    queueing::DelayBound b =
        link.stable
            ? queueing::delay_bound(link, p.frequency[i][j], s.risk.alpha, o)
            : inf_bound();
    const double obj = b.mean_total + beta * b.cvar_total;
    p.per_device.push_back(b);
    p.per_device_objective.push_back(obj);
    p.objective = std::max(p.objective, obj);
  }
  return p;
}

Plan solve_enumerated(const Scenario& s, const queueing::LinkMatrix& links,
                      const ObjectiveSpec& spec, StrategyKind tag,
                      const queueing::AnalyticsOptions& opts) {
  const int m = s.device_count();
  const int n = s.server_count();
  if (std::pow(static_cast<double>(n), m) > kEnumGuard) {
    std::ostringstream msg;
    msg << "exhaustive search space " << n << "^" << m << " exceeds "
        << kEnumGuard << " candidates";
    throw GuardError(msg.str());
  }

  const auto caps = server_capacities(s);
  std::vector<int> x(m, -1), counts(n, 0);
  std::vector<int> best_x;
  std::vector<std::vector<double>> best_freq;
  double best = kInf;

  std::function<void(int)> rec = [&](int i) {
    if (i == m) {
      try {
        auto alloc = allocate_frequencies(x, s, links, spec, opts);
        if (alloc.objective < best) {  // strict: first hit is lexicographic
          best = alloc.objective;
          best_x = x;
          best_freq = std::move(alloc.frequency);
        }
      } catch (const InfeasibleError&) {
      }
      return;
    }
    for (int j = 0; j < n; ++j) {
      if (counts[j] >= caps[j] || !links[i][j].stable) continue;
      x[i] = j;
      ++counts[j];
      rec(i + 1);
      --counts[j];
      x[i] = -1;
    }
  };
  rec(0);

  if (best_x.empty())
    throw InfeasibleError("no feasible assignment under core capacities");
  return finalize_plan(s, links, std::move(best_x), std::move(best_freq), tag,
                       opts);
}

}  // namespace

Plan solve(const Scenario& s, StrategyKind strategy,
           const queueing::LinkMatrix& links,
           const queueing::AnalyticsOptions& opts) {
  require_valid(s);
  const ObjectiveSpec spec = objective_for(strategy, s.risk.beta);
  if (strategy == StrategyKind::q_r_opt || strategy == StrategyKind::q_nr_opt)
    return solve_enumerated(s, links, spec, strategy, opts);

  const auto costs = assign_costs(s, links, spec, opts);
  auto x = solve_bottleneck_assignment(costs, server_capacities(s));
  auto alloc = allocate_frequencies(x, s, links, spec, opts);
  return finalize_plan(s, links, std::move(x), std::move(alloc.frequency),
                       strategy, opts);
}

Plan solve(const Scenario& s, StrategyKind strategy) {
  require_valid(s);
  return solve(s, strategy, queueing::analyze_links(s));
}

Plan solve_optimal(const Scenario& s, const queueing::LinkMatrix& links,
                   double beta, const queueing::AnalyticsOptions& opts) {
  require_valid(s);
  const auto tag =
      beta > 0.0 ? StrategyKind::q_r_opt : StrategyKind::q_nr_opt;
  return solve_enumerated(s, links, {true, beta}, tag, opts);
}

std::vector<Violation> validate_plan(const Scenario& s, const Plan& p) {
  std::vector<Violation> v;
  const int m = s.device_count();
  const int n = s.server_count();
  if (static_cast<int>(p.assignment.size()) != m) {
    v.push_back({"assignment", "must have one entry per device"});
    return v;
  }
  if (static_cast<int>(p.frequency.size()) != m) {
    v.push_back({"frequency", "must have one row per device"});
    return v;
  }

  std::vector<int> counts(n, 0);
  for (int i = 0; i < m; ++i) {
    const std::string at = "assignment[" + std::to_string(i) + "]";
    const int j = p.assignment[i];
    if (j < 0 || j >= n) {
      v.push_back({at, "server index out of range"});
      continue;
    }
    ++counts[j];
    if (static_cast<int>(p.frequency[i].size()) != n) {
      v.push_back({"frequency[" + std::to_string(i) + "]",
                   "must have one entry per server"});
      continue;
    }
    for (int k = 0; k < n; ++k) {
      const double f = p.frequency[i][k];
      if (k == j) {
        if (!(f > 0.0))
          v.push_back({"frequency[" + std::to_string(i) + "]",
                       "chosen server must get a positive frequency"});
        const double floor = s.devices[i].arrival_rate *
                             s.devices[i].task_cycles() * (1.0 - 1e-9);
        if (f < floor)
          v.push_back({"frequency[" + std::to_string(i) + "]",
                       "below the stability floor"});
      } else if (f != 0.0) {
        v.push_back({"frequency[" + std::to_string(i) + "]",
                     "nonzero frequency off the chosen server"});
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    if (counts[j] > s.servers[j].cores)
      v.push_back({"servers[" + std::to_string(j) + "]",
                   "more devices than cores"});
    double sum = 0.0;
    for (int i = 0; i < m; ++i)
      if (static_cast<int>(p.frequency[i].size()) == n) sum += p.frequency[i][j];
    if (sum > s.servers[j].total_frequency_hz * (1.0 + kCapTol))
      v.push_back({"servers[" + std::to_string(j) + "]",
                   "frequency budget exceeded"});
  }
  return v;
}

std::string plan_to_json(const Plan& p) {
  json j;
  j["schema"] = 1;
  j["strategy"] = strategy_name(p.strategy);
  j["objective"] = p.objective;
  j["assignments"] = json::array();
  for (size_t i = 0; i < p.assignment.size(); ++i) {
    const int srv = p.assignment[i];
    j["assignments"].push_back({{"device", i},
                                {"server", srv},
                                {"frequency_hz", p.frequency[i][srv]}});
  }
  j["per_device"] = json::array();
  for (size_t i = 0; i < p.per_device.size(); ++i) {
    const auto& b = p.per_device[i];
    auto parts = [](const queueing::DelayComponents& c) {
      return json{{"device_wait", c.device_wait},
                  {"tx", c.tx},
                  {"server_wait", c.server_wait},
                  {"compute", c.compute}};
    };
    j["per_device"].push_back({{"device", i},
                               {"objective", p.per_device_objective[i]},
                               {"mean_total", b.mean_total},
                               {"cvar_total", b.cvar_total},
                               {"mean", parts(b.mean)},
                               {"cvar", parts(b.cvar)}});
  }
  return j.dump(2) + "\n";
}

Plan plan_from_json(const std::string& text, const Scenario& s,
                    const queueing::LinkMatrix& links,
                    const queueing::AnalyticsOptions& opts) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("plan parse error: ") + e.what());
  }
  try {
    const int m = s.device_count();
    const int n = s.server_count();
    std::vector<int> assignment(m, -1);
    std::vector<std::vector<double>> freq(m, std::vector<double>(n, 0.0));
    for (const auto& ja : j.at("assignments")) {
      const int dev = ja.at("device").get<int>();
      const int srv = ja.at("server").get<int>();
      if (dev < 0 || dev >= m || srv < 0 || srv >= n)
        throw ValidationError("plan: device/server index out of range");
      assignment[dev] = srv;
      freq[dev][srv] = ja.at("frequency_hz").get<double>();
    }
    for (int i = 0; i < m; ++i)
      if (assignment[i] < 0)
        throw ValidationError("plan: missing assignment for device " +
                              std::to_string(i));
    const StrategyKind tag =
        j.contains("strategy")
            ? parse_strategy(j.at("strategy").get<std::string>())
            : StrategyKind::q_r;
    return finalize_plan(s, links, std::move(assignment), std::move(freq), tag,
                         opts);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("plan: ") + e.what());
  }
}

}  // namespace edgeplan::planner
