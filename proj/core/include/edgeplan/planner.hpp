#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "edgeplan/queueing.hpp"
#include "edgeplan/scenario.hpp"

// Two-stage offloading planner. Stage 1 assigns devices to servers by
// solving a bottleneck assignment problem over frequency-independent link
// costs; stage 2 splits each server's frequency budget across its devices by
// bisection on the min-max epigraph. An exhaustive oracle over all
// assignments is available for gap measurements.

namespace edgeplan::planner {

enum class StrategyKind {
  q_r,       // queueing-aware, risk-sensitive
  q_nr,      // queueing-aware, risk-neutral (beta = 0 while optimizing)
  nq_r,      // queueing-blind, risk-sensitive
  nq_nr,     // queueing-blind, risk-neutral
  q_r_opt,   // exhaustive assignment search, risk-sensitive objective
  q_nr_opt,  // exhaustive assignment search, risk-neutral objective
};

const char* strategy_name(StrategyKind k);
StrategyKind parse_strategy(std::string_view name);  // throws ValidationError
std::vector<StrategyKind> all_strategies();

// What the optimizer sees. Strategies differ in whether queueing-wait terms
// enter the cost and in the risk weight; the reported plan objective is
// always re-evaluated under the full metric with the scenario's beta.
struct ObjectiveSpec {
  bool queueing_terms = true;
  double beta = 0.0;
};

ObjectiveSpec objective_for(StrategyKind k, double scenario_beta);

// Per-link assignment costs (frequency-independent terms only). Links whose
// device queue is unstable are marked infeasible.
struct AssignCost {
  std::vector<std::vector<double>> value;  // devices x servers
  std::vector<std::vector<char>> feasible;
};

AssignCost assign_costs(const Scenario& s, const queueing::LinkMatrix& links,
                        const ObjectiveSpec& spec,
                        const queueing::AnalyticsOptions& opts = {});

// Exact bottleneck assignment under per-server core capacities: minimizes
// the maximum selected cost via threshold search plus bipartite matching.
// Returns device -> server. Throws InfeasibleError when no assignment exists.
std::vector<int> solve_bottleneck_assignment(const AssignCost& costs,
                                             const std::vector<int>& capacities);

// One device's contribution T_i(f) = constant + weight / f to a server's
// min-max epigraph, plus the stability floor on f.
struct DeviceLoad {
  double constant = 0.0;  // seconds
  double weight = 0.0;    // cycle-seconds, > 0
  double floor = 0.0;     // Hz, minimum stable frequency
};

struct ServerAllocation {
  std::vector<double> frequency;  // Hz, same order as the loads
  double objective = 0.0;         // achieved max_i T_i
};

// Minimizes max_i (constant_i + weight_i / f_i) subject to sum f_i <= capacity
// and f_i >= floor_i, by bisection on the epigraph value (absolute tolerance
// 1e-9 s; capacity checked to 1e-6 relative). The result is pointwise
// minimal: lowering any f_i either violates its floor or lifts T_i above the
// returned objective.
ServerAllocation allocate_server(const std::vector<DeviceLoad>& loads,
                                 double capacity_hz);

struct Allocation {
  std::vector<std::vector<double>> frequency;  // devices x servers, 0 off-plan
  double objective = 0.0;  // optimum of the strategy's objective
};

Allocation allocate_frequencies(const std::vector<int>& assignment,
                                const Scenario& s,
                                const queueing::LinkMatrix& links,
                                const ObjectiveSpec& spec,
                                const queueing::AnalyticsOptions& opts = {});

struct Plan {
  StrategyKind strategy = StrategyKind::q_r;
  std::vector<int> assignment;                 // device -> server position
  std::vector<std::vector<double>> frequency;  // devices x servers, Hz
  // Everything below is evaluated under the full metric with the scenario's
  // beta, whatever the strategy optimized.
  double objective = 0.0;  // max_i (mean_total + beta * cvar_total)
  std::vector<queueing::DelayBound> per_device;
  std::vector<double> per_device_objective;
};

Plan solve(const Scenario& s, StrategyKind strategy,
           const queueing::LinkMatrix& links,
           const queueing::AnalyticsOptions& opts = {});
Plan solve(const Scenario& s, StrategyKind strategy);  // computes links itself

// Exhaustive search over all capacity-respecting assignments with optimal
// frequencies for each; guarded to N^M <= 1e6 candidates (GuardError).
Plan solve_optimal(const Scenario& s, const queueing::LinkMatrix& links,
                   double beta, const queueing::AnalyticsOptions& opts = {});

// Feasibility audit of a plan against a scenario: assignment shape, core
// capacities, frequency budgets (1e-6 relative slack), stability floors.
std::vector<Violation> validate_plan(const Scenario& s, const Plan& p);

std::string plan_to_json(const Plan& p);
// Reads assignment + frequencies back; bounds and objective are recomputed
// against the given scenario with links supplied by the caller.
Plan plan_from_json(const std::string& text, const Scenario& s,
                    const queueing::LinkMatrix& links,
                    const queueing::AnalyticsOptions& opts = {});

}  // namespace edgeplan::planner
