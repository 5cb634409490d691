#pragma once

#include <cstdint>
#include <vector>

#include "edgeplan/planner.hpp"
#include "edgeplan/queueing.hpp"
#include "edgeplan/risk.hpp"
#include "edgeplan/scenario.hpp"

// Discrete-event validator for a plan: Poisson arrivals, a FIFO transmission
// queue per device with a fresh gain draw per task, and a dedicated per-device
// core queue with deterministic service. Deterministic in the seed; device
// streams are keyed by device id, so per-device results do not depend on how
// devices are ordered or interleaved.

namespace edgeplan::sim {

struct SimOptions {
  double horizon = 300.0;  // arrivals are generated in [0, horizon)
  double warmup = -1.0;    // records before this are dropped; <0 means 10% of horizon
  std::uint64_t seed = 0;
  // A queue growing past this length flags the run as unstable instead of
  // aborting it; queueing-blind plans and hand-written plan files can select
  // links whose device queue diverges.
  std::size_t queue_cap = 1000000;

  double effective_warmup() const { return warmup < 0 ? 0.1 * horizon : warmup; }
};

struct TaskRecord {
  int device = 0;
  double arrival = 0.0;
  double device_wait = 0.0;
  double tx = 0.0;
  double server_wait = 0.0;
  double compute = 0.0;
  double total = 0.0;  // always the sum of the four parts
};

struct DeviceSamples {
  std::vector<TaskRecord> records;  // post-warmup, in arrival order
  std::size_t warmup_discarded = 0;
  bool flagged_unstable = false;
  std::size_t max_device_queue = 0;
  std::size_t max_server_queue = 0;
  // Time-average number of tasks waiting for the transmitter over
  // [warmup, horizon]; input for Little's-law checks.
  double mean_waiting_count = 0.0;
};

struct SimResult {
  std::vector<DeviceSamples> devices;
  double horizon = 0.0;
  double warmup = 0.0;
  std::uint64_t seed = 0;

  // Totals of one device, or of all devices when device < 0.
  std::vector<double> totals(int device = -1) const;
};

// Runs the tandem queues to completion (arrivals stop at the horizon, queues
// drain). The plan must be feasible for the scenario.
SimResult run(const Scenario& s, const planner::Plan& plan,
              const SimOptions& opts);

struct DeviceStats {
  int device = 0;
  std::size_t count = 0;
  risk::RiskSummary summary;                   // of total delays
  queueing::DelayComponents component_means;   // per-part means
  bool flagged_unstable = false;
};

// Per-device summaries; requires at least ceil(10/(1-alpha)) records per
// device (InsufficientSamplesError otherwise).
std::vector<DeviceStats> statistics(const SimResult& r, double alpha);

// P(total > w) for each grid point, over one device or all (device < 0).
std::vector<double> ccdf(const SimResult& r, int device,
                         const std::vector<double>& grid);

}  // namespace edgeplan::sim
