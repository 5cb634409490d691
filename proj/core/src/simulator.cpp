#include "edgeplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "edgeplan/channel.hpp"
#include "edgeplan/errors.hpp"

namespace edgeplan::sim {

namespace {

struct Pending {  // one task in flight between queue stages
  double arrival = 0.0;
  double device_wait = 0.0;
  double tx_time = 0.0;
  double tx_done = 0.0;
};

enum class EvKind : std::uint8_t { arrival, tx_done, service_done };

struct Event {
  double time;
  std::uint64_t seq;  // monotone tiebreaker for simultaneous events
  int device;
  EvKind kind;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct DeviceState {
  const DeviceSpec* spec = nullptr;
  const ChannelSpec* channel = nullptr;
  double service = 0.0;  // deterministic core service time c/f
  rng::Stream arrivals{0};
  rng::Stream gains{0};

  std::deque<double> waiting;  // arrival times queued for the transmitter
  bool tx_busy = false;
  Pending in_tx;
  std::deque<Pending> server_q;
  bool core_busy = false;
  Pending in_srv;
  double srv_start = 0.0;

  double area = 0.0;  // integral of |waiting| over [warmup, horizon]
  double last_t = 0.0;
  DeviceSamples out;
};

}  // namespace

std::vector<double> SimResult::totals(int device) const {
  std::vector<double> out;
  for (int i = 0; i < static_cast<int>(devices.size()); ++i) {
    if (device >= 0 && i != device) continue;
    for (const auto& r : devices[i].records) out.push_back(r.total);
  }
  return out;
}

SimResult run(const Scenario& s, const planner::Plan& plan,
              const SimOptions& opts) {
  require_valid(s);
  if (!(opts.horizon > 0.0))
    throw std::invalid_argument("simulation horizon must be > 0");
  const double warmup = opts.effective_warmup();
  if (warmup >= opts.horizon)
    throw std::invalid_argument("warmup must be below the horizon");
  {
    const auto violations = planner::validate_plan(s, plan);
    if (!violations.empty()) {
      std::ostringstream msg;
      msg << "plan infeasible for scenario:";
      for (const auto& v : violations)
        msg << "\n  " << v.where << ": " << v.message;
      throw InfeasibleError(msg.str());
    }
  }

  const int m = s.device_count();
  std::vector<DeviceState> dev(m);
  std::priority_queue<Event, std::vector<Event>, EventAfter> events;
  std::uint64_t seq = 0;

  for (int i = 0; i < m; ++i) {
    auto& d = dev[i];
    d.spec = &s.devices[i];
    const int srv = plan.assignment[i];
    d.channel = &s.channels[i][srv];
    d.service = d.spec->task_cycles() / plan.frequency[i][srv];
    // Streams are keyed by the device id, not its position, so per-device
    // traces survive reordering of the device list.
    const auto id = static_cast<std::uint64_t>(d.spec->id);
    d.arrivals = rng::make_stream(opts.seed, rng::kSimArrival, id);
    d.gains = rng::make_stream(opts.seed, rng::kSimGain, id);
    const double t0 = rng::exponential(d.arrivals, d.spec->arrival_rate);
    if (t0 < opts.horizon) events.push({t0, seq++, i, EvKind::arrival});
  }

  auto add_area = [&](DeviceState& d, double now) {
    const double a = std::max(d.last_t, warmup);
    const double b = std::min(now, opts.horizon);
    if (b > a) d.area += static_cast<double>(d.waiting.size()) * (b - a);
    d.last_t = now;
  };

  auto try_start_tx = [&](DeviceState& d, int i, double now) {
    if (d.tx_busy || d.waiting.empty()) return;
    add_area(d, now);
    const double arrival = d.waiting.front();
    d.waiting.pop_front();
    double rate = 0.0;
    do {
      rate = channel::transmission_rate(
          channel::sample_gain(d.channel->fading, d.gains), d.spec->tx_power_w,
          d.channel->bandwidth_hz, d.channel->noise_power_w,
          d.channel->path_loss);
    } while (rate <= 0.0);
    d.in_tx.arrival = arrival;
    d.in_tx.device_wait = now - arrival;
    d.in_tx.tx_time = d.spec->data_size_bits / rate;
    d.tx_busy = true;
    events.push({now + d.in_tx.tx_time, seq++, i, EvKind::tx_done});
  };

  auto try_start_service = [&](DeviceState& d, int i, double now) {
    if (d.core_busy || d.server_q.empty()) return;
    d.in_srv = d.server_q.front();
    d.server_q.pop_front();
    d.srv_start = now;
    d.core_busy = true;
    events.push({now + d.service, seq++, i, EvKind::service_done});
  };

  while (!events.empty()) {
    const Event e = events.top();
    events.pop();
    auto& d = dev[e.device];
    switch (e.kind) {
      case EvKind::arrival: {
        add_area(d, e.time);
        d.waiting.push_back(e.time);
        d.out.max_device_queue =
            std::max(d.out.max_device_queue, d.waiting.size());
        if (d.waiting.size() > opts.queue_cap) d.out.flagged_unstable = true;
        const double nxt =
            e.time + rng::exponential(d.arrivals, d.spec->arrival_rate);
        if (nxt < opts.horizon)
          events.push({nxt, seq++, e.device, EvKind::arrival});
        try_start_tx(d, e.device, e.time);
        break;
      }
      case EvKind::tx_done: {
        d.in_tx.tx_done = e.time;
        d.server_q.push_back(d.in_tx);
        d.out.max_server_queue =
            std::max(d.out.max_server_queue, d.server_q.size());
        if (d.server_q.size() > opts.queue_cap) d.out.flagged_unstable = true;
        d.tx_busy = false;
        try_start_tx(d, e.device, e.time);
        try_start_service(d, e.device, e.time);
        break;
      }
      case EvKind::service_done: {
        const Pending& p = d.in_srv;
        if (p.arrival >= warmup) {
          TaskRecord r;
          r.device = e.device;
          r.arrival = p.arrival;
          r.device_wait = p.device_wait;
          r.tx = p.tx_time;
          r.server_wait = d.srv_start - p.tx_done;
          r.compute = d.service;
          r.total = r.device_wait + r.tx + r.server_wait + r.compute;
          d.out.records.push_back(r);
        } else {
          ++d.out.warmup_discarded;
        }
        d.core_busy = false;
        try_start_service(d, e.device, e.time);
        break;
      }
    }
  }

  SimResult result;
  result.horizon = opts.horizon;
  result.warmup = warmup;
  result.seed = opts.seed;
  const double span = opts.horizon - warmup;
  for (auto& d : dev) {
    d.out.mean_waiting_count = span > 0 ? d.area / span : 0.0;
    result.devices.push_back(std::move(d.out));
  }
  return result;
}

std::vector<DeviceStats> statistics(const SimResult& r, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  const auto need =
      static_cast<std::size_t>(std::ceil(10.0 / (1.0 - alpha) - 1e-9));
  std::vector<DeviceStats> out;
  for (int i = 0; i < static_cast<int>(r.devices.size()); ++i) {
    const auto& d = r.devices[i];
    if (d.records.size() < need) {
      std::ostringstream msg;
      msg << "device " << i << ": " << d.records.size()
          << " records, need at least " << need << " for alpha=" << alpha;
      throw InsufficientSamplesError(msg.str());
    }
    DeviceStats st;
    st.device = i;
    st.count = d.records.size();
    st.flagged_unstable = d.flagged_unstable;
    std::vector<double> totals;
    totals.reserve(d.records.size());
    for (const auto& rec : d.records) {
      totals.push_back(rec.total);
      st.component_means.device_wait += rec.device_wait;
      st.component_means.tx += rec.tx;
      st.component_means.server_wait += rec.server_wait;
      st.component_means.compute += rec.compute;
    }
    const auto n = static_cast<double>(d.records.size());
    st.component_means.device_wait /= n;
    st.component_means.tx /= n;
    st.component_means.server_wait /= n;
    st.component_means.compute /= n;
    st.summary = risk::summarize(totals, alpha);
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<double> ccdf(const SimResult& r, int device,
                         const std::vector<double>& grid) {
  auto totals = r.totals(device);
  if (totals.empty()) throw InsufficientSamplesError("no records to bin");
  std::sort(totals.begin(), totals.end());
  const auto n = static_cast<double>(totals.size());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double w : grid) {
    const auto above =
        totals.end() - std::upper_bound(totals.begin(), totals.end(), w);
    out.push_back(static_cast<double>(above) / n);
  }
  return out;
}

}  // namespace edgeplan::sim
