#include "edgeplan/queueing.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "edgeplan/errors.hpp"
#include "edgeplan/risk.hpp"

namespace edgeplan::queueing {

namespace {

void require_stable(double rho, const char* queue) {
  if (rho < 1.0) return;
  std::ostringstream msg;
  msg << queue << " unstable: utilization " << rho << " >= 1";
  throw InstabilityError(msg.str());
}

}  // namespace

double device_wait_mean(double arrival_rate, double mu) {
  if (!(arrival_rate > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("rates must be > 0");
  const double rho = arrival_rate / mu;
  require_stable(rho, "device queue");
  return arrival_rate / (2.0 * mu * mu * (1.0 - rho));
}

double device_wait_mean_full_pk(double arrival_rate, double mu,
                                double service_variance) {
  if (service_variance < 0.0)
    throw std::invalid_argument("service_variance must be >= 0");
  const double base = device_wait_mean(arrival_rate, mu);
  const double rho = arrival_rate / mu;
  return base + arrival_rate * service_variance / (2.0 * (1.0 - rho));
}

double kingman_bound(double arrival_rate, double interarrival_variance,
                     double service_variance, double utilization) {
  if (!(arrival_rate > 0.0))
    throw std::invalid_argument("arrival_rate must be > 0");
  if (interarrival_variance < 0.0 || service_variance < 0.0)
    throw std::invalid_argument("variances must be >= 0");
  require_stable(utilization, "queue");
  return arrival_rate * (interarrival_variance + service_variance) /
         (2.0 * (1.0 - utilization));
}

double server_wait_bound(double dep_rate, double dep_interval_var,
                         double rho_s) {
  if (!(dep_rate > 0.0))
    throw std::invalid_argument("dep_rate must be > 0");
  if (dep_interval_var < 0.0)
    throw std::invalid_argument("dep_interval_var must be >= 0");
  require_stable(rho_s, "server queue");
  return dep_rate * dep_interval_var / (2.0 * (1.0 - rho_s));
}

double server_wait_bound(const LinkAnalytics& link) {
  if (!link.stable) require_stable(link.rho, "device queue");
  return server_wait_bound(link.dep_rate, link.dep_interval_var, link.rho_s);
}

DepartureMoments departure_moments(double arrival_rate,
                                   const TxTimeStats& tx) {
  if (!(arrival_rate > 0.0))
    throw std::invalid_argument("arrival_rate must be > 0");
  if (!(tx.mean > 0.0))
    throw std::invalid_argument("transmission time mean must be > 0");
  const double rho = arrival_rate * tx.mean;
  require_stable(rho, "device queue");
  const double cs2 = tx.variance / (tx.mean * tx.mean);
  DepartureMoments out;
  out.rate = arrival_rate;  // rate conservation through a stable queue
  out.interval_variance =
      (1.0 + rho * rho * (cs2 - 1.0)) / (arrival_rate * arrival_rate);
  return out;
}

double heavy_traffic_wait_cdf(double wait, double arrival_rate,
                              double service_variance, double utilization) {
  if (wait < 0.0) throw std::invalid_argument("wait must be >= 0");
  if (!(arrival_rate > 0.0))
    throw std::invalid_argument("arrival_rate must be > 0");
  if (service_variance < 0.0)
    throw std::invalid_argument("service_variance must be >= 0");
  require_stable(utilization, "device queue");
  if (service_variance == 0.0) return wait > 0.0 ? 1.0 : 0.0;
  return 1.0 - std::exp(-2.0 * (1.0 - utilization) * wait /
                        (arrival_rate * service_variance));
}

LinkAnalytics analyze_link(const DeviceSpec& dev, const ChannelSpec& ch,
                           int device_index, int server_index,
                           const RiskParams& risk, std::uint64_t seed,
                           const AnalyticsOptions& opts) {
  auto stats = channel::estimate_tx_stats(ch, dev.data_size_bits,
                                          dev.tx_power_w, risk.cvar_samples,
                                          seed, true);
  LinkAnalytics link;
  link.device = device_index;
  link.server = server_index;
  link.arrival_rate = dev.arrival_rate;
  link.task_cycles = dev.task_cycles();
  link.tx_mean = stats.mean;
  link.tx_variance = stats.variance;
  link.mu = 1.0 / stats.mean;
  link.rho = dev.arrival_rate * stats.mean;
  link.resampled = stats.resampled;
  link.cvar_tx = risk::cvar_lp(stats.samples, risk.alpha).value;
  link.stable = link.rho < 1.0;
  if (link.stable) {
    const auto dep = departure_moments(dev.arrival_rate, stats);
    link.dep_rate = dep.rate;
    link.dep_interval_var = dep.interval_variance;
    link.rho_s = link.dep_rate / link.mu;
  } else {
    link.dep_rate = link.dep_interval_var = link.rho_s =
        std::numeric_limits<double>::quiet_NaN();
  }
  if (opts.retain_samples) link.tx_samples = std::move(stats.samples);
  return link;
}

LinkMatrix analyze_links(const Scenario& s, const AnalyticsOptions& opts) {
  LinkMatrix links(s.devices.size());
  const int n = s.server_count();
  for (int i = 0; i < s.device_count(); ++i) {
    links[i].reserve(n);
    for (int j = 0; j < n; ++j) {
      const auto seed = rng::derive_seed(s.seed, rng::kAnalytics,
                                         static_cast<std::uint64_t>(i) * n + j);
      links[i].push_back(analyze_link(s.devices[i], s.channels[i][j], i, j,
                                      s.risk, seed, opts));
    }
  }
  return links;
}

DelayBound delay_bound(const LinkAnalytics& link, double frequency_hz,
                       double alpha, const AnalyticsOptions& opts) {
  if (!(frequency_hz > 0.0))
    throw std::invalid_argument("frequency must be > 0");
  if (!link.stable) require_stable(link.rho, "device queue");

  const double rho_s = opts.corrected_rho_s
                           ? link.dep_rate * link.task_cycles / frequency_hz
                           : link.rho_s;
  if (opts.corrected_rho_s) require_stable(rho_s, "server queue");

  DelayBound b;
  b.mean.device_wait =
      opts.full_pk
          ? device_wait_mean_full_pk(link.arrival_rate, link.mu,
                                     link.tx_variance)
          : device_wait_mean(link.arrival_rate, link.mu);
  b.mean.tx = link.tx_mean;
  b.mean.server_wait =
      server_wait_bound(link.dep_rate, link.dep_interval_var, rho_s);
  b.mean.compute = link.task_cycles / frequency_hz;

  b.cvar.device_wait = risk::cvar_exponential_wait(
      link.arrival_rate, link.tx_variance, link.rho, alpha);
  b.cvar.tx = link.cvar_tx;
  b.cvar.server_wait = risk::cvar_exponential_wait(
      link.dep_rate, link.dep_interval_var, rho_s, alpha);
  b.cvar.compute = risk::cvar_constant(b.mean.compute);

  b.mean_total = b.mean.total();
  b.cvar_total = b.cvar.total();
  return b;
}

std::pair<LinkAnalytics, DelayBound> link_analytics(
    const DeviceSpec& dev, const ChannelSpec& ch, double frequency_hz,
    const RiskParams& risk, std::uint64_t seed, const AnalyticsOptions& opts) {
  auto link = analyze_link(dev, ch, 0, 0, risk, seed, opts);
  auto bound = delay_bound(link, frequency_hz, risk.alpha, opts);
  return {std::move(link), bound};
}

DelayBound total_bounds(const LinkMatrix& links, int device, int server,
                        double frequency_hz, double alpha,
                        const AnalyticsOptions& opts) {
  return delay_bound(links.at(device).at(server), frequency_hz, alpha, opts);
}

}  // namespace edgeplan::queueing
