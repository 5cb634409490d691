#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "edgeplan/scenario.hpp"

// Analytic delay model for one offloading link: the device side is an M/G/1
// queue (Poisson task arrivals, random transmission time), the server side a
// G/D/1 queue fed by the device's departures with deterministic service
// c_i / f_ij on a dedicated core.

namespace edgeplan::queueing {

struct AnalyticsOptions {
  // The default device-wait formula omits the service-variance term; this
  // switch adds lambda*V/(2*(1-rho)) to make it the full Pollaczek-Khinchine
  // mean wait.
  bool full_pk = false;
  // The server utilization used in the wait bound is lambda_s/mu (the
  // transmission-side rate) as published; this switch substitutes the
  // compute-side utilization lambda_s * c_i / f_ij.
  bool corrected_rho_s = false;
  bool retain_samples = false;
};

// Frequency-independent analytics of one device->server link.
struct LinkAnalytics {
  int device = 0;  // position in Scenario::devices
  int server = 0;  // position in Scenario::servers
  double arrival_rate = 0.0;  // lambda, tasks/s
  double task_cycles = 0.0;   // c, CPU cycles per task
  double tx_mean = 0.0;       // E[transmission time], s
  double tx_variance = 0.0;   // V, s^2
  double mu = 0.0;            // 1 / tx_mean
  double rho = 0.0;           // device utilization lambda/mu
  double dep_rate = 0.0;          // lambda_s, departure rate into the server
  double dep_interval_var = 0.0;  // sigma_s^2, inter-departure variance
  double rho_s = 0.0;             // server utilization as published
  double cvar_tx = 0.0;           // U, CVaR_alpha of the transmission time
  long resampled = 0;
  bool stable = true;  // device queue stable (rho < 1)
  std::vector<double> tx_samples;  // retained only on request
};

using LinkMatrix = std::vector<std::vector<LinkAnalytics>>;

// Mean device-queue wait lambda/(2*mu^2*(1-rho)); add service_variance via
// the dedicated overload for the full Pollaczek-Khinchine form. Throws
// InstabilityError when rho >= 1.
double device_wait_mean(double arrival_rate, double mu);
double device_wait_mean_full_pk(double arrival_rate, double mu,
                                double service_variance);

// Kingman upper bound for a G/G/1 mean wait:
//   lambda * (interarrival_variance + service_variance) / (2 * (1 - rho)).
double kingman_bound(double arrival_rate, double interarrival_variance,
                     double service_variance, double utilization);

// Server-side wait bound lambda_s * sigma_s^2 / (2 * (1 - rho_s)).
double server_wait_bound(double dep_rate, double dep_interval_var,
                         double rho_s);
double server_wait_bound(const LinkAnalytics& link);

struct DepartureMoments {
  double rate = 0.0;
  double interval_variance = 0.0;
};

// Moments of the device queue's departure process: the rate is conserved and
// the inter-departure variance is (1 + rho^2*(cs2 - 1))/lambda^2 with
// cs2 = variance/mean^2 of the transmission time.
DepartureMoments departure_moments(double arrival_rate, const TxTimeStats& tx);

// Heavy-traffic approximation of the device-wait CDF:
//   P(W <= w) = 1 - exp(-2*(1-rho)*w / (lambda*service_variance)).
// Degenerates to a unit step at 0 when service_variance == 0.
double heavy_traffic_wait_cdf(double wait, double arrival_rate,
                              double service_variance, double utilization);

struct DelayComponents {
  double device_wait = 0.0;
  double tx = 0.0;
  double server_wait = 0.0;
  double compute = 0.0;

  double total() const { return device_wait + tx + server_wait + compute; }
};

// Mean-delay bound and CVaR bound for one link at a given frequency, as the
// sum of the four per-part terms.
struct DelayBound {
  DelayComponents mean;
  DelayComponents cvar;
  double mean_total = 0.0;
  double cvar_total = 0.0;
};

// Monte Carlo link analytics; never throws on an unstable device queue, it
// reports stable = false instead. Deterministic in seed.
LinkAnalytics analyze_link(const DeviceSpec& dev, const ChannelSpec& ch,
                           int device_index, int server_index,
                           const RiskParams& risk, std::uint64_t seed,
                           const AnalyticsOptions& opts = {});

// Full device x server matrix, with per-link seeds derived from
// scenario.seed so results do not depend on evaluation order.
LinkMatrix analyze_links(const Scenario& s, const AnalyticsOptions& opts = {});

// Assembles the delay bound for a link at frequency_hz. Throws
// InstabilityError naming the queue that is unstable.
DelayBound delay_bound(const LinkAnalytics& link, double frequency_hz,
                       double alpha, const AnalyticsOptions& opts = {});

// One-call convenience: analytics plus bound for a single link.
std::pair<LinkAnalytics, DelayBound> link_analytics(
    const DeviceSpec& dev, const ChannelSpec& ch, double frequency_hz,
    const RiskParams& risk, std::uint64_t seed,
    const AnalyticsOptions& opts = {});

// Bound for a device under a concrete choice of server and frequency.
DelayBound total_bounds(const LinkMatrix& links, int device, int server,
                        double frequency_hz, double alpha,
                        const AnalyticsOptions& opts = {});

}  // namespace edgeplan::queueing
