#include <doctest.h>

#include <cmath>

#include "edgeplan/channel.hpp"
#include "edgeplan/errors.hpp"
#include "edgeplan/queueing.hpp"
#include "edgeplan/rng.hpp"
#include "edgeplan/scenario.hpp"

using namespace edgeplan;

namespace {

FadingModel constant_gain(double gain) {
  FadingModel f;
  f.composition = FadingComposition::mixture;
  f.mixture_weight = 0.0;
  f.lognormal_location = std::log(gain);
  f.lognormal_scale = 0.0;
  return f;
}

// Device/channel pair whose transmission time is exactly tx seconds.
std::pair<DeviceSpec, ChannelSpec> deterministic_link(double arrival_rate,
                                                      double tx) {
  DeviceSpec dev;
  dev.id = 0;
  dev.arrival_rate = arrival_rate;
  dev.data_size_bits = 5e5;
  dev.compute_intensity = 15.0;
  dev.tx_power_w = 1.0;
  ChannelSpec ch;
  ch.bandwidth_hz = 1e7;
  ch.noise_power_w = 1e-9;
  ch.path_loss = 1e7;
  // rate needed: d / tx; snr solving B*log2(1+snr) = rate
  const double snr = std::exp2(5e5 / tx / 1e7) - 1.0;
  ch.fading = constant_gain(snr * 1e-2);
  return {dev, ch};
}

RiskParams default_risk() {
  RiskParams r;
  r.alpha = 0.99;
  r.beta = 2.0;
  r.cvar_samples = 1000;
  return r;
}

}  // namespace

TEST_SUITE("queueing") {

TEST_CASE("device wait follows the printed mean formula") {
  CHECK(queueing::device_wait_mean(10.0, 40.0) ==
        doctest::Approx(10.0 / (2.0 * 1600.0 * 0.75)).epsilon(1e-12));
  CHECK(queueing::device_wait_mean(1e-9, 40.0) ==
        doctest::Approx(0.0).epsilon(1e-10));
  // rho extremely close to 1 is still in the formula's domain
  CHECK(std::isfinite(queueing::device_wait_mean(10.0, 10.0001)));
  CHECK_THROWS_AS(queueing::device_wait_mean(10.0, 10.0), InstabilityError);
  CHECK_THROWS_AS(queueing::device_wait_mean(11.0, 10.0), InstabilityError);
}

TEST_CASE("full Pollaczek-Khinchine adds the service-variance term") {
  const double lam = 8.0, mu = 20.0, v = 0.003;
  const double rho = lam / mu;
  CHECK(queueing::device_wait_mean_full_pk(lam, mu, v) ==
        doctest::Approx(queueing::device_wait_mean(lam, mu) +
                        lam * v / (2.0 * (1.0 - rho)))
            .epsilon(1e-12));
}

TEST_CASE("Kingman bound arithmetic and M/M/1 dominance") {
  CHECK(queueing::kingman_bound(10.0, 0.0, 0.0, 0.5) == 0.0);
  CHECK(queueing::kingman_bound(10.0, 0.01, 0.0, 0.5) ==
        doctest::Approx(0.1).epsilon(1e-12));
  // M/M/1 lam=5 mu=10: exact wait rho/(mu-lam) = 0.1, bound 0.25
  const double bound = queueing::kingman_bound(5.0, 1.0 / 25.0, 1.0 / 100.0, 0.5);
  CHECK(bound == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(bound >= 0.1);
  CHECK_THROWS_AS(queueing::kingman_bound(5.0, 0.1, 0.1, 1.0),
                  InstabilityError);
}

TEST_CASE("server bound is the Kingman bound with deterministic service") {
  CHECK(queueing::server_wait_bound(10.0, 0.0, 0.5) == 0.0);
  CHECK(queueing::server_wait_bound(10.0, 0.01, 0.5) ==
        doctest::Approx(0.1).epsilon(1e-12));
  auto g = rng::make_stream(17, rng::kAnalytics);
  for (int i = 0; i < 100; ++i) {
    const double lam = rng::uniform(g, 1.0, 40.0);
    const double var = rng::uniform(g, 0.0, 0.02);
    const double rho = rng::uniform(g, 0.05, 0.95);
    CHECK(queueing::server_wait_bound(lam, var, rho) ==
          queueing::kingman_bound(lam, var, 0.0, rho));
  }
}

TEST_CASE("departure moments keep the rate and interpolate the variance") {
  TxTimeStats tx;
  tx.mean = 0.02;

  // cs^2 = 1 pins the inter-departure variance at 1/lambda^2 for any rho
  tx.variance = tx.mean * tx.mean;
  for (double lam : {1.0, 10.0, 45.0}) {
    if (lam * tx.mean >= 1.0) continue;
    const auto d = queueing::departure_moments(lam, tx);
    CHECK(d.rate == lam);
    CHECK(d.interval_variance == doctest::Approx(1.0 / (lam * lam)).epsilon(1e-12));
  }

  // deterministic service: variance shrinks as rho -> 1
  tx.variance = 0.0;
  const auto low = queueing::departure_moments(1.0, tx);
  CHECK(low.interval_variance == doctest::Approx(1.0).epsilon(1e-3));
  const auto high = queueing::departure_moments(49.0, tx);  // rho = 0.98
  CHECK(high.interval_variance ==
        doctest::Approx((1.0 - 0.98 * 0.98) / (49.0 * 49.0)).epsilon(1e-9));

  CHECK_THROWS_AS(queueing::departure_moments(51.0, tx), InstabilityError);
}

TEST_CASE("heavy-traffic waiting CDF is a CDF") {
  const double lam = 10.0, v = 0.01, rho = 0.5;
  CHECK(queueing::heavy_traffic_wait_cdf(0.0, lam, v, rho) == 0.0);
  CHECK(queueing::heavy_traffic_wait_cdf(1e9, lam, v, rho) ==
        doctest::Approx(1.0));
  const double median = lam * v * std::log(2.0) / (2.0 * (1.0 - rho));
  CHECK(queueing::heavy_traffic_wait_cdf(median, lam, v, rho) ==
        doctest::Approx(0.5).epsilon(1e-12));
  double prev = -1.0;
  for (double w = 0.0; w < 1.0; w += 0.05) {
    const double p = queueing::heavy_traffic_wait_cdf(w, lam, v, rho);
    CHECK(p >= prev);
    prev = p;
  }
  // zero service variance collapses to a step at zero
  CHECK(queueing::heavy_traffic_wait_cdf(1e-9, lam, 0.0, rho) == 1.0);
  CHECK(queueing::heavy_traffic_wait_cdf(0.0, lam, 0.0, rho) == 0.0);
}

TEST_CASE("constant-gain link analytics are exact") {
  const auto [dev, ch] = deterministic_link(10.0, 0.05);  // rho 0.5
  const auto link =
      queueing::analyze_link(dev, ch, 0, 0, default_risk(), 77);
  CHECK(link.tx_mean == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(link.tx_variance == 0.0);
  CHECK(link.mu == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(link.rho == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(link.stable);
  CHECK(link.dep_rate == 10.0);
  // deterministic tx: cs^2 = 0, so sigma_s^2 = (1 - rho^2)/lambda^2
  CHECK(link.dep_interval_var ==
        doctest::Approx((1.0 - 0.25) / 100.0).epsilon(1e-9));
  // CVaR of a constant transmission time is that time
  CHECK(link.cvar_tx == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(link.rho_s == doctest::Approx(10.0 / 20.0).epsilon(1e-9));
}

TEST_CASE("unstable device queues are reported, not thrown") {
  const auto [dev, ch] = deterministic_link(25.0, 0.05);  // rho 1.25
  const auto link =
      queueing::analyze_link(dev, ch, 0, 0, default_risk(), 78);
  CHECK_FALSE(link.stable);
  CHECK(link.rho > 1.0);
  CHECK_THROWS_AS(queueing::delay_bound(link, 1e9, 0.99), InstabilityError);
}

TEST_CASE("delay bound is the sum of its four parts") {
  const auto [dev, ch] = deterministic_link(10.0, 0.05);
  const auto link = queueing::analyze_link(dev, ch, 0, 0, default_risk(), 79);
  const auto b = queueing::delay_bound(link, 1e9, 0.99);
  CHECK(b.mean_total == doctest::Approx(b.mean.device_wait + b.mean.tx +
                                        b.mean.server_wait + b.mean.compute)
                            .epsilon(1e-12));
  CHECK(b.cvar_total == doctest::Approx(b.cvar.device_wait + b.cvar.tx +
                                        b.cvar.server_wait + b.cvar.compute)
                            .epsilon(1e-12));
  CHECK(b.cvar_total >= b.mean_total);
  CHECK(b.mean.compute == doctest::Approx(7.5e6 / 1e9).epsilon(1e-12));

  // zero tx variance kills the device-wait CVaR term and pins U at tx
  CHECK(b.cvar.device_wait == 0.0);
  CHECK(b.cvar.tx == doctest::Approx(0.05).epsilon(1e-9));

  // mean parts echo the printed formulas
  CHECK(b.mean.device_wait ==
        doctest::Approx(queueing::device_wait_mean(10.0, link.mu)));
  CHECK(b.mean.server_wait ==
        doctest::Approx(queueing::server_wait_bound(link)));
}

TEST_CASE("near-zero load empties the device queue but not the server bound") {
  const auto [dev0, ch] = deterministic_link(10.0, 0.05);
  DeviceSpec dev = dev0;
  dev.arrival_rate = 1e-7;
  const auto link = queueing::analyze_link(dev, ch, 0, 0, default_risk(), 80);
  const auto b = queueing::delay_bound(link, 1e9, 0.99);
  CHECK(b.mean.device_wait < 1e-9);
  CHECK(b.mean.tx == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(b.mean.compute == doctest::Approx(0.0075).epsilon(1e-9));
  // the interarrival-variance term keeps the server bound near 1/(2 lambda);
  // the bound is loose at light load by construction, it does not vanish
  CHECK(b.mean.server_wait ==
        doctest::Approx(1.0 / (2.0 * 1e-7)).epsilon(1e-6));
  CHECK(b.mean_total ==
        doctest::Approx(b.mean.device_wait + b.mean.tx + b.mean.server_wait +
                        b.mean.compute)
            .epsilon(1e-12));
}

TEST_CASE("full matrix analytics are deterministic and stream-seeded") {
  const Scenario s = generate_scenario(6, 3, 2);
  const auto a = queueing::analyze_links(s);
  const auto b = queueing::analyze_links(s);
  REQUIRE(a.size() == 3);
  REQUIRE(a[0].size() == 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(a[i][j].tx_mean == b[i][j].tx_mean);
      CHECK(a[i][j].cvar_tx == b[i][j].cvar_tx);
      CHECK(a[i][j].device == i);
      CHECK(a[i][j].server == j);
      if (a[i][j].stable) CHECK(a[i][j].dep_rate == s.devices[i].arrival_rate);
    }
}

TEST_CASE("utilization convention switch moves the server denominator") {
  const auto [dev, ch] = deterministic_link(10.0, 0.05);
  const auto link = queueing::analyze_link(dev, ch, 0, 0, default_risk(), 81);
  queueing::AnalyticsOptions corrected;
  corrected.corrected_rho_s = true;
  const double rho_pub = 10.0 / 20.0;
  for (double f : {3e8, 1.25e8}) {
    const auto published = queueing::delay_bound(link, f, 0.99);
    const auto compute_side = queueing::delay_bound(link, f, 0.99, corrected);
    const double rho_cor = 10.0 * 7.5e6 / f;
    CHECK(published.mean.server_wait ==
          doctest::Approx(queueing::server_wait_bound(
              link.dep_rate, link.dep_interval_var, rho_pub)));
    CHECK(compute_side.mean.server_wait ==
          doctest::Approx(queueing::server_wait_bound(
              link.dep_rate, link.dep_interval_var, rho_cor)));
  }
  // at 300 MHz the compute-side utilization (0.25) sits below the published
  // transmission-side one (0.5), at 125 MHz (0.6) above; the bound follows
  CHECK(queueing::delay_bound(link, 3e8, 0.99, corrected).mean.server_wait ==
        doctest::Approx(0.05).epsilon(1e-9));
  CHECK(queueing::delay_bound(link, 3e8, 0.99).mean.server_wait ==
        doctest::Approx(0.075).epsilon(1e-9));
  CHECK(queueing::delay_bound(link, 1.25e8, 0.99, corrected).mean.server_wait ==
        doctest::Approx(0.09375).epsilon(1e-9));
}

TEST_CASE("full-PK switch adds exactly the variance term to the mean") {
  const Scenario s = generate_scenario(12, 1, 1);
  const auto links = queueing::analyze_links(s);
  const auto& link = links[0][0];
  if (!link.stable) return;
  queueing::AnalyticsOptions full;
  full.full_pk = true;
  const auto plain = queueing::delay_bound(link, 1e9, 0.99);
  const auto pk = queueing::delay_bound(link, 1e9, 0.99, full);
  const double lam = link.arrival_rate;
  CHECK(pk.mean.device_wait - plain.mean.device_wait ==
        doctest::Approx(lam * link.tx_variance / (2.0 * (1.0 - link.rho)))
            .epsilon(1e-9));
}

TEST_CASE("total bounds select the requested link") {
  const Scenario s = generate_scenario(21, 2, 2);
  const auto links = queueing::analyze_links(s);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (!links[i][j].stable) continue;
      const auto direct = queueing::delay_bound(links[i][j], 2e9, s.risk.alpha);
      const auto routed = queueing::total_bounds(links, i, j, 2e9, s.risk.alpha);
      CHECK(routed.mean_total == direct.mean_total);
      CHECK(routed.cvar_total == direct.cvar_total);
    }
}

}  // TEST_SUITE
