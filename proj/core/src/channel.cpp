#include "edgeplan/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "edgeplan/errors.hpp"

namespace edgeplan::channel {

double sample_gain(const FadingModel& model, rng::Stream& g) {
  auto small_scale = [&] {
    const double r = rng::rayleigh(g, model.rayleigh_scale);
    return model.rayleigh_on_power ? r : r * r;
  };
  auto shadowing = [&] {
    return rng::lognormal(g, model.lognormal_location, model.lognormal_scale);
  };
  switch (model.composition) {
    case FadingComposition::product:
      return small_scale() * shadowing();
    case FadingComposition::mixture:
      return rng::canonical(g) < model.mixture_weight ? small_scale()
                                                      : shadowing();
  }
  throw std::logic_error("unhandled fading composition");
}

double transmission_rate(double gain, double tx_power_w, double bandwidth_hz,
                         double noise_power_w, double path_loss) {
  const double snr = gain * tx_power_w / (noise_power_w * path_loss);
  return bandwidth_hz * std::log2(1.0 + snr);
}

double transmission_time(double data_bits, double rate_bps) {
  if (rate_bps <= 0.0) throw ZeroRateError("transmission rate is zero");
  return data_bits / rate_bps;
}

TxTimeStats estimate_tx_stats(const ChannelSpec& spec, double data_bits,
                              double tx_power_w, int sample_count,
                              std::uint64_t seed, bool retain_samples) {
  if (sample_count < 100)
    throw std::invalid_argument("estimate_tx_stats: need at least 100 samples");

  rng::Stream g(seed);
  TxTimeStats out;
  out.sample_count = sample_count;
  if (retain_samples) out.samples.reserve(sample_count);

  // Welford keeps the variance exactly zero for a constant-gain channel.
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < sample_count; ++k) {
    double rate = 0.0;
    for (;;) {
      rate = transmission_rate(sample_gain(spec.fading, g), tx_power_w,
                               spec.bandwidth_hz, spec.noise_power_w,
                               spec.path_loss);
      if (rate > 0.0) break;
      ++out.resampled;  // gains are positive a.s.; this is a numeric guard
    }
    const double t = data_bits / rate;
    if (retain_samples) out.samples.push_back(t);
    const double d = t - mean;
    mean += d / (k + 1);
    m2 += d * (t - mean);
  }
  out.mean = mean;
  out.variance = sample_count > 1 ? m2 / (sample_count - 1) : 0.0;
  return out;
}

}  // namespace edgeplan::channel
