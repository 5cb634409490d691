#pragma once

#include <cstdint>
#include <vector>

#include "edgeplan/rng.hpp"

namespace edgeplan {

enum class FadingComposition {
  product,  // gain = small-scale part * shadowing part
  mixture,  // gain = small-scale part with prob. mixture_weight, else shadowing
};

// Block-fading channel gain model: Rayleigh small-scale fading combined with
// log-normal shadowing. A fresh gain is drawn per task.
struct FadingModel {
  double rayleigh_scale = 1.0;      // sigma of the Rayleigh amplitude
  double lognormal_location = 0.0;  // mu of the underlying normal
  double lognormal_scale = 1.0;     // sigma of the underlying normal, >= 0
  FadingComposition composition = FadingComposition::product;
  double mixture_weight = 0.5;  // P(small-scale branch) under mixture
  // By default the Rayleigh draw is an amplitude and enters the power gain
  // squared. Set this to sample the power gain from the Rayleigh directly.
  bool rayleigh_on_power = false;
};

// Uplink description for one device/server pair. path_loss is a linear power
// attenuation ratio (dB inputs are converted when a scenario file is loaded).
struct ChannelSpec {
  FadingModel fading;
  double path_loss = 1.0;
  double bandwidth_hz = 0.0;
  double noise_power_w = 0.0;
};

// Monte Carlo moments of the transmission time of one task over one channel.
struct TxTimeStats {
  double mean = 0.0;      // seconds
  double variance = 0.0;  // seconds^2, Bessel-corrected
  int sample_count = 0;
  long resampled = 0;  // zero-rate draws that were rejected and redrawn
  std::vector<double> samples;  // retained only on request
};

namespace channel {

// One power-gain draw from the fading model.
double sample_gain(const FadingModel& model, rng::Stream& g);

// Shannon uplink rate in bit/s: bandwidth * log2(1 + gain * power / (noise * path_loss)).
double transmission_rate(double gain, double tx_power_w, double bandwidth_hz,
                         double noise_power_w, double path_loss);

// Seconds to push data_bits through at rate_bps. Throws ZeroRateError when
// the rate is zero rather than returning infinity.
double transmission_time(double data_bits, double rate_bps);

// Draws sample_count i.i.d. transmission times (fresh gain per task) and
// returns their moments. Deterministic in seed. sample_count must be >= 100.
TxTimeStats estimate_tx_stats(const ChannelSpec& spec, double data_bits,
                              double tx_power_w, int sample_count,
                              std::uint64_t seed, bool retain_samples = false);

}  // namespace channel
}  // namespace edgeplan
