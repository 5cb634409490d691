#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgeplan/channel.hpp"

namespace edgeplan {

struct DeviceSpec {
  int id = 0;
  double arrival_rate = 0.0;       // tasks/s, Poisson
  double data_size_bits = 0.0;     // bits per task
  double compute_intensity = 0.0;  // CPU cycles per bit
  double tx_power_w = 0.0;

  double task_cycles() const { return compute_intensity * data_size_bits; }
};

struct ServerSpec {
  int id = 0;
  int cores = 0;                     // concurrently served devices
  double total_frequency_hz = 0.0;   // divisible computing capacity
};

struct RiskParams {
  double alpha = 0.99;      // tail confidence level, in (0,1)
  double beta = 0.0;        // risk weight in the planning objective, >= 0
  int cvar_samples = 100000;  // Monte Carlo draws per link, >= 100
};

struct Scenario {
  std::vector<DeviceSpec> devices;
  std::vector<ServerSpec> servers;
  // channels[i][j] describes the uplink from device position i to server
  // position j; dimensions must be devices.size() x servers.size().
  std::vector<std::vector<ChannelSpec>> channels;
  RiskParams risk;
  std::uint64_t seed = 0;

  int device_count() const { return static_cast<int>(devices.size()); }
  int server_count() const { return static_cast<int>(servers.size()); }
};

struct Violation {
  std::string where;    // e.g. "devices[2].arrival_rate"
  std::string message;  // e.g. "must be > 0"
};

// Collects every constraint violation instead of stopping at the first.
std::vector<Violation> validate(const Scenario& s);

// Throws ValidationError listing all violations; no-op on a valid scenario.
void require_valid(const Scenario& s);

// JSON (schema version 1) serialization. Round-trips exactly.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// Random scenario in the reference evaluation regime: 0.5 Mbit tasks at
// 15 cycles/bit, arrival rates U(10,30)/s, 10 MHz uplinks at 1 W with 70 dB
// path loss and -60 dBm noise, 4-core 10 GHz servers, per-pair Rayleigh
// scale U(0.5,1), log-normal location U(1,2) and variance U(0,4),
// alpha = 0.99, beta = 2. Deterministic in seed.
Scenario generate_scenario(std::uint64_t seed, int device_count,
                           int server_count);

}  // namespace edgeplan
