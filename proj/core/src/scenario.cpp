#include "edgeplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "edgeplan/errors.hpp"
#include "edgeplan/rng.hpp"

namespace edgeplan {

using nlohmann::json;

namespace {

void check(std::vector<Violation>& out, bool ok, const std::string& where,
           const std::string& message) {
  if (!ok) out.push_back({where, message});
}

}  // namespace

std::vector<Violation> validate(const Scenario& s) {
  std::vector<Violation> v;
  check(v, !s.devices.empty(), "devices", "must not be empty");
  check(v, !s.servers.empty(), "servers", "must not be empty");

  std::vector<int> seen_dev, seen_srv;
  for (size_t i = 0; i < s.devices.size(); ++i) {
    const auto& d = s.devices[i];
    const std::string at = "devices[" + std::to_string(i) + "]";
    check(v, d.arrival_rate > 0, at + ".arrival_rate", "must be > 0");
    check(v, d.data_size_bits > 0, at + ".data_size_bits", "must be > 0");
    check(v, d.compute_intensity > 0, at + ".compute_intensity", "must be > 0");
    check(v, d.tx_power_w > 0, at + ".tx_power_w", "must be > 0");
    check(v, d.id >= 0, at + ".id", "must be >= 0");
    for (int id : seen_dev)
      check(v, id != d.id, at + ".id", "duplicate device id");
    seen_dev.push_back(d.id);
  }

  int total_cores = 0;
  for (size_t j = 0; j < s.servers.size(); ++j) {
    const auto& srv = s.servers[j];
    const std::string at = "servers[" + std::to_string(j) + "]";
    check(v, srv.cores >= 1, at + ".cores", "must be >= 1");
    check(v, srv.total_frequency_hz > 0, at + ".total_frequency_hz",
          "must be > 0");
    check(v, srv.id >= 0, at + ".id", "must be >= 0");
    for (int id : seen_srv)
      check(v, id != srv.id, at + ".id", "duplicate server id");
    seen_srv.push_back(srv.id);
    total_cores += std::max(srv.cores, 0);
  }
  check(v, total_cores >= static_cast<int>(s.devices.size()), "servers",
        "insufficient cores: " + std::to_string(total_cores) + " cores for " +
            std::to_string(s.devices.size()) + " devices");

  check(v, s.channels.size() == s.devices.size(), "channels",
        "must have one row per device");
  for (size_t i = 0; i < s.channels.size(); ++i) {
    const auto& row = s.channels[i];
    const std::string atrow = "channels[" + std::to_string(i) + "]";
    check(v, row.size() == s.servers.size(), atrow,
          "must have one entry per server");
    for (size_t j = 0; j < row.size(); ++j) {
      const auto& ch = row[j];
      const std::string at = atrow + "[" + std::to_string(j) + "]";
      check(v, ch.path_loss > 0, at + ".path_loss", "must be > 0");
      check(v, ch.bandwidth_hz > 0, at + ".bandwidth_hz", "must be > 0");
      check(v, ch.noise_power_w > 0, at + ".noise_power_w", "must be > 0");
      check(v, ch.fading.rayleigh_scale > 0, at + ".fading.rayleigh_scale",
            "must be > 0");
      check(v, ch.fading.lognormal_scale >= 0, at + ".fading.lognormal_scale",
            "must be >= 0");
      check(v,
            ch.fading.mixture_weight >= 0 && ch.fading.mixture_weight <= 1,
            at + ".fading.mixture_weight", "must be in [0,1]");
    }
  }

  check(v, s.risk.alpha > 0 && s.risk.alpha < 1, "risk.alpha",
        "confidence out of range (0,1)");
  check(v, s.risk.beta >= 0, "risk.beta", "must be >= 0");
  check(v, s.risk.cvar_samples >= 100, "risk.cvar_samples", "must be >= 100");
  return v;
}

void require_valid(const Scenario& s) {
  const auto violations = validate(s);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid scenario:";
  for (const auto& v : violations) msg << "\n  " << v.where << ": " << v.message;
  throw ValidationError(msg.str());
}

namespace {

FadingModel fading_from_json(const json& jf, const std::string& at) {
  FadingModel f;
  f.rayleigh_scale = jf.at("rayleigh_scale").get<double>();
  f.lognormal_location = jf.at("lognormal_location").get<double>();
  f.lognormal_scale = jf.at("lognormal_scale").get<double>();
  const std::string comp = jf.value("composition", "product");
  if (comp == "product") {
    f.composition = FadingComposition::product;
  } else if (comp == "mixture") {
    f.composition = FadingComposition::mixture;
  } else {
    throw ValidationError(at + ".composition: unknown value '" + comp + "'");
  }
  f.mixture_weight = jf.value("mixture_weight", 0.5);
  f.rayleigh_on_power = jf.value("rayleigh_on_power", false);
  return f;
}

json fading_to_json(const FadingModel& f) {
  return json{
      {"rayleigh_scale", f.rayleigh_scale},
      {"lognormal_location", f.lognormal_location},
      {"lognormal_scale", f.lognormal_scale},
      {"composition",
       f.composition == FadingComposition::product ? "product" : "mixture"},
      {"mixture_weight", f.mixture_weight},
      {"rayleigh_on_power", f.rayleigh_on_power},
  };
}

ChannelSpec channel_from_json(const json& jc, const std::string& at) {
  ChannelSpec ch;
  ch.fading = fading_from_json(jc.at("fading"), at + ".fading");
  const bool has_linear = jc.contains("path_loss");
  const bool has_db = jc.contains("path_loss_db");
  if (has_linear == has_db)
    throw ValidationError(at +
                          ": exactly one of path_loss / path_loss_db required");
  ch.path_loss = has_linear
                     ? jc.at("path_loss").get<double>()
                     : std::pow(10.0, jc.at("path_loss_db").get<double>() / 10.0);
  ch.bandwidth_hz = jc.at("bandwidth_hz").get<double>();
  ch.noise_power_w = jc.at("noise_power_w").get<double>();
  return ch;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }

  try {
    if (!j.contains("schema") || j.at("schema").get<int>() != 1)
      throw ValidationError("scenario: missing or unsupported schema version");

    Scenario s;
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& jd : j.at("devices")) {
      DeviceSpec d;
      d.id = jd.at("id").get<int>();
      d.arrival_rate = jd.at("arrival_rate").get<double>();
      d.data_size_bits = jd.at("data_size_bits").get<double>();
      d.compute_intensity = jd.at("compute_intensity").get<double>();
      d.tx_power_w = jd.at("tx_power_w").get<double>();
      s.devices.push_back(d);
    }
    for (const auto& js : j.at("servers")) {
      ServerSpec srv;
      srv.id = js.at("id").get<int>();
      srv.cores = js.at("cores").get<int>();
      srv.total_frequency_hz = js.at("total_frequency_hz").get<double>();
      s.servers.push_back(srv);
    }
    const auto& jch = j.at("channels");
    for (size_t i = 0; i < jch.size(); ++i) {
      std::vector<ChannelSpec> row;
      for (size_t k = 0; k < jch[i].size(); ++k) {
        row.push_back(channel_from_json(
            jch[i][k],
            "channels[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
      }
      s.channels.push_back(std::move(row));
    }
    if (j.contains("risk")) {
      const auto& jr = j.at("risk");
      s.risk.alpha = jr.value("alpha", s.risk.alpha);
      s.risk.beta = jr.value("beta", s.risk.beta);
      s.risk.cvar_samples = jr.value("cvar_samples", s.risk.cvar_samples);
    }
    require_valid(s);
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema"] = 1;
  j["seed"] = s.seed;
  j["devices"] = json::array();
  for (const auto& d : s.devices) {
    j["devices"].push_back({{"id", d.id},
                            {"arrival_rate", d.arrival_rate},
                            {"data_size_bits", d.data_size_bits},
                            {"compute_intensity", d.compute_intensity},
                            {"tx_power_w", d.tx_power_w}});
  }
  j["servers"] = json::array();
  for (const auto& srv : s.servers) {
    j["servers"].push_back({{"id", srv.id},
                            {"cores", srv.cores},
                            {"total_frequency_hz", srv.total_frequency_hz}});
  }
  j["channels"] = json::array();
  for (const auto& row : s.channels) {
    json jrow = json::array();
    for (const auto& ch : row) {
      jrow.push_back({{"fading", fading_to_json(ch.fading)},
                      {"path_loss", ch.path_loss},
                      {"bandwidth_hz", ch.bandwidth_hz},
                      {"noise_power_w", ch.noise_power_w}});
    }
    j["channels"].push_back(std::move(jrow));
  }
  j["risk"] = {{"alpha", s.risk.alpha},
               {"beta", s.risk.beta},
               {"cvar_samples", s.risk.cvar_samples}};
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write scenario file: " + path.string());
  out << scenario_to_json(s);
}

Scenario generate_scenario(std::uint64_t seed, int device_count,
                           int server_count) {
  if (device_count < 1 || server_count < 1)
    throw ValidationError("generate_scenario: counts must be >= 1");

  auto g = rng::make_stream(seed, rng::kScenario);
  Scenario s;
  s.seed = seed;
  s.risk = {0.99, 2.0, 100000};

  for (int i = 0; i < device_count; ++i) {
    DeviceSpec d;
    d.id = i;
    d.arrival_rate = rng::uniform(g, 10.0, 30.0);
    d.data_size_bits = 5e5;
    d.compute_intensity = 15.0;
    d.tx_power_w = 1.0;
    s.devices.push_back(d);
  }
  for (int j = 0; j < server_count; ++j) {
    s.servers.push_back({j, 4, 1e10});
  }
  for (int i = 0; i < device_count; ++i) {
    std::vector<ChannelSpec> row;
    for (int j = 0; j < server_count; ++j) {
      ChannelSpec ch;
      ch.fading.rayleigh_scale = rng::uniform(g, 0.5, 1.0);
      ch.fading.lognormal_location = rng::uniform(g, 1.0, 2.0);
      ch.fading.lognormal_scale = std::sqrt(rng::uniform(g, 0.0, 4.0));
      ch.fading.composition = FadingComposition::product;
      ch.path_loss = 1e7;  // 70 dB
      ch.bandwidth_hz = 1e7;
      ch.noise_power_w = 1e-9;
      row.push_back(ch);
    }
    s.channels.push_back(std::move(row));
  }
  require_valid(s);
  return s;
}

}  // namespace edgeplan
