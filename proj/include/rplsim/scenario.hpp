#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "node_protocol.hpp"
#include "topology.hpp"

namespace rplsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrafficConfig {
  double period_s = 60.0;
  double start_s = 60.0;
  std::uint32_t packet_bytes = 50;
};

struct JoinConfig {
  double window_s = 10.0;
  double dis_delay_s = 5.0;
  double dis_interval_s = 60.0;
};

struct RplConfig {
  std::uint32_t rank_step = 256;
  std::uint32_t root_rank = 256;
  double dao_delay_s = 4.0;
  double dao_refresh_s = 0.0;  // 0 disables periodic DAO refresh
  std::vector<double> root_dtsn_increments_s;
};

struct TrickleConfig {
  double imin_s = 4.0;
  int doublings = 8;
  int redundancy = 10;
};

struct MessageSizes {
  std::uint32_t dio_bytes = 76;
  std::uint32_t dis_bytes = 42;
  std::uint32_t dao_bytes = 64;
};

struct MacConfig {
  double bitrate_bps = 250000.0;
  double backoff_min_s = 0.00032;
  double backoff_max_s = 0.00224;
  int max_retries = 3;
  std::size_t queue_limit = 32;
  bool collisions = true;
  bool carrier_sense = true;
  double link_success = 1.0;
};

struct EnergyModel {
  double e_tx_mj_per_byte = 0.000576;
  double e_rx_mj_per_byte = 0.000634;
  double p_idle_mw = 0.054;
};

struct AttackerConfig {
  bool enabled = false;
  long long node = -1;  // -1 picks a random root neighbor
  double increment_period_s = 30.0;
  double start_s = 30.0;
  bool drop_descendant_daos = false;
};

struct DetectionSettings {
  bool enabled = false;
  std::size_t k = 0;
  double grace_s = 60.0;
};

/// Complete description of one simulation run.
struct Scenario {
  std::size_t nodes = 20;
  double duration_s = 1800.0;
  double drain_s = 30.0;
  Mode mode = Mode::NonStoring;
  std::uint64_t topology_seed = 1;
  std::uint64_t scenario_seed = 1;
  RadioParams radio;
  int topology_attempts = 200000;
  std::string topology_file;
  TrafficConfig traffic;
  JoinConfig join;
  RplConfig rpl;
  TrickleConfig trickle;
  MessageSizes sizes;
  MacConfig mac;
  EnergyModel energy;
  AttackerConfig attacker;
  DetectionSettings detection;

  ProtocolParams protocol() const {
    ProtocolParams p;
    p.mode = mode;
    p.rank_step = rpl.rank_step;
    p.root_rank = rpl.root_rank;
    p.extra_dao_parents = detection.k;
    p.detection_enabled = detection.enabled;
    return p;
  }

  /// Lossless links: no random loss and no collisions.
  Scenario& lossless() {
    mac.link_success = 1.0;
    mac.collisions = false;
    return *this;
  }
};

inline Mode parse_mode(const std::string& s) {
  if (s == "storing") return Mode::Storing;
  if (s == "non-storing" || s == "nonstoring" || s == "non_storing") return Mode::NonStoring;
  throw ConfigError("unknown mode '" + s + "' (expected storing or non-storing)");
}

inline nlohmann::json to_json(const Scenario& s) {
  using nlohmann::json;
  return json{
      {"nodes", s.nodes},
      {"duration_s", s.duration_s},
      {"drain_s", s.drain_s},
      {"mode", to_string(s.mode)},
      {"seeds", {{"topology", s.topology_seed}, {"scenario", s.scenario_seed}}},
      {"topology",
       {{"area_side", s.radio.area_side},
        {"tx_range", s.radio.tx_range},
        {"interference_range", s.radio.interference_range},
        {"max_attempts", s.topology_attempts},
        {"file", s.topology_file}}},
      {"traffic",
       {{"period_s", s.traffic.period_s},
        {"start_s", s.traffic.start_s},
        {"packet_bytes", s.traffic.packet_bytes}}},
      {"join",
       {{"window_s", s.join.window_s},
        {"dis_delay_s", s.join.dis_delay_s},
        {"dis_interval_s", s.join.dis_interval_s}}},
      {"rpl",
       {{"rank_step", s.rpl.rank_step},
        {"root_rank", s.rpl.root_rank},
        {"dao_delay_s", s.rpl.dao_delay_s},
        {"dao_refresh_s", s.rpl.dao_refresh_s},
        {"root_dtsn_increments_s", s.rpl.root_dtsn_increments_s}}},
      {"trickle",
       {{"imin_s", s.trickle.imin_s},
        {"doublings", s.trickle.doublings},
        {"redundancy", s.trickle.redundancy}}},
      {"messages",
       {{"dio_bytes", s.sizes.dio_bytes},
        {"dis_bytes", s.sizes.dis_bytes},
        {"dao_bytes", s.sizes.dao_bytes}}},
      {"mac",
       {{"bitrate_bps", s.mac.bitrate_bps},
        {"backoff_min_s", s.mac.backoff_min_s},
        {"backoff_max_s", s.mac.backoff_max_s},
        {"max_retries", s.mac.max_retries},
        {"queue_limit", s.mac.queue_limit},
        {"collisions", s.mac.collisions},
        {"carrier_sense", s.mac.carrier_sense},
        {"link_success", s.mac.link_success}}},
      {"energy",
       {{"e_tx_mj_per_byte", s.energy.e_tx_mj_per_byte},
        {"e_rx_mj_per_byte", s.energy.e_rx_mj_per_byte},
        {"p_idle_mw", s.energy.p_idle_mw}}},
      {"attacker",
       {{"enabled", s.attacker.enabled},
        {"node", s.attacker.node},
        {"increment_period_s", s.attacker.increment_period_s},
        {"start_s", s.attacker.start_s},
        {"drop_descendant_daos", s.attacker.drop_descendant_daos}}},
      {"detection",
       {{"enabled", s.detection.enabled}, {"k", s.detection.k}, {"grace_s", s.detection.grace_s}}},
  };
}

namespace detail {

/// Overlays `patch` onto `base`, rejecting keys absent from the defaults
/// and values whose JSON type differs (integers may stand in for floats).
inline void merge_checked(nlohmann::json& base, const nlohmann::json& patch,
                          const std::string& path) {
  if (!patch.is_object()) throw ConfigError("expected an object at '" + path + "'");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    auto& slot = base[it.key()];
    const auto& val = it.value();
    if (slot.is_object()) {
      merge_checked(slot, val, key);
    } else if (slot.is_number() && val.is_number()) {
      if (slot.is_number_float()) {
        slot = val.get<double>();
      } else {
        if (val.is_number_float()) throw ConfigError("'" + key + "' must be an integer");
        if (slot.is_number_unsigned() && val.is_number_integer() && val.get<long long>() < 0) {
          throw ConfigError("'" + key + "' must be non-negative");
        }
        slot = val;
      }
    } else if (slot.is_array() && val.is_array()) {
      for (const auto& e : val) {
        if (!e.is_number()) throw ConfigError("'" + key + "' must be a list of numbers");
      }
      slot = val;
    } else if (slot.type() == val.type()) {
      slot = val;
    } else {
      throw ConfigError("wrong type for '" + key + "'");
    }
  }
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
  return j.at(key).get<T>();
}

}  // namespace detail

inline void validate(const Scenario& s) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  };
  if (s.nodes < 2 && s.topology_file.empty()) throw ConfigError("nodes must be at least 2");
  positive(s.duration_s, "duration_s");
  if (s.drain_s < 0) throw ConfigError("drain_s must be non-negative");
  positive(s.radio.area_side, "topology.area_side");
  positive(s.radio.tx_range, "topology.tx_range");
  if (s.radio.interference_range < s.radio.tx_range) {
    throw ConfigError("topology.interference_range must be at least tx_range");
  }
  positive(s.traffic.period_s, "traffic.period_s");
  positive(s.trickle.imin_s, "trickle.imin_s");
  if (s.trickle.doublings < 0 || s.trickle.doublings > 30) {
    throw ConfigError("trickle.doublings out of range");
  }
  if (s.trickle.redundancy < 1) throw ConfigError("trickle.redundancy must be at least 1");
  if (s.rpl.rank_step == 0) throw ConfigError("rpl.rank_step must be positive");
  if (s.rpl.dao_delay_s < 0) throw ConfigError("rpl.dao_delay_s must be non-negative");
  positive(s.mac.bitrate_bps, "mac.bitrate_bps");
  positive(s.mac.backoff_min_s, "mac.backoff_min_s");
  if (s.mac.backoff_max_s < s.mac.backoff_min_s) {
    throw ConfigError("mac.backoff_max_s must be at least backoff_min_s");
  }
  if (s.mac.max_retries < 0) throw ConfigError("mac.max_retries must be non-negative");
  if (s.mac.queue_limit == 0) throw ConfigError("mac.queue_limit must be positive");
  if (s.mac.link_success < 0 || s.mac.link_success > 1) {
    throw ConfigError("mac.link_success must lie in [0, 1]");
  }
  if (s.energy.e_tx_mj_per_byte < 0 || s.energy.e_rx_mj_per_byte < 0 || s.energy.p_idle_mw < 0) {
    throw ConfigError("energy parameters must be non-negative");
  }
  if (s.attacker.enabled) {
    positive(s.attacker.increment_period_s, "attacker.increment_period_s");
    if (s.attacker.node == 0) throw ConfigError("attacker.node cannot be the root");
    if (s.attacker.node < -1) throw ConfigError("attacker.node must be -1 (auto) or a node id");
  }
  if (s.detection.grace_s < 0) throw ConfigError("detection.grace_s must be non-negative");
}

inline Scenario from_json(const nlohmann::json& patch) {
  Scenario s;
  nlohmann::json j = to_json(s);
  detail::merge_checked(j, patch, "");
  using detail::get;
  s.nodes = get<std::size_t>(j, "nodes");
  s.duration_s = get<double>(j, "duration_s");
  s.drain_s = get<double>(j, "drain_s");
  s.mode = parse_mode(get<std::string>(j, "mode"));
  s.topology_seed = get<std::uint64_t>(j["seeds"], "topology");
  s.scenario_seed = get<std::uint64_t>(j["seeds"], "scenario");
  const auto& t = j["topology"];
  s.radio.area_side = get<double>(t, "area_side");
  s.radio.tx_range = get<double>(t, "tx_range");
  s.radio.interference_range = get<double>(t, "interference_range");
  s.topology_attempts = get<int>(t, "max_attempts");
  s.topology_file = get<std::string>(t, "file");
  const auto& tr = j["traffic"];
  s.traffic.period_s = get<double>(tr, "period_s");
  s.traffic.start_s = get<double>(tr, "start_s");
  s.traffic.packet_bytes = get<std::uint32_t>(tr, "packet_bytes");
  const auto& jn = j["join"];
  s.join.window_s = get<double>(jn, "window_s");
  s.join.dis_delay_s = get<double>(jn, "dis_delay_s");
  s.join.dis_interval_s = get<double>(jn, "dis_interval_s");
  const auto& r = j["rpl"];
  s.rpl.rank_step = get<std::uint32_t>(r, "rank_step");
  s.rpl.root_rank = get<std::uint32_t>(r, "root_rank");
  s.rpl.dao_delay_s = get<double>(r, "dao_delay_s");
  s.rpl.dao_refresh_s = get<double>(r, "dao_refresh_s");
  s.rpl.root_dtsn_increments_s = get<std::vector<double>>(r, "root_dtsn_increments_s");
  const auto& tk = j["trickle"];
  s.trickle.imin_s = get<double>(tk, "imin_s");
  s.trickle.doublings = get<int>(tk, "doublings");
  s.trickle.redundancy = get<int>(tk, "redundancy");
  const auto& m = j["messages"];
  s.sizes.dio_bytes = get<std::uint32_t>(m, "dio_bytes");
  s.sizes.dis_bytes = get<std::uint32_t>(m, "dis_bytes");
  s.sizes.dao_bytes = get<std::uint32_t>(m, "dao_bytes");
  const auto& mac = j["mac"];
  s.mac.bitrate_bps = get<double>(mac, "bitrate_bps");
  s.mac.backoff_min_s = get<double>(mac, "backoff_min_s");
  s.mac.backoff_max_s = get<double>(mac, "backoff_max_s");
  s.mac.max_retries = get<int>(mac, "max_retries");
  s.mac.queue_limit = get<std::size_t>(mac, "queue_limit");
  s.mac.collisions = get<bool>(mac, "collisions");
  s.mac.carrier_sense = get<bool>(mac, "carrier_sense");
  s.mac.link_success = get<double>(mac, "link_success");
  const auto& e = j["energy"];
  s.energy.e_tx_mj_per_byte = get<double>(e, "e_tx_mj_per_byte");
  s.energy.e_rx_mj_per_byte = get<double>(e, "e_rx_mj_per_byte");
  s.energy.p_idle_mw = get<double>(e, "p_idle_mw");
  const auto& a = j["attacker"];
  s.attacker.enabled = get<bool>(a, "enabled");
  s.attacker.node = get<long long>(a, "node");
  s.attacker.increment_period_s = get<double>(a, "increment_period_s");
  s.attacker.start_s = get<double>(a, "start_s");
  s.attacker.drop_descendant_daos = get<bool>(a, "drop_descendant_daos");
  const auto& d = j["detection"];
  s.detection.enabled = get<bool>(d, "enabled");
  s.detection.k = get<std::size_t>(d, "k");
  s.detection.grace_s = get<double>(d, "grace_s");
  validate(s);
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + ex.what());
  }
  return from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str());
  // A relative topology file is taken relative to the scenario file.
  if (!sc.topology_file.empty()) {
    const std::filesystem::path topo(sc.topology_file);
    if (topo.is_relative()) {
      sc.topology_file = (std::filesystem::path(path).parent_path() / topo).lexically_normal().string();
    }
  }
  return sc;
}

/// Applies "section.key=value" overrides. Values are read as JSON, falling
/// back to a plain string.
inline Scenario apply_overrides(const Scenario& base, const std::vector<std::string>& overrides) {
  nlohmann::json patch = nlohmann::json::object();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not of the form key=value");
    }
    const std::string path = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
      value = raw;
    }
    nlohmann::json* cur = &patch;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string part = path.substr(start, dot - start);
      if (dot == std::string::npos) {
        (*cur)[part] = value;
        break;
      }
      cur = &(*cur)[part];
      start = dot + 1;
    }
  }
  nlohmann::json merged = to_json(base);
  detail::merge_checked(merged, patch, "");
  return from_json(merged);
}

}  // namespace rplsim
