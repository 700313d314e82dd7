#pragma once

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metasim/sim/simulator.hpp"

namespace metasim {

/// One configurable knob. Every field is settable from the config file,
/// from `--set name=value`, and from `--name value`.
struct ConfigField {
  std::string name;
  std::string help;
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

namespace detail {

inline std::uint64_t to_u64(const std::string& v, const std::string& name) {
  std::uint64_t out = 0;
  if (v.empty()) throw ConfigError(name + ": empty value");
  for (char c : v) {
    if (c < '0' || c > '9') throw ConfigError(name + ": expected a non-negative integer, got '" + v + "'");
    const auto next = out * 10 + static_cast<std::uint64_t>(c - '0');
    if (next / 10 != out) throw ConfigError(name + ": value out of range");
    out = next;
  }
  return out;
}

template <class T>
ConfigField uint_field(std::string name, std::string help, T MachineConfig::*m) {
  return {name, std::move(help),
          [m, name](SimConfig& c, const std::string& v) {
            const auto x = to_u64(v, name);
            if (x > std::numeric_limits<T>::max()) throw ConfigError(name + ": value out of range");
            c.machine.*m = static_cast<T>(x);
          },
          [m](const SimConfig& c) { return std::to_string(c.machine.*m); }};
}

template <class T>
ConfigField meta_field(std::string name, std::string help, T MetadataConfig::*m) {
  return {name, std::move(help),
          [m, name](SimConfig& c, const std::string& v) {
            const auto x = to_u64(v, name);
            if (x > std::numeric_limits<T>::max()) throw ConfigError(name + ": value out of range");
            c.meta.*m = static_cast<T>(x);
          },
          [m](const SimConfig& c) { return std::to_string(c.meta.*m); }};
}

inline bool to_bool(const std::string& v, const std::string& name) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(name + ": expected true or false, got '" + v + "'");
}

inline std::string mmc_mode_name(MmcMode m) {
  switch (m) {
    case MmcMode::Shared: return "shared";
    case MmcMode::Partitioned: return "partitioned";
    case MmcMode::PrioritizedInsertion: return "prioritized_insertion";
  }
  return "?";
}

}  // namespace detail

inline MmcMode parse_mmc_mode(const std::string& v) {
  if (v == "shared") return MmcMode::Shared;
  if (v == "partitioned") return MmcMode::Partitioned;
  if (v == "prioritized_insertion") return MmcMode::PrioritizedInsertion;
  throw ConfigError("mmc_mode: unknown mode '" + v + "'");
}

/// `kind[:mode]` entries separated by commas; an empty string means no clients.
inline std::vector<ClientSpec> parse_client_list(std::string_view text) {
  std::vector<ClientSpec> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto colon = item.find(':');
    const auto kind = parse_client_kind(item.substr(0, colon));
    out.push_back(colon == std::string_view::npos ? client(kind)
                                                  : client(kind, parse_lookup_mode(item.substr(colon + 1))));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return out;
}

inline std::string format_client_list(const std::vector<ClientSpec>& cs) {
  std::string out;
  for (const auto& c : cs) {
    if (!out.empty()) out += ',';
    out += std::string(to_string(c.kind)) + ":" + std::string(to_string(c.mode));
  }
  return out;
}

inline const std::vector<ConfigField>& config_fields() {
  using detail::meta_field;
  using detail::uint_field;
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f = {
        uint_field("l1_size_bytes", "L1D capacity in bytes", &MachineConfig::l1_size_bytes),
        uint_field("l1_ways", "L1D associativity", &MachineConfig::l1_ways),
        uint_field("l1_line_bytes", "L1D line size", &MachineConfig::l1_line_bytes),
        uint_field("l1_hit_cycles", "L1D hit latency", &MachineConfig::l1_hit_cycles),
        uint_field("mshr_entries", "outstanding L1D misses", &MachineConfig::mshr_entries),
        uint_field("tlb_entries", "DTLB entries", &MachineConfig::tlb_entries),
        uint_field("page_bytes", "page size", &MachineConfig::page_bytes),
        uint_field("mem_latency_cycles", "DRAM latency in core cycles", &MachineConfig::mem_latency_cycles),
        uint_field("mem_issue_interval_cycles", "cycles between memory requests (inverse bandwidth)",
                   &MachineConfig::mem_issue_interval_cycles),
        uint_field("tlb_walk_mem_accesses", "memory reads per page walk", &MachineConfig::tlb_walk_mem_accesses),
        uint_field("prefetch_buffer_lines", "prefetch buffer capacity", &MachineConfig::prefetch_buffer_lines),
        uint_field("stride_prefetch_degree", "next-N-line prefetch degree (0 = off)",
                   &MachineConfig::stride_prefetch_degree),
        meta_field("mmc_entries", "MMC entries", &MetadataConfig::mmc_entries),
        meta_field("granularity_bytes", "tagging granularity", &MetadataConfig::granularity_bytes),
        meta_field("mmc_hit_cycles", "MMC hit latency", &MetadataConfig::mmc_hit_cycles),
        meta_field("pmt_entry_bytes", "PMT slot size", &MetadataConfig::pmt_entry_bytes),
        meta_field("physical_memory_bytes", "simulated physical memory", &MetadataConfig::physical_memory_bytes),
    };
    f.push_back({"mmc_mode", "shared | partitioned | prioritized_insertion",
                 [](SimConfig& c, const std::string& v) { c.meta.mmc_mode = parse_mmc_mode(v); },
                 [](const SimConfig& c) { return detail::mmc_mode_name(c.meta.mmc_mode); }});
    f.push_back({"translation_mode", "virtual | physical",
                 [](SimConfig& c, const std::string& v) {
                   if (v == "virtual") c.meta.translation_mode = TranslationMode::Virtual;
                   else if (v == "physical") c.meta.translation_mode = TranslationMode::Physical;
                   else throw ConfigError("translation_mode: unknown mode '" + v + "'");
                 },
                 [](const SimConfig& c) {
                   return std::string(c.meta.translation_mode == TranslationMode::Virtual ? "virtual" : "physical");
                 }});
    f.push_back({"priority_client", "client id whose MMC fills are sticky, or none",
                 [](SimConfig& c, const std::string& v) {
                   if (v == "none") {
                     c.meta.priority_client.reset();
                     return;
                   }
                   const auto x = detail::to_u64(v, "priority_client");
                   if (x > 255) throw ConfigError("priority_client: value out of range");
                   c.meta.priority_client = static_cast<std::uint8_t>(x);
                 },
                 [](const SimConfig& c) {
                   return c.meta.priority_client ? std::to_string(*c.meta.priority_client) : std::string("none");
                 }});
    f.push_back({"context_switch_cycles", "cycles charged per context switch",
                 [](SimConfig& c, const std::string& v) {
                   c.os.context_switch_cycles = detail::to_u64(v, "context_switch_cycles");
                 },
                 [](const SimConfig& c) { return std::to_string(c.os.context_switch_cycles); }});
    f.push_back({"flush_mmc_on_switch", "flush the MMC on context switch",
                 [](SimConfig& c, const std::string& v) { c.os.flush_mmc_on_switch = detail::to_bool(v, "flush_mmc_on_switch"); },
                 [](const SimConfig& c) { return std::string(c.os.flush_mmc_on_switch ? "true" : "false"); }});
    f.push_back({"terminate_on_trap", "stop the program at the first trap",
                 [](SimConfig& c, const std::string& v) { c.os.terminate_on_trap = detail::to_bool(v, "terminate_on_trap"); },
                 [](const SimConfig& c) { return std::string(c.os.terminate_on_trap ? "true" : "false"); }});
    f.push_back({"page_map", "identity | scattered",
                 [](SimConfig& c, const std::string& v) {
                   if (v == "identity") c.os.page_map = PageMapPolicy::Identity;
                   else if (v == "scattered") c.os.page_map = PageMapPolicy::Scattered;
                   else throw ConfigError("page_map: unknown policy '" + v + "'");
                 },
                 [](const SimConfig& c) {
                   return std::string(c.os.page_map == PageMapPolicy::Identity ? "identity" : "scattered");
                 }});
    f.push_back({"clients", "comma-separated kind[:mode] list",
                 [](SimConfig& c, const std::string& v) { c.clients = parse_client_list(v); },
                 [](const SimConfig& c) { return format_client_list(c.clients); }});
    f.push_back({"seed", "simulation seed",
                 [](SimConfig& c, const std::string& v) { c.seed = detail::to_u64(v, "seed"); },
                 [](const SimConfig& c) { return std::to_string(c.seed); }});
    return f;
  }();
  return fields;
}

inline const ConfigField& config_field(std::string_view name) {
  for (const auto& f : config_fields())
    if (f.name == name) return f;
  throw ConfigError("unknown config field: " + std::string(name));
}

inline void set_field(SimConfig& cfg, std::string_view name, const std::string& value) {
  config_field(name).set(cfg, value);
}

/// Applies a `key=value` override.
inline void apply_override(SimConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override without '=': " + std::string(assignment));
  set_field(cfg, assignment.substr(0, eq), std::string(assignment.substr(eq + 1)));
}

/// Reads a flat JSON object of config fields on top of `base`.
inline SimConfig parse_config_json(std::string_view text, SimConfig base = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string v;
    if (value.is_string()) {
      v = value.get<std::string>();
    } else if (value.is_boolean()) {
      v = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_unsigned()) {
      v = std::to_string(value.get<std::uint64_t>());
    } else if (value.is_null()) {
      v = "none";
    } else if (value.is_array() && key == "clients") {
      for (const auto& item : value) {
        if (!v.empty()) v += ',';
        if (item.is_string()) {
          v += item.get<std::string>();
        } else if (item.is_object() && item.contains("kind")) {
          v += item.at("kind").get<std::string>();
          if (item.contains("mode")) v += ":" + item.at("mode").get<std::string>();
        } else {
          throw ConfigError("clients entries must be names or {kind, mode} objects");
        }
      }
    } else {
      throw ConfigError("config field '" + key + "' has an unsupported value type");
    }
    set_field(base, key, v);
  }
  base.validate();
  return base;
}

inline SimConfig load_config(const std::string& path, SimConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str(), std::move(base));
}

/// The config as a flat JSON object, in registry order.
inline std::string dump_config_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& f : config_fields()) j[f.name] = f.get(cfg);
  return j.dump(2);
}

}  // namespace metasim
