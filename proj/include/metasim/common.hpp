#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace metasim {

using Addr = std::uint64_t;
using Cycle = std::uint64_t;

/// 8-bit tag associated with a memory region. Zero means "untagged".
struct TagId {
  std::uint8_t value = 0;

  constexpr TagId() = default;
  constexpr explicit TagId(std::uint8_t v) : value(v) {}

  constexpr bool untagged() const { return value == 0; }
  friend constexpr auto operator<=>(TagId, TagId) = default;
};

inline constexpr TagId kUntagged{};

/// Identifier of an optimization client (hardware component).
struct ClientId {
  std::uint8_t value = 0;

  constexpr ClientId() = default;
  constexpr explicit ClientId(std::uint8_t v) : value(v) {}

  friend constexpr auto operator<=>(ClientId, ClientId) = default;
};

constexpr bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Error taxonomy. The CLI maps these onto exit codes.

/// Malformed trace or unmapped page encountered while simulating.
class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (trace position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Misuse of the metadata plane: reserved tag, oversized metadata, unknown client.
class MetadataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TraceIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace metasim
