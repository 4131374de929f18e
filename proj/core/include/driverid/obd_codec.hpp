#pragma once

// SAE J1979 service/PID registry and payload decoding for the OBD-II
// parameters the driver-identification pipeline draws on.

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace driverid::obd {

enum class Scaling {
  Percent255,        // A * 100 / 255
  RpmQuarter,        // (256A + B) / 4
  Identity,          // A
  OffsetMinus40,     // A - 40
  FuelSystemStatus,  // per-bank status bytes
  SensorsMinus40,    // support bits, then (byte - 40) per sensor
};

std::string_view to_string(Scaling scaling) noexcept;
std::optional<Scaling> parse_scaling(std::string_view id) noexcept;

struct PidDescriptor {
  std::uint8_t service = 0;
  std::uint8_t pid = 0;
  std::size_t data_bytes = 0;
  std::string description;
  std::optional<double> min_value;
  std::optional<double> max_value;
  std::string unit;
  Scaling scaling = Scaling::Identity;

  bool is_numeric() const noexcept {
    return scaling != Scaling::FuelSystemStatus;
  }
};

struct ServiceDescriptor {
  std::uint8_t service = 0;
  std::string description;
};

/// Raw per-bank status bytes of PID 0x03. Each byte carries at most one set
/// bit in a valid frame; `describe` names it.
struct FuelSystemStatus {
  std::uint8_t bank1 = 0;
  std::uint8_t bank2 = 0;

  static std::string_view describe(std::uint8_t bank_byte) noexcept;
  bool operator==(const FuelSystemStatus&) const = default;
};

/// PID 0x68 style reading: a support bitmask followed by one temperature per
/// sensor slot. `supported[i]` reflects bit i of the mask.
struct SensorTemperatures {
  std::uint8_t support_mask = 0;
  std::vector<double> celsius;
  std::vector<bool> supported;

  bool operator==(const SensorTemperatures&) const = default;
};

using PidValue = std::variant<double, FuelSystemStatus, SensorTemperatures>;

struct PidReading {
  PidDescriptor descriptor;
  std::vector<std::uint8_t> raw;
  PidValue value;

  /// Physical value for scalar PIDs; std::nullopt for structured ones.
  std::optional<double> scalar() const noexcept;
  /// Human-readable rendering, e.g. "1726 rpm".
  std::string to_string() const;
};

/// Immutable PID/service registry. `builtin()` is parsed once from the data
/// files compiled into the library; `parse` accepts the same format for
/// extension.
class PidRegistry {
 public:
  static const PidRegistry& builtin();

  /// Parses a registry file. `services` may be empty, in which case the
  /// service set is the distinct services named by the PID records.
  static PidRegistry parse(std::istream& pids, std::istream* services = nullptr);
  static PidRegistry load_file(const std::string& path);

  const PidDescriptor* find(std::uint8_t service, std::uint8_t pid) const noexcept;
  bool accepts_service(std::uint8_t service) const noexcept;

  std::span<const PidDescriptor> pids() const noexcept { return pids_; }
  std::span<const ServiceDescriptor> services() const noexcept { return services_; }
  int format_version() const noexcept { return version_; }

 private:
  std::vector<PidDescriptor> pids_;
  std::vector<ServiceDescriptor> services_;
  int version_ = 0;
};

/// Lookup in the builtin registry.
const PidDescriptor* lookup(std::uint8_t service, std::uint8_t pid) noexcept;

/// Decodes a service response payload (data bytes only, without the mode
/// and PID echo bytes). Throws Error{UnknownPid} or
/// Error{PayloadLengthMismatch}.
PidReading decode(const PidRegistry& registry, std::uint8_t service, std::uint8_t pid,
                  std::span<const std::uint8_t> payload);
PidReading decode(std::uint8_t service, std::uint8_t pid, std::span<const std::uint8_t> payload);

/// Parses "1AF8" / "1a f8" / "0x1A,0xF8" into bytes. Throws InvalidConfig.
std::vector<std::uint8_t> parse_hex_bytes(std::string_view text);
/// Parses a single hex byte such as "0C" or "0x0C".
std::uint8_t parse_hex_byte(std::string_view text);

}  // namespace driverid::obd
