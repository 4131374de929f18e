#include "driverid/obd_codec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "driverid/embedded_data.hpp"
#include "driverid/error.hpp"

namespace driverid::obd {
namespace {

constexpr std::string_view kModule = "obd_codec";

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, kModule, detail);
}

std::string hex2(std::uint8_t v) {
  static constexpr char digits[] = "0123456789ABCDEF";
  return {digits[v >> 4], digits[v & 0xF]};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_optional_double(std::string_view s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t required_bytes(Scaling scaling) {
  switch (scaling) {
    case Scaling::Percent255:
    case Scaling::Identity:
    case Scaling::OffsetMinus40: return 1;
    case Scaling::RpmQuarter:
    case Scaling::FuelSystemStatus:
    case Scaling::SensorsMinus40: return 2;
  }
  return 1;
}

double affine_value(Scaling scaling, std::span<const std::uint8_t> b) {
  switch (scaling) {
    case Scaling::Percent255: return b[0] * 100.0 / 255.0;
    case Scaling::RpmQuarter: return (256.0 * b[0] + b[1]) / 4.0;
    case Scaling::Identity: return b[0];
    case Scaling::OffsetMinus40: return b[0] - 40.0;
    default: return 0.0;
  }
}

// Every registered scaling is monotone non-decreasing in each byte, so the
// all-0x00 and all-0xFF payloads bound its output.
void check_range(const PidDescriptor& d, std::size_t line_no) {
  if (!d.is_numeric()) return;
  if (!d.min_value || !d.max_value) {
    fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": numeric PID needs min and max");
  }
  std::vector<std::uint8_t> lo(d.data_bytes, 0x00), hi(d.data_bytes, 0xFF);
  double out_lo = 0, out_hi = 0;
  if (d.scaling == Scaling::SensorsMinus40) {
    out_lo = -40.0;
    out_hi = 255.0 - 40.0;
  } else {
    out_lo = affine_value(d.scaling, lo);
    out_hi = affine_value(d.scaling, hi);
  }
  if (out_lo < *d.min_value || out_hi > *d.max_value) {
    fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": scaling " +
                                         std::string(to_string(d.scaling)) + " leaves declared range");
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Scaling scaling) noexcept {
  switch (scaling) {
    case Scaling::Percent255: return "percent_255";
    case Scaling::RpmQuarter: return "rpm_quarter";
    case Scaling::Identity: return "identity";
    case Scaling::OffsetMinus40: return "offset_minus_40";
    case Scaling::FuelSystemStatus: return "fuel_system_status";
    case Scaling::SensorsMinus40: return "sensors_minus_40";
  }
  return "unknown";
}

std::optional<Scaling> parse_scaling(std::string_view id) noexcept {
  for (auto s : {Scaling::Percent255, Scaling::RpmQuarter, Scaling::Identity, Scaling::OffsetMinus40,
                 Scaling::FuelSystemStatus, Scaling::SensorsMinus40}) {
    if (to_string(s) == id) return s;
  }
  return std::nullopt;
}

std::string_view FuelSystemStatus::describe(std::uint8_t bank_byte) noexcept {
  switch (bank_byte) {
    case 0x00: return "not present";
    case 0x01: return "open loop: insufficient engine temperature";
    case 0x02: return "closed loop: using oxygen sensor feedback";
    case 0x04: return "open loop: engine load or deceleration fuel cut";
    case 0x08: return "open loop: system failure";
    case 0x10: return "closed loop: oxygen sensor fault";
    default: return "invalid";
  }
}

std::optional<double> PidReading::scalar() const noexcept {
  if (auto* v = std::get_if<double>(&value)) return *v;
  return std::nullopt;
}

std::string PidReading::to_string() const {
  if (auto* v = std::get_if<double>(&value)) {
    return format_number(*v) + (descriptor.unit.empty() ? "" : " " + descriptor.unit);
  }
  if (auto* fs = std::get_if<FuelSystemStatus>(&value)) {
    return "bank1=" + std::string(FuelSystemStatus::describe(fs->bank1)) +
           "; bank2=" + std::string(FuelSystemStatus::describe(fs->bank2));
  }
  const auto& st = std::get<SensorTemperatures>(value);
  std::string out;
  for (std::size_t i = 0; i < st.celsius.size(); ++i) {
    if (!out.empty()) out += "; ";
    out += "sensor" + std::to_string(i + 1) + "=";
    out += st.supported[i] ? format_number(st.celsius[i]) + " " + descriptor.unit : "unsupported";
  }
  return out;
}

PidRegistry PidRegistry::parse(std::istream& pids, std::istream* services) {
  PidRegistry reg;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::pair<int, int>> seen;
  while (std::getline(pids, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto f = split_fields(view);
    if (f[0] == "version") {
      if (f.size() != 2) fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": bad version record");
      reg.version_ = static_cast<int>(parse_optional_double(f[1], line_no).value_or(0));
      continue;
    }
    if (f.size() != 8) {
      fail(ErrorCode::InvalidRegistry,
           "line " + std::to_string(line_no) + ": expected 8 fields, got " + std::to_string(f.size()));
    }
    PidDescriptor d;
    try {
      d.service = parse_hex_byte(f[0]);
      d.pid = parse_hex_byte(f[1]);
    } catch (const Error&) {
      fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": bad service/pid");
    }
    auto bytes = parse_optional_double(f[2], line_no);
    if (!bytes || *bytes < 1 || *bytes != static_cast<double>(static_cast<std::size_t>(*bytes))) {
      fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": data_bytes must be >= 1");
    }
    d.data_bytes = static_cast<std::size_t>(*bytes);
    d.description = std::string(f[3]);
    auto scaling = parse_scaling(f[4]);
    if (!scaling) fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": unknown scaling '" + std::string(f[4]) + "'");
    d.scaling = *scaling;
    if (d.data_bytes < required_bytes(d.scaling)) {
      fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": too few data bytes for scaling");
    }
    d.min_value = parse_optional_double(f[5], line_no);
    d.max_value = parse_optional_double(f[6], line_no);
    d.unit = std::string(f[7]);
    if (d.min_value && d.max_value && !(*d.min_value < *d.max_value)) {
      fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": min must be < max");
    }
    check_range(d, line_no);
    if (!seen.emplace(d.service, d.pid).second) {
      fail(ErrorCode::InvalidRegistry, "line " + std::to_string(line_no) + ": duplicate PID " + hex2(d.pid));
    }
    reg.pids_.push_back(std::move(d));
  }

  if (services != nullptr) {
    line_no = 0;
    while (std::getline(*services, line)) {
      ++line_no;
      auto view = trim(line);
      if (view.empty() || view.front() == '#') continue;
      auto f = split_fields(view);
      if (f.size() != 2) fail(ErrorCode::InvalidRegistry, "services line " + std::to_string(line_no) + ": expected 2 fields");
      reg.services_.push_back({parse_hex_byte(f[0]), std::string(f[1])});
    }
  }
  for (const auto& d : reg.pids_) {
    bool known = std::any_of(reg.services_.begin(), reg.services_.end(),
                             [&](const ServiceDescriptor& s) { return s.service == d.service; });
    if (!known) reg.services_.push_back({d.service, {}});
  }
  return reg;
}

PidRegistry PidRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open registry file '" + path + "'");
  std::istringstream services{std::string(embedded::kObdServices)};
  return parse(in, &services);
}

const PidRegistry& PidRegistry::builtin() {
  static const PidRegistry reg = [] {
    std::istringstream pids{std::string(embedded::kPidRegistry)};
    std::istringstream services{std::string(embedded::kObdServices)};
    return parse(pids, &services);
  }();
  return reg;
}

const PidDescriptor* PidRegistry::find(std::uint8_t service, std::uint8_t pid) const noexcept {
  auto it = std::find_if(pids_.begin(), pids_.end(),
                         [&](const PidDescriptor& d) { return d.service == service && d.pid == pid; });
  return it == pids_.end() ? nullptr : &*it;
}

bool PidRegistry::accepts_service(std::uint8_t service) const noexcept {
  return std::any_of(services_.begin(), services_.end(),
                     [&](const ServiceDescriptor& s) { return s.service == service; });
}

const PidDescriptor* lookup(std::uint8_t service, std::uint8_t pid) noexcept {
  return PidRegistry::builtin().find(service, pid);
}

PidReading decode(const PidRegistry& registry, std::uint8_t service, std::uint8_t pid,
                  std::span<const std::uint8_t> payload) {
  const PidDescriptor* d = registry.find(service, pid);
  if (d == nullptr) {
    fail(ErrorCode::UnknownPid, "service " + hex2(service) + " pid " + hex2(pid) + " is not registered");
  }
  if (payload.size() != d->data_bytes) {
    fail(ErrorCode::PayloadLengthMismatch, "pid " + hex2(pid) + " expects " + std::to_string(d->data_bytes) +
                                               " data bytes, got " + std::to_string(payload.size()));
  }
  PidReading r{*d, {payload.begin(), payload.end()}, 0.0};
  switch (d->scaling) {
    case Scaling::FuelSystemStatus:
      r.value = FuelSystemStatus{payload[0], payload[1]};
      break;
    case Scaling::SensorsMinus40: {
      SensorTemperatures st;
      st.support_mask = payload[0];
      for (std::size_t i = 1; i < payload.size(); ++i) {
        st.celsius.push_back(payload[i] - 40.0);
        st.supported.push_back(((payload[0] >> (i - 1)) & 1U) != 0);
      }
      r.value = std::move(st);
      break;
    }
    default:
      r.value = affine_value(d->scaling, payload);
      break;
  }
  return r;
}

PidReading decode(std::uint8_t service, std::uint8_t pid, std::span<const std::uint8_t> payload) {
  return decode(PidRegistry::builtin(), service, pid, payload);
}

std::uint8_t parse_hex_byte(std::string_view text) {
  auto s = trim(text);
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || value > 0xFF) {
    throw Error(ErrorCode::InvalidConfig, kModule, "'" + std::string(text) + "' is not a hex byte");
  }
  return static_cast<std::uint8_t>(value);
}

std::vector<std::uint8_t> parse_hex_bytes(std::string_view text) {
  std::string digits;
  std::string_view rest = text;
  while (!rest.empty()) {
    if (rest.size() >= 2 && rest[0] == '0' && (rest[1] == 'x' || rest[1] == 'X')) {
      rest.remove_prefix(2);
      continue;
    }
    char c = rest.front();
    rest.remove_prefix(1);
    if (c == ' ' || c == ',' || c == ':' || c == '\t') continue;
    if (!std::isxdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorCode::InvalidConfig, kModule, "'" + std::string(text) + "' is not a hex byte string");
    }
    digits.push_back(c);
  }
  if (digits.empty() || digits.size() % 2 != 0) {
    throw Error(ErrorCode::InvalidConfig, kModule, "'" + std::string(text) + "' must hold whole bytes");
  }
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < digits.size(); i += 2) out.push_back(parse_hex_byte(digits.substr(i, 2)));
  return out;
}

}  // namespace driverid::obd
