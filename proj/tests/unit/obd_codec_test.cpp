#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <thread>

#include "driverid/error.hpp"
#include "driverid/obd_codec.hpp"

namespace obd = driverid::obd;
using driverid::Error;
using driverid::ErrorCode;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no driverid::Error thrown";
  return ErrorCode::Io;
}

double scalar(std::uint8_t pid, std::vector<std::uint8_t> bytes) {
  return *obd::decode(0x01, pid, bytes).scalar();
}

// Test-only inverse of the affine scalings.
std::vector<std::uint8_t> encode(const obd::PidDescriptor& d, double v) {
  switch (d.scaling) {
    case obd::Scaling::Percent255: return {static_cast<std::uint8_t>(std::lround(v * 255.0 / 100.0))};
    case obd::Scaling::RpmQuarter: {
      const auto raw = static_cast<unsigned>(std::lround(v * 4.0));
      return {static_cast<std::uint8_t>(raw >> 8), static_cast<std::uint8_t>(raw & 0xFF)};
    }
    case obd::Scaling::Identity: return {static_cast<std::uint8_t>(std::lround(v))};
    case obd::Scaling::OffsetMinus40: return {static_cast<std::uint8_t>(std::lround(v + 40.0))};
    default: return {};
  }
}

}  // namespace

TEST(PidRegistry, ContainsReferenceRows) {
  for (std::uint8_t pid : {0x03, 0x04, 0x0C, 0x0D, 0x68}) {
    EXPECT_NE(obd::lookup(0x01, pid), nullptr) << int(pid);
  }
  for (std::uint8_t service : {0x01, 0x02, 0x09, 0x0A}) {
    EXPECT_TRUE(obd::PidRegistry::builtin().accepts_service(service)) << int(service);
  }
  EXPECT_EQ(obd::PidRegistry::builtin().format_version(), 1);
}

TEST(PidRegistry, EngineSpeedDescriptor) {
  const auto* d = obd::lookup(0x01, 0x0C);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->data_bytes, 2u);
  EXPECT_EQ(*d->max_value, 16383.75);
  EXPECT_EQ(d->unit, "rpm");
}

TEST(PidRegistry, VehicleSpeedDescriptor) {
  const auto* d = obd::lookup(0x01, 0x0D);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->data_bytes, 1u);
  EXPECT_EQ(*d->min_value, 0.0);
  EXPECT_EQ(*d->max_value, 255.0);
  EXPECT_EQ(d->unit, "km/h");
}

TEST(PidRegistry, AbsentPidIsNotFound) { EXPECT_EQ(obd::lookup(0x01, 0xFF), nullptr); }

TEST(PidRegistry, FuelStatusHasNoRange) {
  const auto* d = obd::lookup(0x01, 0x03);
  ASSERT_NE(d, nullptr);
  EXPECT_FALSE(d->is_numeric());
  EXPECT_FALSE(d->min_value);
}

TEST(PidRegistry, ParsesExtensionFile) {
  std::istringstream in("# comment\nversion,2\n01,0D,1,Speed,identity,0,255,km/h\n01,46,1,Ambient air temperature,offset_minus_40,-40,215,degC\n");
  const auto reg = obd::PidRegistry::parse(in);
  EXPECT_EQ(reg.format_version(), 2);
  EXPECT_EQ(reg.pids().size(), 2u);
  EXPECT_EQ(*obd::decode(reg, 0x01, 0x46, std::vector<std::uint8_t>{0x50}).scalar(), 40.0);
  EXPECT_TRUE(reg.accepts_service(0x01));
  EXPECT_FALSE(reg.accepts_service(0x09));
}

TEST(PidRegistry, RejectsBrokenRecords) {
  const char* bad[] = {
      "01,0D,0,Speed,identity,0,255,km/h\n",         // zero data bytes
      "01,0D,1,Speed,identity,255,0,km/h\n",         // min >= max
      "01,0D,1,Speed,identity,,,km/h\n",             // numeric without range
      "01,0D,1,Speed,identity,0,100,km/h\n",         // formula exceeds max
      "01,0C,1,Engine speed,rpm_quarter,0,16383.75,rpm\n",  // too few bytes
      "01,0D,1,Speed,no_such_scaling,0,255,km/h\n",
      "01,0D,1,Speed,identity,0,255,km/h\n01,0D,1,Speed,identity,0,255,km/h\n",  // duplicate
      "01,0D,1,Speed\n",
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    EXPECT_EQ(code_of([&] { obd::PidRegistry::parse(in); }), ErrorCode::InvalidRegistry) << text;
  }
}

TEST(Decode, EngineSpeedMaximum) { EXPECT_EQ(scalar(0x0C, {0xFF, 0xFF}), 16383.75); }

TEST(Decode, EngineLoadZero) { EXPECT_EQ(scalar(0x04, {0x00}), 0.0); }

TEST(Decode, EngineSpeedHandEvaluated) {
  // (256 * 26 + 248) / 4
  EXPECT_EQ(scalar(0x0C, {0x1A, 0xF8}), 1726.0);
  EXPECT_EQ(obd::decode(0x01, 0x0C, std::vector<std::uint8_t>{0x1A, 0xF8}).to_string(), "1726 rpm");
}

TEST(Decode, VehicleSpeedIdentity) { EXPECT_EQ(scalar(0x0D, {0x80}), 128.0); }

TEST(Decode, TemperatureOffset) {
  EXPECT_EQ(scalar(0x05, {0x00}), -40.0);
  EXPECT_EQ(scalar(0x05, {0xFF}), 215.0);
  EXPECT_EQ(scalar(0x0F, {0x5A}), 50.0);
}

TEST(Decode, FuelSystemStatusBitfield) {
  const auto r = obd::decode(0x01, 0x03, std::vector<std::uint8_t>{0x02, 0x00});
  const auto& fs = std::get<obd::FuelSystemStatus>(r.value);
  EXPECT_EQ(fs.bank1, 0x02);
  EXPECT_EQ(fs.bank2, 0x00);
  EXPECT_FALSE(r.scalar());
  EXPECT_NE(r.to_string().find("bank1="), std::string::npos);
}

TEST(Decode, IntakeSensorTemperatures) {
  const auto r = obd::decode(0x01, 0x68, std::vector<std::uint8_t>{0x01, 0x64, 0x00});
  const auto& st = std::get<obd::SensorTemperatures>(r.value);
  ASSERT_EQ(st.celsius.size(), 2u);
  EXPECT_EQ(st.celsius[0], 60.0);
  EXPECT_EQ(st.celsius[1], -40.0);
  EXPECT_TRUE(st.supported[0]);
  EXPECT_FALSE(st.supported[1]);
}

TEST(Decode, RejectsWrongLength) {
  EXPECT_EQ(code_of([] { obd::decode(0x01, 0x0C, std::vector<std::uint8_t>{0x1A}); }),
            ErrorCode::PayloadLengthMismatch);
  EXPECT_EQ(code_of([] { obd::decode(0x01, 0x0D, std::vector<std::uint8_t>{0x1A, 0x00}); }),
            ErrorCode::PayloadLengthMismatch);
  EXPECT_EQ(code_of([] { obd::decode(0x01, 0x0C, std::vector<std::uint8_t>{}); }),
            ErrorCode::PayloadLengthMismatch);
}

TEST(Decode, RejectsUnknownPid) {
  EXPECT_EQ(code_of([] { obd::decode(0x01, 0xFF, std::vector<std::uint8_t>{0x00}); }), ErrorCode::UnknownPid);
  EXPECT_EQ(code_of([] { obd::decode(0x07, 0x0C, std::vector<std::uint8_t>{0, 0}); }), ErrorCode::UnknownPid);
}

TEST(Decode, RangeEndpointsForEveryNumericPid) {
  for (const auto& d : obd::PidRegistry::builtin().pids()) {
    if (!d.is_numeric() || d.scaling == obd::Scaling::SensorsMinus40) continue;
    const std::vector<std::uint8_t> lo(d.data_bytes, 0x00), hi(d.data_bytes, 0xFF);
    EXPECT_EQ(*obd::decode(d.service, d.pid, lo).scalar(), *d.min_value) << d.description;
    EXPECT_EQ(*obd::decode(d.service, d.pid, hi).scalar(), *d.max_value) << d.description;
  }
}

TEST(Decode, EveryPayloadStaysInRange) {
  for (const auto& d : obd::PidRegistry::builtin().pids()) {
    if (!d.is_numeric()) continue;
    std::vector<std::uint8_t> b(d.data_bytes, 0);
    for (int a = 0; a < 256; ++a) {
      for (int c = 0; c < (d.data_bytes > 1 ? 256 : 1); ++c) {
        b[0] = static_cast<std::uint8_t>(a);
        if (d.data_bytes > 1) b[1] = static_cast<std::uint8_t>(c);
        const auto r = obd::decode(d.service, d.pid, b);
        if (auto v = r.scalar()) {
          ASSERT_GE(*v, *d.min_value);
          ASSERT_LE(*v, *d.max_value);
        } else {
          for (double t : std::get<obd::SensorTemperatures>(r.value).celsius) {
            ASSERT_GE(t, *d.min_value);
            ASSERT_LE(t, *d.max_value);
          }
        }
      }
    }
  }
}

TEST(Decode, AffineRoundTrip) {
  for (const auto& d : obd::PidRegistry::builtin().pids()) {
    if (!d.is_numeric() || d.scaling == obd::Scaling::SensorsMinus40) continue;
    std::vector<std::uint8_t> b(d.data_bytes, 0);
    for (int a = 0; a < 256; ++a) {
      for (int c = 0; c < (d.data_bytes > 1 ? 256 : 1); ++c) {
        b[0] = static_cast<std::uint8_t>(a);
        if (d.data_bytes > 1) b[1] = static_cast<std::uint8_t>(c);
        ASSERT_EQ(encode(d, *obd::decode(d.service, d.pid, b).scalar()), b) << d.description;
      }
    }
  }
}

TEST(Decode, PureAcrossThreads) {
  const std::vector<std::uint8_t> payload{0x1A, 0xF8};
  std::vector<double> got(8);
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < got.size(); ++t) {
    pool.emplace_back([&, t] { got[t] = *obd::decode(0x01, 0x0C, payload).scalar(); });
  }
  pool.clear();
  for (double v : got) EXPECT_EQ(v, 1726.0);
}

TEST(HexParsing, AcceptsCommonSpellings) {
  const std::vector<std::uint8_t> want{0x1A, 0xF8};
  EXPECT_EQ(obd::parse_hex_bytes("1AF8"), want);
  EXPECT_EQ(obd::parse_hex_bytes("1a f8"), want);
  EXPECT_EQ(obd::parse_hex_bytes("0x1A,0xF8"), want);
  EXPECT_EQ(obd::parse_hex_byte("0C"), 0x0C);
  EXPECT_EQ(obd::parse_hex_byte("0x0c"), 0x0C);
}

TEST(HexParsing, RejectsGarbage) {
  EXPECT_EQ(code_of([] { obd::parse_hex_bytes("1AF"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { obd::parse_hex_bytes("zz"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { obd::parse_hex_byte("100"); }), ErrorCode::InvalidConfig);
}
