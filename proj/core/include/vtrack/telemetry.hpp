#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtrack/nmea.hpp"
#include "vtrack/result.hpp"

namespace vtrack::telemetry {

// Single GSM SMS budget for one encoded record.
inline constexpr size_t kMaxMessageChars = 160;
inline constexpr size_t kMaxVehicleIdChars = 16;

// Supported OBD-II mode-01 parameter ids.
inline constexpr uint8_t kPidCoolantTemp = 0x05;
inline constexpr uint8_t kPidEngineRpm = 0x0C;
inline constexpr uint8_t kPidVehicleSpeed = 0x0D;
inline constexpr uint8_t kPidThrottle = 0x11;

/// The four engine parameters carried next to the GPS fix.
struct EngineStatus {
    double rpm = 0.0;           // [0, 16383.75]
    double coolant_c = 0.0;     // [-40, 215]
    double speed_kmh = 0.0;     // [0, 255]
    double throttle_pct = 0.0;  // [0, 100]
};

struct TelemetryRecord {
    std::string vehicle_id;  // <= 16 chars, alphanumeric and '-'
    nmea::GprmcFix fix;
    EngineStatus status;
};

bool engine_status_in_range(const EngineStatus& status);
bool vehicle_id_valid(std::string_view id);

/// SAE J1979 mode-01 scaling: rpm=(256A+B)/4, coolant=A-40, speed=A,
/// throttle=A*100/255. Data length must match the pid (2,1,1,1).
Result<double> decode_obd(uint8_t pid, std::span<const uint8_t> data);

/// Inverse scaling onto the raw byte grid; values round to the nearest
/// representable step.
Result<std::vector<uint8_t>> encode_obd(uint8_t pid, double value);

/// Snap every field onto its OBD byte grid, as a real data-port read would.
Result<EngineStatus> quantize(const EngineStatus& status);

/// Wire form: `<GPRMC sentence>;$OBD,<vehicle_id>,<rpm>,<coolant_c>,
/// <speed_kmh>,<throttle_pct>*hh` -- two independently checksummed segments,
/// at most 160 characters in total.
Result<std::string> encode_record(const TelemetryRecord& record);

/// Parse and validate one wire message. Every failure is one of exactly three
/// codes -- ChecksumMismatch, MalformedLayout, RangeViolation -- so the station
/// can count unusable messages by reason.
Result<TelemetryRecord> decode_record(std::string_view message);

}  // namespace vtrack::telemetry
