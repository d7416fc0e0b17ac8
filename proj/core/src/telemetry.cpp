#include "vtrack/telemetry.hpp"

#include <cctype>
#include <cmath>

#include "text_util.hpp"

namespace vtrack::telemetry {

namespace {

constexpr double kRpmMax = 16383.75;
constexpr double kCoolantMin = -40.0;
constexpr double kCoolantMax = 215.0;
constexpr double kSpeedMax = 255.0;
constexpr double kThrottleMax = 100.0;

size_t pid_data_length(uint8_t pid) {
    return pid == kPidEngineRpm ? 2 : 1;
}

bool known_pid(uint8_t pid) {
    return pid == kPidEngineRpm || pid == kPidCoolantTemp || pid == kPidVehicleSpeed ||
           pid == kPidThrottle;
}

Error malformed(std::string message) {
    return Error{Errc::malformed_layout, std::move(message)};
}

}  // namespace

bool engine_status_in_range(const EngineStatus& s) {
    return s.rpm >= 0.0 && s.rpm <= kRpmMax && s.coolant_c >= kCoolantMin &&
           s.coolant_c <= kCoolantMax && s.speed_kmh >= 0.0 && s.speed_kmh <= kSpeedMax &&
           s.throttle_pct >= 0.0 && s.throttle_pct <= kThrottleMax;
}

bool vehicle_id_valid(std::string_view id) {
    if (id.empty() || id.size() > kMaxVehicleIdChars) {
        return false;
    }
    for (char c : id) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') {
            return false;
        }
    }
    return true;
}

Result<double> decode_obd(uint8_t pid, std::span<const uint8_t> data) {
    if (!known_pid(pid)) {
        return Error{Errc::unknown_pid, "unsupported OBD pid"};
    }
    if (data.size() != pid_data_length(pid)) {
        return Error{Errc::wrong_length, "OBD data length does not match pid"};
    }
    switch (pid) {
        case kPidEngineRpm:
            return (256.0 * data[0] + data[1]) / 4.0;
        case kPidCoolantTemp:
            return static_cast<double>(data[0]) - 40.0;
        case kPidVehicleSpeed:
            return static_cast<double>(data[0]);
        case kPidThrottle:
            return data[0] * 100.0 / 255.0;
        default:
            return Error{Errc::unknown_pid, "unsupported OBD pid"};
    }
}

Result<std::vector<uint8_t>> encode_obd(uint8_t pid, double value) {
    if (!known_pid(pid)) {
        return Error{Errc::unknown_pid, "unsupported OBD pid"};
    }
    switch (pid) {
        case kPidEngineRpm: {
            if (value < 0.0 || value > kRpmMax) {
                return Error{Errc::range_violation, "rpm outside [0, 16383.75]"};
            }
            const long raw = std::lround(value * 4.0);
            return std::vector<uint8_t>{static_cast<uint8_t>(raw >> 8),
                                        static_cast<uint8_t>(raw & 0xFF)};
        }
        case kPidCoolantTemp: {
            if (value < kCoolantMin || value > kCoolantMax) {
                return Error{Errc::range_violation, "coolant outside [-40, 215]"};
            }
            return std::vector<uint8_t>{static_cast<uint8_t>(std::lround(value + 40.0))};
        }
        case kPidVehicleSpeed: {
            if (value < 0.0 || value > kSpeedMax) {
                return Error{Errc::range_violation, "speed outside [0, 255]"};
            }
            return std::vector<uint8_t>{static_cast<uint8_t>(std::lround(value))};
        }
        case kPidThrottle: {
            if (value < 0.0 || value > kThrottleMax) {
                return Error{Errc::range_violation, "throttle outside [0, 100]"};
            }
            return std::vector<uint8_t>{static_cast<uint8_t>(std::lround(value * 255.0 / 100.0))};
        }
        default:
            return Error{Errc::unknown_pid, "unsupported OBD pid"};
    }
}

Result<EngineStatus> quantize(const EngineStatus& status) {
    EngineStatus out;
    const struct {
        uint8_t pid;
        double in;
        double* slot;
    } fields[] = {
        {kPidEngineRpm, status.rpm, &out.rpm},
        {kPidCoolantTemp, status.coolant_c, &out.coolant_c},
        {kPidVehicleSpeed, status.speed_kmh, &out.speed_kmh},
        {kPidThrottle, status.throttle_pct, &out.throttle_pct},
    };
    for (const auto& f : fields) {
        auto raw = encode_obd(f.pid, f.in);
        if (!raw) {
            return raw.error();
        }
        auto value = decode_obd(f.pid, raw.value());
        if (!value) {
            return value.error();
        }
        *f.slot = value.value();
    }
    return out;
}

Result<std::string> encode_record(const TelemetryRecord& record) {
    if (!vehicle_id_valid(record.vehicle_id)) {
        return Error{Errc::invalid_vehicle_id,
                     "vehicle id must be 1-16 alphanumeric/'-' characters"};
    }
    if (!engine_status_in_range(record.status)) {
        return Error{Errc::range_violation, "engine status outside valid ranges"};
    }
    auto gprmc = nmea::serialize_gprmc(record.fix);
    if (!gprmc) {
        return gprmc.error();
    }

    std::string obd_payload = "OBD,";
    obd_payload += record.vehicle_id;
    obd_payload += ',';
    obd_payload += detail::fmt_fixed(record.status.rpm, 2);
    obd_payload += ',';
    obd_payload += std::to_string(std::llround(record.status.coolant_c));
    obd_payload += ',';
    obd_payload += std::to_string(std::llround(record.status.speed_kmh));
    obd_payload += ',';
    obd_payload += detail::fmt_fixed(record.status.throttle_pct, 1);

    auto checksum = nmea::compute_checksum(obd_payload);
    if (!checksum) {
        return checksum.error();
    }

    std::string message = gprmc.value();
    message += ";$";
    message += obd_payload;
    message += '*';
    message += checksum.value();
    if (message.size() > kMaxMessageChars) {
        return Error{Errc::overlength, "encoded record does not fit one SMS"};
    }
    return message;
}

Result<TelemetryRecord> decode_record(std::string_view message) {
    message = detail::strip_crlf(message);
    const size_t sep = message.find(';');
    if (sep == std::string_view::npos || message.find(';', sep + 1) != std::string_view::npos) {
        return malformed("message must contain exactly one ';' segment separator");
    }
    if (message.size() > kMaxMessageChars) {
        return malformed("message longer than one SMS");
    }

    auto gps_sentence = nmea::parse_sentence(message.substr(0, sep));
    if (!gps_sentence) {
        if (gps_sentence.code() == Errc::checksum_mismatch) {
            return gps_sentence.error();
        }
        return malformed("bad GPS segment: " + gps_sentence.error().message);
    }
    if (!nmea::is_gprmc(gps_sentence.value())) {
        return malformed("GPS segment is not a GPRMC sentence");
    }
    auto fix = nmea::parse_gprmc(gps_sentence.value());
    if (!fix) {
        if (fix.code() == Errc::out_of_range_coordinate) {
            return Error{Errc::range_violation, fix.error().message};
        }
        return malformed("bad GPRMC fields: " + fix.error().message);
    }

    auto obd_sentence = nmea::parse_sentence(message.substr(sep + 1));
    if (!obd_sentence) {
        if (obd_sentence.code() == Errc::checksum_mismatch) {
            return obd_sentence.error();
        }
        return malformed("bad OBD segment: " + obd_sentence.error().message);
    }
    const auto fields = detail::split(obd_sentence.value().payload, ',');
    if (fields.size() != 6 || fields[0] != "OBD") {
        return malformed("OBD segment must be $OBD with five fields");
    }
    if (!vehicle_id_valid(fields[1])) {
        return malformed("bad vehicle id");
    }
    const auto rpm = detail::parse_double(fields[2]);
    const auto coolant = detail::parse_double(fields[3]);
    const auto speed = detail::parse_double(fields[4]);
    const auto throttle = detail::parse_double(fields[5]);
    if (!rpm || !coolant || !speed || !throttle) {
        return malformed("non-numeric OBD field");
    }

    TelemetryRecord record;
    record.vehicle_id = std::string(fields[1]);
    record.fix = fix.value();
    record.status = EngineStatus{*rpm, *coolant, *speed, *throttle};
    if (!engine_status_in_range(record.status)) {
        return Error{Errc::range_violation, "engine status outside valid ranges"};
    }
    return record;
}

}  // namespace vtrack::telemetry
