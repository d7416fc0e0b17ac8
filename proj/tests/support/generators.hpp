#pragma once

#include <cmath>
#include <random>
#include <string>

#include "vtrack/nmea.hpp"
#include "vtrack/telemetry.hpp"

namespace testgen {

/// Valid random fix. Speed/course/seconds land on the wire precision grid
/// (receivers emit them that way), latitude/longitude stay continuous.
inline vtrack::nmea::GprmcFix random_fix(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> day(1, 28), month(1, 12), year(1990, 2035);
    std::uniform_int_distribution<int> hour(0, 23), minute(0, 59), centisecond(0, 5999);

    vtrack::nmea::GprmcFix fix;
    fix.lat_deg = -90.0 + 180.0 * u01(rng);
    fix.lon_deg = -180.0 + 360.0 * u01(rng);
    fix.speed_knots = std::floor(u01(rng) * 2000.0) / 10.0;   // [0, 199.9]
    fix.course_deg = std::floor(u01(rng) * 3600.0) / 10.0;    // [0, 359.9]
    fix.valid = u01(rng) < 0.9;
    fix.utc_hour = hour(rng);
    fix.utc_minute = minute(rng);
    fix.utc_second = centisecond(rng) / 100.0;
    fix.day = day(rng);
    fix.month = month(rng);
    fix.year = year(rng);
    return fix;
}

inline vtrack::telemetry::EngineStatus random_status(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    vtrack::telemetry::EngineStatus status;
    status.rpm = u01(rng) * 16383.75;
    status.coolant_c = -40.0 + u01(rng) * 255.0;
    status.speed_kmh = u01(rng) * 255.0;
    status.throttle_pct = u01(rng) * 100.0;
    return status;
}

inline vtrack::telemetry::TelemetryRecord random_record(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> suffix(0, 9999);
    vtrack::telemetry::TelemetryRecord record;
    record.vehicle_id = "VEH-" + std::to_string(suffix(rng));
    record.fix = random_fix(rng);
    record.status = random_status(rng);
    return record;
}

}  // namespace testgen
