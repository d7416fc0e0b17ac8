#include "vtrack/nmea.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "text_util.hpp"

namespace vtrack::nmea {

namespace {

using detail::parse_double;
using detail::split;

uint8_t xor_bytes(std::string_view payload) {
    uint8_t cs = 0;
    for (char ch : payload) {
        cs ^= static_cast<uint8_t>(ch);
    }
    return cs;
}

std::string hex2(uint8_t value) {
    static constexpr char digits[] = "0123456789ABCDEF";
    return {digits[value >> 4], digits[value & 0xF]};
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

/// ddmm.mmmm / dddmm.mmmm -> signed decimal degrees.
Result<double> parse_coordinate(std::string_view field, std::string_view hemisphere,
                                int deg_digits, char positive, char negative, double limit) {
    if (field.size() < static_cast<size_t>(deg_digits) + 2) {
        return Error{Errc::non_numeric_field, "coordinate field too short"};
    }
    const auto deg = detail::parse_long(field.substr(0, deg_digits));
    const auto min = parse_double(field.substr(deg_digits));
    if (!deg || !min || *min < 0.0 || *min >= 60.0) {
        return Error{Errc::non_numeric_field, std::string("bad coordinate: ") + std::string(field)};
    }
    if (hemisphere.size() != 1) {
        return Error{Errc::hemisphere_invalid, "hemisphere must be one letter"};
    }
    double value = static_cast<double>(*deg) + *min / 60.0;
    if (hemisphere[0] == negative) {
        value = -value;
    } else if (hemisphere[0] != positive) {
        return Error{Errc::hemisphere_invalid,
                     std::string("unexpected hemisphere letter: ") + std::string(hemisphere)};
    }
    if (std::fabs(value) > limit) {
        return Error{Errc::out_of_range_coordinate, "coordinate outside valid range"};
    }
    return value;
}

/// |deg| -> "dd mm.mmmm" with carry handled in integer ten-thousandths of a
/// minute, so 59.99996' rounds up into the degree field instead of printing 60'.
std::string format_coordinate(double abs_deg, int deg_digits) {
    const long long total = std::llround(abs_deg * 600000.0);
    const long long deg = total / 600000;
    const long long min_e4 = total % 600000;
    char buf[24];
    if (deg_digits == 2) {
        std::snprintf(buf, sizeof(buf), "%02lld%02lld.%04lld", deg, min_e4 / 10000, min_e4 % 10000);
    } else {
        std::snprintf(buf, sizeof(buf), "%03lld%02lld.%04lld", deg, min_e4 / 10000, min_e4 % 10000);
    }
    return buf;
}

std::string pad_left(std::string s, size_t width) {
    while (s.size() < width) {
        s.insert(s.begin(), '0');
    }
    return s;
}

}  // namespace

Result<std::string> compute_checksum(std::string_view payload) {
    if (payload.find('$') != std::string_view::npos ||
        payload.find('*') != std::string_view::npos) {
        return Error{Errc::invalid_payload_char, "payload must not contain '$' or '*'"};
    }
    return hex2(xor_bytes(payload));
}

Result<RawSentence> parse_sentence(std::string_view line) {
    line = detail::strip_crlf(line);
    if (line.empty() || line.front() != '$') {
        return Error{Errc::missing_dollar, "sentence must start with '$'"};
    }
    if (line.size() > kMaxStrippedChars) {
        return Error{Errc::overlength, "sentence longer than the 82-character line limit"};
    }
    const size_t star = line.find('*', 1);
    if (star == std::string_view::npos) {
        return Error{Errc::missing_star, "sentence has no '*' checksum delimiter"};
    }
    const std::string_view payload = line.substr(1, star - 1);
    const std::string_view checksum = line.substr(star + 1);
    if (checksum.size() != 2 || hex_digit(checksum[0]) < 0 || hex_digit(checksum[1]) < 0) {
        return Error{Errc::checksum_mismatch, "checksum is not two hex digits"};
    }
    const uint8_t sent = static_cast<uint8_t>(hex_digit(checksum[0]) * 16 + hex_digit(checksum[1]));
    if (sent != xor_bytes(payload)) {
        return Error{Errc::checksum_mismatch,
                     "checksum mismatch: line corrupted in transmission"};
    }
    RawSentence out;
    out.payload = std::string(payload);
    out.checksum_hex = {static_cast<char>(std::toupper(checksum[0])),
                        static_cast<char>(std::toupper(checksum[1]))};
    return out;
}

std::string_view sentence_type(const RawSentence& s) {
    const std::string_view payload = s.payload;
    const size_t comma = payload.find(',');
    return comma == std::string_view::npos ? payload : payload.substr(0, comma);
}

bool is_gprmc(const RawSentence& s) {
    return sentence_type(s) == "GPRMC";
}

Result<GprmcFix> parse_gprmc(const RawSentence& s) {
    if (!is_gprmc(s)) {
        return Error{Errc::wrong_sentence_type,
                     std::string("expected GPRMC, got ") + std::string(sentence_type(s))};
    }
    const auto fields = split(s.payload, ',');
    // 12 fields in NMEA 2.0, 13 with the 2.3 mode indicator, 14 with the 4.1
    // navigation status.
    if (fields.size() < 12 || fields.size() > 14) {
        return Error{Errc::field_count_mismatch, "GPRMC must have 12-14 fields"};
    }

    GprmcFix fix;

    const std::string_view time = fields[1];
    if (time.size() < 6) {
        return Error{Errc::non_numeric_field, "time field too short"};
    }
    const auto hh = detail::parse_long(time.substr(0, 2));
    const auto mm = detail::parse_long(time.substr(2, 2));
    const auto ss = parse_double(time.substr(4));
    if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss < 0.0 || *ss >= 60.0) {
        return Error{Errc::non_numeric_field, "bad UTC time field"};
    }
    fix.utc_hour = static_cast<int>(*hh);
    fix.utc_minute = static_cast<int>(*mm);
    fix.utc_second = *ss;

    if (fields[2] == "A") {
        fix.valid = true;
    } else if (fields[2] == "V") {
        fix.valid = false;
    } else {
        return Error{Errc::non_numeric_field, "status must be A or V"};
    }

    auto lat = parse_coordinate(fields[3], fields[4], 2, 'N', 'S', 90.0);
    if (!lat) return lat.error();
    fix.lat_deg = lat.value();

    auto lon = parse_coordinate(fields[5], fields[6], 3, 'E', 'W', 180.0);
    if (!lon) return lon.error();
    fix.lon_deg = lon.value();

    if (!fields[7].empty()) {
        const auto speed = parse_double(fields[7]);
        if (!speed || *speed < 0.0) {
            return Error{Errc::non_numeric_field, "bad speed field"};
        }
        fix.speed_knots = *speed;
    }
    if (!fields[8].empty()) {
        const auto course = parse_double(fields[8]);
        if (!course || *course < 0.0 || *course > 360.0) {
            return Error{Errc::non_numeric_field, "bad course field"};
        }
        fix.course_deg = *course == 360.0 ? 0.0 : *course;
    }

    const std::string_view date = fields[9];
    if (date.size() != 6) {
        return Error{Errc::non_numeric_field, "date must be ddmmyy"};
    }
    const auto day = detail::parse_long(date.substr(0, 2));
    const auto month = detail::parse_long(date.substr(2, 2));
    const auto year = detail::parse_long(date.substr(4, 2));
    if (!day || !month || !year || *day < 1 || *day > 31 || *month < 1 || *month > 12) {
        return Error{Errc::non_numeric_field, "bad date field"};
    }
    fix.day = static_cast<int>(*day);
    fix.month = static_cast<int>(*month);
    fix.year = static_cast<int>(*year < 80 ? 2000 + *year : 1900 + *year);

    return fix;
}

Result<std::string> serialize_gprmc(const GprmcFix& fix) {
    if (std::fabs(fix.lat_deg) > 90.0 || std::fabs(fix.lon_deg) > 180.0 ||
        !std::isfinite(fix.lat_deg) || !std::isfinite(fix.lon_deg)) {
        return Error{Errc::out_of_range_coordinate, "latitude/longitude outside valid range"};
    }
    if (fix.speed_knots < 0.0 || fix.course_deg < 0.0 || fix.course_deg >= 360.0) {
        return Error{Errc::out_of_range_coordinate, "speed/course outside valid range"};
    }
    if (fix.utc_hour < 0 || fix.utc_hour > 23 || fix.utc_minute < 0 || fix.utc_minute > 59 ||
        fix.utc_second < 0.0 || fix.utc_second >= 60.0 || fix.day < 1 || fix.day > 31 ||
        fix.month < 1 || fix.month > 12) {
        return Error{Errc::out_of_range_coordinate, "UTC time/date outside valid range"};
    }

    // Hundredths of a second, clamped below 60 s so no carry into minutes.
    long long centi = std::llround(fix.utc_second * 100.0);
    if (centi > 5999) {
        centi = 5999;
    }
    char time_buf[16];
    std::snprintf(time_buf, sizeof(time_buf), "%02d%02d%02lld.%02lld", fix.utc_hour,
                  fix.utc_minute, centi / 100, centi % 100);

    char date_buf[8];
    std::snprintf(date_buf, sizeof(date_buf), "%02d%02d%02d", fix.day, fix.month, fix.year % 100);

    double course = std::round(fix.course_deg * 10.0) / 10.0;
    if (course >= 360.0) {
        course = 0.0;
    }

    std::string payload = "GPRMC,";
    payload += time_buf;
    payload += fix.valid ? ",A," : ",V,";
    payload += format_coordinate(std::fabs(fix.lat_deg), 2);
    payload += fix.lat_deg >= 0.0 ? ",N," : ",S,";
    payload += format_coordinate(std::fabs(fix.lon_deg), 3);
    payload += fix.lon_deg >= 0.0 ? ",E," : ",W,";
    payload += pad_left(detail::fmt_fixed(fix.speed_knots, 1), 5);
    payload += ',';
    payload += pad_left(detail::fmt_fixed(course, 1), 5);
    payload += ',';
    payload += date_buf;
    payload += ",,";  // magnetic variation unused

    auto checksum = compute_checksum(payload);
    if (!checksum) {
        return checksum.error();
    }
    return "$" + payload + "*" + checksum.value();
}

std::string utc_iso8601(const GprmcFix& fix) {
    const long long centi = std::llround(fix.utc_second * 100.0);
    char buf[40];
    if (centi % 100 == 0) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02lldZ", fix.year, fix.month,
                      fix.day, fix.utc_hour, fix.utc_minute, centi / 100);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02lld.%02lldZ", fix.year,
                      fix.month, fix.day, fix.utc_hour, fix.utc_minute, centi / 100, centi % 100);
    }
    return buf;
}

}  // namespace vtrack::nmea
