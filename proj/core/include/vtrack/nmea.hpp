#pragma once

#include <string>
#include <string_view>

#include "vtrack/result.hpp"

namespace vtrack::nmea {

// NMEA 0183 line limit: 82 characters including '$', '*hh' and CR/LF,
// i.e. at most 80 once the line terminator is stripped.
inline constexpr size_t kMaxLineChars = 82;
inline constexpr size_t kMaxStrippedChars = kMaxLineChars - 2;

/// One framed sentence: the bytes strictly between '$' and '*', plus the
/// transmitted checksum (stored uppercase).
struct RawSentence {
    std::string payload;
    std::string checksum_hex;
};

/// Parsed $GPRMC ("recommended minimum") sentence.
struct GprmcFix {
    int utc_hour = 0;
    int utc_minute = 0;
    double utc_second = 0.0;
    bool valid = true;  // status field: 'A' active, 'V' void
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double speed_knots = 0.0;
    double course_deg = 0.0;  // [0, 360)
    int day = 1;
    int month = 1;
    int year = 2024;
};

/// XOR of all payload bytes as two uppercase hex digits. The payload must not
/// contain the framing characters '$' or '*'.
Result<std::string> compute_checksum(std::string_view payload);

/// Frame-level parse: splits payload from checksum, validating the '$'/'*'
/// structure, the line-length limit and the checksum.
Result<RawSentence> parse_sentence(std::string_view line);

/// Sentence identifier (text before the first comma), e.g. "GPRMC".
std::string_view sentence_type(const RawSentence& s);

/// Whether this sentence is a $GPRMC; non-GPRMC sentences are not an error,
/// callers skip them.
bool is_gprmc(const RawSentence& s);

/// Field-level parse of a GPRMC sentence. A 'V' (void) status still yields a
/// fix with valid=false; the caller decides what to do with outages.
Result<GprmcFix> parse_gprmc(const RawSentence& s);

/// Canonical serialization: 4 fractional minute digits, hundredth-second time,
/// empty magnetic-variation fields, valid checksum appended. No CR/LF.
Result<std::string> serialize_gprmc(const GprmcFix& fix);

/// "YYYY-MM-DDTHH:MM:SSZ" (fractional seconds included when nonzero).
std::string utc_iso8601(const GprmcFix& fix);

}  // namespace vtrack::nmea
