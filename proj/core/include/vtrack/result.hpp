#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace vtrack {

/// Error codes shared across the toolkit. Data-path failures (bad sentences,
/// bad messages, degenerate geometry) are reported through Result<T> so that
/// callers such as the station can count and skip them without unwinding.
enum class Errc {
    // nmea
    missing_dollar,
    missing_star,
    checksum_mismatch,
    overlength,
    wrong_sentence_type,
    field_count_mismatch,
    non_numeric_field,
    hemisphere_invalid,
    out_of_range_coordinate,
    invalid_payload_char,
    // telemetry
    unknown_pid,
    wrong_length,
    invalid_vehicle_id,
    malformed_layout,
    range_violation,
    // geodesy
    near_singular_axis,
    too_far_apart,
    // gnss_sim / solvers
    cannot_satisfy_geometry,
    too_few_satellites,
    singular_geometry,
    no_convergence,
    degenerate_range,
    singular_innovation_covariance,
    initialization_failed,
    // accuracy / kml / station
    length_mismatch,
    too_few_points,
    empty_track,
    io_failure,
    bind_failure,
};

const char* to_string(Errc code);

struct Error {
    Errc code;
    std::string message;
};

inline Error make_error(Errc code, std::string message = {}) {
    return Error{code, std::move(message)};
}

/// Small value-or-error carrier. g++ 11 has no std::expected; this covers the
/// subset we need: construct from T or Error, query, and take the value.
template <typename T>
class Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error err) : v_(std::move(err)) {}
    Result(Errc code, std::string message = {}) : v_(Error{code, std::move(message)}) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        assert(ok());
        return std::get<T>(v_);
    }
    T& value() & {
        assert(ok());
        return std::get<T>(v_);
    }
    T&& take() && {
        assert(ok());
        return std::get<T>(std::move(v_));
    }

    const Error& error() const {
        assert(!ok());
        return std::get<Error>(v_);
    }
    Errc code() const { return error().code; }

private:
    std::variant<T, Error> v_;
};

}  // namespace vtrack
