#include "vtrack/result.hpp"

namespace vtrack {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::missing_dollar: return "MissingDollar";
        case Errc::missing_star: return "MissingStar";
        case Errc::checksum_mismatch: return "ChecksumMismatch";
        case Errc::overlength: return "Overlength";
        case Errc::wrong_sentence_type: return "WrongSentenceType";
        case Errc::field_count_mismatch: return "FieldCountMismatch";
        case Errc::non_numeric_field: return "NonNumericField";
        case Errc::hemisphere_invalid: return "HemisphereInvalid";
        case Errc::out_of_range_coordinate: return "OutOfRangeCoordinate";
        case Errc::invalid_payload_char: return "InvalidPayloadChar";
        case Errc::unknown_pid: return "UnknownPid";
        case Errc::wrong_length: return "WrongLength";
        case Errc::invalid_vehicle_id: return "InvalidVehicleId";
        case Errc::malformed_layout: return "MalformedLayout";
        case Errc::range_violation: return "RangeViolation";
        case Errc::near_singular_axis: return "NearSingularAxis";
        case Errc::too_far_apart: return "TooFarApart";
        case Errc::cannot_satisfy_geometry: return "CannotSatisfyGeometry";
        case Errc::too_few_satellites: return "TooFewSatellites";
        case Errc::singular_geometry: return "SingularGeometry";
        case Errc::no_convergence: return "NoConvergence";
        case Errc::degenerate_range: return "DegenerateRange";
        case Errc::singular_innovation_covariance: return "SingularInnovationCovariance";
        case Errc::initialization_failed: return "InitializationFailed";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::too_few_points: return "TooFewPoints";
        case Errc::empty_track: return "EmptyTrack";
        case Errc::io_failure: return "IoFailure";
        case Errc::bind_failure: return "BindFailure";
    }
    return "UnknownError";
}

}  // namespace vtrack
