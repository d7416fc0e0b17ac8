#pragma once

#include <string>
#include <vector>

#include "vtrack/geodesy.hpp"
#include "vtrack/result.hpp"
#include "vtrack/telemetry.hpp"

namespace vtrack::kml {

enum class Source { raw, filtered };

/// One displayable track sample: where the vehicle was, when, and what the
/// engine was doing.
struct TrackPoint {
    std::string utc;  // ISO-8601, e.g. 2024-05-14T09:30:00Z
    geodesy::GeodeticPoint pos;
    telemetry::EngineStatus status;
    Source source = Source::raw;
};

/// Single Placemark fragment for the live position view: the vehicle id as the
/// name and the four engine parameters in the description. KML wants
/// lon,lat[,alt] coordinate order.
std::string emit_placemark(const TrackPoint& point, const std::string& vehicle_id);

/// Full KML document for a travelled route: one LineString per source present
/// (raw/filtered styled distinctly), a timestamped point Placemark per sample,
/// and the latest fix carrying the engine-status description.
Result<std::string> emit_track_document(const std::vector<TrackPoint>& points,
                                        const std::string& vehicle_id);

/// One persisted epoch: the raw and filtered positions side by side.
struct EpochRecord {
    std::string utc;
    std::string vehicle_id;
    geodesy::GeodeticPoint raw_pos;
    geodesy::GeodeticPoint filtered_pos;
    telemetry::EngineStatus status;
};

std::string csv_header();
std::string to_csv_row(const EpochRecord& row);

/// Write header plus one row per epoch to path; returns the row count.
Result<size_t> write_csv(const std::vector<EpochRecord>& rows, const std::string& path);

}  // namespace vtrack::kml
