#include "vtrack/kml.hpp"

#include <cmath>
#include <fstream>

#include "text_util.hpp"

namespace vtrack::kml {

namespace {

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

/// "lon,lat,0" -- KML axis order, 7 decimal places (~1 cm).
std::string coordinate_tuple(const geodesy::GeodeticPoint& p) {
    std::string out = detail::fmt_fixed(p.lon_deg, 7);
    out += ',';
    out += detail::fmt_fixed(p.lat_deg, 7);
    out += ",0";
    return out;
}

std::string status_description(const telemetry::EngineStatus& s) {
    std::string out = "RPM: ";
    out += detail::fmt_fixed(s.rpm, 2);
    out += " rev/min\nEngine coolant temperature: ";
    out += std::to_string(std::llround(s.coolant_c));
    out += " degC\nVehicle speed: ";
    out += std::to_string(std::llround(s.speed_kmh));
    out += " km/h\nPercent throttle: ";
    out += detail::fmt_fixed(s.throttle_pct, 1);
    out += " %";
    return out;
}

const char* style_id(Source source) {
    return source == Source::raw ? "raw" : "filtered";
}

void append_point_placemark(std::string& doc, const TrackPoint& p, const std::string& vehicle_id,
                            bool latest) {
    doc += "    <Placemark>\n";
    if (latest) {
        doc += "      <name>";
        doc += xml_escape(vehicle_id);
        doc += "</name>\n";
        doc += "      <description>";
        doc += xml_escape(status_description(p.status));
        doc += "</description>\n";
    }
    doc += "      <styleUrl>#";
    doc += style_id(p.source);
    doc += "-point</styleUrl>\n";
    doc += "      <TimeStamp><when>";
    doc += xml_escape(p.utc);
    doc += "</when></TimeStamp>\n";
    doc += "      <Point><coordinates>";
    doc += coordinate_tuple(p.pos);
    doc += "</coordinates></Point>\n";
    doc += "    </Placemark>\n";
}

void append_line_placemark(std::string& doc, const std::vector<TrackPoint>& points, Source source,
                           const std::string& vehicle_id) {
    doc += "    <Placemark>\n      <name>";
    doc += xml_escape(vehicle_id);
    doc += source == Source::raw ? " raw path" : " filtered path";
    doc += "</name>\n      <styleUrl>#";
    doc += style_id(source);
    doc += "-line</styleUrl>\n      <LineString>\n        <tessellate>1</tessellate>\n"
           "        <coordinates>\n";
    for (const auto& p : points) {
        if (p.source != source) {
            continue;
        }
        doc += "          ";
        doc += coordinate_tuple(p.pos);
        doc += '\n';
    }
    doc += "        </coordinates>\n      </LineString>\n    </Placemark>\n";
}

}  // namespace

std::string emit_placemark(const TrackPoint& point, const std::string& vehicle_id) {
    std::string doc = "<Placemark>\n  <name>";
    doc += xml_escape(vehicle_id);
    doc += "</name>\n  <description>";
    doc += xml_escape(status_description(point.status));
    doc += "</description>\n  <TimeStamp><when>";
    doc += xml_escape(point.utc);
    doc += "</when></TimeStamp>\n  <Point><coordinates>";
    doc += coordinate_tuple(point.pos);
    doc += "</coordinates></Point>\n</Placemark>\n";
    return doc;
}

Result<std::string> emit_track_document(const std::vector<TrackPoint>& points,
                                        const std::string& vehicle_id) {
    if (points.empty()) {
        return Error{Errc::empty_track, "cannot emit a KML document for an empty track"};
    }
    bool has_raw = false, has_filtered = false;
    for (const auto& p : points) {
        (p.source == Source::raw ? has_raw : has_filtered) = true;
    }

    std::string doc =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<kml xmlns=\"http://www.opengis.net/kml/2.2\">\n"
        "  <Document>\n    <name>";
    doc += xml_escape(vehicle_id);
    doc += " track</name>\n";
    doc +=
        "    <Style id=\"raw-line\"><LineStyle><color>7f0000ff</color><width>2</width>"
        "</LineStyle></Style>\n"
        "    <Style id=\"filtered-line\"><LineStyle><color>ff00aa00</color><width>3</width>"
        "</LineStyle></Style>\n"
        "    <Style id=\"raw-point\"><IconStyle><scale>0.4</scale></IconStyle></Style>\n"
        "    <Style id=\"filtered-point\"><IconStyle><scale>0.5</scale></IconStyle></Style>\n";

    if (has_raw) {
        append_line_placemark(doc, points, Source::raw, vehicle_id);
    }
    if (has_filtered) {
        append_line_placemark(doc, points, Source::filtered, vehicle_id);
    }
    for (size_t i = 0; i < points.size(); ++i) {
        append_point_placemark(doc, points[i], vehicle_id, i + 1 == points.size());
    }
    doc += "  </Document>\n</kml>\n";
    return doc;
}

std::string csv_header() {
    return "timestamp_utc,vehicle_id,lat_raw,lon_raw,lat_filtered,lon_filtered,rpm,coolant_c,"
           "speed_kmh,throttle_pct";
}

std::string to_csv_row(const EpochRecord& row) {
    std::string out = row.utc;
    out += ',';
    out += row.vehicle_id;
    out += ',';
    out += detail::fmt_fixed(row.raw_pos.lat_deg, 7);
    out += ',';
    out += detail::fmt_fixed(row.raw_pos.lon_deg, 7);
    out += ',';
    out += detail::fmt_fixed(row.filtered_pos.lat_deg, 7);
    out += ',';
    out += detail::fmt_fixed(row.filtered_pos.lon_deg, 7);
    out += ',';
    out += detail::fmt_fixed(row.status.rpm, 2);
    out += ',';
    out += std::to_string(std::llround(row.status.coolant_c));
    out += ',';
    out += std::to_string(std::llround(row.status.speed_kmh));
    out += ',';
    out += detail::fmt_fixed(row.status.throttle_pct, 1);
    return out;
}

Result<size_t> write_csv(const std::vector<EpochRecord>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        return Error{Errc::io_failure, "cannot open " + path + " for writing"};
    }
    out << csv_header() << '\n';
    for (const auto& row : rows) {
        out << to_csv_row(row) << '\n';
    }
    out.flush();
    if (!out) {
        return Error{Errc::io_failure, "write failed for " + path};
    }
    return rows.size();
}

}  // namespace vtrack::kml
