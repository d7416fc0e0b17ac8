#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vtrack/accuracy.hpp"
#include "vtrack/kalman.hpp"
#include "vtrack/kml.hpp"
#include "vtrack/result.hpp"
#include "vtrack/telemetry.hpp"

namespace vtrack::station {

enum class FilterMode { off, position, pseudorange };

struct InputSource {
    enum class Kind { file, standard_input, tcp };
    Kind kind = Kind::file;
    std::string path;   // file mode
    uint16_t port = 0;  // tcp mode

    static InputSource from_file(std::string p) { return {Kind::file, std::move(p), 0}; }
    static InputSource from_stdin() { return {Kind::standard_input, {}, 0}; }
    static InputSource from_tcp(uint16_t port) { return {Kind::tcp, {}, port}; }
};

struct StationConfig {
    InputSource input;
    std::string output_dir = ".";
    FilterMode filter = FilterMode::position;
    double q_pos_m = 1.0;   // position-mode process noise, m/sqrt(epoch)
    double r_pos_m = 15.0;  // position-mode measurement noise, m
    // Pseudorange mode needs the simulator's raw measurement side channel;
    // the k-th accepted message of a vehicle pairs with the k-th epoch.
    std::string pseudorange_csv;
    kalman::FilterConfig pseudorange_cfg;
    int kml_every_n = 10;  // KML rewrite / CSV append cadence, accepted points
};

/// Line dispositions. Every ingested line lands in exactly one bucket.
struct Counters {
    size_t accepted = 0;
    size_t checksum_rejected = 0;
    size_t malformed = 0;
    size_t range_rejected = 0;

    size_t total() const { return accepted + checksum_rejected + malformed + range_rejected; }
};

struct BufferedPoint {
    telemetry::TelemetryRecord record;
    geodesy::GeodeticPoint raw_pos;
    geodesy::GeodeticPoint filtered_pos;
};

/// Per-vehicle decoding/filtering state. Rejected lines usually cannot be
/// attributed to a vehicle (the id did not survive decoding), so the reject
/// counters here stay zero under normal operation; station totals carry them.
struct VehicleSession {
    std::string vehicle_id;
    Counters counters;
    std::vector<BufferedPoint> points;
    std::unique_ptr<kalman::PositionFilter> position_filter;
    std::optional<kalman::EcefState> pseudorange_state;
    size_t pseudorange_epoch = 0;
    size_t csv_rows_flushed = 0;
    size_t accepted_since_kml = 0;
};

struct IngestOutcome {
    bool accepted = false;
    std::string vehicle_id;          // set when accepted
    Errc reason = Errc::io_failure;  // set when rejected
};

struct VehicleSummary {
    std::string vehicle_id;
    size_t accepted = 0;
    std::string csv_path;
    std::string kml_path;
    std::string accuracy_path;
    std::optional<accuracy::AccuracyReport> raw_report;
    std::optional<accuracy::AccuracyReport> filtered_report;
    std::optional<double> improvement_ratio;
};

struct Summary {
    Counters totals;
    size_t lines_seen = 0;
    std::vector<VehicleSummary> vehicles;
};

/// The recipient side: decodes message lines, routes them to per-vehicle
/// sessions, applies the configured filter, and persists CSV/KML plus an
/// accuracy report per vehicle. A garbled message never crashes the station;
/// it is counted and skipped.
class Station {
public:
    explicit Station(StationConfig cfg);

    /// Decode one line and route it. All failures become counted rejections.
    IngestOutcome ingest_line(std::string_view line);

    /// Consume the configured input to end-of-stream (file/stdin) or until
    /// request_stop() (tcp), then finalize outputs. Fatal errors (bad output
    /// dir, port in use) happen at startup only.
    Result<Summary> run();

    /// Async-safe shutdown request for the TCP listener.
    void request_stop() { stop_requested_.store(true); }

    const Counters& totals() const { return totals_; }
    const std::map<std::string, VehicleSession>& sessions() const { return sessions_; }

private:
    Result<bool> prepare();
    void accept_record(telemetry::TelemetryRecord record);
    Result<bool> flush_vehicle(VehicleSession& session, bool final_flush);
    Result<Summary> finalize();
    Result<bool> consume_stream(std::istream& in);
    Result<bool> serve_tcp();

    std::string csv_path(const VehicleSession& s) const;
    std::string kml_path(const VehicleSession& s) const;
    std::string accuracy_path(const VehicleSession& s) const;

    StationConfig cfg_;
    Counters totals_;
    size_t lines_seen_ = 0;
    std::map<std::string, VehicleSession> sessions_;
    std::vector<sim::PseudorangeEpoch> side_channel_;
    std::atomic<bool> stop_requested_{false};
};

}  // namespace vtrack::station
