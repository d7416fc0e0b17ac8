// vtrack: vehicle-tracking toolkit CLI.
//
// Subcommands: simulate, decode, filter, eval, kml, station.
// Exit codes: 0 success, 1 fatal config/IO error, 2 input entirely rejected.

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vtrack/accuracy.hpp"
#include "vtrack/geodesy.hpp"
#include "vtrack/gnss_sim.hpp"
#include "vtrack/kalman.hpp"
#include "vtrack/kml.hpp"
#include "vtrack/nmea.hpp"
#include "vtrack/station.hpp"
#include "vtrack/telemetry.hpp"

using namespace vtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitAllRejected = 2;

station::Station* g_station = nullptr;

void handle_signal(int) {
    if (g_station != nullptr) {
        g_station->request_stop();
    }
}

[[noreturn]] void fatal(const std::string& message) {
    std::cerr << "error: " << message << '\n';
    std::exit(kExitFatal);
}

void fatal_if_error(const Error& error) {
    fatal(std::string(to_string(error.code)) + ": " + error.message);
}

struct DecodedFile {
    std::vector<telemetry::TelemetryRecord> records;
    station::Counters counters;
};

DecodedFile decode_messages_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fatal("cannot open " + path);
    }
    DecodedFile out;
    std::string line;
    while (std::getline(in, line)) {
        auto record = telemetry::decode_record(line);
        if (record.ok()) {
            ++out.counters.accepted;
            out.records.push_back(std::move(record).take());
            continue;
        }
        switch (record.code()) {
            case Errc::checksum_mismatch: ++out.counters.checksum_rejected; break;
            case Errc::range_violation: ++out.counters.range_rejected; break;
            default: ++out.counters.malformed; break;
        }
    }
    return out;
}

bool looks_like_messages(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fatal("cannot open " + path);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        return line.front() == '$';
    }
    return false;
}

Track read_track_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fatal("cannot open " + path);
    }
    Track track;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (first && line.rfind("epoch", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() < 3) {
            fatal("bad track CSV row in " + path + ": " + line);
        }
        TrackPoint p;
        p.t_s = std::stod(fields[0]);
        p.pos.lat_deg = std::stod(fields[1]);
        p.pos.lon_deg = std::stod(fields[2]);
        p.pos.alt_m = fields.size() > 3 ? std::stod(fields[3]) : 0.0;
        track.push_back(p);
    }
    return track;
}

/// Tracks come either as epoch,lat,lon,alt CSV or as raw message files; the
/// leading '$' of the first non-empty line tells them apart.
Track load_track(const std::string& path) {
    if (!looks_like_messages(path)) {
        return read_track_csv(path);
    }
    const DecodedFile decoded = decode_messages_file(path);
    Track track;
    double t = 0.0;
    for (const auto& r : decoded.records) {
        track.push_back(TrackPoint{t, {r.fix.lat_deg, r.fix.lon_deg, 0.0}});
        t += 1.0;
    }
    return track;
}

void write_track_csv(const std::string& path, const Track& track) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        fatal("cannot write " + path);
    }
    out << "epoch,lat,lon,alt\n";
    for (size_t i = 0; i < track.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.7f,%.7f,%.3f\n", i, track[i].pos.lat_deg,
                      track[i].pos.lon_deg, track[i].pos.alt_m);
        out << buf;
    }
}

void print_counters(const station::Counters& c) {
    std::cerr << "accepted " << c.accepted << ", checksum-rejected " << c.checksum_rejected
              << ", malformed " << c.malformed << ", range-rejected " << c.range_rejected << '\n';
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string traj = "static";
    int epochs = 2000;
    double pr_sigma_m = 11.4;
    uint64_t seed = 1;
    std::string out_messages;
    std::string out_truth;
    std::string out_pseudoranges;
    std::string vehicle = "SIM-1";
    double origin_lat = 31.95, origin_lon = 35.91, origin_alt = 800.0;
    double speed_kmh = 40.0;
    double heading_deg = 90.0;
    double radius_m = 250.0;
    double dt_s = 1.0;
    int sats = 6;
    uint64_t sat_seed = 42;
    double clock_offset_m = 850.0;
    double clock_walk_m = 0.4;
    double mp_bias_m = 0.0;
    int mp_len = 0;
    double mp_prob = 0.0;
};

int run_simulate(const SimulateArgs& args) {
    sim::TrajectoryConfig traj;
    if (args.traj == "static") {
        traj.kind = sim::TrajectoryKind::stationary;
    } else if (args.traj == "line") {
        traj.kind = sim::TrajectoryKind::line;
    } else if (args.traj == "circle") {
        traj.kind = sim::TrajectoryKind::circle;
    } else {
        fatal("unknown trajectory kind: " + args.traj);
    }
    traj.origin = {args.origin_lat, args.origin_lon, args.origin_alt};
    traj.speed_kmh = traj.kind == sim::TrajectoryKind::stationary ? 0.0 : args.speed_kmh;
    traj.heading_deg = args.heading_deg;
    traj.circle_radius_m = args.radius_m;
    traj.duration_epochs = args.epochs;
    traj.epoch_dt_s = args.dt_s;
    traj.rng_seed = args.seed;

    auto constellation = sim::build_constellation(args.sats, args.sat_seed, traj.origin);
    if (!constellation) {
        fatal_if_error(constellation.error());
    }

    sim::NoiseModel noise;
    noise.pr_sigma_m = args.pr_sigma_m;
    noise.clock_offset0_m = args.clock_offset_m;
    noise.clock_walk_m = args.clock_walk_m;
    if (args.mp_bias_m != 0.0 && args.mp_len > 0) {
        noise.multipath = sim::MultipathModel{args.mp_bias_m, args.mp_len, args.mp_prob};
    }

    auto run = sim::simulate_run(traj, constellation.value().satellites, noise);
    if (!run) {
        fatal_if_error(run.error());
    }

    {
        std::ofstream out(args.out_messages, std::ios::trunc);
        if (!out) {
            fatal("cannot write " + args.out_messages);
        }
        auto written = sim::write_messages(out, run.value(), args.vehicle);
        if (!written) {
            fatal_if_error(written.error());
        }
    }
    {
        std::ofstream out(args.out_truth, std::ios::trunc);
        if (!out) {
            fatal("cannot write " + args.out_truth);
        }
        sim::write_truth_csv(out, run.value());
    }
    if (!args.out_pseudoranges.empty()) {
        std::ofstream out(args.out_pseudoranges, std::ios::trunc);
        if (!out) {
            fatal("cannot write " + args.out_pseudoranges);
        }
        sim::write_pseudorange_csv(out, run.value());
    }
    std::cerr << "simulated " << args.epochs << " epochs, " << args.sats
              << " satellites (GDOP " << constellation.value().gdop << "), vehicle "
              << args.vehicle << '\n';
    return kExitOk;
}

int run_decode(const std::string& in_path) {
    const DecodedFile decoded = decode_messages_file(in_path);
    std::cout << "timestamp_utc,vehicle_id,lat,lon,speed_knots,course_deg,rpm,coolant_c,"
                 "speed_kmh,throttle_pct\n";
    for (const auto& r : decoded.records) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%s,%.7f,%.7f,%.1f,%.1f,%.2f,%.0f,%.0f,%.1f\n",
                      nmea::utc_iso8601(r.fix).c_str(), r.vehicle_id.c_str(), r.fix.lat_deg,
                      r.fix.lon_deg, r.fix.speed_knots, r.fix.course_deg, r.status.rpm,
                      r.status.coolant_c, r.status.speed_kmh, r.status.throttle_pct);
        std::cout << buf;
    }
    print_counters(decoded.counters);
    if (decoded.counters.total() > 0 && decoded.counters.accepted == 0) {
        return kExitAllRejected;
    }
    return kExitOk;
}

struct FilterArgs {
    std::string mode = "position";
    std::string in_path;
    std::string pseudoranges;
    std::string out_path;
    double q_pos_m = 1.0;
    double r_pos_m = 15.0;
    double q_clk_m = 5.0;
    double r_pr_m = 10.0;
};

int run_filter(const FilterArgs& args) {
    if (args.mode == "position") {
        if (args.in_path.empty()) {
            fatal("--in is required for position mode");
        }
        const DecodedFile decoded = decode_messages_file(args.in_path);
        print_counters(decoded.counters);
        if (decoded.records.empty()) {
            std::cerr << "no usable records in " << args.in_path << '\n';
            return kExitAllRejected;
        }
        std::vector<nmea::GprmcFix> fixes;
        fixes.reserve(decoded.records.size());
        for (const auto& r : decoded.records) {
            fixes.push_back(r.fix);
        }
        const geodesy::GeodeticPoint ref{fixes.front().lat_deg, fixes.front().lon_deg, 0.0};
        auto track = kalman::run_position_filter(fixes, args.q_pos_m, args.r_pos_m, ref);
        if (!track) {
            fatal_if_error(track.error());
        }
        write_track_csv(args.out_path, track.value());
        std::cerr << "filtered " << track.value().size() << " fixes (position mode) -> "
                  << args.out_path << '\n';
        return kExitOk;
    }
    if (args.mode == "pseudorange") {
        if (args.pseudoranges.empty()) {
            fatal("--pseudoranges is required for pseudorange mode");
        }
        std::ifstream in(args.pseudoranges);
        if (!in) {
            fatal("cannot open " + args.pseudoranges);
        }
        auto epochs = sim::read_pseudorange_csv(in);
        if (!epochs) {
            fatal_if_error(epochs.error());
        }
        if (epochs.value().empty()) {
            std::cerr << "no epochs in " << args.pseudoranges << '\n';
            return kExitAllRejected;
        }
        kalman::FilterConfig cfg;
        cfg.process_noise = Eigen::Vector4d(args.q_pos_m * args.q_pos_m, args.q_pos_m * args.q_pos_m,
                                            args.q_pos_m * args.q_pos_m, args.q_clk_m * args.q_clk_m)
                                .asDiagonal();
        cfg.r_per_sat_m2 = args.r_pr_m * args.r_pr_m;
        auto run = kalman::run_pseudorange_filter(epochs.value(), cfg);
        if (!run) {
            fatal_if_error(run.error());
        }
        write_track_csv(args.out_path, run.value().track);
        size_t predicted_only = 0;
        for (bool p : run.value().predicted_only) {
            predicted_only += p ? 1 : 0;
        }
        std::cerr << "filtered " << run.value().track.size() << " epochs (pseudorange mode, "
                  << predicted_only << " predict-only) -> " << args.out_path << '\n';
        return kExitOk;
    }
    fatal("unknown filter mode: " + args.mode);
}

int run_eval(const std::string& raw_path, const std::string& filtered_path,
             const std::string& truth_path) {
    const Track raw = load_track(raw_path);
    const Track filtered = load_track(filtered_path);
    std::optional<Track> truth;
    if (!truth_path.empty()) {
        truth = load_track(truth_path);
    }
    auto comparison = accuracy::compare(raw, filtered, truth ? &*truth : nullptr);
    if (!comparison) {
        fatal_if_error(comparison.error());
    }
    std::cout << "raw:      " << accuracy::to_string(comparison.value().raw) << '\n';
    std::cout << "filtered: " << accuracy::to_string(comparison.value().filtered) << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", comparison.value().improvement_ratio);
    std::cout << "improvement ratio (raw/filtered 2DRMS): " << buf << '\n';
    std::cout << "csv,track," << accuracy::csv_header() << '\n';
    std::cout << "csv,raw," << accuracy::to_csv_row(comparison.value().raw) << '\n';
    std::cout << "csv,filtered," << accuracy::to_csv_row(comparison.value().filtered) << '\n';
    return kExitOk;
}

int run_kml(const std::string& in_path, const std::string& out_path, const std::string& vehicle) {
    std::vector<kml::TrackPoint> points;
    if (looks_like_messages(in_path)) {
        const DecodedFile decoded = decode_messages_file(in_path);
        print_counters(decoded.counters);
        for (const auto& r : decoded.records) {
            if (r.vehicle_id != vehicle) {
                continue;
            }
            kml::TrackPoint p;
            p.utc = nmea::utc_iso8601(r.fix);
            p.pos = {r.fix.lat_deg, r.fix.lon_deg, 0.0};
            p.status = r.status;
            p.source = kml::Source::raw;
            points.push_back(p);
        }
    } else {
        const Track track = read_track_csv(in_path);
        for (const auto& tp : track) {
            kml::TrackPoint p;
            p.utc = "";
            p.pos = tp.pos;
            p.source = kml::Source::raw;
            points.push_back(p);
        }
    }
    if (points.empty()) {
        std::cerr << "no points for vehicle " << vehicle << " in " << in_path << '\n';
        return kExitAllRejected;
    }
    auto doc = kml::emit_track_document(points, vehicle);
    if (!doc) {
        fatal_if_error(doc.error());
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        fatal("cannot write " + out_path);
    }
    out << doc.value();
    std::cerr << "wrote " << points.size() << " points to " << out_path << '\n';
    return kExitOk;
}

struct StationArgs {
    std::string input;
    std::string out_dir;
    std::string filter = "position";
    int kml_every_n = 10;
    double q_pos_m = 1.0;
    double r_pos_m = 15.0;
};

int run_station(const StationArgs& args) {
    station::StationConfig cfg;
    if (args.input == "stdin") {
        cfg.input = station::InputSource::from_stdin();
    } else if (args.input.rfind("tcp:", 0) == 0) {
        const int port = std::stoi(args.input.substr(4));
        if (port <= 0 || port > 65535) {
            fatal("bad TCP port: " + args.input);
        }
        cfg.input = station::InputSource::from_tcp(static_cast<uint16_t>(port));
    } else if (args.input.rfind("file:", 0) == 0) {
        cfg.input = station::InputSource::from_file(args.input.substr(5));
    } else {
        cfg.input = station::InputSource::from_file(args.input);
    }
    cfg.output_dir = args.out_dir;
    if (args.filter == "position") {
        cfg.filter = station::FilterMode::position;
    } else if (args.filter == "off") {
        cfg.filter = station::FilterMode::off;
    } else {
        fatal("station filter must be 'position' or 'off'");
    }
    cfg.q_pos_m = args.q_pos_m;
    cfg.r_pos_m = args.r_pos_m;
    cfg.kml_every_n = args.kml_every_n;

    station::Station s(cfg);
    g_station = &s;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    auto summary = s.run();
    g_station = nullptr;
    if (!summary) {
        fatal_if_error(summary.error());
    }

    print_counters(summary.value().totals);
    for (const auto& v : summary.value().vehicles) {
        std::cout << v.vehicle_id << ": " << v.accepted << " points\n";
        std::cout << "  csv: " << v.csv_path << "\n  kml: " << v.kml_path << '\n';
        if (v.raw_report) {
            std::cout << "  raw:      " << accuracy::to_string(*v.raw_report) << '\n';
        }
        if (v.filtered_report) {
            std::cout << "  filtered: " << accuracy::to_string(*v.filtered_report) << '\n';
        }
        if (v.improvement_ratio) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f", *v.improvement_ratio);
            std::cout << "  improvement ratio: " << buf << '\n';
        }
    }
    if (summary.value().lines_seen > 0 && summary.value().totals.accepted == 0) {
        return kExitAllRejected;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vtrack: GPS/GSM vehicle tracking toolkit"};
    app.require_subcommand(1);

    // simulate
    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic drive");
    simulate->add_option("--traj", sim_args.traj, "trajectory kind: static|line|circle")
        ->check(CLI::IsMember({"static", "line", "circle"}));
    simulate->add_option("--epochs", sim_args.epochs, "number of epochs")
        ->envname("VTRACK_EPOCHS")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--pr-sigma-m", sim_args.pr_sigma_m, "pseudorange noise std, m")
        ->envname("VTRACK_PR_SIGMA_M");
    simulate->add_option("--seed", sim_args.seed, "run RNG seed")->envname("VTRACK_SEED");
    simulate->add_option("--out-messages", sim_args.out_messages, "telemetry message output")
        ->required();
    simulate->add_option("--out-truth", sim_args.out_truth, "truth CSV output")->required();
    simulate->add_option("--out-pseudoranges", sim_args.out_pseudoranges,
                         "raw pseudorange CSV output");
    simulate->add_option("--vehicle", sim_args.vehicle, "vehicle id")->envname("VTRACK_VEHICLE");
    simulate->add_option("--origin-lat", sim_args.origin_lat, "origin latitude, deg");
    simulate->add_option("--origin-lon", sim_args.origin_lon, "origin longitude, deg");
    simulate->add_option("--origin-alt", sim_args.origin_alt, "origin altitude, m");
    simulate->add_option("--speed-kmh", sim_args.speed_kmh, "vehicle speed (line/circle)");
    simulate->add_option("--heading-deg", sim_args.heading_deg, "line heading");
    simulate->add_option("--radius-m", sim_args.radius_m, "circle radius");
    simulate->add_option("--dt-s", sim_args.dt_s, "epoch spacing, s");
    simulate->add_option("--sats", sim_args.sats, "constellation size")->check(CLI::Range(4, 32));
    simulate->add_option("--sat-seed", sim_args.sat_seed, "constellation geometry seed");
    simulate->add_option("--clock-offset-m", sim_args.clock_offset_m, "initial b_u, m");
    simulate->add_option("--clock-walk-m", sim_args.clock_walk_m, "b_u random walk std, m");
    simulate->add_option("--mp-bias-m", sim_args.mp_bias_m, "multipath burst bias, m");
    simulate->add_option("--mp-len", sim_args.mp_len, "multipath burst length, epochs");
    simulate->add_option("--mp-prob", sim_args.mp_prob, "multipath burst start probability");

    // decode
    std::string decode_in;
    auto* decode = app.add_subcommand("decode", "decode a message file and report rejects");
    decode->add_option("--in", decode_in, "message file")->required();

    // filter
    FilterArgs filter_args;
    auto* filter = app.add_subcommand("filter", "run the Kalman filter over recorded data");
    filter->add_option("--mode", filter_args.mode, "position|pseudorange")
        ->check(CLI::IsMember({"position", "pseudorange"}));
    filter->add_option("--in", filter_args.in_path, "message file (position mode)");
    filter->add_option("--pseudoranges", filter_args.pseudoranges,
                       "pseudorange CSV (pseudorange mode)");
    filter->add_option("--out", filter_args.out_path, "filtered track CSV output")->required();
    filter->add_option("--q-pos-m", filter_args.q_pos_m, "position process noise, m/sqrt(epoch)")
        ->envname("VTRACK_Q_POS_M");
    filter->add_option("--r-pos-m", filter_args.r_pos_m, "position measurement noise, m")
        ->envname("VTRACK_R_POS_M");
    filter->add_option("--q-clk-m", filter_args.q_clk_m, "clock process noise, m/sqrt(epoch)");
    filter->add_option("--r-pr-m", filter_args.r_pr_m, "pseudorange measurement noise, m");

    // eval
    std::string eval_raw, eval_filtered, eval_truth;
    auto* eval = app.add_subcommand("eval", "accuracy report pair and improvement ratio");
    eval->add_option("--raw", eval_raw, "raw track (CSV or messages)")->required();
    eval->add_option("--filtered", eval_filtered, "filtered track (CSV or messages)")->required();
    eval->add_option("--truth", eval_truth, "truth track for truth-referenced sigmas");

    // kml
    std::string kml_in, kml_out, kml_vehicle;
    auto* kml_cmd = app.add_subcommand("kml", "emit a KML track document");
    kml_cmd->add_option("--in", kml_in, "message file or track CSV")->required();
    kml_cmd->add_option("--out", kml_out, "KML output path")->required();
    kml_cmd->add_option("--vehicle", kml_vehicle, "vehicle id")->required();

    // station
    StationArgs station_args;
    auto* station_cmd = app.add_subcommand("station", "run the recipient station");
    station_cmd->add_option("--input", station_args.input, "file:PATH | stdin | tcp:PORT")
        ->required();
    station_cmd->add_option("--out-dir", station_args.out_dir, "output directory")
        ->envname("VTRACK_OUT_DIR")
        ->required();
    station_cmd->add_option("--filter", station_args.filter, "position|off")
        ->envname("VTRACK_FILTER")
        ->check(CLI::IsMember({"position", "off"}));
    station_cmd->add_option("--kml-every-n", station_args.kml_every_n, "KML rewrite cadence")
        ->envname("VTRACK_KML_EVERY_N")
        ->check(CLI::PositiveNumber);
    station_cmd->add_option("--q-pos-m", station_args.q_pos_m, "position process noise, m")
        ->envname("VTRACK_Q_POS_M");
    station_cmd->add_option("--r-pos-m", station_args.r_pos_m, "position measurement noise, m")
        ->envname("VTRACK_R_POS_M");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return run_simulate(sim_args);
        }
        if (decode->parsed()) {
            return run_decode(decode_in);
        }
        if (filter->parsed()) {
            return run_filter(filter_args);
        }
        if (eval->parsed()) {
            return run_eval(eval_raw, eval_filtered, eval_truth);
        }
        if (kml_cmd->parsed()) {
            return run_kml(kml_in, kml_out, kml_vehicle);
        }
        if (station_cmd->parsed()) {
            return run_station(station_args);
        }
    } catch (const std::exception& e) {
        fatal(e.what());
    }
    return kExitOk;
}
