#include "vtrack/station.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "vtrack/gnss_sim.hpp"

namespace vtrack::station {

namespace {

geodesy::GeodeticPoint fix_position(const nmea::GprmcFix& fix) {
    return {fix.lat_deg, fix.lon_deg, 0.0};
}

Track to_track(const std::vector<BufferedPoint>& points, bool filtered) {
    Track track;
    track.reserve(points.size());
    double t = 0.0;
    for (const auto& p : points) {
        track.push_back(TrackPoint{t, filtered ? p.filtered_pos : p.raw_pos});
        t += 1.0;
    }
    return track;
}

class FdGuard {
public:
    explicit FdGuard(int fd) : fd_(fd) {}
    ~FdGuard() {
        if (fd_ >= 0) {
            ::close(fd_);
        }
    }
    FdGuard(const FdGuard&) = delete;
    FdGuard& operator=(const FdGuard&) = delete;
    int get() const { return fd_; }

private:
    int fd_;
};

}  // namespace

Station::Station(StationConfig cfg) : cfg_(std::move(cfg)) {}

IngestOutcome Station::ingest_line(std::string_view line) {
    ++lines_seen_;
    auto record = telemetry::decode_record(line);
    if (!record) {
        IngestOutcome outcome;
        outcome.accepted = false;
        outcome.reason = record.code();
        switch (record.code()) {
            case Errc::checksum_mismatch:
                ++totals_.checksum_rejected;
                break;
            case Errc::range_violation:
                ++totals_.range_rejected;
                break;
            default:
                ++totals_.malformed;
                break;
        }
        return outcome;
    }
    ++totals_.accepted;
    IngestOutcome outcome;
    outcome.accepted = true;
    outcome.vehicle_id = record.value().vehicle_id;
    accept_record(std::move(record).take());
    return outcome;
}

void Station::accept_record(telemetry::TelemetryRecord record) {
    auto [it, inserted] = sessions_.try_emplace(record.vehicle_id);
    VehicleSession& session = it->second;
    if (inserted) {
        session.vehicle_id = record.vehicle_id;
    }

    BufferedPoint point;
    point.raw_pos = fix_position(record.fix);
    point.filtered_pos = point.raw_pos;

    switch (cfg_.filter) {
        case FilterMode::off:
            break;
        case FilterMode::position: {
            if (!session.position_filter) {
                session.position_filter = std::make_unique<kalman::PositionFilter>(
                    cfg_.q_pos_m, cfg_.r_pos_m, point.raw_pos);
            }
            point.filtered_pos = session.position_filter->step(record.fix);
            break;
        }
        case FilterMode::pseudorange: {
            const size_t k = session.pseudorange_epoch;
            if (k < side_channel_.size()) {
                const auto& epoch = side_channel_[k];
                if (!session.pseudorange_state && epoch.entries.size() >= 4) {
                    auto ls = sim::least_squares_fix(epoch, geodesy::EcefPoint{0.0, 0.0, 0.0});
                    if (ls) {
                        kalman::EcefState state;
                        state.x << ls.value().position.x_m, ls.value().position.y_m,
                            ls.value().position.z_m, ls.value().clock_offset_m;
                        state.p = cfg_.pseudorange_cfg.p0;
                        session.pseudorange_state = state;
                        point.filtered_pos = geodesy::ecef_to_geodetic(state.position());
                    }
                } else if (session.pseudorange_state) {
                    kalman::EcefState state =
                        kalman::predict(*session.pseudorange_state, cfg_.pseudorange_cfg);
                    if (epoch.entries.size() >= 4) {
                        auto updated = kalman::update(state, epoch, cfg_.pseudorange_cfg);
                        if (updated) {
                            state = updated.value().state;
                        }
                    }
                    session.pseudorange_state = state;
                    point.filtered_pos = geodesy::ecef_to_geodetic(state.position());
                }
            }
            ++session.pseudorange_epoch;
            break;
        }
    }

    point.record = std::move(record);
    session.points.push_back(std::move(point));
    ++session.counters.accepted;
    ++session.accepted_since_kml;
}

std::string Station::csv_path(const VehicleSession& s) const {
    return (std::filesystem::path(cfg_.output_dir) / (s.vehicle_id + ".csv")).string();
}

std::string Station::kml_path(const VehicleSession& s) const {
    return (std::filesystem::path(cfg_.output_dir) / (s.vehicle_id + ".kml")).string();
}

std::string Station::accuracy_path(const VehicleSession& s) const {
    return (std::filesystem::path(cfg_.output_dir) / (s.vehicle_id + "_accuracy.csv")).string();
}

Result<bool> Station::flush_vehicle(VehicleSession& session, bool final_flush) {
    const bool filter_on = cfg_.filter != FilterMode::off;

    // Append CSV rows not yet persisted; the header goes out with the first
    // batch of the run.
    if (session.csv_rows_flushed < session.points.size()) {
        const std::string path = csv_path(session);
        std::ofstream out;
        if (session.csv_rows_flushed == 0) {
            out.open(path, std::ios::trunc);
            if (out) {
                out << kml::csv_header() << '\n';
            }
        } else {
            out.open(path, std::ios::app);
        }
        if (!out) {
            return Error{Errc::io_failure, "cannot write " + path};
        }
        for (size_t i = session.csv_rows_flushed; i < session.points.size(); ++i) {
            const auto& p = session.points[i];
            kml::EpochRecord row;
            row.utc = nmea::utc_iso8601(p.record.fix);
            row.vehicle_id = session.vehicle_id;
            row.raw_pos = p.raw_pos;
            row.filtered_pos = p.filtered_pos;
            row.status = p.record.status;
            out << kml::to_csv_row(row) << '\n';
        }
        session.csv_rows_flushed = session.points.size();
    }

    // Rewrite the whole KML track document.
    std::vector<kml::TrackPoint> kml_points;
    kml_points.reserve(filter_on ? session.points.size() * 2 : session.points.size());
    for (const auto& p : session.points) {
        kml::TrackPoint raw;
        raw.utc = nmea::utc_iso8601(p.record.fix);
        raw.pos = p.raw_pos;
        raw.status = p.record.status;
        raw.source = kml::Source::raw;
        kml_points.push_back(raw);
    }
    if (filter_on) {
        for (const auto& p : session.points) {
            kml::TrackPoint filtered;
            filtered.utc = nmea::utc_iso8601(p.record.fix);
            filtered.pos = p.filtered_pos;
            filtered.status = p.record.status;
            filtered.source = kml::Source::filtered;
            kml_points.push_back(filtered);
        }
    }
    auto doc = kml::emit_track_document(kml_points, session.vehicle_id);
    if (!doc) {
        return doc.error();
    }
    {
        const std::string path = kml_path(session);
        std::ofstream out(path, std::ios::trunc);
        if (!out) {
            return Error{Errc::io_failure, "cannot write " + path};
        }
        out << doc.value();
    }

    if (final_flush) {
        const std::string path = accuracy_path(session);
        std::ofstream out(path, std::ios::trunc);
        if (!out) {
            return Error{Errc::io_failure, "cannot write " + path};
        }
        out << "track," << accuracy::csv_header() << '\n';
        const Track raw = to_track(session.points, false);
        auto raw_report = accuracy::make_report(raw);
        if (raw_report) {
            out << "raw," << accuracy::to_csv_row(raw_report.value()) << '\n';
        }
        if (filter_on) {
            auto filtered_report = accuracy::make_report(to_track(session.points, true));
            if (filtered_report) {
                out << "filtered," << accuracy::to_csv_row(filtered_report.value()) << '\n';
            }
        }
    }
    session.accepted_since_kml = 0;
    return true;
}

Result<Summary> Station::finalize() {
    Summary summary;
    summary.totals = totals_;
    summary.lines_seen = lines_seen_;
    for (auto& [id, session] : sessions_) {
        if (!session.points.empty()) {
            auto flushed = flush_vehicle(session, true);
            if (!flushed) {
                return flushed.error();
            }
        }
        VehicleSummary vs;
        vs.vehicle_id = id;
        vs.accepted = session.counters.accepted;
        vs.csv_path = csv_path(session);
        vs.kml_path = kml_path(session);
        vs.accuracy_path = accuracy_path(session);
        auto raw_report = accuracy::make_report(to_track(session.points, false));
        if (raw_report) {
            vs.raw_report = raw_report.value();
        }
        if (cfg_.filter != FilterMode::off) {
            auto filtered_report = accuracy::make_report(to_track(session.points, true));
            if (filtered_report) {
                vs.filtered_report = filtered_report.value();
                if (vs.raw_report && vs.filtered_report->two_drms_m > 0.0) {
                    vs.improvement_ratio =
                        vs.raw_report->two_drms_m / vs.filtered_report->two_drms_m;
                }
            }
        }
        summary.vehicles.push_back(std::move(vs));
    }
    return summary;
}

Result<bool> Station::prepare() {
    std::error_code ec;
    std::filesystem::create_directories(cfg_.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg_.output_dir)) {
        return Error{Errc::io_failure, "output directory unusable: " + cfg_.output_dir};
    }
    if (cfg_.kml_every_n < 1) {
        cfg_.kml_every_n = 1;
    }
    if (cfg_.filter == FilterMode::pseudorange) {
        std::ifstream in(cfg_.pseudorange_csv);
        if (!in) {
            return Error{Errc::io_failure,
                         "cannot open pseudorange side channel: " + cfg_.pseudorange_csv};
        }
        auto epochs = sim::read_pseudorange_csv(in);
        if (!epochs) {
            return epochs.error();
        }
        side_channel_ = std::move(epochs).take();
    }
    return true;
}

Result<bool> Station::consume_stream(std::istream& in) {
    std::string line;
    while (!stop_requested_.load() && std::getline(in, line)) {
        ingest_line(line);
        for (auto& [id, session] : sessions_) {
            if (session.accepted_since_kml >= static_cast<size_t>(cfg_.kml_every_n)) {
                auto flushed = flush_vehicle(session, false);
                if (!flushed) {
                    return flushed.error();
                }
            }
        }
    }
    return true;
}

Result<bool> Station::serve_tcp() {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) {
        return Error{Errc::bind_failure, "socket() failed"};
    }
    FdGuard listener_guard(listener);
    const int one = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(cfg_.input.port);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listener, 8) != 0) {
        return Error{Errc::bind_failure,
                     "cannot listen on TCP port " + std::to_string(cfg_.input.port)};
    }

    struct Client {
        int fd;
        std::string pending;
    };
    std::vector<Client> clients;

    auto drain = [&](Client& client, bool eof) {
        size_t start = 0;
        while (true) {
            const size_t nl = client.pending.find('\n', start);
            if (nl == std::string::npos) {
                break;
            }
            ingest_line(std::string_view(client.pending).substr(start, nl - start));
            start = nl + 1;
        }
        client.pending.erase(0, start);
        if (eof && !client.pending.empty()) {
            ingest_line(client.pending);
            client.pending.clear();
        }
    };

    while (!stop_requested_.load()) {
        std::vector<pollfd> fds;
        fds.push_back(pollfd{listener, POLLIN, 0});
        for (const auto& c : clients) {
            fds.push_back(pollfd{c.fd, POLLIN, 0});
        }
        const int ready = ::poll(fds.data(), fds.size(), 200);
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            break;
        }
        if (ready == 0) {
            continue;
        }
        if (fds[0].revents & POLLIN) {
            const int client = ::accept(listener, nullptr, nullptr);
            if (client >= 0) {
                clients.push_back(Client{client, {}});
            }
        }
        for (size_t i = 0; i < clients.size();) {
            const short revents = fds[i + 1].revents;
            bool closed = false;
            if (revents & (POLLIN | POLLHUP | POLLERR)) {
                char buf[4096];
                const ssize_t n = ::read(clients[i].fd, buf, sizeof(buf));
                if (n > 0) {
                    clients[i].pending.append(buf, static_cast<size_t>(n));
                    drain(clients[i], false);
                } else {
                    closed = true;
                }
            }
            if (closed) {
                drain(clients[i], true);
                ::close(clients[i].fd);
                clients.erase(clients.begin() + static_cast<long>(i));
                // fds indices are stale after erase; rebuild on next poll.
                break;
            }
            ++i;
        }
        for (auto& [id, session] : sessions_) {
            if (session.accepted_since_kml >= static_cast<size_t>(cfg_.kml_every_n)) {
                auto flushed = flush_vehicle(session, false);
                if (!flushed) {
                    for (auto& c : clients) {
                        ::close(c.fd);
                    }
                    return flushed.error();
                }
            }
        }
    }
    for (auto& c : clients) {
        drain(c, true);
        ::close(c.fd);
    }
    return true;
}

Result<Summary> Station::run() {
    auto prepared = prepare();
    if (!prepared) {
        return prepared.error();
    }
    switch (cfg_.input.kind) {
        case InputSource::Kind::file: {
            std::ifstream in(cfg_.input.path);
            if (!in) {
                return Error{Errc::io_failure, "cannot open input file: " + cfg_.input.path};
            }
            auto consumed = consume_stream(in);
            if (!consumed) {
                return consumed.error();
            }
            break;
        }
        case InputSource::Kind::standard_input: {
            auto consumed = consume_stream(std::cin);
            if (!consumed) {
                return consumed.error();
            }
            break;
        }
        case InputSource::Kind::tcp: {
            auto served = serve_tcp();
            if (!served) {
                return served.error();
            }
            break;
        }
    }
    return finalize();
}

}  // namespace vtrack::station
