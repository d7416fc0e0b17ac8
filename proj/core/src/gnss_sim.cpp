#include "vtrack/gnss_sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "text_util.hpp"

namespace vtrack::sim {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kKmhToMs = 1.0 / 3.6;
constexpr double kKmhToKnots = 1.0 / 1.852;
constexpr int kConstellationAttempts = 64;

struct EnuBasis {
    Eigen::Vector3d east, north, up;
};

EnuBasis enu_basis(const geodesy::GeodeticPoint& p) {
    const double lat = p.lat_deg * kDegToRad;
    const double lon = p.lon_deg * kDegToRad;
    EnuBasis b;
    b.east = {-std::sin(lon), std::cos(lon), 0.0};
    b.north = {-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat)};
    b.up = {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
    return b;
}

Eigen::Vector3d to_vec(const geodesy::EcefPoint& p) {
    return {p.x_m, p.y_m, p.z_m};
}

geodesy::EcefPoint to_ecef(const Eigen::Vector3d& v) {
    return {v(0), v(1), v(2)};
}

/// GDOP at the receiver: sqrt(trace((H^T H)^-1)) over the unit line-of-sight
/// geometry matrix.
double gdop_at(const std::vector<Satellite>& sats, const Eigen::Vector3d& receiver) {
    Eigen::MatrixXd h(static_cast<Eigen::Index>(sats.size()), 4);
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const Eigen::Vector3d los =
            (to_vec(sats[static_cast<size_t>(i)].pos) - receiver).normalized();
        h.row(i) << -los(0), -los(1), -los(2), 1.0;
    }
    const Eigen::Matrix4d normal = h.transpose() * h;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(normal);
    if (!lu.isInvertible()) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(lu.inverse().trace());
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) {
        return 29;
    }
    return kDays[month - 1];
}

/// Advance the configured start instant by t seconds (handles day rollover).
void stamp_time(const TrajectoryConfig& traj, double t_s, nmea::GprmcFix& fix) {
    double seconds = traj.start_second + t_s;
    long long carry_min = static_cast<long long>(std::floor(seconds / 60.0));
    seconds -= static_cast<double>(carry_min) * 60.0;
    long long minute = traj.start_minute + carry_min;
    long long hour = traj.start_hour + minute / 60;
    minute %= 60;
    long long days = hour / 24;
    hour %= 24;

    int year = traj.start_year, month = traj.start_month, day = traj.start_day;
    while (days > 0) {
        if (++day > days_in_month(year, month)) {
            day = 1;
            if (++month > 12) {
                month = 1;
                ++year;
            }
        }
        --days;
    }
    fix.utc_hour = static_cast<int>(hour);
    fix.utc_minute = static_cast<int>(minute);
    fix.utc_second = seconds;
    fix.day = day;
    fix.month = month;
    fix.year = year;
}

struct TruthSample {
    geodesy::GeodeticPoint pos;
    double speed_kmh = 0.0;
    double course_deg = 0.0;
};

class TruthPath {
public:
    TruthPath(const TrajectoryConfig& traj) : traj_(traj) {
        if (traj.kind == TrajectoryKind::waypoints) {
            legs_.push_back({traj.origin, 0.0, 0.0});
            geodesy::GeodeticPoint prev = traj.origin;
            double total = 0.0;
            for (const auto& wp : traj.waypoints) {
                const auto off = geodesy::enu_offset_m(prev, wp);
                const double east = off ? off.value().east_m : 0.0;
                const double north = off ? off.value().north_m : 0.0;
                const double len = std::hypot(east, north);
                total += len;
                const double bearing =
                    std::fmod(std::atan2(east, north) / kDegToRad + 360.0, 360.0);
                legs_.push_back({wp, total, bearing});
                prev = wp;
            }
        }
    }

    TruthSample at(double t_s) const {
        const double speed_ms = traj_.speed_kmh * kKmhToMs;
        switch (traj_.kind) {
            case TrajectoryKind::stationary:
                return {traj_.origin, 0.0, 0.0};
            case TrajectoryKind::line: {
                const double dist = speed_ms * t_s;
                const double east = dist * std::sin(traj_.heading_deg * kDegToRad);
                const double north = dist * std::cos(traj_.heading_deg * kDegToRad);
                return {geodesy::offset_geodetic(traj_.origin, east, north), traj_.speed_kmh,
                        traj_.heading_deg};
            }
            case TrajectoryKind::circle: {
                const double radius = std::max(traj_.circle_radius_m, 1.0);
                const double theta = speed_ms * t_s / radius;  // clockwise from north
                const double east = radius * std::sin(theta);
                const double north = radius * std::cos(theta) - radius;
                const double course = std::fmod(theta / kDegToRad + 90.0, 360.0);
                return {geodesy::offset_geodetic(traj_.origin, east, north), traj_.speed_kmh,
                        course};
            }
            case TrajectoryKind::waypoints: {
                double dist = speed_ms * t_s;
                if (legs_.size() < 2 || dist >= legs_.back().cum_m) {
                    const auto& last = legs_.empty() ? Leg{traj_.origin, 0.0, 0.0} : legs_.back();
                    return {last.point, 0.0, last.bearing_deg};
                }
                size_t i = 1;
                while (legs_[i].cum_m < dist) {
                    ++i;
                }
                const auto& a = legs_[i - 1];
                const auto& b = legs_[i];
                const double span = b.cum_m - a.cum_m;
                const double f = span > 0.0 ? (dist - a.cum_m) / span : 0.0;
                const auto off = geodesy::enu_offset_m(a.point, b.point);
                const double east = off ? off.value().east_m * f : 0.0;
                const double north = off ? off.value().north_m * f : 0.0;
                return {geodesy::offset_geodetic(a.point, east, north), traj_.speed_kmh,
                        b.bearing_deg};
            }
        }
        return {traj_.origin, 0.0, 0.0};
    }

private:
    struct Leg {
        geodesy::GeodeticPoint point;
        double cum_m = 0.0;
        double bearing_deg = 0.0;
    };
    TrajectoryConfig traj_;
    std::vector<Leg> legs_;
};

telemetry::EngineStatus synthesize_status(const TruthSample& sample, double t_s) {
    telemetry::EngineStatus status;
    status.speed_kmh = std::clamp(sample.speed_kmh, 0.0, 255.0);
    status.rpm = std::clamp(800.0 + 35.0 * status.speed_kmh, 0.0, 16383.75);
    // Warm-up toward 90 C with a ~5 minute time constant.
    status.coolant_c = std::clamp(20.0 + 70.0 * (1.0 - std::exp(-t_s / 300.0)), -40.0, 215.0);
    status.throttle_pct =
        sample.speed_kmh <= 0.0 ? 8.0 : std::clamp(12.0 + 0.35 * status.speed_kmh, 0.0, 100.0);
    auto quantized = telemetry::quantize(status);
    return quantized ? quantized.value() : status;
}

}  // namespace

double true_pseudorange(const geodesy::EcefPoint& sat, const geodesy::EcefPoint& receiver,
                        double clock_offset_m) {
    const double dx = sat.x_m - receiver.x_m;
    const double dy = sat.y_m - receiver.y_m;
    const double dz = sat.z_m - receiver.z_m;
    return std::sqrt(dx * dx + dy * dy + dz * dz) + clock_offset_m;
}

Result<Constellation> build_constellation(int n, uint64_t seed,
                                          const geodesy::GeodeticPoint& origin,
                                          double min_elevation_deg, double max_gdop) {
    if (n < 4) {
        return Error{Errc::too_few_satellites, "a constellation needs at least 4 satellites"};
    }
    const Eigen::Vector3d receiver = to_vec(geodesy::geodetic_to_ecef(origin));
    const EnuBasis basis = enu_basis(origin);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int attempt = 0; attempt < kConstellationAttempts; ++attempt) {
        std::vector<Satellite> sats;
        sats.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            // Stratified azimuths keep the geometry spread; elevations stay
            // between the mask and 75 degrees.
            const double az = (i + u01(rng)) * 2.0 * M_PI / n;
            const double el = (min_elevation_deg + u01(rng) * (75.0 - min_elevation_deg)) * kDegToRad;
            const Eigen::Vector3d los = std::cos(el) * (std::sin(az) * basis.east +
                                                        std::cos(az) * basis.north) +
                                        std::sin(el) * basis.up;
            // Distance along the ray to the MEO shell.
            const double proj = receiver.dot(los);
            const double disc = proj * proj + kOrbitRadiusM * kOrbitRadiusM - receiver.squaredNorm();
            const double d = -proj + std::sqrt(disc);
            sats.push_back(Satellite{i + 1, to_ecef(receiver + d * los)});
        }
        const double gdop = gdop_at(sats, receiver);
        if (gdop < max_gdop) {
            return Constellation{std::move(sats), gdop};
        }
    }
    return Error{Errc::cannot_satisfy_geometry,
                 "could not reach the GDOP target within the retry budget"};
}

Result<LeastSquaresFix> least_squares_fix(const PseudorangeEpoch& epoch,
                                          const geodesy::EcefPoint& guess) {
    const auto m = static_cast<Eigen::Index>(epoch.entries.size());
    if (m < 4) {
        return Error{Errc::too_few_satellites, "least squares needs at least 4 pseudoranges"};
    }

    Eigen::Vector4d x;
    x << guess.x_m, guess.y_m, guess.z_m, 0.0;
    for (int iter = 1; iter <= 20; ++iter) {
        Eigen::MatrixXd jac(m, 4);
        Eigen::VectorXd residual(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& e = epoch.entries[static_cast<size_t>(i)];
            const double dx = e.sat_pos.x_m - x(0);
            const double dy = e.sat_pos.y_m - x(1);
            const double dz = e.sat_pos.z_m - x(2);
            const double range = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (range < 1.0) {
                return Error{Errc::singular_geometry, "receiver estimate collapsed onto a satellite"};
            }
            jac.row(i) << -dx / range, -dy / range, -dz / range, 1.0;
            residual(i) = e.pr_m - (range + x(3));
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
        if (qr.rank() < 4) {
            return Error{Errc::singular_geometry, "pseudorange geometry is rank deficient"};
        }
        const Eigen::Vector4d step = qr.solve(residual);
        x += step;
        if (step.head<3>().norm() < 1e-4) {
            return LeastSquaresFix{{x(0), x(1), x(2)}, x(3), iter};
        }
    }
    return Error{Errc::no_convergence, "Gauss-Newton did not converge in 20 iterations"};
}

Result<std::vector<SimEpoch>> simulate_run(const TrajectoryConfig& traj,
                                           const std::vector<Satellite>& sats,
                                           const NoiseModel& noise) {
    if (sats.size() < 4) {
        return Error{Errc::too_few_satellites, "simulation needs at least 4 satellites"};
    }
    if (traj.duration_epochs < 1 || traj.epoch_dt_s <= 0.0 || traj.speed_kmh < 0.0) {
        return Error{Errc::range_violation, "invalid trajectory configuration"};
    }
    if (noise.pr_sigma_m < 0.0 || noise.clock_walk_m < 0.0) {
        return Error{Errc::range_violation, "noise sigmas must be nonnegative"};
    }
    if (noise.multipath &&
        (noise.multipath->burst_prob < 0.0 || noise.multipath->burst_prob > 1.0 ||
         noise.multipath->burst_len_epochs < 0)) {
        return Error{Errc::range_violation, "invalid multipath configuration"};
    }
    if (traj.kind == TrajectoryKind::waypoints && traj.waypoints.empty()) {
        return Error{Errc::range_violation, "waypoint trajectory needs waypoints"};
    }

    std::mt19937_64 rng(traj.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const TruthPath path(traj);
    std::vector<SimEpoch> run;
    run.reserve(static_cast<size_t>(traj.duration_epochs));

    double clock_m = noise.clock_offset0_m;
    int multipath_left = 0;
    size_t multipath_sat = 0;
    geodesy::EcefPoint ls_guess = geodesy::geodetic_to_ecef(traj.origin);

    for (int k = 0; k < traj.duration_epochs; ++k) {
        const double t = k * traj.epoch_dt_s;
        const TruthSample truth = path.at(t);
        const geodesy::EcefPoint truth_ecef = geodesy::geodetic_to_ecef(truth.pos);

        if (k > 0 && noise.clock_walk_m > 0.0) {
            clock_m += noise.clock_walk_m * gauss(rng);
        }
        if (noise.multipath && multipath_left == 0 && u01(rng) < noise.multipath->burst_prob) {
            multipath_sat = static_cast<size_t>(u01(rng) * static_cast<double>(sats.size()));
            multipath_sat = std::min(multipath_sat, sats.size() - 1);
            multipath_left = noise.multipath->burst_len_epochs;
        }

        SimEpoch out;
        out.epoch = k;
        out.truth = truth.pos;
        out.clock_offset_m = clock_m;
        out.pr.t_s = t;
        out.pr.entries.reserve(sats.size());
        for (size_t i = 0; i < sats.size(); ++i) {
            double pr = true_pseudorange(sats[i].pos, truth_ecef, clock_m);
            if (noise.pr_sigma_m > 0.0) {
                pr += noise.pr_sigma_m * gauss(rng);
            }
            if (noise.multipath && multipath_left > 0 && i == multipath_sat) {
                pr += noise.multipath->bias_m;
            }
            out.pr.entries.push_back(PseudorangeEpoch::Entry{sats[i].id, sats[i].pos, pr});
        }
        if (multipath_left > 0) {
            --multipath_left;
        }

        auto ls = least_squares_fix(out.pr, ls_guess);
        if (!ls) {
            return ls.error();
        }
        ls_guess = ls.value().position;
        const geodesy::GeodeticPoint fix_pos = geodesy::ecef_to_geodetic(ls.value().position);

        out.fix.valid = true;
        out.fix.lat_deg = fix_pos.lat_deg;
        out.fix.lon_deg = fix_pos.lon_deg;
        out.fix.speed_knots = truth.speed_kmh * kKmhToKnots;
        out.fix.course_deg = truth.course_deg;
        stamp_time(traj, t, out.fix);

        auto sentence = nmea::serialize_gprmc(out.fix);
        if (!sentence) {
            return sentence.error();
        }
        out.gprmc = std::move(sentence).take();
        out.status = synthesize_status(truth, t);
        run.push_back(std::move(out));
    }
    return run;
}

Result<size_t> write_messages(std::ostream& out, const std::vector<SimEpoch>& run,
                              const std::string& vehicle_id) {
    size_t count = 0;
    for (const auto& epoch : run) {
        auto message =
            telemetry::encode_record(telemetry::TelemetryRecord{vehicle_id, epoch.fix, epoch.status});
        if (!message) {
            return message.error();
        }
        out << message.value() << '\n';
        ++count;
    }
    return count;
}

void write_truth_csv(std::ostream& out, const std::vector<SimEpoch>& run) {
    out << "epoch,lat,lon,alt\n";
    for (const auto& e : run) {
        out << e.epoch << ',' << detail::fmt_fixed(e.truth.lat_deg, 7) << ','
            << detail::fmt_fixed(e.truth.lon_deg, 7) << ',' << detail::fmt_fixed(e.truth.alt_m, 3)
            << '\n';
    }
}

void write_pseudorange_csv(std::ostream& out, const std::vector<SimEpoch>& run) {
    out << "epoch,sat_id,sx,sy,sz,pr_m\n";
    for (const auto& e : run) {
        for (const auto& entry : e.pr.entries) {
            out << e.epoch << ',' << entry.sat_id << ',' << detail::fmt_fixed(entry.sat_pos.x_m, 3)
                << ',' << detail::fmt_fixed(entry.sat_pos.y_m, 3) << ','
                << detail::fmt_fixed(entry.sat_pos.z_m, 3) << ',' << detail::fmt_fixed(entry.pr_m, 3)
                << '\n';
        }
    }
}

Result<std::vector<PseudorangeEpoch>> read_pseudorange_csv(std::istream& in) {
    std::vector<PseudorangeEpoch> epochs;
    std::string line;
    long current_epoch = -1;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto stripped = detail::strip_crlf(line);
        if (stripped.empty() || (line_no == 1 && stripped.starts_with("epoch"))) {
            continue;
        }
        const auto fields = detail::split(stripped, ',');
        if (fields.size() != 6) {
            return Error{Errc::malformed_layout, "pseudorange CSV rows need 6 columns"};
        }
        const auto epoch = detail::parse_long(fields[0]);
        const auto sat_id = detail::parse_long(fields[1]);
        const auto sx = detail::parse_double(fields[2]);
        const auto sy = detail::parse_double(fields[3]);
        const auto sz = detail::parse_double(fields[4]);
        const auto pr = detail::parse_double(fields[5]);
        if (!epoch || !sat_id || !sx || !sy || !sz || !pr) {
            return Error{Errc::malformed_layout, "non-numeric pseudorange CSV field"};
        }
        if (*epoch != current_epoch) {
            epochs.push_back(PseudorangeEpoch{static_cast<double>(*epoch), {}});
            current_epoch = *epoch;
        }
        epochs.back().entries.push_back(PseudorangeEpoch::Entry{
            static_cast<int>(*sat_id), geodesy::EcefPoint{*sx, *sy, *sz}, *pr});
    }
    return epochs;
}

}  // namespace vtrack::sim
