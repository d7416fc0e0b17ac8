#include "vtrack/kalman.hpp"

#include <cmath>

namespace vtrack::kalman {

namespace {

Eigen::Matrix4d symmetrized(const Eigen::Matrix4d& m) {
    return 0.5 * (m + m.transpose());
}

double range_to(const geodesy::EcefPoint& sat, const Eigen::Vector4d& x) {
    const double dx = sat.x_m - x(0);
    const double dy = sat.y_m - x(1);
    const double dz = sat.z_m - x(2);
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Vehicle displacement per step beyond which the local tangent plane at the
// original reference is no longer trustworthy.
constexpr double kReanchorDistanceM = 50e3;

}  // namespace

EcefState predict(const EcefState& state, const FilterConfig& cfg) {
    EcefState out;
    out.x = state.x;
    out.p = symmetrized(state.p + cfg.process_noise);
    return out;
}

Result<Eigen::RowVector4d> measurement_row(const geodesy::EcefPoint& sat,
                                           const geodesy::EcefPoint& est_pos) {
    const double dx = sat.x_m - est_pos.x_m;
    const double dy = sat.y_m - est_pos.y_m;
    const double dz = sat.z_m - est_pos.z_m;
    const double range = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (range <= 1.0) {
        return Error{Errc::degenerate_range, "satellite range below 1 m"};
    }
    Eigen::RowVector4d row;
    row << -dx / range, -dy / range, -dz / range, 1.0;
    return row;
}

Result<UpdateResult> update(const EcefState& state, const sim::PseudorangeEpoch& epoch,
                            const FilterConfig& cfg) {
    const geodesy::EcefPoint est = state.position();

    std::vector<Eigen::RowVector4d> rows;
    std::vector<double> innovations;
    rows.reserve(epoch.entries.size());
    innovations.reserve(epoch.entries.size());
    for (const auto& entry : epoch.entries) {
        auto row = measurement_row(entry.sat_pos, est);
        if (!row) {
            continue;  // drop degenerate entries, keep the rest of the epoch
        }
        rows.push_back(row.value());
        const double predicted = range_to(entry.sat_pos, state.x) + state.x(3);
        innovations.push_back(entry.pr_m - predicted);
    }
    if (rows.empty()) {
        return Error{Errc::degenerate_range, "no usable satellite in epoch"};
    }

    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd h(m, 4);
    Eigen::VectorXd nu(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        h.row(i) = rows[static_cast<size_t>(i)];
        nu(i) = innovations[static_cast<size_t>(i)];
    }

    const Eigen::MatrixXd s =
        h * state.p * h.transpose() + cfg.r_per_sat_m2 * Eigen::MatrixXd::Identity(m, m);
    // Full-pivot LU flags the exactly singular case (degenerate geometry with
    // zero R), which a Cholesky factorization can slide through.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
    if (!lu.isInvertible()) {
        return Error{Errc::singular_innovation_covariance,
                     "innovation covariance not positive definite"};
    }
    // K = P H^T S^-1, via S K^T = H P.
    const Eigen::MatrixXd gain = lu.solve(h * state.p).transpose();

    UpdateResult out;
    out.state.x = state.x + gain * nu;
    out.state.p = symmetrized((Eigen::Matrix4d::Identity() - gain * h) * state.p);
    out.innovations = nu;
    return out;
}

Result<PseudorangeFilterRun> run_pseudorange_filter(const std::vector<sim::PseudorangeEpoch>& epochs,
                                                    const FilterConfig& cfg) {
    if (epochs.empty()) {
        return Error{Errc::initialization_failed, "no epochs to filter"};
    }

    PseudorangeFilterRun run;
    run.track.reserve(epochs.size());
    run.clock_m.reserve(epochs.size());
    run.predicted_only.reserve(epochs.size());

    EcefState state;
    size_t start = 0;
    if (cfg.x0.has_value()) {
        state.x = *cfg.x0;
        state.p = cfg.p0;
    } else {
        if (epochs.front().entries.size() < 4) {
            return Error{Errc::initialization_failed,
                         "first epoch has fewer than 4 satellites and no x0 was given"};
        }
        auto ls = least_squares_fix(epochs.front(), geodesy::EcefPoint{0.0, 0.0, 0.0});
        if (!ls) {
            return Error{Errc::initialization_failed,
                         "least-squares initialization failed: " + ls.error().message};
        }
        state.x << ls.value().position.x_m, ls.value().position.y_m, ls.value().position.z_m,
            ls.value().clock_offset_m;
        state.p = cfg.p0;
        run.track.push_back(TrackPoint{epochs.front().t_s, geodesy::ecef_to_geodetic(state.position())});
        run.clock_m.push_back(state.x(3));
        run.predicted_only.push_back(false);
        start = 1;
    }

    for (size_t k = start; k < epochs.size(); ++k) {
        state = predict(state, cfg);
        bool updated = false;
        if (epochs[k].entries.size() >= 4) {
            auto res = update(state, epochs[k], cfg);
            if (res) {
                state = res.value().state;
                updated = true;
            }
        }
        run.track.push_back(TrackPoint{epochs[k].t_s, geodesy::ecef_to_geodetic(state.position())});
        run.clock_m.push_back(state.x(3));
        run.predicted_only.push_back(!updated);
    }
    return run;
}

PositionFilter::PositionFilter(double q_pos_m, double r_pos_m, const geodesy::GeodeticPoint& ref)
    : q_var_m2_(q_pos_m * q_pos_m), r_var_m2_(r_pos_m * r_pos_m), ref_(ref) {}

geodesy::GeodeticPoint PositionFilter::step(const nmea::GprmcFix& fix) {
    const geodesy::GeodeticPoint measured{fix.lat_deg, fix.lon_deg, 0.0};
    auto offset = geodesy::enu_offset_m(ref_, measured);
    if (!offset || std::hypot(offset.value().east_m, offset.value().north_m) > kReanchorDistanceM) {
        // Re-anchor at the current estimate and carry the state across.
        const geodesy::GeodeticPoint current =
            initialized_ ? geodesy::offset_geodetic(ref_, state_.x(0), state_.x(1)) : measured;
        ref_ = current;
        state_.x.setZero();
        offset = geodesy::enu_offset_m(ref_, measured);
        if (!offset) {
            // Still too far: a discontinuous jump. Restart on the new fix.
            ref_ = measured;
            state_.x.setZero();
            state_.p = q_var_m2_ * Eigen::Matrix2d::Identity();
            initialized_ = true;
            return measured;
        }
    }
    const Eigen::Vector2d z(offset.value().east_m, offset.value().north_m);

    if (!initialized_) {
        // Start on the first fix with process-noise-sized uncertainty; the
        // gain then ramps up toward steady state instead of jumping around.
        state_.x = z;
        state_.p = q_var_m2_ * Eigen::Matrix2d::Identity();
        initialized_ = true;
    } else {
        Eigen::Matrix2d p_pred = state_.p + q_var_m2_ * Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d s = p_pred + r_var_m2_ * Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d gain = p_pred * s.inverse();
        state_.x = state_.x + gain * (z - state_.x);
        state_.p = 0.5 * ((Eigen::Matrix2d::Identity() - gain) * p_pred +
                          ((Eigen::Matrix2d::Identity() - gain) * p_pred).transpose());
    }
    return geodesy::offset_geodetic(ref_, state_.x(0), state_.x(1));
}

Result<Track> run_position_filter(const std::vector<nmea::GprmcFix>& fixes, double q_pos_m,
                                  double r_pos_m, const geodesy::GeodeticPoint& ref) {
    if (fixes.empty()) {
        return Error{Errc::too_few_points, "no fixes to filter"};
    }
    PositionFilter filter(q_pos_m, r_pos_m, ref);
    Track track;
    track.reserve(fixes.size());
    double t = 0.0;
    for (const auto& fix : fixes) {
        track.push_back(TrackPoint{t, filter.step(fix)});
        t += 1.0;
    }
    return track;
}

}  // namespace vtrack::kalman
