#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vtrack/geodesy.hpp"
#include "vtrack/gnss_sim.hpp"
#include "vtrack/nmea.hpp"
#include "vtrack/result.hpp"
#include "vtrack/track.hpp"

namespace vtrack::kalman {

/// Filter state [Gx Gy Gz bu]: ECEF receiver coordinates plus the receiver
/// clock offset in meters, with its 4x4 covariance.
struct EcefState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    Eigen::Matrix4d p = Eigen::Matrix4d::Zero();

    geodesy::EcefPoint position() const { return {x(0), x(1), x(2)}; }
    double clock_offset_m() const { return x(3); }
};

struct FilterConfig {
    // Identity transition: per-epoch random walk, 2 m/sqrt(epoch) on each
    // position axis and 5 m/sqrt(epoch) on the clock.
    Eigen::Matrix4d process_noise =
        Eigen::Vector4d(4.0, 4.0, 4.0, 25.0).asDiagonal();
    double r_per_sat_m2 = 100.0;  // (10 m)^2 pseudorange variance
    std::optional<Eigen::Vector4d> x0;  // unset: first-epoch least squares
    Eigen::Matrix4d p0 =
        Eigen::Vector4d(1e4, 1e4, 1e4, 1e6).asDiagonal();
};

/// 2-state local east/north random-walk filter state, for station-side data
/// that carries coordinates only.
struct PositionState {
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Matrix2d p = Eigen::Matrix2d::Zero();
};

/// Time update: x unchanged (identity transition), P grows by Q.
EcefState predict(const EcefState& state, const FilterConfig& cfg);

/// One linearized pseudorange measurement row: negative unit line of sight
/// from the estimate to the satellite, then 1 for the clock state.
Result<Eigen::RowVector4d> measurement_row(const geodesy::EcefPoint& sat,
                                           const geodesy::EcefPoint& est_pos);

struct UpdateResult {
    EcefState state;
    Eigen::VectorXd innovations;  // z - h(x_predicted), one per satellite
};

/// Measurement update against one epoch of pseudoranges. H is re-linearized at
/// the predicted state and the predicted measurement is the nonlinear
/// pseudorange evaluated there.
Result<UpdateResult> update(const EcefState& state, const sim::PseudorangeEpoch& epoch,
                            const FilterConfig& cfg);

struct PseudorangeFilterRun {
    Track track;                      // one filtered geodetic point per epoch
    std::vector<double> clock_m;      // estimated b_u per epoch
    std::vector<bool> predicted_only; // true where < 4 satellites were usable
};

/// Predict/update over a pseudorange stream. When cfg.x0 is unset the state
/// is initialized from a least-squares solution of the first epoch (which is
/// also that epoch's output). Epochs with fewer than 4 satellites get a
/// predict-only state so the output stays one point per input.
Result<PseudorangeFilterRun> run_pseudorange_filter(const std::vector<sim::PseudorangeEpoch>& epochs,
                                                    const FilterConfig& cfg);

/// Streaming position-domain filter over GPRMC fixes, in local east/north
/// meters about a reference point. Re-anchors the reference if the vehicle
/// drifts far enough for the tangent-plane approximation to degrade.
class PositionFilter {
public:
    PositionFilter(double q_pos_m, double r_pos_m, const geodesy::GeodeticPoint& ref);

    geodesy::GeodeticPoint step(const nmea::GprmcFix& fix);

    const PositionState& state() const { return state_; }
    const geodesy::GeodeticPoint& reference() const { return ref_; }

private:
    double q_var_m2_;
    double r_var_m2_;
    geodesy::GeodeticPoint ref_;
    PositionState state_;
    bool initialized_ = false;
};

/// Batch wrapper over PositionFilter; one output point per input fix.
Result<Track> run_position_filter(const std::vector<nmea::GprmcFix>& fixes, double q_pos_m,
                                  double r_pos_m, const geodesy::GeodeticPoint& ref);

}  // namespace vtrack::kalman
