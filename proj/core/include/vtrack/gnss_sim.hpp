#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vtrack/geodesy.hpp"
#include "vtrack/nmea.hpp"
#include "vtrack/result.hpp"
#include "vtrack/telemetry.hpp"

namespace vtrack::sim {

// GPS MEO shell radius from the Earth's center.
inline constexpr double kOrbitRadiusM = 26560e3;

struct Satellite {
    int id = 0;
    geodesy::EcefPoint pos;  // held static per run
};

/// One epoch of pseudorange measurements.
struct PseudorangeEpoch {
    double t_s = 0.0;
    struct Entry {
        int sat_id = 0;
        geodesy::EcefPoint sat_pos;
        double pr_m = 0.0;
    };
    std::vector<Entry> entries;
};

struct MultipathModel {
    double bias_m = 0.0;       // added to one satellite while a burst is active
    int burst_len_epochs = 0;  // burst duration
    double burst_prob = 0.0;   // per-epoch probability of starting a burst
};

struct NoiseModel {
    double pr_sigma_m = 0.0;       // Gaussian pseudorange noise std
    double clock_offset0_m = 0.0;  // initial receiver clock offset b_u, meters
    double clock_walk_m = 0.0;     // per-epoch random-walk std of b_u
    std::optional<MultipathModel> multipath;
};

enum class TrajectoryKind { stationary, line, circle, waypoints };

struct TrajectoryConfig {
    TrajectoryKind kind = TrajectoryKind::stationary;
    geodesy::GeodeticPoint origin{31.95, 35.91, 800.0};
    double speed_kmh = 0.0;
    double heading_deg = 90.0;    // line mode: course over ground
    double circle_radius_m = 250.0;
    std::vector<geodesy::GeodeticPoint> waypoints;
    int duration_epochs = 1;
    double epoch_dt_s = 1.0;
    uint64_t rng_seed = 1;
    // UTC epoch-0 instant stamped into the emitted sentences.
    int start_year = 2024, start_month = 5, start_day = 14;
    int start_hour = 9, start_minute = 30;
    double start_second = 0.0;
};

struct Constellation {
    std::vector<Satellite> satellites;
    double gdop = 0.0;  // recomputed from the final geometry at the origin
};

/// One simulated epoch: ground truth, noisy measurements, and what the
/// in-vehicle unit would emit.
struct SimEpoch {
    int epoch = 0;
    geodesy::GeodeticPoint truth;
    double clock_offset_m = 0.0;  // true b_u at this epoch
    PseudorangeEpoch pr;
    nmea::GprmcFix fix;     // single-epoch least-squares solution of pr
    std::string gprmc;      // fix, serialized
    telemetry::EngineStatus status;
};

/// Place n satellites on the MEO shell, all at >= min_elevation_deg above the
/// origin's horizon, retrying until the geometry gives GDOP below max_gdop.
Result<Constellation> build_constellation(int n, uint64_t seed,
                                          const geodesy::GeodeticPoint& origin,
                                          double min_elevation_deg = 15.0,
                                          double max_gdop = 10.0);

/// The pseudorange observable: Euclidean range plus the receiver clock term.
double true_pseudorange(const geodesy::EcefPoint& sat, const geodesy::EcefPoint& receiver,
                        double clock_offset_m);

struct LeastSquaresFix {
    geodesy::EcefPoint position;
    double clock_offset_m = 0.0;
    int iterations = 0;
};

/// Single-epoch Gauss-Newton solution of the pseudorange equations. Converged
/// when the position step drops below 1e-4 m; at most 20 iterations.
Result<LeastSquaresFix> least_squares_fix(const PseudorangeEpoch& epoch,
                                          const geodesy::EcefPoint& guess);

/// Run the full simulation: truth trajectory, clock random walk, noisy
/// pseudoranges, least-squares NMEA emission and synthesized engine status.
/// Identical configs and seeds produce bit-identical output.
Result<std::vector<SimEpoch>> simulate_run(const TrajectoryConfig& traj,
                                           const std::vector<Satellite>& sats,
                                           const NoiseModel& noise);

/// Stream writers for the run. Column orders are fixed.
Result<size_t> write_messages(std::ostream& out, const std::vector<SimEpoch>& run,
                              const std::string& vehicle_id);
void write_truth_csv(std::ostream& out, const std::vector<SimEpoch>& run);
void write_pseudorange_csv(std::ostream& out, const std::vector<SimEpoch>& run);

/// Reader for the pseudorange CSV written above (epoch,sat_id,sx,sy,sz,pr_m).
Result<std::vector<PseudorangeEpoch>> read_pseudorange_csv(std::istream& in);

}  // namespace vtrack::sim
