#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "vtrack/geodesy.hpp"
#include "vtrack/gnss_sim.hpp"

using namespace vtrack;
using geodesy::EcefPoint;
using geodesy::GeodeticPoint;
using sim::PseudorangeEpoch;

namespace {

const GeodeticPoint kOrigin{31.95, 35.91, 800.0};

double elevation_deg(const GeodeticPoint& origin, const EcefPoint& sat) {
    const EcefPoint rec = geodesy::geodetic_to_ecef(origin);
    const Eigen::Vector3d los =
        Eigen::Vector3d(sat.x_m - rec.x_m, sat.y_m - rec.y_m, sat.z_m - rec.z_m).normalized();
    const double lat = origin.lat_deg * M_PI / 180.0;
    const double lon = origin.lon_deg * M_PI / 180.0;
    const Eigen::Vector3d up(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                             std::sin(lat));
    return std::asin(up.dot(los)) * 180.0 / M_PI;
}

/// Independent GDOP recomputation: sqrt(trace((H^T H)^-1)).
double gdop_oracle(const std::vector<sim::Satellite>& sats, const GeodeticPoint& origin) {
    const EcefPoint rec = geodesy::geodetic_to_ecef(origin);
    Eigen::MatrixXd h(static_cast<Eigen::Index>(sats.size()), 4);
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const auto& s = sats[static_cast<size_t>(i)].pos;
        const Eigen::Vector3d u =
            Eigen::Vector3d(s.x_m - rec.x_m, s.y_m - rec.y_m, s.z_m - rec.z_m).normalized();
        h.row(i) << -u(0), -u(1), -u(2), 1.0;
    }
    return std::sqrt((h.transpose() * h).inverse().trace());
}

PseudorangeEpoch noiseless_epoch(const std::vector<sim::Satellite>& sats, const EcefPoint& rec,
                                 double clock_m) {
    PseudorangeEpoch epoch;
    epoch.t_s = 0.0;
    for (const auto& s : sats) {
        epoch.entries.push_back({s.id, s.pos, sim::true_pseudorange(s.pos, rec, clock_m)});
    }
    return epoch;
}

}  // namespace

TEST_SUITE("gnss_sim") {

TEST_CASE("build_constellation satisfies elevation, shell radius and GDOP") {
    auto result = sim::build_constellation(6, 42, kOrigin);
    REQUIRE(result.ok());
    const auto& constellation = result.value();
    CHECK(constellation.satellites.size() == 6);
    for (const auto& s : constellation.satellites) {
        const double r = std::sqrt(s.pos.x_m * s.pos.x_m + s.pos.y_m * s.pos.y_m +
                                   s.pos.z_m * s.pos.z_m);
        CHECK(r == doctest::Approx(sim::kOrbitRadiusM).epsilon(1e-9));
        CHECK(elevation_deg(kOrigin, s.pos) >= 15.0 - 1e-9);
        CHECK(r >= 2.0e7);
        CHECK(r <= 3.0e7);
    }
    CHECK(constellation.gdop < 10.0);
    CHECK(constellation.gdop == doctest::Approx(gdop_oracle(constellation.satellites, kOrigin))
                                    .epsilon(1e-9));
}

TEST_CASE("build_constellation with 4 satellites keeps all above the mask") {
    auto result = sim::build_constellation(4, 7, kOrigin);
    REQUIRE(result.ok());
    for (const auto& s : result.value().satellites) {
        CHECK(elevation_deg(kOrigin, s.pos) >= 15.0 - 1e-9);
    }
}

TEST_CASE("build_constellation rejects fewer than 4 satellites") {
    CHECK(sim::build_constellation(3, 1, kOrigin).code() == Errc::too_few_satellites);
}

TEST_CASE("true_pseudorange is range plus clock term") {
    CHECK(sim::true_pseudorange({1000.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 0.0) == doctest::Approx(1000.0));
    CHECK(sim::true_pseudorange({1000.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 5.0) == doctest::Approx(1005.0));
}

TEST_CASE("true_pseudorange matches an independent norm computation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-3e7, 3e7);
    for (int i = 0; i < 200; ++i) {
        const EcefPoint a{coord(rng), coord(rng), coord(rng)};
        const EcefPoint b{coord(rng) / 4.0, coord(rng) / 4.0, coord(rng) / 4.0};
        long double sum = 0.0L;
        sum += static_cast<long double>(a.x_m - b.x_m) * (a.x_m - b.x_m);
        sum += static_cast<long double>(a.y_m - b.y_m) * (a.y_m - b.y_m);
        sum += static_cast<long double>(a.z_m - b.z_m) * (a.z_m - b.z_m);
        const double expected = static_cast<double>(sqrtl(sum));
        const double got = sim::true_pseudorange(a, b, 0.0);
        CHECK(std::fabs(got - expected) / expected < 1e-9);
    }
}

TEST_CASE("least_squares_fix recovers truth from 100 km off") {
    auto constellation = sim::build_constellation(6, 11, kOrigin).value();
    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    const double clock = 4321.0;
    const auto epoch = noiseless_epoch(constellation.satellites, truth, clock);

    const EcefPoint guess{truth.x_m + 70e3, truth.y_m - 50e3, truth.z_m + 40e3};
    auto fix = sim::least_squares_fix(epoch, guess);
    REQUIRE(fix.ok());
    CHECK(std::fabs(fix.value().position.x_m - truth.x_m) < 1e-3);
    CHECK(std::fabs(fix.value().position.y_m - truth.y_m) < 1e-3);
    CHECK(std::fabs(fix.value().position.z_m - truth.z_m) < 1e-3);
    CHECK(std::fabs(fix.value().clock_offset_m - clock) < 1e-3);
}

TEST_CASE("least_squares_fix precondition and degeneracy errors") {
    auto constellation = sim::build_constellation(4, 11, kOrigin).value();
    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    auto epoch = noiseless_epoch(constellation.satellites, truth, 0.0);

    PseudorangeEpoch three = epoch;
    three.entries.resize(3);
    CHECK(sim::least_squares_fix(three, truth).code() == Errc::too_few_satellites);

    PseudorangeEpoch degenerate = epoch;
    for (auto& e : degenerate.entries) {
        e.sat_pos = epoch.entries.front().sat_pos;  // rank-deficient geometry
        e.pr_m = epoch.entries.front().pr_m;
    }
    CHECK(sim::least_squares_fix(degenerate, truth).code() == Errc::singular_geometry);
}

TEST_CASE("clock-offset invariance: common shift moves only the clock estimate") {
    auto constellation = sim::build_constellation(6, 13, kOrigin).value();
    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    auto epoch = noiseless_epoch(constellation.satellites, truth, 100.0);
    auto base = sim::least_squares_fix(epoch, truth).value();

    const double shift = 2500.0;
    for (auto& e : epoch.entries) {
        e.pr_m += shift;
    }
    auto shifted = sim::least_squares_fix(epoch, truth).value();
    CHECK(std::fabs(shifted.clock_offset_m - base.clock_offset_m - shift) < 1e-3);
    CHECK(std::fabs(shifted.position.x_m - base.position.x_m) < 1e-3);
    CHECK(std::fabs(shifted.position.y_m - base.position.y_m) < 1e-3);
    CHECK(std::fabs(shifted.position.z_m - base.position.z_m) < 1e-3);
}

TEST_CASE("noiseless static run reproduces the origin in every sentence") {
    auto constellation = sim::build_constellation(6, 21, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.kind = sim::TrajectoryKind::stationary;
    traj.origin = kOrigin;
    traj.duration_epochs = 50;
    traj.rng_seed = 3;
    auto run = sim::simulate_run(traj, constellation.satellites, sim::NoiseModel{});
    REQUIRE(run.ok());
    REQUIRE(run.value().size() == 50);
    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    for (const auto& e : run.value()) {
        for (const auto& entry : e.pr.entries) {
            CHECK(entry.pr_m == sim::true_pseudorange(entry.sat_pos, truth, 0.0));
        }
        auto sentence = nmea::parse_sentence(e.gprmc);
        REQUIRE(sentence.ok());
        auto fix = nmea::parse_gprmc(sentence.value());
        REQUIRE(fix.ok());
        CHECK(std::fabs(fix.value().lat_deg - kOrigin.lat_deg) <= 1e-6);
        CHECK(std::fabs(fix.value().lon_deg - kOrigin.lon_deg) <= 1e-6);
    }
}

TEST_CASE("pseudorange noise sample std matches the injected sigma") {
    auto constellation = sim::build_constellation(6, 31, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.kind = sim::TrajectoryKind::stationary;
    traj.origin = kOrigin;
    traj.duration_epochs = 2000;
    traj.rng_seed = 8;
    sim::NoiseModel noise;
    noise.pr_sigma_m = 10.0;
    noise.clock_offset0_m = 12345.0;  // constant: walk is zero
    auto run = sim::simulate_run(traj, constellation.satellites, noise);
    REQUIRE(run.ok());

    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    for (size_t s = 0; s < constellation.satellites.size(); ++s) {
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& e : run.value()) {
            const auto& entry = e.pr.entries[s];
            const double residual =
                entry.pr_m - sim::true_pseudorange(entry.sat_pos, truth, 0.0) - 12345.0;
            sum += residual;
            sum_sq += residual * residual;
        }
        const double n = static_cast<double>(run.value().size());
        const double std_dev = std::sqrt((sum_sq - sum * sum / n) / (n - 1.0));
        CHECK(std_dev >= 9.3);
        CHECK(std_dev <= 10.7);
    }
}

TEST_CASE("constant clock offset shifts pseudoranges but not the fix") {
    auto constellation = sim::build_constellation(6, 17, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.kind = sim::TrajectoryKind::stationary;
    traj.origin = kOrigin;
    traj.duration_epochs = 10;
    sim::NoiseModel noise;
    noise.clock_offset0_m = 1e5;
    auto run = sim::simulate_run(traj, constellation.satellites, noise);
    REQUIRE(run.ok());
    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    for (const auto& e : run.value()) {
        for (const auto& entry : e.pr.entries) {
            const double no_clock = sim::true_pseudorange(entry.sat_pos, truth, 0.0);
            CHECK(entry.pr_m == doctest::Approx(no_clock + 1e5).epsilon(1e-12));
        }
        auto fix = nmea::parse_gprmc(nmea::parse_sentence(e.gprmc).value()).value();
        CHECK(std::fabs(fix.lat_deg - kOrigin.lat_deg) <= 1e-6);
        CHECK(std::fabs(fix.lon_deg - kOrigin.lon_deg) <= 1e-6);
    }
}

TEST_CASE("multipath bursts bias exactly one satellite for the burst length") {
    auto constellation = sim::build_constellation(6, 9, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.kind = sim::TrajectoryKind::stationary;
    traj.origin = kOrigin;
    traj.duration_epochs = 40;
    traj.rng_seed = 12;
    sim::NoiseModel noise;  // no Gaussian noise: residual is the bias alone
    noise.multipath = sim::MultipathModel{50.0, 4, 1.0};

    auto run = sim::simulate_run(traj, constellation.satellites, noise).value();
    const EcefPoint truth = geodesy::geodetic_to_ecef(kOrigin);
    for (const auto& e : run) {
        int biased = 0;
        for (const auto& entry : e.pr.entries) {
            const double residual = entry.pr_m - sim::true_pseudorange(entry.sat_pos, truth, 0.0);
            if (residual != 0.0) {
                CHECK(residual == doctest::Approx(50.0).epsilon(1e-12));
                ++biased;
            }
        }
        // burst_prob = 1 keeps a burst active at every epoch
        CHECK(biased == 1);
    }
}

TEST_CASE("identical seeds give bit-identical streams") {
    auto constellation = sim::build_constellation(5, 23, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.kind = sim::TrajectoryKind::line;
    traj.origin = kOrigin;
    traj.speed_kmh = 40.0;
    traj.duration_epochs = 100;
    traj.rng_seed = 77;
    sim::NoiseModel noise;
    noise.pr_sigma_m = 8.0;
    noise.clock_offset0_m = 300.0;
    noise.clock_walk_m = 0.5;
    noise.multipath = sim::MultipathModel{25.0, 5, 0.05};

    auto a = sim::simulate_run(traj, constellation.satellites, noise);
    auto b = sim::simulate_run(traj, constellation.satellites, noise);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    std::ostringstream sa, sb, pa, pb;
    sim::write_messages(sa, a.value(), "VEH-1");
    sim::write_messages(sb, b.value(), "VEH-1");
    sim::write_pseudorange_csv(pa, a.value());
    sim::write_pseudorange_csv(pb, b.value());
    CHECK(sa.str() == sb.str());
    CHECK(pa.str() == pb.str());
}

TEST_CASE("pseudorange CSV round-trips through the reader") {
    auto constellation = sim::build_constellation(4, 3, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.origin = kOrigin;
    traj.duration_epochs = 5;
    auto run = sim::simulate_run(traj, constellation.satellites, sim::NoiseModel{}).value();

    std::ostringstream out;
    sim::write_pseudorange_csv(out, run);
    std::istringstream in(out.str());
    auto epochs = sim::read_pseudorange_csv(in);
    REQUIRE(epochs.ok());
    REQUIRE(epochs.value().size() == 5);
    for (size_t k = 0; k < 5; ++k) {
        REQUIRE(epochs.value()[k].entries.size() == 4);
        for (size_t s = 0; s < 4; ++s) {
            CHECK(epochs.value()[k].entries[s].sat_id == run[k].pr.entries[s].sat_id);
            CHECK(epochs.value()[k].entries[s].pr_m ==
                  doctest::Approx(run[k].pr.entries[s].pr_m).epsilon(1e-9));
        }
    }
}

TEST_CASE("truth CSV has the fixed column order") {
    auto constellation = sim::build_constellation(4, 3, kOrigin).value();
    sim::TrajectoryConfig traj;
    traj.origin = kOrigin;
    traj.duration_epochs = 3;
    auto run = sim::simulate_run(traj, constellation.satellites, sim::NoiseModel{}).value();
    std::ostringstream out;
    sim::write_truth_csv(out, run);
    CHECK(out.str().rfind("epoch,lat,lon,alt\n", 0) == 0);
}

}  // TEST_SUITE
