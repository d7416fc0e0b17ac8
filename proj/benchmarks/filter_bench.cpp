#include <benchmark/benchmark.h>

#include <random>

#include "vtrack/geodesy.hpp"
#include "vtrack/gnss_sim.hpp"
#include "vtrack/kalman.hpp"

using namespace vtrack;

namespace {

const geodesy::GeodeticPoint kOrigin{31.95, 35.91, 800.0};

sim::PseudorangeEpoch make_epoch(const std::vector<sim::Satellite>& sats) {
    const geodesy::EcefPoint rec = geodesy::geodetic_to_ecef(kOrigin);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 10.0);
    sim::PseudorangeEpoch epoch;
    for (const auto& s : sats) {
        epoch.entries.push_back(
            {s.id, s.pos, sim::true_pseudorange(s.pos, rec, 850.0) + noise(rng)});
    }
    return epoch;
}

}  // namespace

static void BM_GeodeticRoundTrip(benchmark::State& state) {
    const geodesy::GeodeticPoint p{48.1173, 11.5166667, 500.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(geodesy::ecef_to_geodetic(geodesy::geodetic_to_ecef(p)));
    }
}
BENCHMARK(BM_GeodeticRoundTrip);

static void BM_LeastSquaresFix(benchmark::State& state) {
    const auto sats =
        sim::build_constellation(static_cast<int>(state.range(0)), 42, kOrigin).value().satellites;
    const auto epoch = make_epoch(sats);
    const geodesy::EcefPoint guess = geodesy::geodetic_to_ecef(kOrigin);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::least_squares_fix(epoch, guess));
    }
}
BENCHMARK(BM_LeastSquaresFix)->Arg(4)->Arg(6)->Arg(10);

static void BM_KalmanPredictUpdate(benchmark::State& state) {
    const auto sats =
        sim::build_constellation(static_cast<int>(state.range(0)), 42, kOrigin).value().satellites;
    const auto epoch = make_epoch(sats);
    const geodesy::EcefPoint rec = geodesy::geodetic_to_ecef(kOrigin);
    kalman::FilterConfig cfg;
    kalman::EcefState filter_state;
    filter_state.x << rec.x_m, rec.y_m, rec.z_m, 850.0;
    filter_state.p = cfg.p0;
    for (auto _ : state) {
        auto predicted = kalman::predict(filter_state, cfg);
        benchmark::DoNotOptimize(kalman::update(predicted, epoch, cfg));
    }
}
BENCHMARK(BM_KalmanPredictUpdate)->Arg(4)->Arg(6)->Arg(10);

static void BM_SimulateRun(benchmark::State& state) {
    const auto sats = sim::build_constellation(6, 42, kOrigin).value().satellites;
    sim::TrajectoryConfig traj;
    traj.kind = sim::TrajectoryKind::line;
    traj.origin = kOrigin;
    traj.speed_kmh = 40.0;
    traj.duration_epochs = static_cast<int>(state.range(0));
    sim::NoiseModel noise;
    noise.pr_sigma_m = 11.4;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::simulate_run(traj, sats, noise));
    }
}
BENCHMARK(BM_SimulateRun)->Arg(100)->Arg(1000);
