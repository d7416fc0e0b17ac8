#include <doctest.h>

#include <cmath>
#include <random>

#include "vtrack/accuracy.hpp"
#include "vtrack/geodesy.hpp"

using namespace vtrack;
using geodesy::GeodeticPoint;

namespace {

const GeodeticPoint kBase{31.95, 35.91, 0.0};

Track offsets_to_track(const std::vector<std::pair<double, double>>& offsets,
                       const GeodeticPoint& base = kBase) {
    Track track;
    double t = 0.0;
    for (const auto& [east, north] : offsets) {
        track.push_back(TrackPoint{t, geodesy::offset_geodetic(base, east, north)});
        t += 1.0;
    }
    return track;
}

}  // namespace

TEST_SUITE("accuracy") {

TEST_CASE("two_drms matches hand-computed values") {
    // 2 sqrt(13.6^2 + 16.5^2) = 42.765 and 2 sqrt(5.3^2 + 4.3^2) = 13.650.
    CHECK(accuracy::two_drms(13.6, 16.5) == doctest::Approx(42.77).epsilon(0.0012));
    CHECK(accuracy::two_drms(5.3, 4.3) == doctest::Approx(13.65).epsilon(0.0037));
    CHECK(accuracy::two_drms(0.0, 0.0) == 0.0);
}

TEST_CASE("two_drms is scale equivariant") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> sigma(0.0, 50.0), scale(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double se = sigma(rng), sn = sigma(rng), k = scale(rng);
        CHECK(accuracy::two_drms(k * se, k * sn) ==
              doctest::Approx(k * accuracy::two_drms(se, sn)).epsilon(1e-12));
    }
}

TEST_CASE("identical points have zero sigma") {
    const Track track = offsets_to_track({{5.0, 5.0}, {5.0, 5.0}, {5.0, 5.0}});
    const auto sigmas = accuracy::axis_sigmas(track).value();
    CHECK(sigmas.first == doctest::Approx(0.0).scale(1.0));
    CHECK(sigmas.second == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("two points one meter either side of the mean give sigma sqrt(2)") {
    const Track track = offsets_to_track({{0.0, 1.0}, {0.0, -1.0}});
    const auto sigmas = accuracy::axis_sigmas(track).value();
    CHECK(sigmas.second == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(sigmas.first == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("sigmas recover injected noise within 5 percent") {
    std::mt19937_64 rng(20240517);
    std::normal_distribution<double> east(0.0, 12.0), north(0.0, 7.0);
    std::vector<std::pair<double, double>> offsets;
    offsets.reserve(2000);
    for (int i = 0; i < 2000; ++i) {
        offsets.emplace_back(east(rng), north(rng));
    }
    const Track track = offsets_to_track(offsets);
    const auto sigmas = accuracy::axis_sigmas(track).value();
    CHECK(sigmas.first == doctest::Approx(12.0).epsilon(0.05));
    CHECK(sigmas.second == doctest::Approx(7.0).epsilon(0.05));
}

TEST_CASE("truth-referenced sigmas keep the bias, mean-referenced sigmas do not") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 2.0);
    std::vector<std::pair<double, double>> offsets;
    Track truth;
    for (int i = 0; i < 1000; ++i) {
        offsets.emplace_back(20.0 + noise(rng), noise(rng));  // 20 m east bias
        truth.push_back(TrackPoint{static_cast<double>(i), kBase});
    }
    const Track track = offsets_to_track(offsets);
    const auto mean_ref = accuracy::axis_sigmas(track).value();
    const auto truth_ref = accuracy::axis_sigmas(track, &truth).value();
    CHECK(mean_ref.first == doctest::Approx(2.0).epsilon(0.1));
    CHECK(truth_ref.first == doctest::Approx(std::sqrt(20.0 * 20.0 + 4.0)).epsilon(0.05));
}

TEST_CASE("axis_sigmas is translation invariant under a rigid shift") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 10.0);
    std::vector<std::pair<double, double>> offsets;
    for (int i = 0; i < 500; ++i) {
        offsets.emplace_back(noise(rng), noise(rng));
    }
    const Track track = offsets_to_track(offsets, kBase);
    const GeodeticPoint shifted_base{kBase.lat_deg + 0.01, kBase.lon_deg - 0.01, 0.0};
    const Track shifted = offsets_to_track(offsets, shifted_base);
    const auto a = accuracy::axis_sigmas(track).value();
    const auto b = accuracy::axis_sigmas(shifted).value();
    CHECK(a.first == doctest::Approx(b.first).epsilon(1e-4));
    CHECK(a.second == doctest::Approx(b.second).epsilon(1e-4));
}

TEST_CASE("report invariant: two_drms = 2 sqrt(se^2 + sn^2)") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 15.0);
    std::vector<std::pair<double, double>> offsets;
    for (int i = 0; i < 300; ++i) {
        offsets.emplace_back(noise(rng), noise(rng));
    }
    const auto report = accuracy::make_report(offsets_to_track(offsets)).value();
    const double expected = 2.0 * std::sqrt(report.sigma_east_m * report.sigma_east_m +
                                            report.sigma_north_m * report.sigma_north_m);
    CHECK(report.two_drms_m == doctest::Approx(expected).epsilon(1e-12));
    CHECK(report.n_points == 300);
}

TEST_CASE("compare: identical tracks give ratio 1") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> noise(0.0, 5.0);
    std::vector<std::pair<double, double>> offsets;
    for (int i = 0; i < 100; ++i) {
        offsets.emplace_back(noise(rng), noise(rng));
    }
    const Track track = offsets_to_track(offsets);
    const auto comparison = accuracy::compare(track, track).value();
    CHECK(comparison.improvement_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compare: the classic sigma pairs give a ratio near 3.13") {
    // 42.765 / 13.650 = 3.133, via tracks constructed to have those sigmas.
    const auto ratio = accuracy::two_drms(13.6, 16.5) / accuracy::two_drms(5.3, 4.3);
    CHECK(ratio == doctest::Approx(3.13).epsilon(0.002));
}

TEST_CASE("typed errors") {
    const Track one = offsets_to_track({{0.0, 0.0}});
    CHECK(accuracy::axis_sigmas(one).code() == Errc::too_few_points);
    const Track a = offsets_to_track({{0.0, 0.0}, {1.0, 1.0}});
    Track truth = a;
    truth.pop_back();
    CHECK(accuracy::axis_sigmas(a, &truth).code() == Errc::length_mismatch);
    const Track b = offsets_to_track({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}});
    CHECK(accuracy::compare(a, b).code() == Errc::length_mismatch);
}

TEST_CASE("report serialization") {
    accuracy::AccuracyReport report;
    report.sigma_east_m = 13.6;
    report.sigma_north_m = 16.5;
    report.two_drms_m = accuracy::two_drms(13.6, 16.5);
    report.n_points = 2000;
    report.reference = accuracy::Reference::mean;
    CHECK(accuracy::to_csv_row(report) == "13.600,16.500,42.765,2000,mean");
    CHECK(accuracy::to_string(report).find("2DRMS = 42.76 m") != std::string::npos);
}

}  // TEST_SUITE
