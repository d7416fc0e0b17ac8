#pragma once

#include <string>

#include "vtrack/result.hpp"
#include "vtrack/track.hpp"

namespace vtrack::accuracy {

enum class Reference { mean, truth };

struct AccuracyReport {
    double sigma_east_m = 0.0;
    double sigma_north_m = 0.0;
    double two_drms_m = 0.0;
    size_t n_points = 0;
    Reference reference = Reference::mean;
};

/// Per-axis deviation statistics in local meters. Mean-referenced: sample
/// standard deviation (n-1) about the track centroid, which is what a run
/// without ground truth can report. Truth-referenced: root mean square (n-1)
/// of the per-epoch offsets from the aligned truth track, bias included.
Result<std::pair<double, double>> axis_sigmas(const Track& track, const Track* truth = nullptr);

/// 2DRMS = 2 sqrt(sigma_east^2 + sigma_north^2).
double two_drms(double sigma_east_m, double sigma_north_m);

Result<AccuracyReport> make_report(const Track& track, const Track* truth = nullptr);

struct Comparison {
    AccuracyReport raw;
    AccuracyReport filtered;
    double improvement_ratio = 0.0;  // raw.two_drms / filtered.two_drms
};

Result<Comparison> compare(const Track& raw, const Track& filtered, const Track* truth = nullptr);

std::string csv_header();
std::string to_csv_row(const AccuracyReport& report);
std::string to_string(const AccuracyReport& report);

}  // namespace vtrack::accuracy
