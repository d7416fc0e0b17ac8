#include "vtrack/accuracy.hpp"

#include <cmath>

#include "text_util.hpp"

namespace vtrack::accuracy {

namespace {

Result<std::vector<geodesy::EnuOffset>> deviations(const Track& track, const Track* truth) {
    if (track.size() < 2) {
        return Error{Errc::too_few_points, "need at least 2 points for a deviation statistic"};
    }
    std::vector<geodesy::EnuOffset> out;
    out.reserve(track.size());
    if (truth != nullptr) {
        if (truth->size() != track.size()) {
            return Error{Errc::length_mismatch, "track and truth must align epoch by epoch"};
        }
        for (size_t i = 0; i < track.size(); ++i) {
            auto off = geodesy::enu_offset_m((*truth)[i].pos, track[i].pos);
            if (!off) {
                return off.error();
            }
            out.push_back(off.value());
        }
    } else {
        geodesy::GeodeticPoint centroid{0.0, 0.0, 0.0};
        for (const auto& p : track) {
            centroid.lat_deg += p.pos.lat_deg;
            centroid.lon_deg += p.pos.lon_deg;
        }
        centroid.lat_deg /= static_cast<double>(track.size());
        centroid.lon_deg /= static_cast<double>(track.size());
        for (const auto& p : track) {
            auto off = geodesy::enu_offset_m(centroid, p.pos);
            if (!off) {
                return off.error();
            }
            out.push_back(off.value());
        }
    }
    return out;
}

}  // namespace

Result<std::pair<double, double>> axis_sigmas(const Track& track, const Track* truth) {
    auto devs = deviations(track, truth);
    if (!devs) {
        return devs.error();
    }
    const auto& d = devs.value();
    const double n = static_cast<double>(d.size());

    double mean_e = 0.0, mean_n = 0.0;
    if (truth == nullptr) {
        // Mean-referenced sigmas are scatter about the centroid; with a truth
        // reference the deviation is the error itself and stays uncentered.
        for (const auto& v : d) {
            mean_e += v.east_m;
            mean_n += v.north_m;
        }
        mean_e /= n;
        mean_n /= n;
    }
    double sse = 0.0, ssn = 0.0;
    for (const auto& v : d) {
        sse += (v.east_m - mean_e) * (v.east_m - mean_e);
        ssn += (v.north_m - mean_n) * (v.north_m - mean_n);
    }
    return std::pair<double, double>{std::sqrt(sse / (n - 1.0)), std::sqrt(ssn / (n - 1.0))};
}

double two_drms(double sigma_east_m, double sigma_north_m) {
    return 2.0 * std::sqrt(sigma_east_m * sigma_east_m + sigma_north_m * sigma_north_m);
}

Result<AccuracyReport> make_report(const Track& track, const Track* truth) {
    auto sigmas = axis_sigmas(track, truth);
    if (!sigmas) {
        return sigmas.error();
    }
    AccuracyReport report;
    report.sigma_east_m = sigmas.value().first;
    report.sigma_north_m = sigmas.value().second;
    report.two_drms_m = two_drms(report.sigma_east_m, report.sigma_north_m);
    report.n_points = track.size();
    report.reference = truth != nullptr ? Reference::truth : Reference::mean;
    return report;
}

Result<Comparison> compare(const Track& raw, const Track& filtered, const Track* truth) {
    if (raw.size() != filtered.size()) {
        return Error{Errc::length_mismatch, "raw and filtered tracks must have equal length"};
    }
    auto raw_report = make_report(raw, truth);
    if (!raw_report) {
        return raw_report.error();
    }
    auto filtered_report = make_report(filtered, truth);
    if (!filtered_report) {
        return filtered_report.error();
    }
    Comparison out;
    out.raw = raw_report.value();
    out.filtered = filtered_report.value();
    out.improvement_ratio =
        out.filtered.two_drms_m > 0.0 ? out.raw.two_drms_m / out.filtered.two_drms_m : 0.0;
    return out;
}

std::string csv_header() {
    return "sigma_east_m,sigma_north_m,two_drms_m,n_points,reference";
}

std::string to_csv_row(const AccuracyReport& r) {
    std::string row = detail::fmt_fixed(r.sigma_east_m, 3);
    row += ',';
    row += detail::fmt_fixed(r.sigma_north_m, 3);
    row += ',';
    row += detail::fmt_fixed(r.two_drms_m, 3);
    row += ',';
    row += std::to_string(r.n_points);
    row += ',';
    row += r.reference == Reference::mean ? "mean" : "truth";
    return row;
}

std::string to_string(const AccuracyReport& r) {
    std::string text = "sigma_east = ";
    text += detail::fmt_fixed(r.sigma_east_m, 2);
    text += " m, sigma_north = ";
    text += detail::fmt_fixed(r.sigma_north_m, 2);
    text += " m, 2DRMS = ";
    text += detail::fmt_fixed(r.two_drms_m, 2);
    text += " m (";
    text += std::to_string(r.n_points);
    text += " points, ";
    text += r.reference == Reference::mean ? "mean" : "truth";
    text += "-referenced)";
    return text;
}

}  // namespace vtrack::accuracy
