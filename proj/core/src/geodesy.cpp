#include "vtrack/geodesy.hpp"

#include <cmath>

namespace vtrack::geodesy {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;
}  // namespace

double meridian_radius_m(double lat_deg) {
    const double s = std::sin(lat_deg * kDegToRad);
    const double w2 = 1.0 - kWgs84E2 * s * s;
    return kWgs84A * (1.0 - kWgs84E2) / (w2 * std::sqrt(w2));
}

double prime_vertical_radius_m(double lat_deg) {
    const double s = std::sin(lat_deg * kDegToRad);
    return kWgs84A / std::sqrt(1.0 - kWgs84E2 * s * s);
}

EcefPoint geodetic_to_ecef(const GeodeticPoint& p) {
    const double lat = p.lat_deg * kDegToRad;
    const double lon = p.lon_deg * kDegToRad;
    const double sin_lat = std::sin(lat);
    const double cos_lat = std::cos(lat);
    const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sin_lat * sin_lat);
    return EcefPoint{
        (n + p.alt_m) * cos_lat * std::cos(lon),
        (n + p.alt_m) * cos_lat * std::sin(lon),
        (n * (1.0 - kWgs84E2) + p.alt_m) * sin_lat,
    };
}

GeodeticPoint ecef_to_geodetic(const EcefPoint& p, bool* on_polar_axis) {
    if (on_polar_axis != nullptr) {
        *on_polar_axis = false;
    }
    const double rho = std::hypot(p.x_m, p.y_m);

    if (rho < 1.0) {
        // On (or within 1 m of) the polar axis the longitude is undefined.
        if (on_polar_axis != nullptr) {
            *on_polar_axis = true;
        }
        const double lat = p.z_m >= 0.0 ? 90.0 : -90.0;
        return GeodeticPoint{lat, 0.0, std::fabs(p.z_m) - kWgs84B};
    }

    const double lon = std::atan2(p.y_m, p.x_m);
    double lat = std::atan2(p.z_m, rho * (1.0 - kWgs84E2));
    double alt = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double s = std::sin(lat);
        const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * s * s);
        alt = rho / std::cos(lat) - n;
        const double next = std::atan2(p.z_m, rho * (1.0 - kWgs84E2 * n / (n + alt)));
        if (std::fabs(next - lat) < 1e-14) {
            lat = next;
            break;
        }
        lat = next;
    }
    const double s = std::sin(lat);
    const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * s * s);
    alt = rho / std::cos(lat) - n;
    return GeodeticPoint{lat * kRadToDeg, lon * kRadToDeg, alt};
}

Result<EnuOffset> enu_offset_m(const GeodeticPoint& ref, const GeodeticPoint& p) {
    const double dlat = p.lat_deg - ref.lat_deg;
    double dlon = p.lon_deg - ref.lon_deg;
    // Keep longitude deltas on the short way around the date line.
    if (dlon > 180.0) {
        dlon -= 360.0;
    } else if (dlon < -180.0) {
        dlon += 360.0;
    }
    if (std::fabs(dlat) >= 1.0 || std::fabs(dlon) >= 1.0) {
        return Error{Errc::too_far_apart, "points separated by >= 1 deg"};
    }
    const double east =
        dlon * kDegToRad * prime_vertical_radius_m(ref.lat_deg) * std::cos(ref.lat_deg * kDegToRad);
    const double north = dlat * kDegToRad * meridian_radius_m(ref.lat_deg);
    return EnuOffset{east, north};
}

GeodeticPoint offset_geodetic(const GeodeticPoint& ref, double east_m, double north_m) {
    const double dlat = north_m / meridian_radius_m(ref.lat_deg) * kRadToDeg;
    const double dlon = east_m /
                        (prime_vertical_radius_m(ref.lat_deg) * std::cos(ref.lat_deg * kDegToRad)) *
                        kRadToDeg;
    return GeodeticPoint{ref.lat_deg + dlat, ref.lon_deg + dlon, ref.alt_m};
}

}  // namespace vtrack::geodesy
