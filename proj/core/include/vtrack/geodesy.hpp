#pragma once

#include "vtrack/result.hpp"

namespace vtrack::geodesy {

// WGS-84 ellipsoid, the datum broadcast by GPS.
inline constexpr double kWgs84A = 6378137.0;                  // semi-major axis, m
inline constexpr double kWgs84F = 1.0 / 298.257223563;        // flattening
inline constexpr double kWgs84B = kWgs84A * (1.0 - kWgs84F);  // semi-minor axis, m
inline constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F); // first eccentricity squared

struct GeodeticPoint {
    double lat_deg = 0.0;  // [-90, 90]
    double lon_deg = 0.0;  // [-180, 180]
    double alt_m = 0.0;    // above ellipsoid
};

struct EcefPoint {
    double x_m = 0.0;
    double y_m = 0.0;
    double z_m = 0.0;
};

struct EnuOffset {
    double east_m = 0.0;
    double north_m = 0.0;
};

/// Meridian radius of curvature M(lat).
double meridian_radius_m(double lat_deg);

/// Prime-vertical radius of curvature N(lat).
double prime_vertical_radius_m(double lat_deg);

/// Closed-form WGS-84 forward transform.
EcefPoint geodetic_to_ecef(const GeodeticPoint& p);

/// Iterative inverse transform; round-trips to <= 1e-9 deg / 1e-4 m over the
/// vehicle envelope. Within 1 m of the polar axis the longitude is undefined:
/// lon is reported as 0 and *on_polar_axis (when given) is set.
GeodeticPoint ecef_to_geodetic(const EcefPoint& p, bool* on_polar_axis = nullptr);

/// Local tangent-plane offset of p relative to ref, in meters east/north.
/// Valid for nearby points only; |delta| >= 1 deg per axis is rejected.
Result<EnuOffset> enu_offset_m(const GeodeticPoint& ref, const GeodeticPoint& p);

/// Inverse of enu_offset_m: displace ref by the given local offset.
GeodeticPoint offset_geodetic(const GeodeticPoint& ref, double east_m, double north_m);

}  // namespace vtrack::geodesy
