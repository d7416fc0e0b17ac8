#pragma once

#include <vector>

#include "vtrack/geodesy.hpp"

namespace vtrack {

/// One timestamped position of a raw, filtered or truth series.
struct TrackPoint {
    double t_s = 0.0;  // epoch time, seconds from run start
    geodesy::GeodeticPoint pos;
};

using Track = std::vector<TrackPoint>;

}  // namespace vtrack
