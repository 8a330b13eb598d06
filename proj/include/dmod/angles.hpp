#ifndef DMOD_ANGLES_HPP
#define DMOD_ANGLES_HPP

#include <cmath>
#include <numbers>
#include <vector>

namespace dmod {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299'792'458.0; // m/s

constexpr double deg2rad(double deg) noexcept { return deg * (pi / 180.0); }
constexpr double rad2deg(double rad) noexcept { return rad * (180.0 / pi); }

/// Wraps to (-pi, pi].
inline double wrap_phase(double rad) noexcept {
    double w = std::remainder(rad, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

/// Angles from `start_deg` to `stop_deg` inclusive in `step_deg` increments,
/// returned in radians. Each entry is computed from its index, so there is no
/// accumulated drift and grids symmetric about 90 deg stay symmetric.
inline std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg) {
    std::vector<double> out;
    if (!(step_deg > 0.0) || stop_deg < start_deg) return out;
    const auto n = static_cast<std::size_t>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(deg2rad(start_deg + static_cast<double>(i) * step_deg));
    return out;
}

/// 0.5 deg steps over the open interval (0, 180) deg: 359 points, symmetric about broadside.
inline std::vector<double> default_angle_grid() { return angle_grid_deg(0.5, 179.5, 0.5); }

} // namespace dmod

#endif // DMOD_ANGLES_HPP
