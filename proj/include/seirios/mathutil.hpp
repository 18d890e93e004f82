#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace seirios {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wrap an angle in radians to (-pi, pi].
inline double wrap_pi(double rad) {
    double w = std::remainder(rad, kTwoPi);
    if (w <= -kPi) w += kTwoPi;
    return w;
}

// Wrap an angle in degrees to (-180, 180].
inline double wrap_deg(double deg) {
    double w = std::remainder(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    return w;
}

// z / |z|, or 0 for z == 0.
inline std::complex<double> unit(std::complex<double> z) {
    double m = std::abs(z);
    return m > 0.0 ? z / m : std::complex<double>(0.0, 0.0);
}

// Circular mean of angles in radians: argument of the mean unit phasor.
// Avoids wrap bias of the arithmetic mean.
inline double circular_mean(std::span<const double> angles_rad) {
    std::complex<double> acc(0.0, 0.0);
    for (double a : angles_rad) acc += std::polar(1.0, a);
    return std::arg(acc);
}

// 2pi-jump unwrapping along the sequence; ties at exactly pi resolved
// toward continuity (remainder keeps the step in (-pi, pi]).
inline std::vector<double> unwrap_phases(std::span<const double> wrapped) {
    std::vector<double> out(wrapped.begin(), wrapped.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        double step = std::remainder(wrapped[i] - out[i - 1], kTwoPi);
        out[i] = out[i - 1] + step;
    }
    return out;
}

}  // namespace seirios
