#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "seirios/phy.hpp"

namespace seirios::simenv {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Equally spaced narrowband channels. Non-overlapped when spacing > bw
// (guard = spacing - bw); the LoRaWAN default is 8 x 125 kHz at 200 kHz.
struct ChannelPlan {
    double fc_base_hz = 915.0e6;  // center of channel 0, the reference carrier
    double spacing_hz = 200e3;
    int count = 8;
    double bw_hz = 125e3;

    double channel_center(int index) const { return fc_base_hz + index * spacing_hz; }
    double guard_hz() const { return spacing_hz - bw_hz; }
    double max_center_hz() const { return channel_center(count - 1); }
    void validate() const;
};

// Uniform linear array of a single AP.
struct ArrayGeometry {
    int antennas = 2;
    double spacing_m = 0.14;              // slightly under half wavelength at 915 MHz
    double wave_speed = 299792458.0;

    // Checks spacing < c / (2 * fc_max), i.e. under half the shortest wavelength.
    void validate(const ChannelPlan& plan) const;
};

// One propagation path. theta is measured from the array normal;
// paths outside (-85, 85) degrees are outside the usable field of view.
struct Path {
    std::complex<double> alpha;  // attenuation, |alpha| in (0, 1]
    double tau_s = 0.0;          // time of flight
    double theta_deg = 0.0;      // angle of arrival
};

struct ApPose {
    Point position;
    double boresight_deg = 0.0;  // array normal direction in the world frame, [0, 360)
};

inline constexpr double kFieldOfViewDeg = 85.0;

// Ground truth for one experiment: everything the synthesis needs,
// fully reproducible from the seed.
struct Scenario {
    Point tx;
    std::vector<ApPose> aps;
    std::vector<Point> reflectors;
    ChannelPlan plan;
    ArrayGeometry geometry;
    phy::ChirpParams chirp;
    double snr_db = std::numeric_limits<double>::infinity();  // per-sample SNR
    std::uint64_t seed = 1;
    double direct_gain = 1.0;     // a0: direct |alpha| = a0 / distance
    double reflection_loss = 0.5; // rho: reflected |alpha| = rho * a0 / total distance

    void validate() const;
};

double bearing_deg(const Point& from, const Point& to);

// Per-antenna phase factor Phi(theta) = exp(-j 2 pi d sin(theta) fc / c),
// with fc the plan's reference carrier.
std::complex<double> phi_of_theta(double theta_deg, const ArrayGeometry& geom, double fc_hz);

// Per-channel phase factor Omega(tau) = exp(-j 2 pi f_delta tau).
std::complex<double> omega_of_tau(double tau_s, double spacing_hz);

// gamma = alpha * exp(-j 2 pi fc tau), the path coefficient at the reference carrier.
std::complex<double> gamma_of_path(const Path& path, double fc_hz);

// Direct path plus one first-order path per reflector, relative to the
// given AP. Paths outside the field of view are dropped. Reflected paths
// carry a seeded random reflection phase. Throws on degenerate geometry
// (AP co-located with the transmitter).
std::vector<Path> geometry_to_paths(const Scenario& scenario, int ap_index);

// The per-channel transmitter/receiver phase offsets psi_i drawn for this
// AP: uniform in (-pi, pi], identical at every antenna of the AP,
// independent across channels and APs. Exposed so tests can check recovery.
std::vector<double> channel_offsets(const Scenario& scenario, int ap_index);

struct SynthesisOptions {
    bool add_noise = true;
    bool apply_offsets = true;
};

// Received preambles for every (channel, antenna) slot of one AP:
//   r = sum_p alpha_p e^{-j2pi f_i tau_p} Phi(theta_p)^k u(t - tau_p) + noise,
// all multiplied by e^{j psi_i}. u(t - tau) is synthesized with an exact
// sub-sample delay (phase ramp across the chirp's frequency sweep); a
// sample-shift model would erase the ToF information entirely.
std::vector<phy::IqCapture> synthesize_from_paths(const std::vector<Path>& paths,
                                                  const Scenario& scenario, int ap_index,
                                                  const SynthesisOptions& opts = {});

// geometry_to_paths + synthesize_from_paths. Captures are ordered
// channel-major: index = channel * K + antenna.
std::vector<phy::IqCapture> synthesize_captures(const Scenario& scenario, int ap_index,
                                                const SynthesisOptions& opts = {});

// Reference implementation without the OpenMP loop; slot outputs are
// substream-seeded, so both variants produce identical captures.
std::vector<phy::IqCapture> synthesize_captures_serial(const Scenario& scenario, int ap_index,
                                                       const SynthesisOptions& opts = {});

}  // namespace seirios::simenv
