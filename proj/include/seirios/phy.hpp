#pragma once

#include <complex>
#include <vector>

namespace seirios::phy {

// Chirp-spread-spectrum parameters of one LoRa channel. The reference
// up-chirp sweeps -bw/2 .. +bw/2 linearly over one symbol.
struct ChirpParams {
    int sf = 7;             // spreading factor, 7..12
    double bw_hz = 125e3;   // channel bandwidth
    double fs_hz = 1e6;     // complex baseband sample rate, >= bw
    int n_preamble = 8;     // identical up-chirps per preamble

    // chirp rate lambda = bw^2 / 2^sf, in Hz/s
    double chirp_rate() const;
    // symbol duration T = 2^sf / bw, in seconds
    double symbol_duration() const;
    int samples_per_symbol() const;

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

// One received baseband sequence: a single (channel, antenna) slot of an AP.
struct IqCapture {
    int channel_index = 0;
    int antenna_index = 0;
    double center_freq_hz = 0.0;
    std::vector<std::complex<double>> samples;
};

// Up-chirp phase phi(t) = 2*pi*(lambda/2 * t^2 - bw/2 * t), evaluated
// analytically per sample (no cumulative summation, no drift).
double chirp_phase(double t, const ChirpParams& params);

// Instantaneous frequency f(t) = lambda*t - bw/2 for t in [0, T).
double instantaneous_freq(double t, const ChirpParams& params);

// Inverse of the frequency sweep: t = (f + bw/2) / lambda for
// f in [-bw/2, +bw/2]. Throws std::domain_error outside the band.
double freq_to_time(double freq_offset_hz, const ChirpParams& params);

// One reference up-chirp symbol, unit magnitude per sample.
std::vector<std::complex<double>> upchirp(const ChirpParams& params);

// n_preamble identical up-chirps back to back.
std::vector<std::complex<double>> preamble(const ChirpParams& params);

}  // namespace seirios::phy
