#include "seirios/phy.hpp"

#include <cmath>
#include <stdexcept>

#include "seirios/mathutil.hpp"

namespace seirios::phy {

double ChirpParams::chirp_rate() const { return bw_hz * bw_hz / std::ldexp(1.0, sf); }

double ChirpParams::symbol_duration() const { return std::ldexp(1.0, sf) / bw_hz; }

int ChirpParams::samples_per_symbol() const {
    return static_cast<int>(std::lround(fs_hz * symbol_duration()));
}

void ChirpParams::validate() const {
    if (sf < 7 || sf > 12) throw std::invalid_argument("ChirpParams: sf must be in [7, 12]");
    if (!(bw_hz > 0.0)) throw std::invalid_argument("ChirpParams: bw must be positive");
    if (!(fs_hz >= bw_hz))
        throw std::invalid_argument("ChirpParams: fs must be >= bw (complex baseband)");
    if (n_preamble < 1) throw std::invalid_argument("ChirpParams: n_preamble must be >= 1");
    if (samples_per_symbol() < 2)
        throw std::invalid_argument("ChirpParams: fewer than 2 samples per symbol");
}

double chirp_phase(double t, const ChirpParams& params) {
    return kTwoPi * (0.5 * params.chirp_rate() * t * t - 0.5 * params.bw_hz * t);
}

double instantaneous_freq(double t, const ChirpParams& params) {
    return params.chirp_rate() * t - 0.5 * params.bw_hz;
}

double freq_to_time(double freq_offset_hz, const ChirpParams& params) {
    const double half = 0.5 * params.bw_hz;
    if (freq_offset_hz < -half || freq_offset_hz > half)
        throw std::domain_error("freq_to_time: frequency outside the chirp band");
    return (freq_offset_hz + half) / params.chirp_rate();
}

std::vector<std::complex<double>> upchirp(const ChirpParams& params) {
    params.validate();
    const int n = params.samples_per_symbol();
    std::vector<std::complex<double>> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = std::polar(1.0, chirp_phase(static_cast<double>(i) / params.fs_hz, params));
    }
    return out;
}

std::vector<std::complex<double>> preamble(const ChirpParams& params) {
    const auto symbol = upchirp(params);
    std::vector<std::complex<double>> out;
    out.reserve(symbol.size() * static_cast<std::size_t>(params.n_preamble));
    for (int l = 0; l < params.n_preamble; ++l) out.insert(out.end(), symbol.begin(), symbol.end());
    return out;
}

}  // namespace seirios::phy
