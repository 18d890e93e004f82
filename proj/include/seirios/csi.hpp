#pragma once

#include <complex>
#include <vector>

#include "seirios/phy.hpp"
#include "seirios/simenv.hpp"

namespace seirios::csi {

// K antennas x M channels of complex channel state. Unsynchronized right
// after extraction: every channel still carries its own random tx/rx
// phase offset.
struct CsiMatrix {
    int antennas = 0;
    int channels = 0;
    std::vector<std::complex<double>> values;  // row-major [antenna][channel]
    simenv::ChannelPlan plan;
    simenv::ArrayGeometry geometry;
    bool synchronized = false;

    std::complex<double>& at(int antenna, int channel) {
        return values[static_cast<std::size_t>(antenna) * channels + channel];
    }
    const std::complex<double>& at(int antenna, int channel) const {
        return values[static_cast<std::size_t>(antenna) * channels + channel];
    }
};

// Channel state g_i(f) sampled across one channel's band, on an absolute
// frequency grid (strictly increasing).
struct PhaseCurve {
    int channel_index = 0;
    std::vector<double> freqs_hz;
    std::vector<std::complex<double>> values;
};

// The paper trims the band edges where the chirp transient makes the
// phase estimate poor.
inline constexpr double kDefaultTrimHz = 4e3;

// Mean of the n_preamble repeated up-chirp symbols; valid because the
// chirp phase rolls back to its initial state every symbol.
std::vector<std::complex<double>> average_preamble(const std::vector<std::complex<double>>& samples,
                                                   const phy::ChirpParams& params);

// Pulse compression against the reference up-chirp:
// CSI = (1/N) sum_n rbar[n] * conj(u[n]).
std::complex<double> extract_csi(const std::vector<std::complex<double>>& symbol,
                                 const phy::ChirpParams& params);

// Per-sample product rbar[n] * conj(u[n]) mapped to absolute frequency via
// the chirp's linear sweep, with `trim` Hz removed from both band edges.
PhaseCurve phase_curve(const std::vector<std::complex<double>>& symbol,
                       const phy::ChirpParams& params, int channel_index,
                       const simenv::ChannelPlan& plan, double trim_hz = kDefaultTrimHz);

// Centered moving average of the complex curve over ~width_hz of grid.
PhaseCurve smooth_curve(const PhaseCurve& curve, double width_hz);

// average_preamble + extract_csi for every capture of one AP.
CsiMatrix csi_from_captures(const std::vector<phy::IqCapture>& captures,
                            const phy::ChirpParams& params, const simenv::ChannelPlan& plan,
                            const simenv::ArrayGeometry& geometry);

// Phase curves of every channel, taken at one antenna (the per-channel
// offsets are antenna-independent, so one antenna suffices for sync).
std::vector<PhaseCurve> curves_from_captures(const std::vector<phy::IqCapture>& captures,
                                             const phy::ChirpParams& params,
                                             const simenv::ChannelPlan& plan,
                                             double trim_hz = kDefaultTrimHz, int antenna = 0);

// Direct evaluation of the narrowband model
//   H_{k,i} = sum_p gamma_p Phi_p^k Omega_p^i
// (offset-free, hence marked synchronized).
CsiMatrix csi_from_paths(const std::vector<simenv::Path>& paths, const simenv::ChannelPlan& plan,
                         const simenv::ArrayGeometry& geometry);

// Sub-matrix with the given channel subset (e.g. every other channel of an
// overlapped plan), re-labelled against new_plan.
CsiMatrix select_channels(const CsiMatrix& csi, const std::vector<int>& indices,
                          const simenv::ChannelPlan& new_plan);

}  // namespace seirios::csi
