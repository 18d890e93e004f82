#pragma once

#include <vector>

#include "seirios/csi.hpp"

namespace seirios::sync {

struct SyncOptions {
    double min_overlap_hz = 8e3;     // below this, pairwise alignment is refused
    double smooth_width_hz = 1e3;    // moving average applied before offset estimation
    double bridge_trim_hz = csi::kDefaultTrimHz;  // edge trim of the virtual bridge band
};

// Per-channel phase corrections, defined up to one common additive
// constant; corrections[0] = 0 by convention.
struct SyncSolution {
    std::vector<double> corrections;
    double residual_rms = 0.0;  // diagnostic spread of the pairwise alignments
};

// Circular mean over the shared frequency grid of phase(a) - phase(b).
// Adding the result to curve b's phase co-phases the pair.
// Throws std::runtime_error when the curves do not overlap.
double offset_overlapped(const csi::PhaseCurve& a, const csi::PhaseCurve& b,
                         const SyncOptions& opts = {});

// Alignment of two non-overlapped adjacent channels through a virtual
// bridging channel centered on the guard band: fit a linear phase to each
// curve, give the bridge the averaged slope, anchor it to the first curve
// over their overlap, then transfer the offset onto the second curve.
// Exact for flat or slowly varying channels.
double bridge_channels(const csi::PhaseCurve& curve, const csi::PhaseCurve& next,
                       const simenv::ChannelPlan& plan, const SyncOptions& opts = {});

// Chain pairwise offsets from channel 0 upward, picking the overlapped or
// bridged estimator per pair from the curves' usable spans.
SyncSolution synchronize(const std::vector<csi::PhaseCurve>& curves,
                         const simenv::ChannelPlan& plan, const SyncOptions& opts = {});

// values[k][i] *= e^{+j corrections[i]} for all antennas.
csi::CsiMatrix apply_sync(const csi::CsiMatrix& csi, const SyncSolution& sol);

}  // namespace seirios::sync
