#include "seirios/sync.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seirios/mathutil.hpp"

namespace seirios::sync {

namespace {

// Linear interpolation of a complex curve at frequency f.
std::complex<double> interp(const csi::PhaseCurve& c, double f) {
    const auto& fs = c.freqs_hz;
    auto it = std::lower_bound(fs.begin(), fs.end(), f);
    if (it == fs.begin()) return c.values.front();
    if (it == fs.end()) return c.values.back();
    const std::size_t hi = static_cast<std::size_t>(it - fs.begin());
    const std::size_t lo = hi - 1;
    const double w = (f - fs[lo]) / (fs[hi] - fs[lo]);
    return c.values[lo] * (1.0 - w) + c.values[hi] * w;
}

// Least-squares slope of the unwrapped phase, rad/Hz.
double phase_slope(const csi::PhaseCurve& c) {
    const std::size_t n = c.values.size();
    std::vector<double> ph(n);
    for (std::size_t i = 0; i < n; ++i) ph[i] = std::arg(c.values[i]);
    const auto unwrapped = unwrap_phases(ph);

    double f_mean = 0.0, p_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        f_mean += c.freqs_hz[i];
        p_mean += unwrapped[i];
    }
    f_mean /= static_cast<double>(n);
    p_mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double df = c.freqs_hz[i] - f_mean;
        num += df * (unwrapped[i] - p_mean);
        den += df * df;
    }
    if (den == 0.0) return 0.0;
    return num / den;
}

struct PairOffset {
    double delta;
    double spread;  // RMS of the aligned residual phase over the overlap
};

PairOffset aligned_offset(const std::vector<std::complex<double>>& products) {
    std::complex<double> acc(0.0, 0.0);
    for (const auto& p : products) acc += p;
    const double delta = std::arg(acc);
    double ms = 0.0;
    for (const auto& p : products) {
        const double r = wrap_pi(std::arg(p) - delta);
        ms += r * r;
    }
    return {delta, products.empty() ? 0.0 : std::sqrt(ms / static_cast<double>(products.size()))};
}

PairOffset offset_overlapped_impl(const csi::PhaseCurve& a, const csi::PhaseCurve& b,
                                  const SyncOptions& opts) {
    if (a.values.size() < 2 || b.values.size() < 2)
        throw std::runtime_error("offset_overlapped: degenerate curve");
    const csi::PhaseCurve sa = csi::smooth_curve(a, opts.smooth_width_hz);
    const csi::PhaseCurve sb = csi::smooth_curve(b, opts.smooth_width_hz);
    const double lo = std::max(sa.freqs_hz.front(), sb.freqs_hz.front());
    const double hi = std::min(sa.freqs_hz.back(), sb.freqs_hz.back());
    if (!(hi > lo)) throw std::runtime_error("offset_overlapped: curves do not overlap");

    std::vector<std::complex<double>> products;
    for (std::size_t i = 0; i < sa.freqs_hz.size(); ++i) {
        const double f = sa.freqs_hz[i];
        if (f < lo || f > hi) continue;
        products.push_back(unit(sa.values[i]) * std::conj(unit(interp(sb, f))));
    }
    if (products.empty()) throw std::runtime_error("offset_overlapped: empty overlap grid");
    return aligned_offset(products);
}

PairOffset bridge_channels_impl(const csi::PhaseCurve& curve, const csi::PhaseCurve& next,
                                const simenv::ChannelPlan& plan, const SyncOptions& opts) {
    if (next.channel_index != curve.channel_index + 1)
        throw std::invalid_argument("bridge_channels: channels must be adjacent in the plan");
    if (!(plan.guard_hz() > 0.0))
        throw std::invalid_argument("bridge_channels: plan is overlapped, no bridge needed");

    const csi::PhaseCurve sa = csi::smooth_curve(curve, opts.smooth_width_hz);
    const csi::PhaseCurve sb = csi::smooth_curve(next, opts.smooth_width_hz);

    // Bridge centered on the guard band, with the same edge trim as a
    // measured channel.
    const double f_bridge = plan.channel_center(curve.channel_index) + 0.5 * plan.spacing_hz;
    const double half = 0.5 * plan.bw_hz - opts.bridge_trim_hz;
    const double bridge_lo = f_bridge - half;
    const double bridge_hi = f_bridge + half;

    const double ov1 = sa.freqs_hz.back() - bridge_lo;
    const double ov2 = bridge_hi - sb.freqs_hz.front();
    if (ov1 < opts.min_overlap_hz || ov2 < opts.min_overlap_hz)
        throw std::runtime_error("bridge_channels: insufficient overlap with the bridge (" +
                                 std::to_string(std::min(ov1, ov2)) + " Hz)");

    const double slope = 0.5 * (phase_slope(sa) + phase_slope(sb));

    // Anchor the bridge's phase line to the first curve over their overlap.
    std::vector<std::complex<double>> products;
    for (std::size_t i = 0; i < sa.freqs_hz.size(); ++i) {
        const double f = sa.freqs_hz[i];
        if (f < bridge_lo) continue;
        products.push_back(unit(sa.values[i]) * std::polar(1.0, -slope * (f - f_bridge)));
    }
    const double anchor = aligned_offset(products).delta;

    // Transfer: circular mean of (bridge phase - next curve phase).
    products.clear();
    for (std::size_t i = 0; i < sb.freqs_hz.size(); ++i) {
        const double f = sb.freqs_hz[i];
        if (f > bridge_hi) continue;
        products.push_back(std::polar(1.0, anchor + slope * (f - f_bridge)) *
                           std::conj(unit(sb.values[i])));
    }
    return aligned_offset(products);
}

}  // namespace

double offset_overlapped(const csi::PhaseCurve& a, const csi::PhaseCurve& b,
                         const SyncOptions& opts) {
    return offset_overlapped_impl(a, b, opts).delta;
}

double bridge_channels(const csi::PhaseCurve& curve, const csi::PhaseCurve& next,
                       const simenv::ChannelPlan& plan, const SyncOptions& opts) {
    return bridge_channels_impl(curve, next, plan, opts).delta;
}

SyncSolution synchronize(const std::vector<csi::PhaseCurve>& curves,
                         const simenv::ChannelPlan& plan, const SyncOptions& opts) {
    if (static_cast<int>(curves.size()) != plan.count)
        throw std::invalid_argument("synchronize: need one curve per channel");

    SyncSolution sol;
    sol.corrections.assign(plan.count, 0.0);
    double spread_ms = 0.0;
    for (int i = 0; i + 1 < plan.count; ++i) {
        PairOffset po;
        try {
            const double usable =
                curves[i].freqs_hz.back() - curves[i + 1].freqs_hz.front();
            po = usable >= opts.min_overlap_hz
                     ? offset_overlapped_impl(curves[i], curves[i + 1], opts)
                     : bridge_channels_impl(curves[i], curves[i + 1], plan, opts);
        } catch (const std::exception& e) {
            throw std::runtime_error("synchronize: channel pair (" + std::to_string(i) + ", " +
                                     std::to_string(i + 1) + "): " + e.what());
        }
        sol.corrections[i + 1] = sol.corrections[i] + po.delta;
        spread_ms += po.spread * po.spread;
    }
    if (plan.count > 1) sol.residual_rms = std::sqrt(spread_ms / (plan.count - 1));
    return sol;
}

csi::CsiMatrix apply_sync(const csi::CsiMatrix& csi, const SyncSolution& sol) {
    if (csi.synchronized) throw std::invalid_argument("apply_sync: matrix already synchronized");
    if (static_cast<int>(sol.corrections.size()) != csi.channels)
        throw std::invalid_argument("apply_sync: correction count mismatch");
    csi::CsiMatrix out = csi;
    for (int i = 0; i < out.channels; ++i) {
        const std::complex<double> rot = std::polar(1.0, sol.corrections[i]);
        for (int k = 0; k < out.antennas; ++k) out.at(k, i) *= rot;
    }
    out.synchronized = true;
    return out;
}

}  // namespace seirios::sync
