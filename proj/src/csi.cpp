#include "seirios/csi.hpp"

#include <cmath>
#include <stdexcept>

#include "seirios/mathutil.hpp"

namespace seirios::csi {

std::vector<std::complex<double>> average_preamble(const std::vector<std::complex<double>>& samples,
                                                   const phy::ChirpParams& params) {
    params.validate();
    const int n_sym = params.samples_per_symbol();
    const std::size_t needed = static_cast<std::size_t>(n_sym) * params.n_preamble;
    if (samples.size() < needed)
        throw std::runtime_error("average_preamble: capture shorter than the preamble");

    std::vector<std::complex<double>> mean(n_sym, {0.0, 0.0});
    for (int l = 0; l < params.n_preamble; ++l)
        for (int n = 0; n < n_sym; ++n) mean[n] += samples[static_cast<std::size_t>(l) * n_sym + n];
    const double scale = 1.0 / params.n_preamble;
    for (auto& v : mean) v *= scale;
    return mean;
}

std::complex<double> extract_csi(const std::vector<std::complex<double>>& symbol,
                                 const phy::ChirpParams& params) {
    const int n_sym = params.samples_per_symbol();
    if (static_cast<int>(symbol.size()) != n_sym)
        throw std::runtime_error("extract_csi: symbol length mismatch");

    // conj(u[n]) = e^{-j phi(t_n)}; normalized by sample count only since
    // |u| = 1 per sample.
    std::complex<double> acc(0.0, 0.0);
    for (int n = 0; n < n_sym; ++n) {
        const double phase = phy::chirp_phase(static_cast<double>(n) / params.fs_hz, params);
        acc += symbol[n] * std::polar(1.0, -phase);
    }
    return acc / static_cast<double>(n_sym);
}

PhaseCurve phase_curve(const std::vector<std::complex<double>>& symbol,
                       const phy::ChirpParams& params, int channel_index,
                       const simenv::ChannelPlan& plan, double trim_hz) {
    const int n_sym = params.samples_per_symbol();
    if (static_cast<int>(symbol.size()) != n_sym)
        throw std::runtime_error("phase_curve: symbol length mismatch");
    if (trim_hz < 0.0 || 2.0 * trim_hz >= params.bw_hz)
        throw std::domain_error("phase_curve: trim must satisfy 0 <= 2*trim < bw");

    const double f_center = plan.channel_center(channel_index);
    const double half = 0.5 * params.bw_hz;

    PhaseCurve curve;
    curve.channel_index = channel_index;
    curve.freqs_hz.reserve(n_sym);
    curve.values.reserve(n_sym);
    for (int n = 0; n < n_sym; ++n) {
        const double t = static_cast<double>(n) / params.fs_hz;
        const double f_off = phy::instantaneous_freq(t, params);
        if (f_off < -half + trim_hz || f_off > half - trim_hz) continue;
        curve.freqs_hz.push_back(f_center + f_off);
        curve.values.push_back(symbol[n] * std::polar(1.0, -phy::chirp_phase(t, params)));
    }
    return curve;
}

PhaseCurve smooth_curve(const PhaseCurve& curve, double width_hz) {
    const std::size_t n = curve.values.size();
    if (n < 2 || width_hz <= 0.0) return curve;
    const double df = (curve.freqs_hz.back() - curve.freqs_hz.front()) / static_cast<double>(n - 1);
    const int half = std::max(0, static_cast<int>(std::lround(0.5 * width_hz / df)));
    if (half == 0) return curve;

    PhaseCurve out;
    out.channel_index = curve.channel_index;
    out.freqs_hz = curve.freqs_hz;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t k = lo; k <= hi; ++k) acc += curve.values[k];
        out.values[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

CsiMatrix csi_from_captures(const std::vector<phy::IqCapture>& captures,
                            const phy::ChirpParams& params, const simenv::ChannelPlan& plan,
                            const simenv::ArrayGeometry& geometry) {
    CsiMatrix csi;
    csi.antennas = geometry.antennas;
    csi.channels = plan.count;
    csi.plan = plan;
    csi.geometry = geometry;
    csi.synchronized = false;
    csi.values.assign(static_cast<std::size_t>(csi.antennas) * csi.channels, {0.0, 0.0});

    std::vector<bool> seen(csi.values.size(), false);
    for (const auto& cap : captures) {
        if (cap.channel_index < 0 || cap.channel_index >= csi.channels ||
            cap.antenna_index < 0 || cap.antenna_index >= csi.antennas)
            throw std::invalid_argument("csi_from_captures: capture outside the plan/array");
        csi.at(cap.antenna_index, cap.channel_index) =
            extract_csi(average_preamble(cap.samples, params), params);
        seen[static_cast<std::size_t>(cap.antenna_index) * csi.channels + cap.channel_index] = true;
    }
    for (bool s : seen)
        if (!s) throw std::invalid_argument("csi_from_captures: missing capture slots");
    return csi;
}

std::vector<PhaseCurve> curves_from_captures(const std::vector<phy::IqCapture>& captures,
                                             const phy::ChirpParams& params,
                                             const simenv::ChannelPlan& plan, double trim_hz,
                                             int antenna) {
    std::vector<PhaseCurve> curves(plan.count);
    std::vector<bool> seen(plan.count, false);
    for (const auto& cap : captures) {
        if (cap.antenna_index != antenna) continue;
        if (cap.channel_index < 0 || cap.channel_index >= plan.count)
            throw std::invalid_argument("curves_from_captures: channel outside the plan");
        curves[cap.channel_index] = phase_curve(average_preamble(cap.samples, params), params,
                                                cap.channel_index, plan, trim_hz);
        seen[cap.channel_index] = true;
    }
    for (bool s : seen)
        if (!s) throw std::invalid_argument("curves_from_captures: missing channels");
    return curves;
}

CsiMatrix csi_from_paths(const std::vector<simenv::Path>& paths, const simenv::ChannelPlan& plan,
                         const simenv::ArrayGeometry& geometry) {
    CsiMatrix csi;
    csi.antennas = geometry.antennas;
    csi.channels = plan.count;
    csi.plan = plan;
    csi.geometry = geometry;
    csi.synchronized = true;
    csi.values.assign(static_cast<std::size_t>(csi.antennas) * csi.channels, {0.0, 0.0});

    for (const auto& path : paths) {
        const auto gamma = simenv::gamma_of_path(path, plan.fc_base_hz);
        const auto phi = simenv::phi_of_theta(path.theta_deg, geometry, plan.fc_base_hz);
        const auto omega = simenv::omega_of_tau(path.tau_s, plan.spacing_hz);
        std::complex<double> antenna_factor(1.0, 0.0);
        for (int k = 0; k < csi.antennas; ++k) {
            std::complex<double> channel_factor(1.0, 0.0);
            for (int i = 0; i < csi.channels; ++i) {
                csi.at(k, i) += gamma * antenna_factor * channel_factor;
                channel_factor *= omega;
            }
            antenna_factor *= phi;
        }
    }
    return csi;
}

CsiMatrix select_channels(const CsiMatrix& csi, const std::vector<int>& indices,
                          const simenv::ChannelPlan& new_plan) {
    if (static_cast<int>(indices.size()) != new_plan.count)
        throw std::invalid_argument("select_channels: index count must match the new plan");
    CsiMatrix out;
    out.antennas = csi.antennas;
    out.channels = new_plan.count;
    out.plan = new_plan;
    out.geometry = csi.geometry;
    out.synchronized = csi.synchronized;
    out.values.resize(static_cast<std::size_t>(out.antennas) * out.channels);
    for (int k = 0; k < out.antennas; ++k)
        for (std::size_t j = 0; j < indices.size(); ++j) {
            const int src = indices[j];
            if (src < 0 || src >= csi.channels)
                throw std::invalid_argument("select_channels: index out of range");
            out.at(k, static_cast<int>(j)) = csi.at(k, src);
        }
    return out;
}

}  // namespace seirios::csi
