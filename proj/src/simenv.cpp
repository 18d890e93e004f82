#include "seirios/simenv.hpp"

#include <cmath>
#include <stdexcept>

#include "seirios/mathutil.hpp"
#include "seirios/rng.hpp"

namespace seirios::simenv {

namespace {

// Substream tags so every random quantity has its own deterministic stream.
enum : std::uint64_t { kTagReflector = 1, kTagOffset = 2, kTagNoise = 3 };

double distance(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

}  // namespace

void ChannelPlan::validate() const {
    if (count < 2) throw std::invalid_argument("ChannelPlan: need at least 2 channels");
    if (!(bw_hz > 0.0) || !(spacing_hz > 0.0) || !(fc_base_hz > 0.0))
        throw std::invalid_argument("ChannelPlan: frequencies must be positive");
}

void ArrayGeometry::validate(const ChannelPlan& plan) const {
    if (antennas < 2) throw std::invalid_argument("ArrayGeometry: need at least 2 antennas");
    if (!(spacing_m > 0.0)) throw std::invalid_argument("ArrayGeometry: spacing must be positive");
    const double half_wavelength = wave_speed / (2.0 * plan.max_center_hz());
    if (!(spacing_m < half_wavelength))
        throw std::invalid_argument(
            "ArrayGeometry: spacing must be under half the shortest wavelength");
}

void Scenario::validate() const {
    plan.validate();
    geometry.validate(plan);
    chirp.validate();
    if (aps.empty()) throw std::invalid_argument("Scenario: need at least one AP");
    for (const auto& ap : aps) {
        if (ap.boresight_deg < 0.0 || ap.boresight_deg >= 360.0)
            throw std::invalid_argument("Scenario: boresight must be in [0, 360)");
        if (!std::isfinite(ap.position.x) || !std::isfinite(ap.position.y))
            throw std::invalid_argument("Scenario: AP position must be finite");
    }
    if (!std::isfinite(tx.x) || !std::isfinite(tx.y))
        throw std::invalid_argument("Scenario: tx position must be finite");
    for (const auto& r : reflectors)
        if (!std::isfinite(r.x) || !std::isfinite(r.y))
            throw std::invalid_argument("Scenario: reflector position must be finite");
    if (!(direct_gain > 0.0) || !(reflection_loss > 0.0) || reflection_loss > 1.0)
        throw std::invalid_argument("Scenario: bad gain/loss parameters");
    if (std::abs(plan.bw_hz - chirp.bw_hz) > 1e-6)
        throw std::invalid_argument("Scenario: chirp bandwidth must match the channel plan");
}

double bearing_deg(const Point& from, const Point& to) {
    return rad2deg(std::atan2(to.y - from.y, to.x - from.x));
}

std::complex<double> phi_of_theta(double theta_deg, const ArrayGeometry& geom, double fc_hz) {
    const double arg =
        -kTwoPi * geom.spacing_m * std::sin(deg2rad(theta_deg)) * fc_hz / geom.wave_speed;
    return std::polar(1.0, arg);
}

std::complex<double> omega_of_tau(double tau_s, double spacing_hz) {
    return std::polar(1.0, -kTwoPi * spacing_hz * tau_s);
}

std::complex<double> gamma_of_path(const Path& path, double fc_hz) {
    return path.alpha * std::polar(1.0, -kTwoPi * fc_hz * path.tau_s);
}

std::vector<Path> geometry_to_paths(const Scenario& scenario, int ap_index) {
    if (ap_index < 0 || ap_index >= static_cast<int>(scenario.aps.size()))
        throw std::invalid_argument("geometry_to_paths: ap_index out of range");
    const ApPose& ap = scenario.aps[ap_index];
    const double c = scenario.geometry.wave_speed;

    const double direct_dist = distance(ap.position, scenario.tx);
    if (direct_dist < 1e-6)
        throw std::runtime_error("geometry_to_paths: AP co-located with transmitter");

    std::vector<Path> paths;

    const double direct_theta =
        wrap_deg(bearing_deg(ap.position, scenario.tx) - ap.boresight_deg);
    if (std::abs(direct_theta) < kFieldOfViewDeg) {
        Path p;
        p.alpha = std::min(1.0, scenario.direct_gain / direct_dist);  // unit phase
        p.tau_s = direct_dist / c;
        p.theta_deg = direct_theta;
        paths.push_back(p);
    }

    for (std::size_t r = 0; r < scenario.reflectors.size(); ++r) {
        const Point& refl = scenario.reflectors[r];
        const double leg_tx = distance(scenario.tx, refl);
        const double leg_ap = distance(refl, ap.position);
        if (leg_tx < 1e-6 || leg_ap < 1e-6) continue;  // reflector on an endpoint
        const double total = leg_tx + leg_ap;
        const double theta = wrap_deg(bearing_deg(ap.position, refl) - ap.boresight_deg);
        if (std::abs(theta) >= kFieldOfViewDeg) continue;

        auto stream = rng::substream(scenario.seed,
                                     {static_cast<std::uint64_t>(ap_index), kTagReflector, r});
        Path p;
        const double mag = std::min(1.0, scenario.reflection_loss * scenario.direct_gain / total);
        p.alpha = std::polar(mag, stream.uniform(-kPi, kPi));
        p.tau_s = total / c;
        p.theta_deg = theta;
        paths.push_back(p);
    }
    return paths;
}

std::vector<double> channel_offsets(const Scenario& scenario, int ap_index) {
    std::vector<double> psi(scenario.plan.count);
    for (int i = 0; i < scenario.plan.count; ++i) {
        auto stream = rng::substream(scenario.seed, {static_cast<std::uint64_t>(ap_index),
                                                      kTagOffset, static_cast<std::uint64_t>(i)});
        psi[i] = stream.uniform(-kPi, kPi);
    }
    return psi;
}

namespace {

// One (channel, antenna) slot. Deterministic given the scenario seed:
// noise comes from the slot's own substream. noise_var is the shared
// per-AP noise floor (fades stay faded instead of each slot being
// rescaled to its own power).
phy::IqCapture synthesize_slot(const std::vector<Path>& paths, const Scenario& scenario,
                               int ap_index, int channel, int antenna,
                               const std::vector<std::complex<double>>& ref_chirp,
                               const std::vector<double>& psi, double noise_var,
                               const SynthesisOptions& opts) {
    const auto& plan = scenario.plan;
    const auto& chirp = scenario.chirp;
    const int n_sym = static_cast<int>(ref_chirp.size());
    const int n_total = n_sym * chirp.n_preamble;
    const double fs = chirp.fs_hz;
    const double lambda = chirp.chirp_rate();
    const double f_i = plan.channel_center(channel);

    phy::IqCapture cap;
    cap.channel_index = channel;
    cap.antenna_index = antenna;
    cap.center_freq_hz = f_i;
    cap.samples.assign(n_total, {0.0, 0.0});

    std::vector<std::complex<double>> symbol(n_sym, {0.0, 0.0});
    for (const Path& path : paths) {
        const std::complex<double> phi = phi_of_theta(path.theta_deg, scenario.geometry,
                                                      plan.fc_base_hz);
        std::complex<double> coeff =
            path.alpha * std::polar(1.0, -kTwoPi * f_i * path.tau_s);
        for (int k = 0; k < antenna; ++k) coeff *= phi;

        // u(t - tau) = u(t) * e^{-j 2 pi tau f(t)} * e^{j pi lambda tau^2}:
        // a phase ramp across the instantaneous-frequency sweep. The ramp
        // is geometric in n, so advance it with one rotation per sample.
        const double tau = path.tau_s;
        std::complex<double> ramp =
            std::polar(1.0, -kTwoPi * tau * (-0.5 * chirp.bw_hz) + kPi * lambda * tau * tau);
        const std::complex<double> step = std::polar(1.0, -kTwoPi * tau * lambda / fs);
        for (int n = 0; n < n_sym; ++n) {
            symbol[n] += coeff * ref_chirp[n] * ramp;
            ramp *= step;
        }
    }

    for (int l = 0; l < chirp.n_preamble; ++l)
        for (int n = 0; n < n_sym; ++n) cap.samples[l * n_sym + n] = symbol[n];

    if (opts.add_noise && noise_var > 0.0) {
        auto stream = rng::substream(
            scenario.seed, {static_cast<std::uint64_t>(ap_index), kTagNoise,
                            static_cast<std::uint64_t>(channel), static_cast<std::uint64_t>(antenna)});
        for (auto& s : cap.samples) s += stream.randn_c(noise_var);
    }

    if (opts.apply_offsets) {
        const std::complex<double> rot = std::polar(1.0, psi[channel]);
        for (auto& s : cap.samples) s *= rot;
    }
    return cap;
}

}  // namespace

namespace {

// Noise floor shared by every slot of one AP: the average received power
// across channels at snr_db. The antenna factor is unit modulus, so
// antenna 0 is representative.
double ap_noise_floor(const std::vector<Path>& paths, const Scenario& scenario, int ap_index,
                      const std::vector<std::complex<double>>& ref_chirp,
                      const std::vector<double>& psi) {
    if (!std::isfinite(scenario.snr_db)) return 0.0;
    SynthesisOptions clean;
    clean.add_noise = false;
    clean.apply_offsets = false;
    double power = 0.0;
    std::size_t count = 0;
    for (int ch = 0; ch < scenario.plan.count; ++ch) {
        const auto cap =
            synthesize_slot(paths, scenario, ap_index, ch, 0, ref_chirp, psi, 0.0, clean);
        for (const auto& s : cap.samples) power += std::norm(s);
        count += cap.samples.size();
    }
    power /= static_cast<double>(count);
    // No path in the field of view: pure noise at a unit reference level.
    return (power > 0.0 ? power : 1.0) * std::pow(10.0, -scenario.snr_db / 10.0);
}

}  // namespace

std::vector<phy::IqCapture> synthesize_from_paths(const std::vector<Path>& paths,
                                                  const Scenario& scenario, int ap_index,
                                                  const SynthesisOptions& opts) {
    scenario.validate();
    const auto ref_chirp = phy::upchirp(scenario.chirp);
    const auto psi = channel_offsets(scenario, ap_index);
    const int n_ch = scenario.plan.count;
    const int n_ant = scenario.geometry.antennas;
    const double noise_var =
        opts.add_noise ? ap_noise_floor(paths, scenario, ap_index, ref_chirp, psi) : 0.0;

    std::vector<phy::IqCapture> captures(static_cast<std::size_t>(n_ch) * n_ant);
#pragma omp parallel for schedule(static)
    for (int slot = 0; slot < n_ch * n_ant; ++slot) {
        const int channel = slot / n_ant;
        const int antenna = slot % n_ant;
        captures[slot] = synthesize_slot(paths, scenario, ap_index, channel, antenna, ref_chirp,
                                         psi, noise_var, opts);
    }
    return captures;
}

std::vector<phy::IqCapture> synthesize_captures(const Scenario& scenario, int ap_index,
                                                const SynthesisOptions& opts) {
    return synthesize_from_paths(geometry_to_paths(scenario, ap_index), scenario, ap_index, opts);
}

std::vector<phy::IqCapture> synthesize_captures_serial(const Scenario& scenario, int ap_index,
                                                       const SynthesisOptions& opts) {
    scenario.validate();
    const auto paths = geometry_to_paths(scenario, ap_index);
    const auto ref_chirp = phy::upchirp(scenario.chirp);
    const auto psi = channel_offsets(scenario, ap_index);
    const int n_ant = scenario.geometry.antennas;
    const double noise_var =
        opts.add_noise ? ap_noise_floor(paths, scenario, ap_index, ref_chirp, psi) : 0.0;

    std::vector<phy::IqCapture> captures;
    captures.reserve(static_cast<std::size_t>(scenario.plan.count) * n_ant);
    for (int channel = 0; channel < scenario.plan.count; ++channel)
        for (int antenna = 0; antenna < n_ant; ++antenna)
            captures.push_back(synthesize_slot(paths, scenario, ap_index, channel, antenna,
                                               ref_chirp, psi, noise_var, opts));
    return captures;
}

}  // namespace seirios::simenv
