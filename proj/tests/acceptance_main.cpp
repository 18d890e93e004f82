// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its tolerance and a runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "seirios/csi.hpp"
#include "seirios/estimators.hpp"
#include "seirios/fusion.hpp"
#include "seirios/ingest.hpp"
#include "seirios/mathutil.hpp"
#include "seirios/metrics.hpp"
#include "seirios/phy.hpp"
#include "seirios/rng.hpp"
#include "seirios/runner.hpp"
#include "seirios/simenv.hpp"
#include "seirios/sync.hpp"

using namespace seirios;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double median_of(std::vector<double> v) { return harness::percentile(std::move(v), 50.0); }

double rel_error(const std::vector<std::complex<double>>& a,
                 const std::vector<std::complex<double>>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

// ---- 1. chirp algebra -------------------------------------------------------

Outcome chirp_algebra() {
    double worst_mag = 0.0, worst_roll = 0.0, worst_closed = 0.0;
    for (int sf = 7; sf <= 12; ++sf) {
        for (double bw : {125e3, 500e3}) {
            phy::ChirpParams p;
            p.sf = sf;
            p.bw_hz = bw;
            p.fs_hz = 2.0 * bw;
            const auto u = phy::upchirp(p);
            for (const auto& s : u) worst_mag = std::max(worst_mag, std::abs(std::abs(s) - 1.0));
            worst_roll =
                std::max(worst_roll, std::abs(wrap_pi(phy::chirp_phase(p.symbol_duration(), p))));
            const double lambda_ref = bw * bw / std::pow(2.0, sf);
            const double t_ref = std::pow(2.0, sf) / bw;
            worst_closed = std::max(
                worst_closed, std::abs(p.chirp_rate() - lambda_ref) / lambda_ref);
            worst_closed = std::max(worst_closed,
                                    std::abs(p.symbol_duration() - t_ref) / t_ref);
        }
    }
    Outcome o;
    o.pass = worst_mag < 1e-12 && worst_roll < 1e-9 && worst_closed < 1e-12;
    std::ostringstream ss;
    ss << "max |mag-1| " << worst_mag << ", max phase rollback " << worst_roll
       << " rad, closed-form rel err " << worst_closed;
    o.detail = ss.str();
    return o;
}

// ---- 2. CSI loop closure ----------------------------------------------------

Outcome csi_loop_closure() {
    simenv::Scenario s;
    s.tx = {0.0, 0.25};
    s.aps.push_back({{0.0, 0.0}, 90.0});
    s.chirp.fs_hz = 2e6;
    s.snr_db = std::numeric_limits<double>::infinity();
    s.seed = 9;

    auto stream = rng::substream(9, {1});
    double worst = 0.0;
    for (int n_paths : {1, 2, 4, 6}) {
        std::vector<simenv::Path> paths;
        for (int p = 0; p < n_paths; ++p) {
            simenv::Path path;
            path.alpha = std::polar(stream.uniform(0.5, 1.0), stream.uniform(-kPi, kPi));
            path.tau_s = stream.uniform(0.2e-9, 0.8e-9);
            path.theta_deg = -70.0 + 140.0 * p / std::max(1, n_paths - 1);
            paths.push_back(path);
        }
        simenv::SynthesisOptions opts;
        opts.add_noise = false;
        opts.apply_offsets = false;
        const auto caps = simenv::synthesize_from_paths(paths, s, 0, opts);
        const auto extracted = csi::csi_from_captures(caps, s.chirp, s.plan, s.geometry);
        const auto model = csi::csi_from_paths(paths, s.plan, s.geometry);
        worst = std::max(worst, rel_error(extracted.values, model.values));
    }
    Outcome o;
    o.pass = worst < 1e-6;
    o.detail = "max relative error vs the narrowband model " + std::to_string(worst) +
               " (P in {1,2,4,6})";
    return o;
}

// ---- 3. synchronization recovery -------------------------------------------

simenv::Scenario sync_scene() {
    simenv::Scenario s;
    s.tx = {3.0, 8.0};
    s.aps.push_back({{0.0, 0.0}, 90.0});
    s.reflectors = {{6.0, 5.0}};  // one reflector: slowly varying 2-path channel
    s.snr_db = 10.0;
    return s;
}

Outcome sync_recovery() {
    // Part 1: offset-injection recovery on the default non-overlapped plan.
    std::vector<double> phase_errors;
    for (int t = 0; t < 500; ++t) {
        auto s = sync_scene();
        s.seed = 100000 + t;
        const auto caps = simenv::synthesize_captures(s, 0);
        const auto raw = csi::csi_from_captures(caps, s.chirp, s.plan, s.geometry);
        const auto sol =
            sync::synchronize(csi::curves_from_captures(caps, s.chirp, s.plan), s.plan);
        const auto synced = sync::apply_sync(raw, sol);

        simenv::SynthesisOptions clean;
        clean.apply_offsets = false;
        const auto ref = csi::csi_from_captures(
            simenv::synthesize_from_paths(simenv::geometry_to_paths(s, 0), s, 0, clean),
            s.chirp, s.plan, s.geometry);

        // Remove the one common constant, then collect elementwise errors.
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < synced.values.size(); ++i)
            acc += synced.values[i] * std::conj(ref.values[i]);
        const double common = std::arg(acc);
        for (std::size_t i = 0; i < synced.values.size(); ++i)
            phase_errors.push_back(std::abs(
                wrap_pi(std::arg(synced.values[i] * std::conj(ref.values[i])) - common)));
    }
    const double med_phase = median_of(phase_errors);

    // Part 2: paired overlapped vs non-overlapped AoA, one dataset. A
    // 15-channel 100 kHz-spaced capture synchronizes through its overlaps;
    // its odd channels form the non-overlapped dataset that must bridge.
    simenv::ChannelPlan plan_ov;
    plan_ov.spacing_hz = 100e3;
    plan_ov.count = 15;
    simenv::ChannelPlan plan_nov;  // default: 8 channels at 200 kHz

    // Noise-matched subspace threshold (see the note in criterion 6).
    estimators::EstimatorOptions es_opts;
    es_opts.subspace_threshold = 1e-3;

    std::vector<double> err_ov, err_nov;
    const std::vector<int> odd = {0, 2, 4, 6, 8, 10, 12, 14};
    for (int t = 0; t < 200; ++t) {
        auto s = sync_scene();
        s.plan = plan_ov;
        s.seed = 7000 + t;
        const double truth = wrap_deg(simenv::bearing_deg(s.aps[0].position, s.tx) -
                                      s.aps[0].boresight_deg);

        const auto caps = simenv::synthesize_captures(s, 0);
        const auto raw = csi::csi_from_captures(caps, s.chirp, s.plan, s.geometry);
        const auto curves = csi::curves_from_captures(caps, s.chirp, s.plan);

        // Overlapped route: synchronize all 15, then take the odd channels.
        const auto synced_ov = sync::apply_sync(raw, sync::synchronize(curves, s.plan));
        const auto csi_ov = csi::select_channels(synced_ov, odd, plan_nov);
        err_ov.push_back(harness::min_angle_error(
            estimators::esprit_conjugated(csi_ov, es_opts).angles_deg, truth));

        // Non-overlapped route: only the odd channels exist; bridge them.
        std::vector<csi::PhaseCurve> curves_nov;
        for (std::size_t j = 0; j < odd.size(); ++j) {
            auto c = curves[odd[j]];
            c.channel_index = static_cast<int>(j);
            curves_nov.push_back(std::move(c));
        }
        auto raw_nov = csi::select_channels(raw, odd, plan_nov);
        raw_nov.synchronized = false;
        const auto synced_nov =
            sync::apply_sync(raw_nov, sync::synchronize(curves_nov, plan_nov));
        err_nov.push_back(harness::min_angle_error(
            estimators::esprit_conjugated(synced_nov, es_opts).angles_deg, truth));
    }
    const double degradation = median_of(err_nov) - median_of(err_ov);

    Outcome o;
    o.pass = med_phase < 0.1 && degradation <= 0.3;
    std::ostringstream ss;
    ss << "median corrected-CSI phase error " << med_phase << " rad (500 trials); "
       << "AoA medians ov " << median_of(err_ov) << " deg / non-ov " << median_of(err_nov)
       << " deg, degradation " << degradation << " deg";
    o.detail = ss.str();
    return o;
}

// ---- 4. conjugate rank ------------------------------------------------------

Outcome conjugate_rank() {
    std::vector<simenv::Path> paths;
    const double thetas[6] = {-75.0, -45.0, -15.0, 15.0, 45.0, 75.0};
    const double taus[6] = {0.10e-6, 0.93e-6, 1.77e-6, 2.60e-6, 3.43e-6, 4.27e-6};
    auto stream = rng::substream(4, {4});
    for (int p = 0; p < 6; ++p)
        paths.push_back({std::polar(stream.uniform(0.7, 1.0), stream.uniform(-kPi, kPi)),
                         taus[p], thetas[p]});
    const auto m = csi::csi_from_paths(paths, {}, {});

    const auto conj = estimators::esprit_conjugated(m);
    int conj_rank = 0;
    for (double e : conj.eigenvalues)
        if (e > 1e-6 * conj.eigenvalues[0]) ++conj_rank;

    const auto conv = estimators::esprit_conventional(m);
    int conv_rank = 0;
    for (double e : conv.eigenvalues)
        if (e > 1e-6 * conv.eigenvalues[0]) ++conv_rank;

    Outcome o;
    o.pass = conj_rank == 6 && conv_rank <= 4;
    o.detail = "conjugated rank " + std::to_string(conj_rank) + " (want 6), conventional rank " +
               std::to_string(conv_rank) + " (want <= 4)";
    return o;
}

// ---- 5. AoA accuracy ordering ----------------------------------------------

Outcome aoa_ordering() {
    harness::RunConfig cfg;
    cfg.scenario.tx = {6.0, 9.0};
    cfg.scenario.aps = {{{12.5, 0.5}, 90.0}, {{1.0, 7.5}, 0.0}};
    cfg.scenario.reflectors = {{2.0, 12.0}, {20.0, 3.0}, {24.0, 10.0}, {9.0, 14.5}, {16.0, 8.0}};
    cfg.scenario.snr_db = 10.0;
    cfg.scenario.seed = 52;
    cfg.scenario.reflection_loss = 0.9;  // indoor-style: strong reflectors
    cfg.estimator.subspace_threshold = 1e-3;
    cfg.run.trials = 200;
    cfg.run.randomize_tx = true;
    cfg.run.tx_box[0] = 3.0;
    cfg.run.tx_box[1] = 3.0;
    cfg.run.tx_box[2] = 22.0;
    cfg.run.tx_box[3] = 13.0;
    cfg.run.methods = {estimators::Method::Baseline, estimators::Method::MusicJoint,
                       estimators::Method::EspritConjugated};

    const auto results = harness::run_trials(cfg);
    std::vector<double> base, music, conj;
    for (const auto& r : results) {
        if (r.failed) continue;
        for (const auto& ap : r.aps) {
            if (std::isnan(ap.truth_direct_deg) || !std::isfinite(ap.aoa_error_deg)) continue;
            if (r.method == estimators::Method::Baseline) base.push_back(ap.aoa_error_deg);
            if (r.method == estimators::Method::MusicJoint) music.push_back(ap.aoa_error_deg);
            if (r.method == estimators::Method::EspritConjugated)
                conj.push_back(ap.aoa_error_deg);
        }
    }
    const double mb = median_of(base), mm = median_of(music), mc = median_of(conj);
    Outcome o;
    o.pass = mc * 1.5 <= mb && mc < mm;
    std::ostringstream ss;
    ss << "median AoA error: conjugated " << mc << " deg, baseline " << mb << " deg (ratio "
       << mb / mc << ", want >= 1.5), joint AoA-ToF " << mm << " deg";
    o.detail = ss.str();
    return o;
}

// ---- 6. ToF limitation ------------------------------------------------------

Outcome tof_limitation() {
    simenv::Scenario shell;
    shell.tx = {0.0, 10.0};
    shell.aps.push_back({{0.0, 0.0}, 90.0});
    shell.snr_db = 20.0;  // per-sample capture SNR, as in criteria 3 and 5

    // Subspace threshold matched to this pipeline's noise floor (pulse
    // compression leaves CSI errors ~60 dB down; the 1e-2 default is sized
    // for hardware-grade CSI and would discard the weak-but-real second
    // eigenvalue near the conjugate-degenerate phase draws).
    estimators::EstimatorOptions es_opts;
    es_opts.subspace_threshold = 1e-3;

    estimators::MusicGrid grid;
    int music_merged = 0, esprit_ok = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        auto s = shell;
        s.seed = 3100 + t;
        auto stream = rng::substream(s.seed, {66});
        std::vector<simenv::Path> paths{
            {std::polar(0.9, stream.uniform(-kPi, kPi)), 0.40e-6, -20.0},
            {std::polar(0.55, stream.uniform(-kPi, kPi)), 0.50e-6, 35.0}};
        const auto caps = simenv::synthesize_from_paths(paths, s, 0);
        auto raw = csi::csi_from_captures(caps, s.chirp, s.plan, s.geometry);
        const auto sol =
            sync::synchronize(csi::curves_from_captures(caps, s.chirp, s.plan), s.plan);
        const auto synced = sync::apply_sync(raw, sol);

        const auto mu = estimators::music_joint(synced, grid, 2);
        const bool music_resolved = harness::min_angle_error(mu.angles_deg, -20.0) <= 2.0 &&
                                    harness::min_angle_error(mu.angles_deg, 35.0) <= 2.0;
        if (!music_resolved) ++music_merged;

        const auto es = estimators::esprit_conjugated(synced, es_opts);
        if (harness::min_angle_error(es.angles_deg, -20.0) <= 2.0 &&
            harness::min_angle_error(es.angles_deg, 35.0) <= 2.0)
            ++esprit_ok;
    }
    Outcome o;
    o.pass = music_merged >= 90 && esprit_ok >= 90;
    std::ostringstream ss;
    ss << "joint AoA-ToF merged " << music_merged << "/100 (want >= 90); conjugated ESPRIT "
       << "recovered both angles " << esprit_ok << "/100 (want >= 90); delta tau 100 ns";
    o.detail = ss.str();
    return o;
}

// ---- 7. fusion ablation -----------------------------------------------------

Outcome fusion_ablation() {
    simenv::Scenario s;
    s.tx = {50.0, 30.0};
    // corner placement, boresights toward the field center; fusion order
    // C, D, B, A
    s.aps = {{{5.0, 5.0}, 29.0},      // C
             {{95.0, 5.0}, 151.0},    // D
             {{95.0, 55.0}, 209.0},   // B
             {{5.0, 55.0}, 331.0}};   // A

    fusion::FusionConfig cfg;
    cfg.sigma_deg = 3.0;
    cfg.cell_m = 0.5;
    cfg.grid = fusion::grid_for_scenario(s, 0.5, 10.0);

    std::vector<double> err2, err3, err4;
    for (int t = 0; t < 200; ++t) {
        auto pos = rng::substream(606, {static_cast<std::uint64_t>(t), 1});
        const simenv::Point tx{pos.uniform(12.0, 88.0), pos.uniform(10.0, 50.0)};
        std::vector<fusion::Heatmap> maps;
        bool usable = true;
        for (std::size_t g = 0; g < s.aps.size(); ++g) {
            const double truth =
                wrap_deg(simenv::bearing_deg(s.aps[g].position, tx) - s.aps[g].boresight_deg);
            if (std::abs(truth) >= simenv::kFieldOfViewDeg) {
                usable = false;
                break;
            }
            auto noise = rng::substream(606, {static_cast<std::uint64_t>(t), 2, g});
            estimators::AoaEstimate est;
            est.method = estimators::Method::Injected;
            est.angles_deg.push_back(truth + cfg.sigma_deg * noise.randn());
            maps.push_back(fusion::heatmap_for_ap(s.aps[g], est, cfg));
        }
        if (!usable) continue;
        auto err = [&](const std::vector<fusion::Heatmap>& subset) {
            const auto loc = fusion::locate(fusion::fuse(subset));
            return std::hypot(loc.x - tx.x, loc.y - tx.y);
        };
        err2.push_back(err({maps[0], maps[1]}));
        err3.push_back(err({maps[0], maps[1], maps[2]}));
        err4.push_back(err(maps));
    }
    const double m2 = median_of(err2), m3 = median_of(err3), m4 = median_of(err4);
    Outcome o;
    o.pass = m4 < m3 && m3 < m2 && m4 < 6.0;
    std::ostringstream ss;
    ss << "median localization error: 2 APs " << m2 << " m, 3 APs " << m3 << " m, 4 APs " << m4
       << " m (want m4 < m3 < m2 and m4 < 6 m; " << err4.size() << " usable trials)";
    o.detail = ss.str();
    return o;
}

// ---- 8. determinism and service parity --------------------------------------

Outcome determinism_and_parity() {
    harness::RunConfig cfg;
    cfg.scenario.tx = {6.0, 9.0};
    cfg.scenario.aps = {{{12.5, 0.5}, 90.0},
                        {{1.0, 7.5}, 0.0},
                        {{24.0, 7.5}, 180.0},
                        {{12.5, 14.5}, 270.0}};
    cfg.scenario.reflectors = {{2.0, 12.0}, {20.0, 3.0}};
    cfg.scenario.snr_db = 15.0;
    cfg.scenario.seed = 88;
    cfg.run.trials = 2;
    cfg.run.methods = {estimators::Method::EspritConjugated};

    // Repeated seeded batch runs must be byte-identical.
    const auto run_a = harness::run_trials(cfg);
    const auto run_b = harness::run_trials(cfg);
    bool identical = run_a.size() == run_b.size();
    for (std::size_t i = 0; identical && i < run_a.size(); ++i)
        identical = harness::result_to_json_line(run_a[i], "acc") ==
                    harness::result_to_json_line(run_b[i], "acc");

    // Service replay vs the batch components on the same float32 captures.
    fusion::FusionConfig fcfg = cfg.fusion;
    fcfg.grid = cfg.resolve_grid();
    harness::IngestPipeline pipeline(cfg);
    std::vector<std::string> emitted;
    std::vector<fusion::Heatmap> maps;
    for (std::size_t g = 0; g < cfg.scenario.aps.size(); ++g) {
        auto caps = simenv::synthesize_captures(cfg.scenario, static_cast<int>(g));
        for (auto& cap : caps) {
            harness::UploadRecord rec;
            rec.ap = static_cast<int>(g);
            rec.ts = 0.1 + 0.03 * cap.channel_index;
            rec.channel = cap.channel_index;
            rec.antenna = cap.antenna_index;
            rec.fc_hz = cap.center_freq_hz;
            rec.iq = cap.samples;
            pipeline.feed_line(harness::record_to_line(rec), emitted);

            for (auto& v : cap.samples)
                v = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
        }
        const auto est =
            harness::process_ap_captures(caps, cfg, estimators::Method::EspritConjugated);
        maps.push_back(fusion::heatmap_for_ap(cfg.scenario.aps[g], est, fcfg));
    }
    pipeline.flush(emitted);
    bool parity = false;
    double sx = 0, sy = 0;
    const auto batch_loc = fusion::locate(fusion::fuse(maps));
    for (const auto& line : emitted) {
        const auto j = nlohmann::json::parse(line);
        if (j.at("type") != "estimate") continue;
        sx = j.at("est")[0].get<double>();
        sy = j.at("est")[1].get<double>();
        parity = sx == batch_loc.x && sy == batch_loc.y;
    }

    Outcome o;
    o.pass = identical && parity;
    std::ostringstream ss;
    ss << "seeded runs byte-identical: " << (identical ? "yes" : "NO") << "; service estimate ("
       << sx << ", " << sy << ") vs batch (" << batch_loc.x << ", " << batch_loc.y
       << "): " << (parity ? "identical" : "MISMATCH");
    o.detail = ss.str();
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_sec;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"chirp algebra (rollback, unit magnitude, closed forms)", 1.0, chirp_algebra},
        {"CSI loop closure vs narrowband model (1e-6)", 10.0, csi_loop_closure},
        {"synchronization recovery and bridging degradation", 120.0, sync_recovery},
        {"conjugate covariance rank 6 vs conventional 4", 5.0, conjugate_rank},
        {"AoA accuracy ordering (conjugated < baseline/1.5, < joint)", 300.0, aoa_ordering},
        {"ToF limitation: merged joint peak vs resolved conjugated", 120.0, tof_limitation},
        {"fusion ablation: 4 < 3 < 2 APs, 4-AP median < 6 m", 180.0, fusion_ablation},
        {"end-to-end determinism and service parity", 60.0, determinism_and_parity},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = sec < criteria[i].budget_sec;
        const bool pass = o.pass && in_budget;
        if (!pass) ++failures;
        std::printf("[%s] criterion %zu: %s — %s (%.2f s, budget %.0f s)\n",
                    pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), sec,
                    criteria[i].budget_sec);
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
