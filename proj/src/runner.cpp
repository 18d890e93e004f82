#include "seirios/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "seirios/csi.hpp"
#include "seirios/fusion.hpp"
#include "seirios/mathutil.hpp"
#include "seirios/metrics.hpp"
#include "seirios/rng.hpp"
#include "seirios/sync.hpp"

namespace seirios::harness {

namespace {

enum : std::uint64_t { kTagTrial = 101, kTagTxPos = 102, kTagInject = 103 };

double direct_truth_deg(const simenv::Scenario& scenario, int ap) {
    const double theta = wrap_deg(
        simenv::bearing_deg(scenario.aps[ap].position, scenario.tx) -
        scenario.aps[ap].boresight_deg);
    if (std::abs(theta) >= simenv::kFieldOfViewDeg) return std::nan("");
    return theta;
}

estimators::AoaEstimate injected_estimate(const simenv::Scenario& scenario, int ap, int trial,
                                          double sigma_deg, std::uint64_t master_seed) {
    const double truth = direct_truth_deg(scenario, ap);
    if (std::isnan(truth))
        throw std::runtime_error("injected estimate: direct path out of view for AP " +
                                 std::to_string(ap));
    auto stream = rng::substream(master_seed, {kTagInject, static_cast<std::uint64_t>(trial),
                                               static_cast<std::uint64_t>(ap)});
    estimators::AoaEstimate est;
    est.method = estimators::Method::Injected;
    est.angles_deg.push_back(truth + sigma_deg * stream.randn());
    return est;
}

struct TrialContext {
    simenv::Scenario scenario;
    std::vector<std::vector<phy::IqCapture>> captures;  // per AP
};

TrialContext make_context(const RunConfig& cfg, int trial, bool need_captures) {
    TrialContext ctx;
    ctx.scenario = trial_scenario(cfg, trial);
    if (need_captures) {
        ctx.captures.resize(ctx.scenario.aps.size());
        for (std::size_t g = 0; g < ctx.scenario.aps.size(); ++g)
            ctx.captures[g] = simenv::synthesize_captures(ctx.scenario, static_cast<int>(g));
    }
    return ctx;
}

TrialResult run_one(const RunConfig& cfg, const TrialContext& ctx, int trial,
                    estimators::Method method, const fusion::GridSpec& grid) {
    TrialResult result;
    result.trial = trial;
    result.method = method;
    result.tx = ctx.scenario.tx;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fusion::FusionConfig fcfg = cfg.fusion;
        fcfg.grid = grid;

        std::vector<fusion::Heatmap> maps;
        for (std::size_t g = 0; g < ctx.scenario.aps.size(); ++g) {
            ApTrialResult ap;
            ap.ap = static_cast<int>(g);
            ap.estimate =
                method == estimators::Method::Injected
                    ? injected_estimate(ctx.scenario, ap.ap, trial, cfg.run.inject_sigma_deg,
                                        cfg.scenario.seed)
                    : process_ap_captures(ctx.captures[g], cfg, method);
            ap.truth_direct_deg = direct_truth_deg(ctx.scenario, ap.ap);
            ap.aoa_error_deg = std::isnan(ap.truth_direct_deg)
                                   ? std::nan("")
                                   : min_angle_error(ap.estimate.angles_deg, ap.truth_direct_deg);
            if (!ap.estimate.angles_deg.empty())
                maps.push_back(fusion::heatmap_for_ap(ctx.scenario.aps[g], ap.estimate, fcfg));
            result.aps.push_back(std::move(ap));
        }
        if (maps.size() < 2)
            throw std::runtime_error("fewer than 2 APs produced AoA estimates");
        const auto loc = fusion::locate(fusion::fuse(maps), cfg.fusion.locator);
        result.est_x = loc.x;
        result.est_y = loc.y;
        result.peak = loc.value;
        result.loc_error_m = std::hypot(loc.x - ctx.scenario.tx.x, loc.y - ctx.scenario.tx.y);
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
    }
    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

bool needs_captures(const RunConfig& cfg) {
    for (auto m : cfg.run.methods)
        if (m != estimators::Method::Injected) return true;
    return false;
}

}  // namespace

simenv::Scenario trial_scenario(const RunConfig& cfg, int trial) {
    simenv::Scenario s = cfg.scenario;
    auto seed_stream = rng::substream(cfg.scenario.seed,
                                      {kTagTrial, static_cast<std::uint64_t>(trial)});
    s.seed = seed_stream.next_u64();
    if (cfg.run.randomize_tx) {
        auto pos = rng::substream(cfg.scenario.seed,
                                  {kTagTxPos, static_cast<std::uint64_t>(trial)});
        s.tx.x = pos.uniform(cfg.run.tx_box[0], cfg.run.tx_box[2]);
        s.tx.y = pos.uniform(cfg.run.tx_box[1], cfg.run.tx_box[3]);
    }
    return s;
}

estimators::AoaEstimate process_ap_captures(const std::vector<phy::IqCapture>& captures,
                                            const RunConfig& cfg, estimators::Method method) {
    const auto& scenario = cfg.scenario;
    auto raw = csi::csi_from_captures(captures, scenario.chirp, scenario.plan, scenario.geometry);
    const auto curves =
        csi::curves_from_captures(captures, scenario.chirp, scenario.plan, csi::kDefaultTrimHz);
    const auto sol = sync::synchronize(curves, scenario.plan);
    const auto synced = sync::apply_sync(raw, sol);

    switch (method) {
        case estimators::Method::Baseline:
            return estimators::baseline_aoa(synced);
        case estimators::Method::MusicJoint:
            return estimators::music_joint(synced, cfg.music_grid, cfg.run.music_paths);
        case estimators::Method::EspritConventional:
            return estimators::esprit_conventional(synced, cfg.estimator);
        case estimators::Method::EspritConjugated:
            return estimators::esprit_conjugated(synced, cfg.estimator);
        case estimators::Method::Injected:
            throw std::invalid_argument("injected method has no capture pipeline");
    }
    throw std::invalid_argument("unknown method");
}

std::vector<TrialResult> run_trials(const RunConfig& cfg) {
    cfg.scenario.validate();
    const auto grid = cfg.resolve_grid();
    const bool captures = needs_captures(cfg);
    const int n_methods = static_cast<int>(cfg.run.methods.size());
    std::vector<TrialResult> results(static_cast<std::size_t>(cfg.run.trials) * n_methods);

#pragma omp parallel for schedule(dynamic)
    for (int trial = 0; trial < cfg.run.trials; ++trial) {
        TrialContext ctx;
        try {
            ctx = make_context(cfg, trial, captures);
        } catch (const std::exception& e) {
            for (int m = 0; m < n_methods; ++m) {
                TrialResult& r = results[static_cast<std::size_t>(trial) * n_methods + m];
                r.trial = trial;
                r.method = cfg.run.methods[m];
                r.failed = true;
                r.error = e.what();
            }
            continue;
        }
        for (int m = 0; m < n_methods; ++m)
            results[static_cast<std::size_t>(trial) * n_methods + m] =
                run_one(cfg, ctx, trial, cfg.run.methods[m], grid);
    }
    return results;
}

std::vector<TrialResult> run_trials_serial(const RunConfig& cfg) {
    cfg.scenario.validate();
    const auto grid = cfg.resolve_grid();
    const bool captures = needs_captures(cfg);
    std::vector<TrialResult> results;
    for (int trial = 0; trial < cfg.run.trials; ++trial) {
        TrialContext ctx;
        try {
            ctx = make_context(cfg, trial, captures);
        } catch (const std::exception& e) {
            for (auto method : cfg.run.methods) {
                TrialResult r;
                r.trial = trial;
                r.method = method;
                r.failed = true;
                r.error = e.what();
                results.push_back(std::move(r));
            }
            continue;
        }
        for (auto method : cfg.run.methods)
            results.push_back(run_one(cfg, ctx, trial, method, grid));
    }
    return results;
}

std::string result_to_json_line(const TrialResult& result, const std::string& scenario_id) {
    nlohmann::json j;
    j["trial"] = result.trial;
    j["scenario"] = scenario_id;
    j["method"] = estimators::method_name(result.method);
    j["tx"] = {result.tx.x, result.tx.y};
    if (result.failed) {
        j["failed"] = true;
        j["error"] = result.error;
    } else {
        j["failed"] = false;
        j["est"] = {result.est_x, result.est_y};
        j["error_m"] = result.loc_error_m;
        j["peak"] = result.peak;
    }
    j["aps"] = nlohmann::json::array();
    for (const auto& ap : result.aps) {
        nlohmann::json a;
        a["ap"] = ap.ap;
        a["angles_deg"] = ap.estimate.angles_deg;
        if (!ap.estimate.tofs_s.empty()) a["tofs_s"] = ap.estimate.tofs_s;
        if (!std::isnan(ap.truth_direct_deg)) {
            a["truth_deg"] = ap.truth_direct_deg;
            a["aoa_error_deg"] = ap.aoa_error_deg;
        }
        j["aps"].push_back(a);
    }
    return j.dump();
}

void write_results(const std::string& path, const std::vector<TrialResult>& results,
                   const std::string& scenario_id) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_results: cannot open " + path);
    for (const auto& r : results) f << result_to_json_line(r, scenario_id) << '\n';
}

}  // namespace seirios::harness
