#pragma once

#include <string>
#include <vector>

#include "seirios/estimators.hpp"
#include "seirios/fusion.hpp"
#include "seirios/simenv.hpp"

namespace seirios::harness {

struct RunOptions {
    int trials = 100;
    std::vector<estimators::Method> methods = {estimators::Method::EspritConjugated};
    int music_paths = 4;            // signal dimensions for the MUSIC search
    double inject_sigma_deg = 3.0;  // AoA noise of the injected (bypass) method
    bool randomize_tx = false;
    double tx_box[4] = {0.0, 0.0, 0.0, 0.0};  // x0, y0, x1, y1 when randomize_tx
    std::string scenario_id = "scenario";
};

struct ServiceOptions {
    double window_sec = 2.0;
    int port = 7600;
};

// One structured configuration document drives every entry point
// (batch runner, CLI subcommands, ingestion service). Schema version 1:
//
// {
//   "version": 1,
//   "scenario": {
//     "tx": [x, y],
//     "aps": [{"position": [x, y], "boresight_deg": b}, ...],
//     "reflectors": [[x, y], ...],
//     "plan": {"fc_base_hz", "spacing_hz", "count", "bw_hz"},
//     "geometry": {"antennas", "spacing_m", "wave_speed"},
//     "chirp": {"sf", "bw_hz", "fs_hz", "n_preamble"},
//     "snr_db": 10.0,                  // omit for noise-free
//     "seed": 1,
//     "direct_gain": 1.0, "reflection_loss": 0.5
//   },
//   "estimator": {"subspace_threshold", "use_mdl"},
//   "music": {"theta_min_deg", "theta_max_deg", "theta_step_deg",
//             "tau_min_s", "tau_max_s", "tau_step_s", "paths"},
//   "fusion": {"sigma_deg", "floor_nsigma", "cell_m", "padding_m",
//              "locator": "argmax" | "centroid",
//              "grid": {"origin": [x, y], "cell_m", "nx", "ny"}},  // optional
//   "run": {"trials", "methods": ["baseline", ...], "inject_sigma_deg",
//           "tx_random_box": [x0, y0, x1, y1], "scenario_id"},
//   "service": {"window_sec", "port"}
// }
//
// Every key is optional except "version"; omitted keys keep the defaults
// above. Unless "fusion.grid" is given, the grid is derived from the
// scenario bounding box (cell_m cells, padding_m margin).
struct RunConfig {
    int version = 1;
    simenv::Scenario scenario;
    estimators::EstimatorOptions estimator;
    estimators::MusicGrid music_grid;
    fusion::FusionConfig fusion;
    bool explicit_grid = false;
    RunOptions run;
    ServiceOptions service;

    // The fusion grid, honoring an explicit one.
    fusion::GridSpec resolve_grid() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json_text(const RunConfig& cfg);

}  // namespace seirios::harness
