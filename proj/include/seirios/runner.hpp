#pragma once

#include <string>
#include <vector>

#include "seirios/config.hpp"
#include "seirios/estimators.hpp"
#include "seirios/simenv.hpp"

namespace seirios::harness {

struct ApTrialResult {
    int ap = 0;
    estimators::AoaEstimate estimate;
    double truth_direct_deg = 0.0;  // NaN when the direct path is out of view
    double aoa_error_deg = 0.0;     // distance from truth to the closest estimate
};

struct TrialResult {
    int trial = 0;
    estimators::Method method = estimators::Method::Baseline;
    bool failed = false;
    std::string error;
    simenv::Point tx;  // actual transmitter position of this trial
    double est_x = 0.0;
    double est_y = 0.0;
    double peak = 0.0;
    double loc_error_m = 0.0;
    std::vector<ApTrialResult> aps;
    double elapsed_ms = 0.0;  // kept out of the persisted record
};

// The scenario of one trial: trial-specific seed, optionally a randomized
// transmitter position.
simenv::Scenario trial_scenario(const RunConfig& cfg, int trial);

// captures -> CSI -> phase curves -> synchronize -> AoA for one AP.
// The same path serves the batch runner and the ingestion service.
estimators::AoaEstimate process_ap_captures(const std::vector<phy::IqCapture>& captures,
                                            const RunConfig& cfg, estimators::Method method);

// Full batch: one TrialResult per (trial, method), trial-major order.
// Stage errors are caught per entry; the run continues.
std::vector<TrialResult> run_trials(const RunConfig& cfg);
std::vector<TrialResult> run_trials_serial(const RunConfig& cfg);

// Stable line-delimited record (no timing, so identical runs are
// byte-identical).
std::string result_to_json_line(const TrialResult& result, const std::string& scenario_id);

void write_results(const std::string& path, const std::vector<TrialResult>& results,
                   const std::string& scenario_id);

}  // namespace seirios::harness
