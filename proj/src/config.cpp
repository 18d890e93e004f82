#include "seirios/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace seirios::harness {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

simenv::Point point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("config: expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json point_to(const simenv::Point& p) { return json::array({p.x, p.y}); }

}  // namespace

fusion::GridSpec RunConfig::resolve_grid() const {
    if (explicit_grid) return fusion.grid;
    return fusion::grid_for_scenario(scenario, fusion.cell_m, fusion.padding_m);
}

RunConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;
    if (!j.contains("version")) throw std::invalid_argument("config: missing version key");
    cfg.version = j.at("version").get<int>();
    if (cfg.version != 1) throw std::invalid_argument("config: unsupported schema version");

    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        if (s.contains("tx")) cfg.scenario.tx = point_from(s.at("tx"));
        if (s.contains("aps")) {
            cfg.scenario.aps.clear();
            for (const auto& a : s.at("aps")) {
                simenv::ApPose pose;
                pose.position = point_from(a.at("position"));
                get_if(a, "boresight_deg", pose.boresight_deg);
                cfg.scenario.aps.push_back(pose);
            }
        }
        if (s.contains("reflectors")) {
            cfg.scenario.reflectors.clear();
            for (const auto& r : s.at("reflectors"))
                cfg.scenario.reflectors.push_back(point_from(r));
        }
        if (s.contains("plan")) {
            const json& p = s.at("plan");
            get_if(p, "fc_base_hz", cfg.scenario.plan.fc_base_hz);
            get_if(p, "spacing_hz", cfg.scenario.plan.spacing_hz);
            get_if(p, "count", cfg.scenario.plan.count);
            get_if(p, "bw_hz", cfg.scenario.plan.bw_hz);
        }
        if (s.contains("geometry")) {
            const json& g = s.at("geometry");
            get_if(g, "antennas", cfg.scenario.geometry.antennas);
            get_if(g, "spacing_m", cfg.scenario.geometry.spacing_m);
            get_if(g, "wave_speed", cfg.scenario.geometry.wave_speed);
        }
        if (s.contains("chirp")) {
            const json& c = s.at("chirp");
            get_if(c, "sf", cfg.scenario.chirp.sf);
            get_if(c, "bw_hz", cfg.scenario.chirp.bw_hz);
            get_if(c, "fs_hz", cfg.scenario.chirp.fs_hz);
            get_if(c, "n_preamble", cfg.scenario.chirp.n_preamble);
        } else {
            cfg.scenario.chirp.bw_hz = cfg.scenario.plan.bw_hz;
        }
        if (s.contains("snr_db") && !s.at("snr_db").is_null())
            cfg.scenario.snr_db = s.at("snr_db").get<double>();
        get_if(s, "seed", cfg.scenario.seed);
        get_if(s, "direct_gain", cfg.scenario.direct_gain);
        get_if(s, "reflection_loss", cfg.scenario.reflection_loss);
    }

    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        get_if(e, "subspace_threshold", cfg.estimator.subspace_threshold);
        get_if(e, "use_mdl", cfg.estimator.use_mdl);
        get_if(e, "mdl_snapshots", cfg.estimator.mdl_snapshots);
    }
    if (j.contains("music")) {
        const json& m = j.at("music");
        get_if(m, "theta_min_deg", cfg.music_grid.theta_min_deg);
        get_if(m, "theta_max_deg", cfg.music_grid.theta_max_deg);
        get_if(m, "theta_step_deg", cfg.music_grid.theta_step_deg);
        get_if(m, "tau_min_s", cfg.music_grid.tau_min_s);
        get_if(m, "tau_max_s", cfg.music_grid.tau_max_s);
        get_if(m, "tau_step_s", cfg.music_grid.tau_step_s);
        get_if(m, "paths", cfg.run.music_paths);
    }
    if (j.contains("fusion")) {
        const json& f = j.at("fusion");
        get_if(f, "sigma_deg", cfg.fusion.sigma_deg);
        get_if(f, "floor_nsigma", cfg.fusion.floor_nsigma);
        get_if(f, "cell_m", cfg.fusion.cell_m);
        get_if(f, "padding_m", cfg.fusion.padding_m);
        if (f.contains("locator")) {
            const std::string loc = f.at("locator").get<std::string>();
            if (loc == "argmax")
                cfg.fusion.locator = fusion::Locator::Argmax;
            else if (loc == "centroid")
                cfg.fusion.locator = fusion::Locator::ClusterCentroid;
            else
                throw std::invalid_argument("config: unknown locator " + loc);
        }
        if (f.contains("grid")) {
            const json& g = f.at("grid");
            const auto origin = point_from(g.at("origin"));
            cfg.fusion.grid.origin_x = origin.x;
            cfg.fusion.grid.origin_y = origin.y;
            cfg.fusion.grid.cell_m = g.at("cell_m").get<double>();
            cfg.fusion.grid.nx = g.at("nx").get<int>();
            cfg.fusion.grid.ny = g.at("ny").get<int>();
            cfg.explicit_grid = true;
        }
    }
    if (j.contains("run")) {
        const json& r = j.at("run");
        get_if(r, "trials", cfg.run.trials);
        get_if(r, "inject_sigma_deg", cfg.run.inject_sigma_deg);
        get_if(r, "scenario_id", cfg.run.scenario_id);
        if (r.contains("methods")) {
            cfg.run.methods.clear();
            for (const auto& m : r.at("methods"))
                cfg.run.methods.push_back(estimators::method_from_name(m.get<std::string>()));
        }
        if (r.contains("tx_random_box")) {
            const auto& b = r.at("tx_random_box");
            if (!b.is_array() || b.size() != 4)
                throw std::invalid_argument("config: tx_random_box must be [x0, y0, x1, y1]");
            for (int i = 0; i < 4; ++i) cfg.run.tx_box[i] = b[i].get<double>();
            cfg.run.randomize_tx = true;
        }
    }
    if (j.contains("service")) {
        const json& s = j.at("service");
        get_if(s, "window_sec", cfg.service.window_sec);
        get_if(s, "port", cfg.service.port);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const RunConfig& cfg) {
    json j;
    j["version"] = cfg.version;

    json s;
    s["tx"] = point_to(cfg.scenario.tx);
    s["aps"] = json::array();
    for (const auto& ap : cfg.scenario.aps)
        s["aps"].push_back({{"position", point_to(ap.position)},
                            {"boresight_deg", ap.boresight_deg}});
    s["reflectors"] = json::array();
    for (const auto& r : cfg.scenario.reflectors) s["reflectors"].push_back(point_to(r));
    s["plan"] = {{"fc_base_hz", cfg.scenario.plan.fc_base_hz},
                 {"spacing_hz", cfg.scenario.plan.spacing_hz},
                 {"count", cfg.scenario.plan.count},
                 {"bw_hz", cfg.scenario.plan.bw_hz}};
    s["geometry"] = {{"antennas", cfg.scenario.geometry.antennas},
                     {"spacing_m", cfg.scenario.geometry.spacing_m},
                     {"wave_speed", cfg.scenario.geometry.wave_speed}};
    s["chirp"] = {{"sf", cfg.scenario.chirp.sf},
                  {"bw_hz", cfg.scenario.chirp.bw_hz},
                  {"fs_hz", cfg.scenario.chirp.fs_hz},
                  {"n_preamble", cfg.scenario.chirp.n_preamble}};
    if (std::isfinite(cfg.scenario.snr_db)) s["snr_db"] = cfg.scenario.snr_db;
    s["seed"] = cfg.scenario.seed;
    s["direct_gain"] = cfg.scenario.direct_gain;
    s["reflection_loss"] = cfg.scenario.reflection_loss;
    j["scenario"] = s;

    j["estimator"] = {{"subspace_threshold", cfg.estimator.subspace_threshold},
                      {"use_mdl", cfg.estimator.use_mdl},
                      {"mdl_snapshots", cfg.estimator.mdl_snapshots}};
    j["music"] = {{"theta_min_deg", cfg.music_grid.theta_min_deg},
                  {"theta_max_deg", cfg.music_grid.theta_max_deg},
                  {"theta_step_deg", cfg.music_grid.theta_step_deg},
                  {"tau_min_s", cfg.music_grid.tau_min_s},
                  {"tau_max_s", cfg.music_grid.tau_max_s},
                  {"tau_step_s", cfg.music_grid.tau_step_s},
                  {"paths", cfg.run.music_paths}};
    json f = {{"sigma_deg", cfg.fusion.sigma_deg},
              {"floor_nsigma", cfg.fusion.floor_nsigma},
              {"cell_m", cfg.fusion.cell_m},
              {"padding_m", cfg.fusion.padding_m},
              {"locator", cfg.fusion.locator == fusion::Locator::Argmax ? "argmax" : "centroid"}};
    if (cfg.explicit_grid)
        f["grid"] = {{"origin", json::array({cfg.fusion.grid.origin_x, cfg.fusion.grid.origin_y})},
                     {"cell_m", cfg.fusion.grid.cell_m},
                     {"nx", cfg.fusion.grid.nx},
                     {"ny", cfg.fusion.grid.ny}};
    j["fusion"] = f;

    json r = {{"trials", cfg.run.trials},
              {"inject_sigma_deg", cfg.run.inject_sigma_deg},
              {"scenario_id", cfg.run.scenario_id}};
    r["methods"] = json::array();
    for (auto m : cfg.run.methods) r["methods"].push_back(estimators::method_name(m));
    if (cfg.run.randomize_tx)
        r["tx_random_box"] = json::array(
            {cfg.run.tx_box[0], cfg.run.tx_box[1], cfg.run.tx_box[2], cfg.run.tx_box[3]});
    j["run"] = r;

    j["service"] = {{"window_sec", cfg.service.window_sec}, {"port", cfg.service.port}};
    return j.dump(2);
}

}  // namespace seirios::harness
