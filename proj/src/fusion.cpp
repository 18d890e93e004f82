#include "seirios/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "seirios/mathutil.hpp"

namespace seirios::fusion {

static_assert(std::endian::native == std::endian::little,
              "binary heatmap I/O assumes a little-endian host");

double gaussian_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
}

double likelihood(double theta_deg, const std::vector<double>& estimates_deg, double sigma_deg) {
    if (estimates_deg.empty()) throw std::domain_error("likelihood: empty estimate list");
    double best = 0.0;
    for (double e : estimates_deg) best = std::max(best, gaussian_pdf(theta_deg, e, sigma_deg));
    return best;
}

GridSpec grid_for_scenario(const simenv::Scenario& scenario, double cell_m, double padding_m) {
    double xmin = scenario.tx.x, xmax = scenario.tx.x;
    double ymin = scenario.tx.y, ymax = scenario.tx.y;
    auto grow = [&](const simenv::Point& p) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    };
    for (const auto& ap : scenario.aps) grow(ap.position);
    for (const auto& r : scenario.reflectors) grow(r);

    GridSpec g;
    g.cell_m = cell_m;
    g.origin_x = xmin - padding_m;
    g.origin_y = ymin - padding_m;
    g.nx = static_cast<int>(std::ceil((xmax + padding_m - g.origin_x) / cell_m)) + 1;
    g.ny = static_cast<int>(std::ceil((ymax + padding_m - g.origin_y) / cell_m)) + 1;
    return g;
}

namespace {

void check_grid(const GridSpec& g) {
    if (g.nx <= 0 || g.ny <= 0 || !(g.cell_m > 0.0))
        throw std::invalid_argument("heatmap: degenerate grid");
}

// One cell of an AP's likelihood field. AoAs translate to straight-line
// bearing bands; the array aperture is negligible at grid scale.
double cell_value(const simenv::ApPose& pose, const std::vector<double>& angles,
                  const FusionConfig& cfg, double x, double y, double floor_value) {
    const double dx = x - pose.position.x;
    const double dy = y - pose.position.y;
    if (std::hypot(dx, dy) < 1e-6) return floor_value;  // bearing undefined at the AP itself
    const double theta = wrap_deg(rad2deg(std::atan2(dy, dx)) - pose.boresight_deg);
    if (std::abs(theta) >= simenv::kFieldOfViewDeg) return floor_value;
    return likelihood(theta, angles, cfg.sigma_deg);
}

}  // namespace

Heatmap heatmap_for_ap(const simenv::ApPose& pose, const estimators::AoaEstimate& estimate,
                       const FusionConfig& cfg) {
    check_grid(cfg.grid);
    if (estimate.angles_deg.empty())
        throw std::domain_error("heatmap_for_ap: empty angle estimate");
    const double floor_value = gaussian_pdf(cfg.floor_nsigma * cfg.sigma_deg, 0.0, cfg.sigma_deg);

    Heatmap map;
    map.grid = cfg.grid;
    map.values.assign(static_cast<std::size_t>(cfg.grid.nx) * cfg.grid.ny, 0.0);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < cfg.grid.ny; ++iy) {
        const double y = map.cell_y(iy);
        for (int ix = 0; ix < cfg.grid.nx; ++ix)
            map.at(ix, iy) =
                cell_value(pose, estimate.angles_deg, cfg, map.cell_x(ix), y, floor_value);
    }
    return map;
}

Heatmap heatmap_for_ap_serial(const simenv::ApPose& pose, const estimators::AoaEstimate& estimate,
                              const FusionConfig& cfg) {
    check_grid(cfg.grid);
    if (estimate.angles_deg.empty())
        throw std::domain_error("heatmap_for_ap: empty angle estimate");
    const double floor_value = gaussian_pdf(cfg.floor_nsigma * cfg.sigma_deg, 0.0, cfg.sigma_deg);

    Heatmap map;
    map.grid = cfg.grid;
    map.values.assign(static_cast<std::size_t>(cfg.grid.nx) * cfg.grid.ny, 0.0);
    for (int iy = 0; iy < cfg.grid.ny; ++iy) {
        const double y = map.cell_y(iy);
        for (int ix = 0; ix < cfg.grid.nx; ++ix)
            map.at(ix, iy) =
                cell_value(pose, estimate.angles_deg, cfg, map.cell_x(ix), y, floor_value);
    }
    return map;
}

Heatmap fuse(const std::vector<Heatmap>& maps) {
    if (maps.empty()) throw std::invalid_argument("fuse: need at least one map");
    const GridSpec& g = maps.front().grid;
    for (const auto& m : maps) {
        if (m.grid.nx != g.nx || m.grid.ny != g.ny || m.grid.cell_m != g.cell_m ||
            m.grid.origin_x != g.origin_x || m.grid.origin_y != g.origin_y)
            throw std::invalid_argument("fuse: heat maps must share one grid");
    }
    Heatmap out = maps.front();
    for (std::size_t m = 1; m < maps.size(); ++m)
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= maps[m].values[i];
    return out;
}

LocateResult locate(const Heatmap& map, Locator locator) {
    check_grid(map.grid);
    LocateResult best;
    best.value = -1.0;
    for (int iy = 0; iy < map.grid.ny; ++iy)
        for (int ix = 0; ix < map.grid.nx; ++ix) {
            const double v = map.at(ix, iy);
            if (v > best.value) {
                best.value = v;
                best.ix = ix;
                best.iy = iy;
                best.tied = false;
            } else if (v == best.value) {
                best.tied = true;
            }
        }
    const double floor_value = *std::min_element(map.values.begin(), map.values.end());
    const double peak = best.value;
    if (!(peak > floor_value) && map.values.size() > 1)
        throw std::runtime_error("locate: map carries no information (all cells at floor)");

    if (locator == Locator::ClusterCentroid) {
        // Value-weighted centroid of the half-peak connected region around
        // the argmax (4-neighborhood flood fill).
        std::vector<char> in(map.values.size(), 0);
        std::vector<std::pair<int, int>> stack{{best.ix, best.iy}};
        in[static_cast<std::size_t>(best.iy) * map.grid.nx + best.ix] = 1;
        double wx = 0.0, wy = 0.0, w = 0.0;
        const double thresh = 0.5 * peak;
        while (!stack.empty()) {
            auto [ix, iy] = stack.back();
            stack.pop_back();
            const double v = map.at(ix, iy);
            wx += v * map.cell_x(ix);
            wy += v * map.cell_y(iy);
            w += v;
            const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& d : nbr) {
                const int jx = ix + d[0], jy = iy + d[1];
                if (jx < 0 || jx >= map.grid.nx || jy < 0 || jy >= map.grid.ny) continue;
                const std::size_t idx = static_cast<std::size_t>(jy) * map.grid.nx + jx;
                if (in[idx] || map.values[idx] < thresh) continue;
                in[idx] = 1;
                stack.emplace_back(jx, jy);
            }
        }
        best.x = wx / w;
        best.y = wy / w;
        return best;
    }

    best.x = map.cell_x(best.ix);
    best.y = map.cell_y(best.iy);
    return best;
}

void write_heatmap_csv(std::ostream& os, const Heatmap& map) {
    os << "# seirios heatmap v1\n";
    os << "# origin " << map.grid.origin_x << ' ' << map.grid.origin_y << " cell "
       << map.grid.cell_m << " nx " << map.grid.nx << " ny " << map.grid.ny << '\n';
    for (int iy = 0; iy < map.grid.ny; ++iy) {
        for (int ix = 0; ix < map.grid.nx; ++ix) {
            if (ix) os << ',';
            os << map.at(ix, iy);
        }
        os << '\n';
    }
}

void write_heatmap_binary(const std::string& path, const Heatmap& map) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_heatmap_binary: cannot open " + path);
    auto put = [&](const void* p, std::size_t n) {
        f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    const double header_d[3] = {map.grid.origin_x, map.grid.origin_y, map.grid.cell_m};
    const std::uint64_t header_i[2] = {static_cast<std::uint64_t>(map.grid.nx),
                                       static_cast<std::uint64_t>(map.grid.ny)};
    put(header_d, sizeof header_d);
    put(header_i, sizeof header_i);
    std::vector<float> row(map.values.size());
    for (std::size_t i = 0; i < map.values.size(); ++i) row[i] = static_cast<float>(map.values[i]);
    put(row.data(), row.size() * sizeof(float));
    if (!f) throw std::runtime_error("write_heatmap_binary: write failed for " + path);
}

Heatmap read_heatmap_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_heatmap_binary: cannot open " + path);
    double header_d[3];
    std::uint64_t header_i[2];
    f.read(reinterpret_cast<char*>(header_d), sizeof header_d);
    f.read(reinterpret_cast<char*>(header_i), sizeof header_i);
    if (!f) throw std::runtime_error("read_heatmap_binary: truncated header in " + path);

    Heatmap map;
    map.grid.origin_x = header_d[0];
    map.grid.origin_y = header_d[1];
    map.grid.cell_m = header_d[2];
    map.grid.nx = static_cast<int>(header_i[0]);
    map.grid.ny = static_cast<int>(header_i[1]);
    check_grid(map.grid);
    std::vector<float> raw(static_cast<std::size_t>(map.grid.nx) * map.grid.ny);
    f.read(reinterpret_cast<char*>(raw.data()),
           static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!f) throw std::runtime_error("read_heatmap_binary: truncated values in " + path);
    map.values.assign(raw.begin(), raw.end());
    return map;
}

}  // namespace seirios::fusion
