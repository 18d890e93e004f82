#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "seirios/estimators.hpp"
#include "seirios/simenv.hpp"

namespace seirios::fusion {

struct GridSpec {
    double origin_x = 0.0;  // center of cell (0, 0)
    double origin_y = 0.0;
    double cell_m = 0.5;
    int nx = 0;
    int ny = 0;
};

// Planar likelihood grid, per AP or fused across APs. Values are
// nonnegative; the argmax cell is the location estimate.
struct Heatmap {
    GridSpec grid;
    std::vector<double> values;  // row-major [iy][ix]

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    double cell_x(int ix) const { return grid.origin_x + ix * grid.cell_m; }
    double cell_y(int iy) const { return grid.origin_y + iy * grid.cell_m; }
};

enum class Locator { Argmax, ClusterCentroid };

struct FusionConfig {
    double sigma_deg = 4.0;      // AoA error model width, good range 3..5 degrees
    double floor_nsigma = 4.0;   // out-of-view cells get the pdf at this many sigma
    double cell_m = 0.5;
    double padding_m = 10.0;     // bounding-box padding when deriving grids
    GridSpec grid;               // fused maps must share one grid
    Locator locator = Locator::Argmax;
};

double gaussian_pdf(double x, double mu, double sigma);

// max over the estimates of the Gaussian pdf f(theta | theta_hat_i, sigma^2).
// Throws std::domain_error on an empty estimate list.
double likelihood(double theta_deg, const std::vector<double>& estimates_deg, double sigma_deg);

// Grid covering all scenario positions padded by `padding_m`, cell size
// `cell_m`, origin on the padded lower-left corner.
GridSpec grid_for_scenario(const simenv::Scenario& scenario, double cell_m, double padding_m);

// Bearing field of one AP turned into a likelihood map. Cells behind the
// field of view or on top of the AP get a floor value instead of zero so
// product fusion is never vetoed by a single blind AP.
Heatmap heatmap_for_ap(const simenv::ApPose& pose, const estimators::AoaEstimate& estimate,
                       const FusionConfig& cfg);
Heatmap heatmap_for_ap_serial(const simenv::ApPose& pose, const estimators::AoaEstimate& estimate,
                              const FusionConfig& cfg);

// Elementwise product over identical grids.
Heatmap fuse(const std::vector<Heatmap>& maps);

struct LocateResult {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
    int ix = 0;
    int iy = 0;
    bool tied = false;  // another cell held exactly the peak value
};

// Argmax cell center (ties to the lowest (y, x) index), or the
// value-weighted centroid of the half-peak cluster around the argmax.
LocateResult locate(const Heatmap& map, Locator locator = Locator::Argmax);

void write_heatmap_csv(std::ostream& os, const Heatmap& map);
void write_heatmap_binary(const std::string& path, const Heatmap& map);
Heatmap read_heatmap_binary(const std::string& path);

}  // namespace seirios::fusion
