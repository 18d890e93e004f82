#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "seirios/csi.hpp"

namespace seirios::estimators {

enum class Method { Baseline, MusicJoint, EspritConventional, EspritConjugated, Injected };

const char* method_name(Method m);
Method method_from_name(std::string_view name);

struct AoaEstimate {
    Method method = Method::Baseline;
    std::vector<double> angles_deg;   // within (-85, 85), unordered semantics
    std::vector<double> tofs_s;       // MusicJoint only, paired with angles
    std::vector<double> eigenvalues;  // diagnostic, descending
    int clipped = 0;                  // asin arguments clipped to [-1, 1]
};

struct EstimatorOptions {
    double subspace_threshold = 1e-2;  // eigenvalue ratio eta for model order
    bool use_mdl = false;              // information-criterion rule instead
    int mdl_snapshots = 6;
};

struct MusicGrid {
    double theta_min_deg = -85.0;
    double theta_max_deg = 85.0;
    double theta_step_deg = 0.5;
    double tau_min_s = 0.0;
    double tau_max_s = 2e-6;
    double tau_step_s = 10e-9;

    std::vector<double> thetas() const;
    std::vector<double> taus() const;
};

// Small dense complex matrix, row-major. Keeps the measurement-matrix
// layouts testable without exposing the linear-algebra backend.
struct Cmat {
    int rows = 0;
    int cols = 0;
    std::vector<std::complex<double>> v;

    Cmat() = default;
    Cmat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}
    std::complex<double>& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    const std::complex<double>& at(int r, int c) const {
        return v[static_cast<std::size_t>(r) * cols + c];
    }
};

// Largest p <= max_order with lambda_p > eta * lambda_1 (threshold rule),
// or the MDL rule when configured. Returns 0 when even the leading
// eigenvalue carries no energy.
int select_model_order(const std::vector<double>& eigenvalues_descending, int max_order,
                       const EstimatorOptions& opts = {});

// Single-angle estimate from the inter-antenna phase difference averaged
// over channels; the multipath-blind reference method.
AoaEstimate baseline_aoa(const csi::CsiMatrix& csi);

// 6x6 smoothed measurement matrix for joint AoA-ToF MUSIC: three shifted
// channel windows per antenna, stacked.
Cmat music_matrix(const csi::CsiMatrix& csi);

// Per-antenna Hankel smoothing (window length 5 over 8 channels, no
// conjugates): the conventional construction, capacity 4.
std::pair<Cmat, Cmat> smoothed_measurement(const csi::CsiMatrix& csi);

// Conjugate-augmented 6x6 measurement matrices: three shifted windows plus
// the reversed conjugate windows of the opposite antenna. Capacity
// floor(2(M+1)/3) = 6 for M = 8.
std::pair<Cmat, Cmat> conjugated_measurement(const csi::CsiMatrix& csi);

struct MusicSpectrum {
    std::vector<double> thetas_deg;
    std::vector<double> taus_s;
    std::vector<double> values;  // [theta][tau] row-major

    double at(int it, int iu) const {
        return values[static_cast<std::size_t>(it) * taus_s.size() + iu];
    }
};

// Pseudo-spectrum over the (theta, tau) grid with n_paths signal
// dimensions. The parallel version evaluates a factored quadratic form;
// music_spectrum_serial is the straightforward reference.
MusicSpectrum music_spectrum(const csi::CsiMatrix& csi, const MusicGrid& grid, int n_paths);
MusicSpectrum music_spectrum_serial(const csi::CsiMatrix& csi, const MusicGrid& grid, int n_paths);

// Classical pseudo-spectrum search; returns the n_paths highest distinct
// peaks (3x3 neighborhood dominance) with their ToFs.
AoaEstimate music_joint(const csi::CsiMatrix& csi, const MusicGrid& grid, int n_paths);

AoaEstimate esprit_conventional(const csi::CsiMatrix& csi, const EstimatorOptions& opts = {});
AoaEstimate esprit_conjugated(const csi::CsiMatrix& csi, const EstimatorOptions& opts = {});

// Direct-path rule for joint AoA-ToF estimation: the peak with the
// smallest ToF is taken as the direct path (ties fall to the stronger
// peak). The AoA-only methods skip this and leave path selection to the
// multi-AP fusion.
AoaEstimate select_direct_by_tof(const AoaEstimate& estimate);

}  // namespace seirios::estimators
