#include "seirios/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seirios/mathutil.hpp"

namespace seirios::estimators {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

void require_ready(const csi::CsiMatrix& csi, bool need_eight_channels) {
    if (!csi.synchronized)
        throw std::invalid_argument("estimator: CSI must be synchronized first");
    if (csi.antennas != 2)
        throw std::invalid_argument("estimator: exactly two antennas are supported");
    if (need_eight_channels && csi.channels != 8)
        throw std::invalid_argument("estimator: the smoothed constructions require 8 channels");
}

MatrixXcd to_eigen(const Cmat& m) {
    MatrixXcd out(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) out(r, c) = m.at(r, c);
    return out;
}

// Column-wise outer-product averaging: the smoothed matrix's columns are
// the snapshots (one packet per channel, no temporal snapshots exist).
MatrixXcd covariance(const MatrixXcd& x) {
    return (x * x.adjoint()) / static_cast<double>(x.cols());
}

struct EigenPair {
    VectorXd values;   // descending
    MatrixXcd vectors; // columns match values
};

EigenPair eig_descending(const MatrixXcd& r) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(r);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("estimator: eigendecomposition failed");
    const int n = static_cast<int>(r.rows());
    EigenPair out;
    out.values = VectorXd(n);
    out.vectors = MatrixXcd(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    if (out.values(n - 1) < -1e-8 * std::max(out.values(0), 1e-300))
        throw std::runtime_error("estimator: covariance not positive semidefinite");
    return out;
}

double wavenumber(const csi::CsiMatrix& csi) {
    return kTwoPi * csi.geometry.spacing_m * csi.plan.fc_base_hz / csi.geometry.wave_speed;
}

// theta = asin(-arg(mu) / (2 pi d fc / c)), clipped into [-1, 1].
double angle_from_rotation(std::complex<double> mu, double k_d, int& clipped) {
    double s = -std::arg(mu) / k_d;
    if (s < -1.0 || s > 1.0) {
        s = std::clamp(s, -1.0, 1.0);
        ++clipped;
    }
    return rad2deg(std::asin(s));
}

// Total-least-squares rotation between the two block rows of the signal
// subspace; eigenvalues of the rotation carry the AoAs.
std::vector<std::complex<double>> tls_rotation(const MatrixXcd& sig, int block_rows) {
    const int p = static_cast<int>(sig.cols());
    const MatrixXcd e1 = sig.topRows(block_rows);
    const MatrixXcd e2 = sig.bottomRows(block_rows);

    MatrixXcd stacked(block_rows, 2 * p);
    stacked << e1, e2;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(stacked.adjoint() * stacked);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("estimator: TLS eigendecomposition failed");

    // Eigen sorts ascending: the first p columns span the smallest
    // eigenvalues, i.e. the TLS null space.
    const MatrixXcd w = es.eigenvectors().leftCols(p);
    const MatrixXcd w12 = w.topRows(p);
    const MatrixXcd w22 = w.bottomRows(p);

    Eigen::FullPivLU<MatrixXcd> lu(w22);
    if (!lu.isInvertible())
        throw std::runtime_error("estimator: defective rotation matrix");
    const MatrixXcd psi = -w12 * lu.inverse();

    Eigen::ComplexEigenSolver<MatrixXcd> ces(psi);
    if (ces.info() != Eigen::Success)
        throw std::runtime_error("estimator: rotation eigendecomposition failed");
    std::vector<std::complex<double>> mus(p);
    for (int i = 0; i < p; ++i) mus[i] = ces.eigenvalues()(i);
    return mus;
}

AoaEstimate esprit_impl(const csi::CsiMatrix& csi, Method method, const Cmat& xk,
                        const Cmat& xk1, int max_order, const EstimatorOptions& opts) {
    MatrixXcd stacked(xk.rows + xk1.rows, xk.cols);
    stacked << to_eigen(xk), to_eigen(xk1);
    const EigenPair ep = eig_descending(covariance(stacked));

    AoaEstimate est;
    est.method = method;
    est.eigenvalues.assign(ep.values.data(), ep.values.data() + ep.values.size());

    const int order = select_model_order(est.eigenvalues, max_order, opts);
    if (order == 0) throw std::runtime_error("estimator: no signal subspace detected");

    const auto mus = tls_rotation(ep.vectors.leftCols(order), xk.rows);
    const double k_d = wavenumber(csi);
    for (const auto& mu : mus) {
        const double theta = angle_from_rotation(mu, k_d, est.clipped);
        if (std::abs(theta) < simenv::kFieldOfViewDeg) est.angles_deg.push_back(theta);
    }
    std::sort(est.angles_deg.begin(), est.angles_deg.end());
    return est;
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::Baseline: return "baseline";
        case Method::MusicJoint: return "music";
        case Method::EspritConventional: return "esprit";
        case Method::EspritConjugated: return "esprit_conjugate";
        case Method::Injected: return "injected";
    }
    return "unknown";
}

Method method_from_name(std::string_view name) {
    if (name == "baseline") return Method::Baseline;
    if (name == "music") return Method::MusicJoint;
    if (name == "esprit") return Method::EspritConventional;
    if (name == "esprit_conjugate") return Method::EspritConjugated;
    if (name == "injected") return Method::Injected;
    throw std::invalid_argument("unknown estimator method: " + std::string(name));
}

std::vector<double> MusicGrid::thetas() const {
    std::vector<double> out;
    for (double t = theta_min_deg; t <= theta_max_deg + 1e-12; t += theta_step_deg)
        out.push_back(t);
    return out;
}

std::vector<double> MusicGrid::taus() const {
    std::vector<double> out;
    for (double t = tau_min_s; t <= tau_max_s + 1e-18; t += tau_step_s) out.push_back(t);
    return out;
}

int select_model_order(const std::vector<double>& eigenvalues_descending, int max_order,
                       const EstimatorOptions& opts) {
    if (eigenvalues_descending.empty())
        throw std::invalid_argument("select_model_order: empty eigenvalue list");
    const double lead = eigenvalues_descending.front();
    if (!(lead > 0.0)) return 0;
    max_order = std::min<int>(max_order, static_cast<int>(eigenvalues_descending.size()));

    if (opts.use_mdl) {
        // Wax-Kailath MDL over the trailing eigenvalues.
        const int m = static_cast<int>(eigenvalues_descending.size());
        const double n = std::max(1, opts.mdl_snapshots);
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (int k = 0; k <= max_order; ++k) {
            double log_gm = 0.0, am = 0.0;
            for (int i = k; i < m; ++i) {
                const double v = std::max(eigenvalues_descending[i], 1e-300);
                log_gm += std::log(v);
                am += v;
            }
            const int tail = m - k;
            log_gm /= tail;
            am /= tail;
            const double mdl =
                -n * tail * (log_gm - std::log(am)) + 0.5 * k * (2.0 * m - k) * std::log(n);
            if (mdl < best) {
                best = mdl;
                best_k = k;
            }
        }
        return best_k;
    }

    int p = 0;
    for (int i = 0; i < max_order; ++i)
        if (eigenvalues_descending[i] > opts.subspace_threshold * lead) p = i + 1;
    return p;
}

AoaEstimate baseline_aoa(const csi::CsiMatrix& csi) {
    require_ready(csi, false);
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < csi.channels; ++i)
        acc += unit(csi.at(1, i) * std::conj(csi.at(0, i)));
    const double dphi = std::arg(acc);

    AoaEstimate est;
    est.method = Method::Baseline;
    double s = -dphi / wavenumber(csi);
    if (s < -1.0 || s > 1.0) {
        s = std::clamp(s, -1.0, 1.0);
        est.clipped = 1;
    }
    // The baseline always answers with one angle; saturate at the edge of
    // the usable field of view rather than returning an out-of-domain value.
    double theta = rad2deg(std::asin(s));
    if (std::abs(theta) >= simenv::kFieldOfViewDeg) {
        theta = std::clamp(theta, -simenv::kFieldOfViewDeg + 1e-9,
                           simenv::kFieldOfViewDeg - 1e-9);
        est.clipped = 1;
    }
    est.angles_deg.push_back(theta);
    return est;
}

Cmat music_matrix(const csi::CsiMatrix& csi) {
    require_ready(csi, true);
    Cmat m(6, 6);
    for (int shift = 0; shift < 3; ++shift)
        for (int c = 0; c < 6; ++c) {
            m.at(shift, c) = csi.at(0, shift + c);
            m.at(shift + 3, c) = csi.at(1, shift + c);
        }
    return m;
}

std::pair<Cmat, Cmat> smoothed_measurement(const csi::CsiMatrix& csi) {
    require_ready(csi, true);
    // Window length 5 over 8 channels -> 4 shifts; rank 4 per antenna block.
    Cmat xk(5, 4), xk1(5, 4);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 4; ++c) {
            xk.at(r, c) = csi.at(0, r + c);
            xk1.at(r, c) = csi.at(1, r + c);
        }
    return {xk, xk1};
}

std::pair<Cmat, Cmat> conjugated_measurement(const csi::CsiMatrix& csi) {
    require_ready(csi, true);
    Cmat xk(6, 6), xk1(6, 6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 3; ++c) {
            xk.at(r, c) = csi.at(0, r + c);
            xk.at(r, c + 3) = std::conj(csi.at(1, 7 - r - c));
            xk1.at(r, c) = csi.at(1, r + c);
            xk1.at(r, c + 3) = std::conj(csi.at(0, 7 - r - c));
        }
    return {xk, xk1};
}

namespace {

// Shared setup for both spectrum variants: noise projector Q = En En^H
// from the smoothed covariance.
MatrixXcd music_noise_projector(const csi::CsiMatrix& csi, int n_paths,
                                std::vector<double>* eigenvalues_out) {
    if (n_paths < 1 || n_paths >= 6)
        throw std::invalid_argument("music_joint: n_paths must be in [1, 5]");
    const EigenPair ep = eig_descending(covariance(to_eigen(music_matrix(csi))));
    if (eigenvalues_out)
        eigenvalues_out->assign(ep.values.data(), ep.values.data() + ep.values.size());
    const MatrixXcd en = ep.vectors.rightCols(6 - n_paths);
    return en * en.adjoint();
}

}  // namespace

MusicSpectrum music_spectrum(const csi::CsiMatrix& csi, const MusicGrid& grid, int n_paths) {
    const MatrixXcd q = music_noise_projector(csi, n_paths, nullptr);

    MusicSpectrum sp;
    sp.thetas_deg = grid.thetas();
    sp.taus_s = grid.taus();
    const int nt = static_cast<int>(sp.thetas_deg.size());
    const int nu = static_cast<int>(sp.taus_s.size());
    sp.values.assign(static_cast<std::size_t>(nt) * nu, 0.0);

    // a(theta, tau) = [v; Phi v] with v = [1, Omega, Omega^2], so
    // a^H Q a = v^H Q11 v + v^H Q22 v + 2 Re(Phi conj(v^H Q21 v)):
    // the tau-dependent forms are shared across the whole theta axis.
    const MatrixXcd q11 = q.block(0, 0, 3, 3);
    const MatrixXcd q22 = q.block(3, 3, 3, 3);
    const MatrixXcd q21 = q.block(3, 0, 3, 3);

    std::vector<double> s11(nu), s22(nu);
    std::vector<std::complex<double>> s21(nu);
    for (int iu = 0; iu < nu; ++iu) {
        const std::complex<double> om = simenv::omega_of_tau(sp.taus_s[iu], csi.plan.spacing_hz);
        Eigen::Vector3cd v(std::complex<double>(1.0, 0.0), om, om * om);
        s11[iu] = std::real(v.dot(q11 * v));  // Eigen's dot conjugates the left side
        s22[iu] = std::real(v.dot(q22 * v));
        s21[iu] = v.dot(q21 * v);
    }

    const double k_d = wavenumber(csi);
#pragma omp parallel for schedule(static)
    for (int it = 0; it < nt; ++it) {
        const std::complex<double> phi =
            std::polar(1.0, -k_d * std::sin(deg2rad(sp.thetas_deg[it])));
        for (int iu = 0; iu < nu; ++iu) {
            const double denom = s11[iu] + s22[iu] + 2.0 * std::real(phi * std::conj(s21[iu]));
            sp.values[static_cast<std::size_t>(it) * nu + iu] = 1.0 / std::max(denom, 1e-300);
        }
    }
    return sp;
}

MusicSpectrum music_spectrum_serial(const csi::CsiMatrix& csi, const MusicGrid& grid,
                                    int n_paths) {
    const MatrixXcd q = music_noise_projector(csi, n_paths, nullptr);

    MusicSpectrum sp;
    sp.thetas_deg = grid.thetas();
    sp.taus_s = grid.taus();
    const int nt = static_cast<int>(sp.thetas_deg.size());
    const int nu = static_cast<int>(sp.taus_s.size());
    sp.values.assign(static_cast<std::size_t>(nt) * nu, 0.0);

    const double k_d = wavenumber(csi);
    for (int it = 0; it < nt; ++it) {
        const std::complex<double> phi =
            std::polar(1.0, -k_d * std::sin(deg2rad(sp.thetas_deg[it])));
        for (int iu = 0; iu < nu; ++iu) {
            const std::complex<double> om =
                simenv::omega_of_tau(sp.taus_s[iu], csi.plan.spacing_hz);
            VectorXcd a(6);
            a << 1.0, om, om * om, phi, phi * om, phi * om * om;
            const double denom = std::real(a.dot(q * a));
            sp.values[static_cast<std::size_t>(it) * nu + iu] = 1.0 / std::max(denom, 1e-300);
        }
    }
    return sp;
}

AoaEstimate music_joint(const csi::CsiMatrix& csi, const MusicGrid& grid, int n_paths) {
    AoaEstimate est;
    est.method = Method::MusicJoint;
    music_noise_projector(csi, n_paths, &est.eigenvalues);  // validates + diagnostics
    const MusicSpectrum sp = music_spectrum(csi, grid, n_paths);

    const int nt = static_cast<int>(sp.thetas_deg.size());
    const int nu = static_cast<int>(sp.taus_s.size());
    struct Peak {
        double value;
        int it, iu;
    };
    std::vector<Peak> peaks;
    for (int it = 0; it < nt; ++it)
        for (int iu = 0; iu < nu; ++iu) {
            const double v = sp.at(it, iu);
            bool dominant = true;
            for (int dt = -1; dt <= 1 && dominant; ++dt)
                for (int du = -1; du <= 1 && dominant; ++du) {
                    if (dt == 0 && du == 0) continue;
                    const int jt = it + dt, ju = iu + du;
                    if (jt < 0 || jt >= nt || ju < 0 || ju >= nu) continue;
                    if (sp.at(jt, ju) >= v) dominant = false;
                }
            if (dominant) peaks.push_back({v, it, iu});
        }
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.value > b.value; });

    for (int i = 0; i < std::min<int>(n_paths, static_cast<int>(peaks.size())); ++i) {
        est.angles_deg.push_back(sp.thetas_deg[peaks[i].it]);
        est.tofs_s.push_back(sp.taus_s[peaks[i].iu]);
    }
    return est;
}

AoaEstimate select_direct_by_tof(const AoaEstimate& estimate) {
    if (estimate.tofs_s.size() != estimate.angles_deg.size() || estimate.angles_deg.empty())
        throw std::invalid_argument("select_direct_by_tof: needs paired (angle, tof) estimates");
    std::size_t best = 0;
    for (std::size_t i = 1; i < estimate.tofs_s.size(); ++i)
        if (estimate.tofs_s[i] < estimate.tofs_s[best]) best = i;
    AoaEstimate out = estimate;
    out.angles_deg = {estimate.angles_deg[best]};
    out.tofs_s = {estimate.tofs_s[best]};
    return out;
}

AoaEstimate esprit_conventional(const csi::CsiMatrix& csi, const EstimatorOptions& opts) {
    const auto [xk, xk1] = smoothed_measurement(csi);
    return esprit_impl(csi, Method::EspritConventional, xk, xk1, 4, opts);
}

AoaEstimate esprit_conjugated(const csi::CsiMatrix& csi, const EstimatorOptions& opts) {
    const auto [xk, xk1] = conjugated_measurement(csi);
    return esprit_impl(csi, Method::EspritConjugated, xk, xk1, 6, opts);
}

}  // namespace seirios::estimators
