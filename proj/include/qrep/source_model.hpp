#pragma once

#include <Eigen/Dense>
#include <vector>

namespace qrep {

// Times are in units of 1/kappa, so widths below are kappa*sigma and kappa*T.

enum class DriveKind { GaussianPulse, Continuous };

struct DriveProfile {
    DriveKind kind = DriveKind::GaussianPulse;
    double strength_x = 0.0;
    double width_kappa_sigma = 0.0;

    static DriveProfile gaussian(double x, double kappa_sigma);
    static DriveProfile continuous(double x);
    void validate() const;
    // chi(t)/kappa.
    double chi(double t) const;
};

struct TimeGrid {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    void validate() const;
};

// Gauss-Legendre grid for the pulsed kernel. Covers [-6m, 6m + 20] with
// m = max(1, kappa_sigma); the extra 20 on the right holds the e^{-t/2}
// cavity tail. Points are concentrated on the pulse.
TimeGrid make_kernel_grid(double kappa_sigma, int n_points = 400);

struct ModeDecomposition {
    std::vector<double> weights;  // descending, sum 1
    double purity = 1.0;

    static ModeDecomposition from_weights(std::vector<double> w);
    void validate() const;
};

// Joint signal-idler amplitude psi(ts, ti) on the grid, normalized so that the
// quadrature-weighted Frobenius norm is 1.
Eigen::MatrixXd build_joint_kernel(const DriveProfile& drive, const TimeGrid& grid);

// Squared singular values of W^{1/2} psi W^{1/2}, truncated at cumulative 1 - 1e-9.
ModeDecomposition schmidt_decompose(const Eigen::MatrixXd& kernel, const TimeGrid& grid);

struct SpectralOptions {
    int panels = 25;
    int nodes_per_panel = 16;
    double span_sigmas = 9.0;
};

// Production decomposition for a Gaussian pulse of width kappa_sigma. Works on
// the pump-time operator sqrt(chi) e^{-|t-t'|/2} sqrt(chi) whose eigenvalues are
// the singular values of psi; the Green's action is integrated exactly inside
// each panel so the result converges spectrally.
ModeDecomposition mode_decomposition(double kappa_sigma, const SpectralOptions& opt = {});

// Same operator, untruncated eigenvalues divided by the analytic pair probability.
std::vector<double> spectral_weights_raw(double kappa_sigma, const SpectralOptions& opt = {});

// Lowest-order pair probability x^2 e^{s^2} erfc(s).
double p1_pulsed(double x, double kappa_sigma);

// a (pi s^2 / 2) e^{s^2} erfc(s).
double p1_max(double a, double kappa_sigma);

// h(m) = e^{-m} int_{-inf}^{m} chi(tau) e^{tau} dtau for a unit-x Gaussian pulse;
// psi(ts, ti) = e^{-|ts - ti|/2} h(min(ts, ti)).
double kernel_envelope(double m, double kappa_sigma);

}  // namespace qrep
