#include "qrep/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qrep/errors.hpp"
#include "qrep/quadrature.hpp"
#include "qrep/special.hpp"

namespace qrep {

DriveProfile DriveProfile::gaussian(double x, double kappa_sigma) {
    DriveProfile d{DriveKind::GaussianPulse, x, kappa_sigma};
    d.validate();
    return d;
}

DriveProfile DriveProfile::continuous(double x) {
    DriveProfile d{DriveKind::Continuous, x, 0.0};
    d.validate();
    return d;
}

void DriveProfile::validate() const {
    require(strength_x >= 0.0, ErrorKind::Domain, "drive: strength_x must be >= 0");
    if (kind == DriveKind::GaussianPulse)
        require(width_kappa_sigma > 0.0, ErrorKind::Domain, "drive: kappa_sigma must be > 0");
    else
        require(strength_x < 1.0, ErrorKind::Domain, "drive: continuous drive must stay below threshold (x < 1)");
}

double DriveProfile::chi(double t) const {
    if (kind == DriveKind::Continuous) return strength_x / 2.0;
    double s = width_kappa_sigma;
    return strength_x / (std::sqrt(2.0 * std::numbers::pi) * s) * std::exp(-t * t / (2.0 * s * s));
}

void TimeGrid::validate() const {
    require(!points.empty() && points.size() == weights.size(), ErrorKind::InvalidInput,
            "grid: points and weights must be non-empty and of equal length");
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(weights[i] > 0.0, ErrorKind::InvalidInput, "grid: weights must be positive");
        if (i > 0)
            require(points[i] > points[i - 1], ErrorKind::InvalidInput, "grid: points must be increasing");
    }
}

TimeGrid make_kernel_grid(double kappa_sigma, int n_points) {
    require(kappa_sigma > 0.0, ErrorKind::Domain, "grid: kappa_sigma must be > 0");
    require(n_points >= 16, ErrorKind::Domain, "grid: need at least 16 points");
    double m = std::max(1.0, kappa_sigma);
    struct Panel { double a, b, frac; };
    std::vector<Panel> panels{{-6 * m, -6 * kappa_sigma, 0.1},
                              {-6 * kappa_sigma, 6 * kappa_sigma, 0.4},
                              {6 * kappa_sigma, 6 * m + 20.0, 0.5}};
    std::erase_if(panels, [](const Panel& p) { return p.b - p.a <= 1e-14; });
    double total = 0.0;
    for (auto& p : panels) total += p.frac;
    TimeGrid g;
    int used = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        int k = (i + 1 == panels.size()) ? n_points - used
                                         : static_cast<int>(std::lround(n_points * panels[i].frac / total));
        used += k;
        Rule r = gauss_legendre(k, panels[i].a, panels[i].b);
        g.points.insert(g.points.end(), r.x.begin(), r.x.end());
        g.weights.insert(g.weights.end(), r.w.begin(), r.w.end());
    }
    return g;
}

ModeDecomposition ModeDecomposition::from_weights(std::vector<double> w) {
    std::sort(w.begin(), w.end(), std::greater<>());
    while (!w.empty() && w.back() <= 0.0) w.pop_back();
    require(!w.empty(), ErrorKind::InvalidInput, "modes: no positive weights");
    double sum = std::accumulate(w.begin(), w.end(), 0.0);
    double cum = 0.0;
    std::size_t keep = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
        cum += w[i] / sum;
        if (cum >= 1.0 - 1e-9) { keep = i + 1; break; }
    }
    w.resize(keep);
    sum = std::accumulate(w.begin(), w.end(), 0.0);
    ModeDecomposition md;
    for (double& v : w) v /= sum;
    md.purity = 0.0;
    for (double v : w) md.purity += v * v;
    md.weights = std::move(w);
    return md;
}

void ModeDecomposition::validate() const {
    require(!weights.empty(), ErrorKind::InvalidInput, "modes: empty weights");
    double sum = 0.0, pur = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        require(weights[i] >= 0.0 && weights[i] <= 1.0, ErrorKind::InvalidInput, "modes: weight outside [0,1]");
        if (i > 0) require(weights[i] <= weights[i - 1], ErrorKind::InvalidInput, "modes: weights not descending");
        sum += weights[i];
        pur += weights[i] * weights[i];
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::InvalidInput, "modes: weights do not sum to 1");
    require(std::abs(pur - purity) <= 1e-9, ErrorKind::InvalidInput, "modes: purity inconsistent with weights");
}

double kernel_envelope(double m, double s) {
    double z = (s * s - m) / (std::sqrt(2.0) * s);
    if (z > 0.0) return 0.5 * std::exp(-m * m / (2.0 * s * s)) * erfcx(z);
    return 0.5 * std::exp(s * s / 2.0 - m) * std::erfc(z);
}

Eigen::MatrixXd build_joint_kernel(const DriveProfile& drive, const TimeGrid& grid) {
    drive.validate();
    grid.validate();
    if (drive.kind != DriveKind::GaussianPulse)
        fail(ErrorKind::UnsupportedProfile, "build_joint_kernel: only Gaussian pulses are supported");
    if (drive.strength_x == 0.0)
        fail(ErrorKind::ZeroAmplitude, "build_joint_kernel: x = 0 gives an identically zero kernel");
    double s = drive.width_kappa_sigma;
    double span = 6.0 * std::max(1.0, s);
    // Gauss nodes sit strictly inside their panels
    require(grid.points.front() <= -0.95 * span && grid.points.back() >= 0.95 * span, ErrorKind::InvalidInput,
            "build_joint_kernel: grid must span [-6 max(1, sigma), 6 max(1, sigma)]");
    const std::size_t n = grid.size();
    Eigen::MatrixXd psi(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double ts = grid.points[i], ti = grid.points[j];
            psi(i, j) = std::exp(-std::abs(ts - ti) / 2.0) * kernel_envelope(std::min(ts, ti), s);
        }
    }
    // The exact squared norm is e^{s^2} erfc(s); its quadrature defect runs about 3x
    // the error of the leading weight (the kink on the diagonal limits both to O(N^-2)).
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) norm2 += grid.weights[i] * grid.weights[j] * psi(i, j) * psi(i, j);
    double exact = erfcx(s);
    double rel = std::abs(norm2 - exact) / exact;
    if (rel > 1e-3) {
        std::ostringstream msg;
        msg << "build_joint_kernel: grid too coarse (relative norm error " << rel << " > 1e-3)";
        fail(ErrorKind::GridTooCoarse, msg.str());
    }
    psi /= std::sqrt(norm2);
    return psi;
}

ModeDecomposition schmidt_decompose(const Eigen::MatrixXd& kernel, const TimeGrid& grid) {
    grid.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    require(kernel.rows() == n && kernel.cols() == n, ErrorKind::InvalidInput,
            "schmidt_decompose: kernel shape does not match grid");
    Eigen::VectorXd sw(n);
    for (Eigen::Index i = 0; i < n; ++i) sw(i) = std::sqrt(grid.weights[i]);
    Eigen::MatrixXd K = sw.asDiagonal() * kernel * sw.asDiagonal();
    double norm2 = K.squaredNorm();
    require(std::abs(norm2 - 1.0) <= 1e-6, ErrorKind::InvalidInput,
            "schmidt_decompose: kernel is not normalized");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(K);
    Eigen::VectorXd sv = svd.singularValues();
    std::vector<double> w;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= 1e-12 * sv(0)) w.push_back(sv(i) * sv(i));
    return ModeDecomposition::from_weights(std::move(w));
}

std::vector<double> spectral_weights_raw(double s, const SpectralOptions& opt) {
    require(s > 0.0, ErrorKind::Domain, "mode_decomposition: kappa_sigma must be > 0");
    const int k = opt.nodes_per_panel;
    const int np = opt.panels;
    const Rule& ref = gauss_legendre(k);
    const std::vector<double>& Q = cumulative_integration_matrix(k);
    const double L = opt.span_sigmas * s;
    const double width = 2.0 * L / np;
    const int N = k * np;
    std::vector<double> T(N), W(N);
    for (int p = 0; p < np; ++p) {
        double a = -L + p * width, h = width / 2.0;
        for (int i = 0; i < k; ++i) {
            T[p * k + i] = a + h * (ref.x[i] + 1.0);
            W[p * k + i] = h * ref.w[i];
        }
    }
    // G(i,j): action of e^{-|t_i - tau|/2} on the j-th nodal basis function.
    Eigen::MatrixXd S(N, N);
    std::vector<double> D(N);
    for (int i = 0; i < N; ++i)
        D[i] = std::sqrt(std::exp(-T[i] * T[i] / (2 * s * s)) / (std::sqrt(2 * std::numbers::pi) * s));
    const double h = width / 2.0;
    for (int i = 0; i < N; ++i) {
        int pi = i / k, ki = i % k;
        for (int j = 0; j < N; ++j) {
            int pj = j / k, kj = j % k;
            double g;
            if (pi != pj) {
                g = W[j] * std::exp(-std::abs(T[i] - T[j]) / 2.0);
            } else {
                double q = Q[ki * k + kj];
                double left = h * q * std::exp((T[j] - T[i]) / 2.0);
                double right = (h * ref.w[kj] - h * q) * std::exp((T[i] - T[j]) / 2.0);
                g = left + right;
            }
            // similarity transform W^{1/2} M W^{-1/2} with M = D G D
            S(i, j) = std::sqrt(W[i]) * D[i] * g * D[j] / std::sqrt(W[j]);
        }
    }
    Eigen::MatrixXd Ssym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ssym, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    double P = erfcx(s);
    std::vector<double> w;
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i) w.push_back(ev(i) * ev(i) / P);
    std::sort(w.begin(), w.end(), std::greater<>());
    return w;
}

ModeDecomposition mode_decomposition(double s, const SpectralOptions& opt) {
    std::vector<double> w = spectral_weights_raw(s, opt);
    // w is already normalized by the analytic pair probability, so the exact total is 1.
    // The leading eigenvalues converge spectrally; the discrete tail does not (it
    // overshoots, the full sum exceeds 1 by O(N^-3)). Keep the resolved head as is and
    // rescale the tail to carry exactly the remaining mass.
    std::vector<double> kept;
    for (double v : w)
        if (v > 0.0) kept.push_back(v);
    std::size_t head = 0;
    double head_sum = 0.0;
    while (head < kept.size() && kept[head] >= 1e-4 * kept.front() && head_sum + kept[head] < 1.0) head_sum += kept[head++];
    double tail_sum = 0.0;
    for (std::size_t i = head; i < kept.size(); ++i) tail_sum += kept[i];
    if (tail_sum > 0.0)
        for (std::size_t i = head; i < kept.size(); ++i) kept[i] *= (1.0 - head_sum) / tail_sum;
    return ModeDecomposition::from_weights(std::move(kept));
}

double p1_pulsed(double x, double kappa_sigma) {
    require(x >= 0.0 && kappa_sigma > 0.0, ErrorKind::Domain, "p1_pulsed: need x >= 0 and kappa_sigma > 0");
    return x * x * erfcx(kappa_sigma);
}

double p1_max(double a, double kappa_sigma) {
    require(a > 0.0 && kappa_sigma > 0.0, ErrorKind::Domain, "p1_max: need a > 0 and kappa_sigma > 0");
    return a * std::numbers::pi * kappa_sigma * kappa_sigma / 2.0 * erfcx(kappa_sigma);
}

}  // namespace qrep
