#include "qrep/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "qrep/errors.hpp"

namespace qrep {

namespace {

// Legendre P_0..P_{n} at x.
void legendre_all(double x, int n, std::vector<double>& p) {
    p.assign(n + 1, 0.0);
    p[0] = 1.0;
    if (n >= 1) p[1] = x;
    for (int m = 1; m < n; ++m) p[m + 1] = ((2 * m + 1) * x * p[m] - m * p[m - 1]) / (m + 1);
}

Rule make_rule(int n) {
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int m = 1; m < n; ++m) {
                double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n, p0 = P_{n-1}
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int m = 1; m < n; ++m) {
            double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        r.x[n - 1 - i] = x;
        r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

std::mutex cache_mutex;

}  // namespace

const Rule& gauss_legendre(int n) {
    require(n >= 1, ErrorKind::Domain, "gauss_legendre: n must be >= 1");
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

Rule gauss_legendre(int n, double a, double b) {
    const Rule& ref = gauss_legendre(n);
    Rule r;
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        r.x.push_back(c + h * ref.x[i]);
        r.w.push_back(h * ref.w[i]);
    }
    return r;
}

Rule composite_gl(const std::vector<double>& breaks, int k) {
    Rule r;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        if (breaks[p + 1] <= breaks[p]) continue;
        Rule part = gauss_legendre(k, breaks[p], breaks[p + 1]);
        r.x.insert(r.x.end(), part.x.begin(), part.x.end());
        r.w.insert(r.w.end(), part.w.begin(), part.w.end());
    }
    return r;
}

const std::vector<double>& cumulative_integration_matrix(int k) {
    static std::map<int, std::vector<double>> cache;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
    }
    const Rule& r = gauss_legendre(k);
    // Vint(i,m) = int_{-1}^{x_i} P_m; Vinv(m,j) = w_j P_m(x_j) (2m+1)/2.
    std::vector<std::vector<double>> P(k);
    for (int i = 0; i < k; ++i) legendre_all(r.x[i], k, P[i]);
    std::vector<double> Q(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        for (int m = 0; m < k; ++m) {
            double vint = (m == 0) ? r.x[i] + 1.0 : (P[i][m + 1] - P[i][m - 1]) / (2 * m + 1);
            for (int j = 0; j < k; ++j) Q[i * k + j] += vint * r.w[j] * P[j][m] * (2 * m + 1) / 2.0;
        }
    }
    std::lock_guard<std::mutex> lock(cache_mutex);
    return cache.emplace(k, std::move(Q)).first->second;
}

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, const std::vector<double>& splits) {
    std::vector<double> pts{a};
    for (double s : splits)
        if (s > a && s < b) pts.push_back(s);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    AdaptiveResult out;
    double tol_each = abs_tol / static_cast<double>(pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        double err = 0.0;
        double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
            f, pts[i], pts[i + 1], 15, 1e-13, &err);
        if (!(err <= tol_each) && !(err <= 1e-13 * std::abs(v))) {
            std::ostringstream msg;
            msg << "adaptive quadrature: error estimate " << err << " above tolerance " << tol_each
                << " on [" << pts[i] << ", " << pts[i + 1] << "]";
            fail(ErrorKind::Numerical, msg.str());
        }
        out.value += v;
        out.error += err;
    }
    return out;
}

}  // namespace qrep
