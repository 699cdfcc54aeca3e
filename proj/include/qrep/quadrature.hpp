#pragma once

#include <functional>
#include <vector>

namespace qrep {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

// n-point Gauss-Legendre rule on [-1, 1].
const Rule& gauss_legendre(int n);

// Rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

// Composite rule: k points on each interval between consecutive breakpoints.
Rule composite_gl(const std::vector<double>& breaks, int k);

// Q(i, j) = integral from -1 to x_i of the j-th Lagrange basis polynomial
// on the k-point Gauss-Legendre nodes. Row-major k*k.
const std::vector<double>& cumulative_integration_matrix(int k);

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b], split at the given interior points.
// Throws a numerical error if the estimate does not reach abs_tol.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, const std::vector<double>& splits = {});

}  // namespace qrep
