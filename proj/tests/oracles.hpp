#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they check.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// Poisson pmf by the multiplicative recurrence (no log-space gamma).
inline std::vector<double> poisson_pmf(double mu, int count) {
    std::vector<double> p(count);
    p[0] = std::exp(-mu);
    for (int n = 1; n < count; ++n) p[n] = p[n - 1] * mu / n;
    return p;
}

/// <a> of a pure state by the direct amplitude sum.
inline std::complex<double> mean_annihilation(const Eigen::VectorXcd& c) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n + 1 < c.size(); ++n)
        acc += std::conj(c(n)) * c(n + 1) * std::sqrt(static_cast<double>(n + 1));
    return acc;
}

/// Hand-computed birth-death rate for the population p_n of a laser with
/// n-independent raising gain kappa*mu and loss kappa*n, truncated at
/// `dim` levels (no gain out of the top level, no loss into it).
inline double population_rate(const std::vector<double>& p, double kappa, double mu, int n) {
    const int dim = static_cast<int>(p.size());
    double rate = 0.0;
    if (n >= 1) rate += kappa * mu * p[n - 1];
    if (n < dim - 1) rate -= kappa * mu * p[n];
    if (n + 1 < dim) rate += kappa * (n + 1.0) * p[n + 1];
    rate -= kappa * n * p[n];
    return rate;
}

/// Steady mean-square error of the linearized tracking filter,
/// (ell + chi^2) / (4 chi sqrt(p_signal)) with p_signal = p for the
/// adaptive loop and p/2 per arm for dual homodyne.
inline double adaptive_mse(double flux, double ell, double chi) {
    return (ell + chi * chi) / (4.0 * chi * std::sqrt(flux));
}

inline double nonadaptive_mse(double flux, double ell, double chi) {
    return (ell + chi * chi) / (2.0 * chi * std::sqrt(2.0 * flux));
}

/// Box-to-box plane-wave overlap Int_0^1 e^{2 pi i k u} du.
inline std::complex<double> box_planewave_integral(int k) {
    if (k == 0) return 1.0;
    return 0.0;  // whole periods integrate to zero
}

}  // namespace oracles
