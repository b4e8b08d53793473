#pragma once

// Truncated number-basis representation of a single bosonic mode: the mode
// operators, coherent states, density matrices and the canonical phase
// distribution used throughout the library.

#include <Eigen/Dense>

#include "laserclock/numerics.hpp"

namespace laserclock {

/// Single-mode Hilbert space truncated to the number states |0> .. |dim-1>.
struct FockSpace {
    int dim;

    explicit FockSpace(int d) : dim(d) {
        if (d < 2) throw std::invalid_argument("FockSpace: dim must be at least 2");
    }

    /// a |n> = sqrt(n) |n-1>
    Eigen::MatrixXcd annihilation() const {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
        for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
        return a;
    }

    Eigen::MatrixXcd creation() const { return annihilation().adjoint(); }

    Eigen::MatrixXcd number() const {
        Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(dim, dim);
        for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
        return n;
    }

    /// q = (a + a^dag)/sqrt(2)
    Eigen::MatrixXcd quadrature_q() const {
        const Eigen::MatrixXcd a = annihilation();
        return (a + a.adjoint()) / std::sqrt(2.0);
    }

    /// p = -i (a - a^dag)/sqrt(2)
    Eigen::MatrixXcd quadrature_p() const {
        const Eigen::MatrixXcd a = annihilation();
        return complexd(0.0, -1.0) * (a - a.adjoint()) / std::sqrt(2.0);
    }
};

/// Normalized pure state in a FockSpace. `truncation_tail` records the
/// probability weight lost to the cutoff for states built from analytic
/// amplitude formulas.
struct StateVector {
    Eigen::VectorXcd amplitudes;
    double truncation_tail = 0.0;

    int dim() const { return static_cast<int>(amplitudes.size()); }

    bool is_normalized(double tol = 1e-10) const {
        return std::abs(amplitudes.norm() - 1.0) <= tol;
    }
};

/// Density matrix on a FockSpace with validity checks for hermiticity,
/// unit trace and positivity.
struct DensityMatrix {
    Eigen::MatrixXcd matrix;

    int dim() const { return static_cast<int>(matrix.rows()); }

    static DensityMatrix from_pure(const StateVector& psi) {
        return {psi.amplitudes * psi.amplitudes.adjoint()};
    }

    double trace() const { return matrix.trace().real(); }

    double hermiticity_defect() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (matrix + matrix.adjoint()),
                                                           Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    void validate(double herm_tol = 1e-12, double trace_tol = 1e-10, double eig_tol = 1e-10) const {
        if (matrix.rows() != matrix.cols())
            throw std::invalid_argument("DensityMatrix: matrix must be square");
        if (hermiticity_defect() > herm_tol)
            throw std::runtime_error("DensityMatrix: hermiticity defect above tolerance");
        if (std::abs(matrix.trace() - complexd(1.0, 0.0)) > trace_tol)
            throw std::runtime_error("DensityMatrix: trace differs from one");
        if (min_eigenvalue() < -eig_tol)
            throw std::runtime_error("DensityMatrix: negative eigenvalue beyond tolerance");
    }
};

/// Canonical (number-basis Fourier) phase distribution on a uniform grid
/// over [-pi, pi). The variance is the wrapped second moment about the
/// circular mean.
struct PhaseDistribution {
    std::vector<double> theta;
    std::vector<double> values;
    double circular_mean = 0.0;
    double variance = 0.0;

    double step() const { return 2.0 * pi / static_cast<double>(theta.size()); }

    double integral() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * step();
    }
};

/// Coherent state |alpha> truncated to `space`. Throws when the cutoff
/// leaves more than `tail_tol` of the Poisson weight outside the space.
inline StateVector coherent_state(complexd alpha, const FockSpace& space, double tail_tol = 1e-8) {
    const int dim = space.dim;
    StateVector psi;
    psi.amplitudes = Eigen::VectorXcd::Zero(dim);
    const double msq = std::norm(alpha);
    if (msq == 0.0) {
        psi.amplitudes(0) = 1.0;
        psi.truncation_tail = 0.0;
        return psi;
    }
    const double log_mag = std::log(std::abs(alpha));
    const double phase = std::arg(alpha);
    double captured = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double lm = -0.5 * msq + n * log_mag - 0.5 * log_factorial(n);
        const complexd c = std::exp(lm) * std::exp(complexd(0.0, phase * n));
        psi.amplitudes(n) = c;
        captured += std::exp(2.0 * lm);
    }
    psi.truncation_tail = std::max(0.0, 1.0 - captured);
    if (psi.truncation_tail > tail_tol)
        throw std::invalid_argument("coherent_state: truncation tail above tolerance, increase dim");
    psi.amplitudes.normalize();
    return psi;
}

/// Suggested cutoff for amplitudes up to |alpha| (Poisson bulk plus margin).
inline int coherent_dim(double alpha_abs) {
    return static_cast<int>(std::ceil(alpha_abs * alpha_abs + 8.0 * alpha_abs + 10.0));
}

/// P(theta) = (1/2pi) sum_{n,m} e^{i(m-n)theta} rho_{nm} on a K-point grid.
/// Requires K >= 4 dim so every harmonic of the integrand is resolved.
inline PhaseDistribution canonical_phase_distribution(const DensityMatrix& rho, int grid_size) {
    const int dim = rho.dim();
    if (grid_size < 4 * dim)
        throw std::invalid_argument("canonical_phase_distribution: grid must have at least 4*dim points");

    // Collect diagonal sums s_d = sum_n rho_{n, n+d}; the distribution is
    // s_0 + 2 Re sum_{d>=1} s_d e^{i d theta}, all over 2 pi.
    std::vector<complexd> diag_sum(dim, 0.0);
    for (int d = 0; d < dim; ++d) {
        complexd s = 0.0;
        for (int n = 0; n + d < dim; ++n) s += rho.matrix(n, n + d);
        diag_sum[d] = s;
    }

    PhaseDistribution dist;
    dist.theta.resize(grid_size);
    dist.values.resize(grid_size);
    const double step = 2.0 * pi / grid_size;
    for (int k = 0; k < grid_size; ++k) {
        const double th = -pi + k * step;
        complexd acc = diag_sum[0];
        complexd rot = std::exp(complexd(0.0, th));
        complexd e = rot;
        for (int d = 1; d < dim; ++d) {
            acc += 2.0 * (diag_sum[d] * e).real();
            e *= rot;
        }
        dist.theta[k] = th;
        dist.values[k] = acc.real() / (2.0 * pi);
    }

    // Normalize on the grid, then form circular mean and wrapped variance.
    double norm = 0.0;
    for (double v : dist.values) norm += v;
    norm *= step;
    for (double& v : dist.values) v /= norm;

    complexd m1 = 0.0;
    for (int k = 0; k < grid_size; ++k)
        m1 += dist.values[k] * std::exp(complexd(0.0, dist.theta[k]));
    m1 *= step;
    dist.circular_mean = (std::abs(m1) < 1e-14) ? 0.0 : std::arg(m1);

    double var = 0.0;
    for (int k = 0; k < grid_size; ++k) {
        const double d = wrap_angle(dist.theta[k] - dist.circular_mean);
        var += dist.values[k] * d * d;
    }
    dist.variance = var * step;
    return dist;
}

struct OvercompletenessResult {
    double deviation = 0.0;        // max |(1/pi) Int <n|a><a|m> d^2a - delta_nm|
    double radial_tail_bound = 0.0;  // weight of the tested Fock levels beyond the cutoff
    bool cutoff_limited = false;   // deviation dominated by the radial cutoff
};

/// Checks (1/pi) Int d^2alpha |alpha><alpha| = identity on levels up to
/// d_test by polar-coordinate quadrature out to radius `radial_cutoff`.
inline OvercompletenessResult overcompleteness_check(const FockSpace& space, double radial_cutoff,
                                                     int radial_points, int d_test = -1,
                                                     int phase_points = 0) {
    if (d_test < 0) d_test = std::min(space.dim - 1, 12);
    if (d_test >= space.dim)
        throw std::invalid_argument("overcompleteness_check: d_test exceeds space dimension");
    if (phase_points <= 0) phase_points = 8 * (d_test + 1);
    if (radial_points < 8) throw std::invalid_argument("overcompleteness_check: too few radial points");
    if (radial_points % 2 == 1) ++radial_points;  // composite Simpson wants an even panel count

    // Tensor-product quadrature: uniform rectangle rule in phase (exact for
    // the harmonics e^{i(n-m)phi} present here) times composite Simpson in r.
    std::vector<double> phase_factor(2 * d_test + 1, 0.0);
    for (int d = -d_test; d <= d_test; ++d) {
        complexd s = 0.0;
        for (int k = 0; k < phase_points; ++k) {
            const double phi = 2.0 * pi * k / phase_points;
            s += std::exp(complexd(0.0, d * phi));
        }
        phase_factor[d + d_test] = (s / static_cast<double>(phase_points)).real() * 2.0;
        // (1/pi) * Int dphi -> (2/phase_points) * sum; imaginary part cancels
    }

    std::vector<double> radial(2 * d_test + 1, 0.0);
    const double h = radial_cutoff / radial_points;
    for (int s = 0; s <= 2 * d_test; ++s) {
        auto f = [&](double r) { return std::exp(-r * r + s * std::log(std::max(r, 1e-300))) * r; };
        double acc = f(0.0) + f(radial_cutoff);
        for (int j = 1; j < radial_points; ++j) acc += (j % 2 ? 4.0 : 2.0) * f(j * h);
        radial[s] = acc * h / 3.0;
    }

    OvercompletenessResult result;
    for (int n = 0; n <= d_test; ++n) {
        for (int m = n; m <= d_test; ++m) {
            const double inv_fact = std::exp(-0.5 * (log_factorial(n) + log_factorial(m)));
            const double value = radial[n + m] * phase_factor[(m - n) + d_test] * inv_fact;
            const double target = (n == m) ? 1.0 : 0.0;
            result.deviation = std::max(result.deviation, std::abs(value - target));
        }
    }
    // The radial cutoff shaves P(Poisson(R^2) <= n) off the diagonal of
    // level n; the largest tested level bounds the whole matrix.
    result.radial_tail_bound =
        1.0 - poisson_tail(radial_cutoff * radial_cutoff, d_test + 1);
    result.cutoff_limited = result.radial_tail_bound > 0.5 * result.deviation;
    return result;
}

}  // namespace laserclock
