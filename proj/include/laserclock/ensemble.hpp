#pragma once

// Two constructions of the laser steady state -- a uniform phase average of
// coherent-state projectors and the diagonal Poissonian mixture -- plus the
// phase variance of a coherently split beam.

#include <iostream>

#include "laserclock/fock.hpp"

namespace laserclock {

struct EnsembleSpec {
    double mu;         // mean photon number
    int dim;           // Fock truncation
    int phase_points;  // quadrature points for the phase average

    void validate() const {
        if (mu <= 0.0) throw std::invalid_argument("EnsembleSpec: mu must be positive");
        if (dim < 2) throw std::invalid_argument("EnsembleSpec: dim must be at least 2");
        if (phase_points < 4 * dim)
            throw std::invalid_argument("EnsembleSpec: phase_points must be at least 4*dim");
    }
};

inline EnsembleSpec default_ensemble_spec(double mu) {
    const int dim = coherent_dim(std::sqrt(mu));
    return {mu, dim, 4 * dim};
}

/// Uniform quadrature of |sqrt(mu) e^{i phi}><sqrt(mu) e^{i phi}| over phi.
/// The rectangle rule on a periodic grid is exact for every harmonic
/// e^{i(n-m)phi} with |n-m| < phase_points.
inline DensityMatrix phase_averaged_mixture(const EnsembleSpec& spec) {
    spec.validate();
    const FockSpace space(spec.dim);
    const double amp = std::sqrt(spec.mu);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(spec.dim, spec.dim);
    for (int k = 0; k < spec.phase_points; ++k) {
        const double phi = 2.0 * pi * k / spec.phase_points;
        const StateVector psi = coherent_state(amp * std::exp(complexd(0.0, phi)), space);
        rho.noalias() += psi.amplitudes * psi.amplitudes.adjoint();
    }
    rho /= static_cast<double>(spec.phase_points);
    rho /= rho.trace().real();
    return {rho};
}

/// Diagonal mixture of number states with Poisson(mu) weights, renormalized
/// on the truncated space.
inline DensityMatrix poisson_mixture(const EnsembleSpec& spec) {
    spec.validate();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(spec.dim, spec.dim);
    double norm = 0.0;
    for (int n = 0; n < spec.dim; ++n) {
        const double w = poisson_weight(spec.mu, n);
        rho(n, n) = w;
        norm += w;
    }
    rho /= norm;
    return {rho};
}

/// Phase variance of one output of a coherent M-way split of |sqrt(mu)>,
/// i.e. of the coherent state |sqrt(mu/M)>. The 1/(4|alpha|^2) law the
/// result is compared against holds asymptotically; amplitudes below
/// mu/M = 16 are outside that regime.
inline double split_phase_variance(double mu, int parties, int dim = 0, int grid_size = 0) {
    if (mu <= 0.0 || parties < 1)
        throw std::invalid_argument("split_phase_variance: need mu > 0 and parties >= 1");
    if (mu / parties < 16.0)
        std::cerr << "split_phase_variance: mu/M = " << mu / parties
                  << " below the large-amplitude regime (>= 16); the 1/(4|alpha|^2) law degrades\n";
    const double amp = std::sqrt(mu / parties);
    if (dim <= 0) dim = coherent_dim(amp);
    if (grid_size <= 0) grid_size = 4 * dim;
    const FockSpace space(dim);
    const DensityMatrix rho = DensityMatrix::from_pure(coherent_state(amp, space));
    return canonical_phase_distribution(rho, grid_size).variance;
}

}  // namespace laserclock
