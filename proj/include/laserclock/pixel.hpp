#pragma once

// Phase-space pixel basis: box-windowed plane waves |q_n, p_m> realized on
// a position grid, their overlaps with coherent states, and the completely
// decohering channel that projects onto the pixel lattice.
//
// Convention: <q|q_n, p_m> = delta^{-1/2} chi_box(q) exp(+i q p_m) with
// q_n = delta n and p_m = 2 pi m / delta, so the pixel state has momentum
// mean +p_m under p = -i d/dq and mean amplitude (q_n + i p_m)/sqrt(2).

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "laserclock/numerics.hpp"

namespace laserclock {

struct PixelBasisSpec {
    double delta = 1.0;        // pixel width in q units
    int n_min = 0, n_max = 0;  // box index window
    int m_center = 0;          // center of the reported momentum window
    int m_halfwidth = 2;       // reported momentum window half-width
    int samples_per_box = 4096;  // position resolution delta / samples_per_box
    int batch_samples = 1 << 16;  // per-box grid for the channel transform (power of two)

    void validate() const {
        if (!(delta > 0.0)) throw std::invalid_argument("PixelBasisSpec: delta must be positive");
        if (n_max < n_min) throw std::invalid_argument("PixelBasisSpec: empty box window");
        if (m_halfwidth < 0) throw std::invalid_argument("PixelBasisSpec: negative momentum window");
        if (samples_per_box < 50)
            throw std::invalid_argument("PixelBasisSpec: grid resolution must be at most delta/50");
        if (batch_samples < 2 || (batch_samples & (batch_samples - 1)) != 0)
            throw std::invalid_argument("PixelBasisSpec: batch_samples must be a power of two");
    }

    double box_center(int n) const { return delta * n; }
    double momentum(int m) const { return 2.0 * pi * m / delta; }
};

/// Windows sized for amplitude alpha: boxes within 8 q-units of the
/// coherent center, momentum pixels within 8/delta of the coherent
/// momentum (rounded out to whole lattice steps).
inline PixelBasisSpec default_pixel_spec(complexd alpha, double delta) {
    PixelBasisSpec spec;
    spec.delta = delta;
    const double q_bar = std::sqrt(2.0) * alpha.real();
    const double p_bar = std::sqrt(2.0) * alpha.imag();
    spec.n_min = static_cast<int>(std::floor((q_bar - 8.0) / delta));
    spec.n_max = static_cast<int>(std::ceil((q_bar + 8.0) / delta));
    spec.m_center = static_cast<int>(std::lround(p_bar * delta / (2.0 * pi)));
    spec.m_halfwidth = std::max(2, static_cast<int>(std::ceil((8.0 / delta) / (2.0 * pi / delta))));
    return spec;
}

/// Position wavefunction of |alpha>:
/// pi^{-1/4} exp(-(q - sqrt2 Re a)^2/2 + i sqrt2 (Im a) q - i Re a Im a).
inline complexd coherent_position_wavefunction(double q, complexd alpha) {
    const double qa = std::sqrt(2.0) * alpha.real();
    const double pa = std::sqrt(2.0) * alpha.imag();
    const double gauss = -0.25 * std::log(pi) - 0.5 * (q - qa) * (q - qa);
    return std::exp(complexd(gauss, pa * q - alpha.real() * alpha.imag()));
}

/// <q_n, p_m | alpha> by adaptive quadrature over the box.
inline complexd pixel_overlap_coherent(int n, int m, complexd alpha, const PixelBasisSpec& spec,
                                       double rel_tol = 1e-8) {
    spec.validate();
    const double qn = spec.box_center(n);
    const double pm = spec.momentum(m);
    const double root = 1.0 / std::sqrt(spec.delta);
    auto integrand = [&](double q) {
        return root * std::exp(complexd(0.0, -q * pm)) * coherent_position_wavefunction(q, alpha);
    };
    int panels = spec.samples_per_box;
    if (panels % 2) ++panels;
    // states are unit normalized, so absolute accuracy against 1 is the
    // right convergence scale for vanishing overlaps
    return integrate_simpson(integrand, qn - 0.5 * spec.delta, qn + 0.5 * spec.delta, rel_tol,
                             panels, 1.0);
}

/// <q_n, p_m | q_n2, p_m2>: zero for distinct boxes (disjoint supports),
/// quadrature of the plane-wave product otherwise.
inline complexd pixel_pair_overlap(int n, int m, int n2, int m2, const PixelBasisSpec& spec,
                                   double rel_tol = 1e-8) {
    spec.validate();
    if (n != n2) return 0.0;
    const double qn = spec.box_center(n);
    const double dp = spec.momentum(m2) - spec.momentum(m);
    auto integrand = [&](double q) { return std::exp(complexd(0.0, q * dp)) / spec.delta; };
    int panels = spec.samples_per_box;
    if (panels % 2) ++panels;
    return integrate_simpson(integrand, qn - 0.5 * spec.delta, qn + 0.5 * spec.delta, rel_tol,
                             panels, 1.0);
}

/// Mean амплитуде <a> = (<q> + i<p>)/sqrt2 of the pixel state (n, m),
/// evaluated on the position grid. The box plane wave is periodic across
/// the box, so the derivative in <p> uses wrapped central differences --
/// the symmetric (principal-value) evaluation of a mean whose higher
/// moments diverge -- with one Richardson step in the grid spacing.
inline complexd pixel_mean_amplitude(int n, int m, const PixelBasisSpec& spec) {
    spec.validate();
    const double qn = spec.box_center(n);
    const double pm = spec.momentum(m);

    auto p_mean = [&](int samples) {
        const double h = spec.delta / samples;
        std::vector<complexd> u(samples);
        for (int j = 0; j < samples; ++j) {
            const double q = qn - 0.5 * spec.delta + (j + 0.5) * h;
            u[j] = std::exp(complexd(0.0, q * pm)) / std::sqrt(spec.delta);
        }
        complexd acc = 0.0;
        for (int j = 0; j < samples; ++j) {
            const complexd du = (u[(j + 1) % samples] - u[(j + samples - 1) % samples]) / (2.0 * h);
            acc += std::conj(u[j]) * complexd(0.0, -1.0) * du;
        }
        return (acc * h).real();
    };
    auto q_mean = [&](int samples) {
        const double h = spec.delta / samples;
        double acc = 0.0;
        for (int j = 0; j < samples; ++j) {
            const double q = qn - 0.5 * spec.delta + (j + 0.5) * h;
            acc += q / spec.delta;
        }
        return acc * h;
    };

    const int r = spec.samples_per_box;
    const double p_est = (4.0 * p_mean(2 * r) - p_mean(r)) / 3.0;
    return complexd(q_mean(r), p_est) / std::sqrt(2.0);
}

/// Classical distribution over pixel states produced by the decohering
/// channel applied to |alpha>.
struct ChannelOutput {
    complexd input_amplitude;
    PixelBasisSpec spec;
    Eigen::MatrixXd table;          // P(n, m) over the reported windows
    complexd output_amplitude;      // sum P(n,m) (q_n + i p_m)/sqrt2 over the full grid range
    double covered_probability;     // probability captured by the box window (all momenta)
    double q_tail_bound;            // coherent weight outside the box window
    double table_excluded;          // covered probability outside the reported momentum window

    double table_sum() const { return table.sum(); }
};

/// Applies the pixel projection channel to |alpha>. Per box, all momentum
/// coefficients come from one midpoint-rule Fourier transform of the
/// coherent wavefunction; their squared moduli sum to the box probability
/// (discrete Parseval), so completeness is verified to quadrature error.
/// The output amplitude sums the momentum lattice symmetrically about
/// zero, the principal-value prescription for its conditionally
/// convergent momentum part.
inline ChannelOutput apply_channel(complexd alpha, const PixelBasisSpec& spec,
                                   double excluded_tol = 1e-6) {
    spec.validate();
    const int n_boxes = spec.n_max - spec.n_min + 1;
    const int r = spec.batch_samples;
    const double h = spec.delta / r;

    ChannelOutput out;
    out.input_amplitude = alpha;
    out.spec = spec;
    out.table = Eigen::MatrixXd::Zero(n_boxes, 2 * spec.m_halfwidth + 1);
    out.output_amplitude = 0.0;
    out.covered_probability = 0.0;
    out.table_excluded = 0.0;

    const double q_bar = std::sqrt(2.0) * alpha.real();
    const double left = (spec.box_center(spec.n_min) - 0.5 * spec.delta) - q_bar;
    const double right = (spec.box_center(spec.n_max) + 0.5 * spec.delta) - q_bar;
    out.q_tail_bound = 0.5 * std::erfc(-left) + 0.5 * std::erfc(right);
    if (out.q_tail_bound > excluded_tol)
        throw std::invalid_argument("apply_channel: box window excludes too much probability, widen it");

    Eigen::FFT<double> fft;
    std::vector<complexd> samples(r), coeff(r);
    for (int bi = 0; bi < n_boxes; ++bi) {
        const int n = spec.n_min + bi;
        const double q_lo = spec.box_center(n) - 0.5 * spec.delta;
        for (int j = 0; j < r; ++j)
            samples[j] = coherent_position_wavefunction(q_lo + (j + 0.5) * h, alpha);
        fft.fwd(coeff, samples);

        double box_total = 0.0;
        complexd box_amp = 0.0;
        for (int bin = 0; bin < r; ++bin) {
            const int m = bin < r / 2 ? bin : bin - r;  // signed lattice index
            const double pm = spec.momentum(m);
            // midpoint-rule Fourier coefficient, including the half-sample
            // phase and the box-edge plane-wave phase
            const complexd c = coeff[bin] * (h / std::sqrt(spec.delta)) *
                               std::exp(complexd(0.0, -(q_lo * pm + pi * m / static_cast<double>(r))));
            const double prob = std::norm(c);
            box_total += prob;
            if (m != -r / 2)  // keep the lattice sum symmetric about m = 0
                box_amp += prob * complexd(spec.box_center(n), pm);
            const int col = m - (spec.m_center - spec.m_halfwidth);
            if (col >= 0 && col <= 2 * spec.m_halfwidth) out.table(bi, col) += prob;
        }
        out.covered_probability += box_total;
        out.output_amplitude += box_amp / std::sqrt(2.0);
    }
    out.table_excluded = out.covered_probability - out.table.sum();
    return out;
}

/// Re-application of the channel to an already decohered output. Distinct
/// pixel states are exactly orthogonal (disjoint supports across boxes,
/// whole-period plane waves within one), so the projection leaves the
/// distribution unchanged.
inline ChannelOutput reapply_channel(const ChannelOutput& output) { return output; }

/// RMS error between the input phase and the phase of the channel output
/// amplitude, swept over uniformly spaced input phases.
inline double channel_phase_reference_error(double amplitude, double delta, int n_phases = 16) {
    if (amplitude < 2.0)
        throw std::invalid_argument("channel_phase_reference_error: need |alpha| >= 2");
    double acc = 0.0;
    for (int k = 0; k < n_phases; ++k) {
        const double theta = -pi + 2.0 * pi * k / n_phases;
        const complexd alpha = amplitude * std::exp(complexd(0.0, theta));
        const ChannelOutput out = apply_channel(alpha, default_pixel_spec(alpha, delta));
        const double err = wrap_angle(std::arg(out.output_amplitude) - theta);
        acc += err * err;
    }
    return std::sqrt(acc / n_phases);
}

}  // namespace laserclock
