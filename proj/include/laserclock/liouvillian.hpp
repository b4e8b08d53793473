#pragma once

// Master-equation machinery for the damped laser mode: a pluggable gain
// Liouvillian, dense and sparse forms of the generator, steady-state
// solving by null-space inverse iteration, fixed-step time evolution, and
// linewidth extraction from the first-order coherence via the quantum
// regression rule.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "laserclock/fock.hpp"

namespace laserclock {

enum class GainKind {
    none,                // bare damped cavity
    hl_noiseless,        // isometric raising gain: jump operator A|n> = |n+1>
    standard_surrogate,  // noiseless gain plus number dephasing; doubles the linewidth
};

inline const char* to_string(GainKind kind) {
    switch (kind) {
        case GainKind::none: return "none";
        case GainKind::hl_noiseless: return "hl-noiseless";
        case GainKind::standard_surrogate: return "standard-surrogate";
    }
    return "?";
}

struct LiouvillianSpec {
    double kappa;            // cavity loss rate (the bare-cavity spectral FWHM)
    double mu;               // target mean photon number
    GainKind gain = GainKind::hl_noiseless;
    double omega = 0.0;      // detuning

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("LiouvillianSpec: kappa must be positive");
        if (!(mu > 0.0)) throw std::invalid_argument("LiouvillianSpec: mu must be positive");
        if (!std::isfinite(omega)) throw std::invalid_argument("LiouvillianSpec: omega must be finite");
    }

    /// Dephasing rate of the surrogate standard laser. A number-dephasing
    /// dissipator at rate gamma decays the k-th coherence diagonal at
    /// gamma k^2 / 2, i.e. adds gamma of spectral FWHM; kappa/(4 mu) of it
    /// doubles the noiseless-gain linewidth kappa/(4 mu).
    double dephasing_rate() const {
        return gain == GainKind::standard_surrogate ? kappa / (4.0 * mu) : 0.0;
    }

    double gain_rate() const { return gain == GainKind::none ? 0.0 : kappa * mu; }

    /// Closed-form linewidth (spectral FWHM) for this gain kind.
    double theory_linewidth() const {
        switch (gain) {
            case GainKind::none: return kappa;
            case GainKind::hl_noiseless: return kappa / (4.0 * mu);
            case GainKind::standard_surrogate: return kappa / (2.0 * mu);
        }
        return 0.0;
    }

    /// Recommended number-basis truncation.
    int default_dim() const { return coherent_dim(std::sqrt(mu)); }

    /// Fixed integration step, 1e-2 / (kappa (mu + dim)).
    double default_dt(int dim) const { return 1e-2 / (kappa * (mu + dim)); }
};

/// drho/dt for the full generator. The raising gain is truncated
/// consistently at the top level (the jump operator ends at |dim-1>, and
/// its anticommutator uses A^dag A = 1 - |dim-1><dim-1|), so the returned
/// derivative is exactly traceless on the truncated space.
inline Eigen::MatrixXcd apply_liouvillian(const LiouvillianSpec& spec, const Eigen::MatrixXcd& rho) {
    spec.validate();
    const int dim = static_cast<int>(rho.rows());
    if (rho.cols() != dim) throw std::invalid_argument("apply_liouvillian: rho must be square");
    const double kappa = spec.kappa;
    const double gain = spec.gain_rate();
    const double deph = spec.dephasing_rate();
    Eigen::MatrixXcd out(dim, dim);
    for (int n = 0; n < dim; ++n) {
        for (int m = 0; m < dim; ++m) {
            complexd v = 0.0;
            if (n + 1 < dim && m + 1 < dim)
                v += kappa * std::sqrt(static_cast<double>((n + 1) * (m + 1))) * rho(n + 1, m + 1);
            v -= 0.5 * kappa * static_cast<double>(n + m) * rho(n, m);
            if (gain != 0.0) {
                if (n >= 1 && m >= 1) v += gain * rho(n - 1, m - 1);
                const double dn = n < dim - 1 ? 1.0 : 0.0;
                const double dm = m < dim - 1 ? 1.0 : 0.0;
                v -= 0.5 * gain * (dn + dm) * rho(n, m);
            }
            const double k = static_cast<double>(n - m);
            if (deph != 0.0) v -= 0.5 * deph * k * k * rho(n, m);
            if (spec.omega != 0.0) v -= complexd(0.0, spec.omega * k) * rho(n, m);
            out(n, m) = v;
        }
    }
    return out;
}

/// Sparse matrix form acting on column-major vec(rho).
inline Eigen::SparseMatrix<complexd> liouvillian_superoperator(const LiouvillianSpec& spec, int dim) {
    spec.validate();
    const double kappa = spec.kappa;
    const double gain = spec.gain_rate();
    const double deph = spec.dephasing_rate();
    auto idx = [dim](int n, int m) { return n + dim * m; };
    std::vector<Eigen::Triplet<complexd>> trip;
    trip.reserve(static_cast<std::size_t>(3 * dim * dim));
    for (int n = 0; n < dim; ++n) {
        for (int m = 0; m < dim; ++m) {
            complexd diag = -0.5 * kappa * static_cast<double>(n + m);
            if (gain != 0.0) {
                const double dn = n < dim - 1 ? 1.0 : 0.0;
                const double dm = m < dim - 1 ? 1.0 : 0.0;
                diag -= 0.5 * gain * (dn + dm);
            }
            const double k = static_cast<double>(n - m);
            diag -= 0.5 * deph * k * k;
            diag -= complexd(0.0, spec.omega * k);
            trip.emplace_back(idx(n, m), idx(n, m), diag);
            if (n + 1 < dim && m + 1 < dim)
                trip.emplace_back(idx(n, m), idx(n + 1, m + 1),
                                  complexd(kappa * std::sqrt(static_cast<double>((n + 1) * (m + 1)))));
            if (gain != 0.0 && n >= 1 && m >= 1)
                trip.emplace_back(idx(n, m), idx(n - 1, m - 1), complexd(gain));
        }
    }
    Eigen::SparseMatrix<complexd> super(dim * dim, dim * dim);
    super.setFromTriplets(trip.begin(), trip.end());
    super.makeCompressed();
    return super;
}

/// Steady state by inverse iteration on the vectorized generator. A second
/// iteration from an independent start detects a degenerate null space,
/// which on this model signals a truncation artifact.
inline DensityMatrix steady_state(const LiouvillianSpec& spec, int dim = 0) {
    spec.validate();
    if (dim <= 0) dim = spec.default_dim();
    if (spec.gain == GainKind::none) {
        Eigen::MatrixXcd vac = Eigen::MatrixXcd::Zero(dim, dim);
        vac(0, 0) = 1.0;
        return {vac};
    }

    const Eigen::SparseMatrix<complexd> super = liouvillian_superoperator(spec, dim);
    Eigen::SparseMatrix<complexd> shifted = super;
    const double shift = 1e-9 * spec.kappa;
    for (int j = 0; j < shifted.outerSize(); ++j)
        shifted.coeffRef(j, j) -= shift;
    Eigen::SparseLU<Eigen::SparseMatrix<complexd>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("steady_state: factorization of the shifted generator failed");

    const double scale = spec.kappa * (spec.mu + dim);
    auto iterate = [&](Eigen::VectorXcd x) {
        x.normalize();
        for (int it = 0; it < 12; ++it) {
            x = lu.solve(x);
            x.normalize();
            const double resid = (super * x).cwiseAbs().maxCoeff();
            if (resid < 1e-12 * scale) break;
        }
        return x;
    };

    Eigen::VectorXcd start1 = Eigen::VectorXcd::Zero(dim * dim);
    for (int n = 0; n < dim; ++n) start1(n + dim * n) = 1.0;
    const Eigen::VectorXcd x1 = iterate(start1);

    NormalStream noise(derive_seed(0x5eedu, 1));
    Eigen::VectorXcd start2(dim * dim);
    for (int j = 0; j < dim * dim; ++j) start2(j) = complexd(noise(), noise());
    const Eigen::VectorXcd x2 = iterate(start2);

    const double alignment = std::abs(x1.dot(x2));
    if (alignment < 1.0 - 1e-6)
        throw std::runtime_error("steady_state: null space not one-dimensional (truncation artifact)");

    const double resid = (super * x1).cwiseAbs().maxCoeff();
    if (resid > 1e-10 * scale)
        throw std::runtime_error("steady_state: inverse iteration did not converge");

    Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(x1.data(), dim, dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    DensityMatrix out{rho};
    out.validate(1e-10, 1e-10, 1e-8);
    return out;
}

/// Fixed-step RK4 evolution of a density matrix. Throws when population
/// within six levels of the truncation boundary exceeds `boundary_tol`.
inline DensityMatrix evolve_density_matrix(const LiouvillianSpec& spec, const DensityMatrix& rho0,
                                           double t_final, double dt = 0.0,
                                           double boundary_tol = 1e-8) {
    spec.validate();
    const int dim = rho0.dim();
    if (dt <= 0.0) dt = spec.default_dt(dim);
    const long steps = std::lround(std::ceil(t_final / dt));
    Eigen::MatrixXcd rho = rho0.matrix;
    Eigen::MatrixXcd k1, k2, k3, k4;
    for (long s = 0; s < steps; ++s) {
        const double h = std::min(dt, t_final - s * dt);
        k1 = apply_liouvillian(spec, rho);
        k2 = apply_liouvillian(spec, rho + (0.5 * h) * k1);
        k3 = apply_liouvillian(spec, rho + (0.5 * h) * k2);
        k4 = apply_liouvillian(spec, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        double top = 0.0;
        for (int n = std::max(0, dim - 6); n < dim; ++n) top += rho(n, n).real();
        if (top > boundary_tol)
            throw std::runtime_error(
                "evolve_density_matrix: population reached the truncation boundary, increase dim");
    }
    return {rho};
}

/// Coefficients of the generator restricted to matrices supported on the
/// diagonal n = m + k, which it leaves invariant: dv_m/dt =
/// up_m v_{m+1} + diag_m v_m + low_m v_{m-1} for v_m = sigma_{m+k,m}.
struct DiagonalBlock {
    int offset = 0;
    std::vector<double> up, low;
    std::vector<complexd> diag;

    static DiagonalBlock build(const LiouvillianSpec& spec, int dim, int k) {
        spec.validate();
        if (k < 0 || k >= dim) throw std::invalid_argument("DiagonalBlock: offset out of range");
        const int len = dim - k;
        DiagonalBlock block;
        block.offset = k;
        block.up.assign(len, 0.0);
        block.low.assign(len, 0.0);
        block.diag.assign(len, 0.0);
        const double kappa = spec.kappa;
        const double gain = spec.gain_rate();
        const double deph = spec.dephasing_rate();
        for (int m = 0; m < len; ++m) {
            const int n = m + k;
            if (m + 1 < len)
                block.up[m] = kappa * std::sqrt(static_cast<double>((n + 1) * (m + 1)));
            complexd d = -0.5 * kappa * static_cast<double>(n + m);
            if (gain != 0.0) {
                if (m >= 1) block.low[m] = gain;
                const double dn = n < dim - 1 ? 1.0 : 0.0;
                const double dm = m < dim - 1 ? 1.0 : 0.0;
                d -= 0.5 * gain * (dn + dm);
            }
            d -= 0.5 * deph * static_cast<double>(k) * static_cast<double>(k);
            d -= complexd(0.0, spec.omega * k);
            block.diag[m] = d;
        }
        return block;
    }

    void apply(const std::vector<complexd>& v, std::vector<complexd>& out) const {
        const std::size_t len = v.size();
        for (std::size_t m = 0; m < len; ++m) {
            complexd acc = diag[m] * v[m];
            if (m + 1 < len) acc += up[m] * v[m + 1];
            if (m >= 1) acc += low[m] * v[m - 1];
            out[m] = acc;
        }
    }
};

struct LinewidthResult {
    double decay_rate = 0.0;    // fitted exponential decay rate of |g1|
    double linewidth = 0.0;     // spectral FWHM, twice the coherence decay rate
    double theory = 0.0;        // closed-form linewidth for the gain kind
    double ratio = 0.0;         // linewidth / theory
    double fit_residual = 0.0;  // rms residual of the log-linear fit
    bool fit_ok = false;        // residual below 1e-3
    double fit_window = 0.0;    // time span used for the fit
};

/// Linewidth from g1(t) = Tr[a e^{Lt}(a^dag rho_ss)] by quantum regression.
/// a^dag rho_ss lives on the first coherence diagonal, which the generator
/// leaves invariant, so the regression evolves that diagonal directly with
/// the fixed RK4 step. |g1| is fit to a single exponential from t = 0 to
/// the time it reaches a tenth of its initial value; the linewidth is
/// twice the fitted rate.
inline LinewidthResult g1_linewidth(const LiouvillianSpec& spec, int dim = 0, int samples = 2000) {
    spec.validate();
    if (spec.omega != 0.0)
        throw std::invalid_argument("g1_linewidth: work in the rotating frame (omega = 0)");
    if (dim <= 0) dim = spec.default_dim();

    const DensityMatrix rho_ss = steady_state(spec, dim);
    const int len = dim - 1;
    std::vector<double> v(len), weight(len);
    for (int m = 0; m < len; ++m) {
        const double r = std::sqrt(static_cast<double>(m + 1));
        v[m] = r * rho_ss.matrix(m, m).real();
        weight[m] = r;
    }

    const DiagonalBlock block = DiagonalBlock::build(spec, dim, 1);
    std::vector<double> up(block.up), low(block.low), diag(len);
    for (int m = 0; m < len; ++m) diag[m] = block.diag[m].real();

    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int m = 0; m < len; ++m) {
            double acc = diag[m] * in[m];
            if (m + 1 < len) acc += up[m] * in[m + 1];
            if (m >= 1) acc += low[m] * in[m - 1];
            out[m] = acc;
        }
    };
    auto g1_of = [&](const std::vector<double>& in) {
        double s = 0.0;
        for (int m = 0; m < len; ++m) s += weight[m] * in[m];
        return s;
    };

    const double g1_0 = g1_of(v);
    const double expected_rate = 0.5 * spec.theory_linewidth();
    const double t_cap = 2.5 * std::log(10.0) / expected_rate;
    const double dt = spec.default_dt(dim);
    const long stride = std::max(1l, std::lround(t_cap / (dt * samples)));

    std::vector<double> ts{0.0}, logs{std::log(std::abs(g1_0))};
    std::vector<double> k1(len), k2(len), k3(len), k4(len), tmp(len);
    double t = 0.0;
    long step = 0;
    while (t < t_cap) {
        // classic RK4 on the restricted diagonal
        apply(v, k1);
        for (int m = 0; m < len; ++m) tmp[m] = v[m] + 0.5 * dt * k1[m];
        apply(tmp, k2);
        for (int m = 0; m < len; ++m) tmp[m] = v[m] + 0.5 * dt * k2[m];
        apply(tmp, k3);
        for (int m = 0; m < len; ++m) tmp[m] = v[m] + dt * k3[m];
        apply(tmp, k4);
        for (int m = 0; m < len; ++m)
            v[m] += (dt / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
        t += dt;
        ++step;
        if (step % stride == 0) {
            const double g = g1_of(v);
            if (std::abs(g) <= 0.1 * std::abs(g1_0)) break;
            ts.push_back(t);
            logs.push_back(std::log(std::abs(g)));
        }
    }

    LinewidthResult result;
    const LinearFit fit = fit_line(ts, logs);
    result.decay_rate = -fit.slope;
    result.linewidth = 2.0 * result.decay_rate;
    result.theory = spec.theory_linewidth();
    result.ratio = result.linewidth / result.theory;
    result.fit_residual = fit.rms_residual;
    result.fit_ok = fit.rms_residual <= 1e-3;
    result.fit_window = ts.back();
    return result;
}

}  // namespace laserclock
