#pragma once

// Shared numerical utilities: angle arithmetic, log-space factorials,
// least-squares fits, deterministic RNG streams and a small parallel job
// runner used by the Monte Carlo modules.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace laserclock {

using complexd = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double x) {
    x = std::remainder(x, 2.0 * pi);
    if (x <= -pi) x += 2.0 * pi;
    return x;
}

inline double log_factorial(double n) { return std::lgamma(n + 1.0); }

/// Poisson weight exp(-mu) mu^n / n!, computed in log space.
inline double poisson_weight(double mu, int n) {
    if (mu <= 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mu + n * std::log(mu) - log_factorial(n));
}

/// Upper tail sum_{n >= d} of a Poisson(mu) distribution.
inline double poisson_tail(double mu, int d) {
    double head = 0.0;
    for (int n = 0; n < d; ++n) head += poisson_weight(mu, n);
    return std::max(0.0, 1.0 - head);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need two or more matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

/// Mean and standard error of the mean.
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_stderr: empty sample");
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    if (values.size() == 1) return {m, std::numeric_limits<double>::infinity()};
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double var = ss / static_cast<double>(values.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(values.size()))};
}

/// splitmix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic seed for stream `stream` of trajectory `index` under `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ull;
    std::uint64_t b = splitmix64(s);
    s ^= index * 0xd1b54a32d192ed03ull;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ c;
}

/// Seeded stream of standard normal deviates.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}
    double operator()() { return dist_(gen_); }
    double uniform() { return uni_(gen_); }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> dist_{0.0, 1.0};
    std::uniform_real_distribution<double> uni_{0.0, 1.0};
};

/// Run job(i) for i in [0, n) across hardware threads. Callers make jobs
/// write to preallocated slots so the reduction order stays deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t workers = std::min<std::size_t>(hw, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    job(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

/// Composite-Simpson quadrature of a complex integrand on [a, b], doubling
/// the panel count until the result changes by less than rel_tol of the
/// magnitude (or of abs_floor, whichever is larger, so that integrals near
/// zero still converge).
template <class F>
complexd integrate_simpson(F&& f, double a, double b, double rel_tol = 1e-8,
                           int initial_panels = 64, double abs_floor = 0.0,
                           int max_panels = 1 << 22) {
    auto simpson = [&](int panels) {
        const double h = (b - a) / panels;
        complexd acc = f(a) + f(b);
        for (int j = 1; j < panels; ++j) acc += (j % 2 ? 4.0 : 2.0) * f(a + j * h);
        return acc * (h / 3.0);
    };
    complexd prev = simpson(initial_panels);
    for (int panels = 2 * initial_panels; panels <= max_panels; panels *= 2) {
        const complexd cur = simpson(panels);
        if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), abs_floor) + 1e-300)
            return cur;
        prev = cur;
    }
    throw std::runtime_error("integrate_simpson: quadrature failed to converge");
}

}  // namespace laserclock
