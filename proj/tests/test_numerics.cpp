#include <catch2/catch_amalgamated.hpp>

#include "laserclock/numerics.hpp"

using namespace laserclock;

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(pi) == Catch::Approx(pi));
    CHECK(wrap_angle(-pi) == Catch::Approx(pi));
    CHECK(wrap_angle(3.0 * pi) == Catch::Approx(pi));
    CHECK(wrap_angle(2.0 * pi + 0.3) == Catch::Approx(0.3));
    CHECK(wrap_angle(-7.5 * pi) == Catch::Approx(0.5 * pi));
    for (double x : {-123.4, -0.1, 0.7, 55.0}) {
        const double w = wrap_angle(x);
        CHECK(w > -pi);
        CHECK(w <= pi);
        CHECK(std::abs(std::sin(w) - std::sin(x)) < 1e-12);
        CHECK(std::abs(std::cos(w) - std::cos(x)) < 1e-12);
    }
}

TEST_CASE("log_factorial matches direct products") {
    double fact = 1.0;
    for (int n = 1; n <= 20; ++n) {
        fact *= n;
        CHECK(log_factorial(n) == Catch::Approx(std::log(fact)).epsilon(1e-12));
    }
}

TEST_CASE("poisson weights are a normalized distribution with mean mu") {
    const double mu = 7.3;
    double total = 0.0, mean = 0.0;
    for (int n = 0; n < 80; ++n) {
        const double w = poisson_weight(mu, n);
        total += w;
        mean += n * w;
    }
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
    CHECK(mean == Catch::Approx(mu).margin(1e-10));
    CHECK(poisson_tail(mu, 80) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("fit_line recovers an exact line") {
    std::vector<double> x{1.0, 2.0, 3.5, 7.0}, y;
    for (double v : x) y.push_back(3.0 - 2.0 * v);
    const LinearFit fit = fit_line(x, y);
    CHECK(fit.slope == Catch::Approx(-2.0).margin(1e-12));
    CHECK(fit.intercept == Catch::Approx(3.0).margin(1e-12));
    CHECK(fit.rms_residual < 1e-12);
}

TEST_CASE("mean_stderr on a known sample") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const MeanStderr ms = mean_stderr(v);
    CHECK(ms.mean == Catch::Approx(2.5));
    CHECK(ms.stderr_ == Catch::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("derive_seed separates streams and indices") {
    CHECK(derive_seed(1, 1, 0) != derive_seed(1, 2, 0));
    CHECK(derive_seed(1, 1, 0) != derive_seed(1, 1, 1));
    CHECK(derive_seed(1, 1, 5) == derive_seed(1, 1, 5));
    CHECK(derive_seed(2, 1, 5) != derive_seed(1, 1, 5));
}

TEST_CASE("normal stream is deterministic per seed") {
    NormalStream a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a(), y = b(), z = c();
        all_equal = all_equal && (x == y);
        any_diff = any_diff || (x != z);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("parallel_for covers every job exactly once") {
    std::vector<int> hits(10000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) REQUIRE(h == 1);
}

TEST_CASE("parallel_for propagates exceptions") {
    CHECK_THROWS_AS(parallel_for(64,
                                 [](std::size_t i) {
                                     if (i == 13) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("simpson refinement integrates an oscillatory gaussian") {
    const complexd val = integrate_simpson(
        [](double q) { return std::exp(complexd(-q * q, 3.0 * q)); }, -8.0, 8.0, 1e-10);
    // closed form sqrt(pi) e^{-9/4}
    const double expected = std::sqrt(pi) * std::exp(-2.25);
    CHECK(val.real() == Catch::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(val.imag()) < 1e-12);
}
