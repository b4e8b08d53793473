#include <catch2/catch_amalgamated.hpp>

#include "laserclock/sync.hpp"

using namespace laserclock;

TEST_CASE("closed-form synchronization bounds") {
    SECTION("spot values") {
        CHECK(hl_bound(400.0, 4) == Catch::Approx(1.25e-3).margin(1e-18));
        CHECK(sql_bound(400.0, 4) == Catch::Approx(2.5e-3).margin(1e-18));
        CHECK(hl_bound(0.25, 1) == Catch::Approx(1.0));
        CHECK(split_coherent_bound(400.0, 4) == Catch::Approx(2.5e-3));
    }

    SECTION("sql is exactly twice hl") {
        NormalStream noise(99);
        for (int i = 0; i < 5; ++i) {
            const double mu = 1.0 + 500.0 * std::abs(noise());
            const int parties = 1 + static_cast<int>(20.0 * std::abs(noise()));
            CHECK(sql_bound(mu, parties) / hl_bound(mu, parties) == Catch::Approx(2.0).margin(1e-14));
        }
    }

    SECTION("bounds agree with the tracking variances at the derived N") {
        const double mu = 400.0;
        const int parties = 4;
        const double n_hl = 4.0 * mu * mu / parties;
        CHECK(hl_bound(mu, parties) == Catch::Approx(1.0 / (2.0 * std::sqrt(n_hl))).margin(1e-18));
        const double n_sql = 2.0 * mu * mu / parties;
        CHECK(sql_bound(mu, parties) == Catch::Approx(1.0 / std::sqrt(2.0 * n_sql)).margin(1e-18));
    }

    SECTION("coherent splitting loses sqrt(M) against the tracking bound") {
        for (int parties : {1, 4, 16, 100})
            CHECK(split_coherent_bound(123.0, parties) / hl_bound(123.0, parties) ==
                  Catch::Approx(std::sqrt(double(parties))).margin(1e-12));
    }

    SECTION("budget fields are consistent") {
        const SyncBudget b = make_sync_budget(400.0, 4, 2.0);
        CHECK(b.ell_hl == Catch::Approx(2.0 / 1600.0));
        CHECK(b.ell_sql == Catch::Approx(2.0 / 800.0));
        CHECK(b.flux_per_party == Catch::Approx(200.0));
        CHECK(b.coherence_number_hl == Catch::Approx(200.0 * 1600.0 / 2.0));
        CHECK(b.hl == Catch::Approx(hl_bound(400.0, 4)));
        // kappa drops out of the bounds
        CHECK(make_sync_budget(400.0, 4, 0.5).hl == Catch::Approx(b.hl));
    }

    SECTION("invalid inputs") {
        CHECK_THROWS_AS(hl_bound(0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sql_bound(1.0, 0), std::invalid_argument);
        CHECK_THROWS_AS(make_sync_budget(1.0, 1, 0.0), std::invalid_argument);
    }
}

TEST_CASE("physical-units budget") {
    const double omega = omega_from_wavelength(600e-9);
    CHECK(omega == Catch::Approx(3.14e15).epsilon(0.001));

    SECTION("milliwatt visible laser with a megahertz linewidth") {
        const PhysicalBudget b = physical_bound(1e-3, omega, 1e6, 1);
        CHECK(b.bound == Catch::Approx(1.82e-5).epsilon(0.01));
        CHECK(b.bound > 1e-5);
        CHECK(b.bound < 5e-5);
    }

    SECTION("a planetary head count costs about a radian") {
        const PhysicalBudget b = physical_bound(1e-3, omega, 1e6, 1e10);
        CHECK(b.bound > 0.5);
        CHECK(b.bound < 5.0);
    }

    SECTION("doubling the power gains sqrt(2)") {
        const double a = physical_bound(1e-3, omega, 1e6, 1).bound;
        const double b = physical_bound(2e-3, omega, 1e6, 1).bound;
        CHECK(a / b == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    }

    SECTION("photon budget accompanies the bound") {
        const PhysicalBudget b = physical_bound(1e-3, omega, 1e6, 4);
        CHECK(b.photons_per_second ==
              Catch::Approx(1e-3 / (hbar * omega * 4.0)).epsilon(1e-12));
        CHECK(b.coherence_number == Catch::Approx(b.photons_per_second / 1e6));
    }
}

TEST_CASE("end-to-end Monte Carlo against the closed forms") {
    SECTION("noiseless-gain source, adaptive receivers") {
        const EndToEndResult r = end_to_end_mc(400.0, 2, 1.0, GainKind::hl_noiseless, 400, 5);
        CHECK(r.bound == Catch::Approx(hl_bound(400.0, 2)));
        CHECK(r.ratio == Catch::Approx(1.0).epsilon(0.05));
        CHECK(r.ratio >= 0.95);
        CHECK(r.excluded == 0);
    }

    SECTION("standard source, dual-homodyne receivers") {
        const EndToEndResult r =
            end_to_end_mc(400.0, 2, 1.0, GainKind::standard_surrogate, 400, 6);
        CHECK(r.bound == Catch::Approx(sql_bound(400.0, 2)));
        CHECK(r.ratio == Catch::Approx(1.0).epsilon(0.05));
    }

    SECTION("shared source path correlates party errors at one half") {
        // moment equations: cov rate ell - 2 lambda cov, so corr =
        // ell/(ell + chi^2) = 1/2 at the optimal gain
        const EndToEndResult r = end_to_end_mc(400.0, 4, 1.0, GainKind::hl_noiseless, 400, 7);
        CHECK(r.pair_correlation ==
              Catch::Approx(0.5).margin(0.03 + 3.0 * r.pair_correlation_stderr));
    }

    SECTION("kappa cancels out of the measured error") {
        const EndToEndResult a = end_to_end_mc(400.0, 1, 0.5, GainKind::hl_noiseless, 500, 8);
        const EndToEndResult b = end_to_end_mc(400.0, 1, 2.0, GainKind::hl_noiseless, 500, 9);
        const double combined = std::hypot(a.stderr_, b.stderr_);
        CHECK(std::abs(a.mse - b.mse) < 3.0 * combined);
    }

    SECTION("bitwise reproducible") {
        const EndToEndResult a = end_to_end_mc(400.0, 2, 1.0, GainKind::hl_noiseless, 50, 4);
        const EndToEndResult b = end_to_end_mc(400.0, 2, 1.0, GainKind::hl_noiseless, 50, 4);
        CHECK(a.mse == b.mse);
        CHECK(a.stderr_ == b.stderr_);
        CHECK(a.pair_correlation == b.pair_correlation);
    }

    SECTION("invalid configurations") {
        CHECK_THROWS_AS(end_to_end_mc(400.0, 2, 1.0, GainKind::none, 100, 1),
                        std::invalid_argument);
        // mu too small for the coherence-number floor
        CHECK_THROWS_AS(end_to_end_mc(4.0, 2, 1.0, GainKind::hl_noiseless, 100, 1),
                        std::invalid_argument);
    }
}
