#include <catch2/catch_amalgamated.hpp>

#include "laserclock/pixel.hpp"
#include "oracles.hpp"

using namespace laserclock;

TEST_CASE("pixel states are orthonormal") {
    PixelBasisSpec spec;
    spec.delta = 1.0;
    spec.n_min = -2;
    spec.n_max = 2;

    SECTION("distinct boxes have disjoint supports") {
        CHECK(pixel_pair_overlap(0, 0, 1, 0, spec) == complexd(0.0, 0.0));
        CHECK(pixel_pair_overlap(-2, 3, 2, 3, spec) == complexd(0.0, 0.0));
    }

    SECTION("same box, distinct momenta integrate whole periods to zero") {
        CHECK(std::abs(pixel_pair_overlap(0, 0, 0, 1, spec)) < 1e-8);
        CHECK(std::abs(pixel_pair_overlap(0, -3, 0, 2, spec)) < 1e-8);
        // oracle: Int_0^1 e^{2 pi i k u} du
        CHECK(std::abs(pixel_pair_overlap(0, 1, 0, 4, spec) -
                       oracles::box_planewave_integral(3)) < 1e-8);
    }

    SECTION("unit norm") {
        CHECK(std::abs(pixel_pair_overlap(0, 2, 0, 2, spec) - 1.0) < 1e-8);
    }
}

TEST_CASE("pixel mean amplitude is (q_n + i p_m)/sqrt(2)") {
    PixelBasisSpec spec;
    spec.delta = 1.0;
    spec.n_min = 0;
    spec.n_max = 4;
    const complexd mean = pixel_mean_amplitude(2, 1, spec);
    const complexd expected = complexd(2.0, 2.0 * pi) / std::sqrt(2.0);
    CHECK(std::abs(mean - expected) < 1e-6);

    SECTION("negative momentum index flips the sign of <p>") {
        const complexd rev = pixel_mean_amplitude(2, -1, spec);
        CHECK(std::abs(rev - complexd(2.0, -2.0 * pi) / std::sqrt(2.0)) < 1e-6);
    }
    SECTION("wider pixels shift the lattice") {
        PixelBasisSpec wide = spec;
        wide.delta = 2.0;
        const complexd m2 = pixel_mean_amplitude(1, 1, wide);
        CHECK(std::abs(m2 - complexd(2.0, pi) / std::sqrt(2.0)) < 1e-6);
    }
}

TEST_CASE("single pixel overlaps against the batch transform") {
    const complexd alpha(2.0, 1.0);
    const PixelBasisSpec spec = default_pixel_spec(alpha, 1.0);
    const ChannelOutput out = apply_channel(alpha, spec);
    for (int n : {2, 3, 4}) {
        for (int m : {0, 1}) {
            const complexd overlap = pixel_overlap_coherent(n, m, alpha, spec);
            const int row = n - spec.n_min;
            const int col = m - (spec.m_center - spec.m_halfwidth);
            REQUIRE(row >= 0);
            REQUIRE(col >= 0);
            CHECK(std::norm(overlap) == Catch::Approx(out.table(row, col)).margin(1e-8));
        }
    }
}

TEST_CASE("channel completeness at alpha = 3") {
    const complexd alpha(3.0, 0.0);
    const ChannelOutput out = apply_channel(alpha, default_pixel_spec(alpha, 1.0));
    CHECK(out.covered_probability + out.q_tail_bound == Catch::Approx(1.0).margin(1e-6));
    CHECK(out.table.minCoeff() >= 0.0);
}

TEST_CASE("channel output keeps the coherent amplitude") {
    SECTION("real amplitude 10") {
        const complexd alpha(10.0, 0.0);
        const ChannelOutput out = apply_channel(alpha, default_pixel_spec(alpha, 1.0));
        CHECK(std::abs(out.output_amplitude - alpha) / 10.0 <= 0.05);
    }
    SECTION("rotated amplitude keeps its phase") {
        const complexd alpha = 10.0 * std::exp(complexd(0.0, 0.25 * pi));
        const ChannelOutput out = apply_channel(alpha, default_pixel_spec(alpha, 1.0));
        CHECK(std::abs(out.output_amplitude - alpha) / 10.0 <= 0.05);
        CHECK(std::abs(wrap_angle(std::arg(out.output_amplitude) - 0.25 * pi)) < 0.05);
    }
}

TEST_CASE("reapplying the channel is the identity on its output") {
    const complexd alpha(4.0, 2.0);
    const ChannelOutput out = apply_channel(alpha, default_pixel_spec(alpha, 1.0));
    const ChannelOutput again = reapply_channel(out);
    CHECK((again.table - out.table).cwiseAbs().maxCoeff() == 0.0);
    CHECK(again.output_amplitude == out.output_amplitude);
    CHECK(again.covered_probability == out.covered_probability);
}

TEST_CASE("narrow box windows are rejected") {
    const complexd alpha(10.0, 0.0);
    PixelBasisSpec spec = default_pixel_spec(alpha, 1.0);
    spec.n_min = 0;
    spec.n_max = 3;  // coherent center sits at q = 14.1, far outside
    CHECK_THROWS_AS(apply_channel(alpha, spec), std::invalid_argument);
}

TEST_CASE("spec validation") {
    PixelBasisSpec spec;
    spec.delta = -1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.delta = 1.0;
    spec.samples_per_box = 10;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.samples_per_box = 4096;
    spec.batch_samples = 1000;  // not a power of two
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("phase reference error across pixel sizes and amplitudes") {
    // twelve phases: multiples of pi/4 sit on symmetry points of the
    // lattice where the pixelization error cancels exactly
    const double rms_big = channel_phase_reference_error(20.0, 1.0, 12);
    CHECK(rms_big < 0.02);
    const double rms_small = channel_phase_reference_error(2.0, 1.0, 12);
    CHECK(rms_small > rms_big);
    const double rms_coarse = channel_phase_reference_error(20.0, 10.0, 12);
    CHECK(rms_coarse > rms_big);
    CHECK_THROWS_AS(channel_phase_reference_error(1.0, 1.0, 12), std::invalid_argument);
}
