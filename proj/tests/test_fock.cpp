#include <catch2/catch_amalgamated.hpp>

#include "laserclock/fock.hpp"
#include "oracles.hpp"

using namespace laserclock;

TEST_CASE("mode operators obey the ladder algebra") {
    const FockSpace space(12);
    const Eigen::MatrixXcd a = space.annihilation();
    const Eigen::MatrixXcd ad = space.creation();
    const Eigen::MatrixXcd n = space.number();

    SECTION("a lowers number states") {
        Eigen::VectorXcd five = Eigen::VectorXcd::Zero(12);
        five(5) = 1.0;
        const Eigen::VectorXcd lowered = a * five;
        CHECK(std::abs(lowered(4) - std::sqrt(5.0)) < 1e-14);
    }

    SECTION("n = a^dag a and n|3> = 3|3>") {
        CHECK((ad * a - n).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::VectorXcd three = Eigen::VectorXcd::Zero(12);
        three(3) = 1.0;
        CHECK(std::abs((three.adjoint() * n * three)(0, 0).real() - 3.0) < 1e-14);
    }

    SECTION("commutator is the identity below the truncation edge") {
        const Eigen::MatrixXcd comm = a * ad - ad * a;
        for (int i = 0; i < 11; ++i)
            for (int j = 0; j < 11; ++j)
                CHECK(std::abs(comm(i, j) - (i == j ? 1.0 : 0.0)) < 1e-13);
    }

    SECTION("quadrature mean of a coherent state") {
        const FockSpace big(40);
        const StateVector psi = coherent_state(complexd(1.0, 1.0), big);
        const complexd qmean =
            (psi.amplitudes.adjoint() * big.quadrature_q() * psi.amplitudes)(0, 0);
        CHECK(qmean.real() == Catch::Approx(std::sqrt(2.0)).margin(1e-8));
        const complexd pmean =
            (psi.amplitudes.adjoint() * big.quadrature_p() * psi.amplitudes)(0, 0);
        CHECK(pmean.real() == Catch::Approx(std::sqrt(2.0)).margin(1e-8));
    }
}

TEST_CASE("coherent state amplitudes") {
    SECTION("alpha = 0 is the vacuum") {
        const StateVector psi = coherent_state(0.0, FockSpace(8));
        CHECK(psi.amplitudes(0) == complexd(1.0, 0.0));
        CHECK(psi.amplitudes.tail(7).cwiseAbs().maxCoeff() == 0.0);
        CHECK(psi.truncation_tail == 0.0);
    }

    const FockSpace space(40);
    const StateVector psi = coherent_state(2.0, space);

    SECTION("normalized with negligible tail") {
        CHECK(psi.is_normalized());
        CHECK(psi.truncation_tail < 1e-12);
    }

    SECTION("mean photon number |alpha|^2") {
        double mean = 0.0;
        for (int n = 0; n < 40; ++n) mean += n * std::norm(psi.amplitudes(n));
        CHECK(mean == Catch::Approx(4.0).margin(1e-8));
    }

    SECTION("mean annihilation equals alpha, operator route vs direct sum") {
        const complexd via_op =
            (psi.amplitudes.adjoint() * space.annihilation() * psi.amplitudes)(0, 0);
        const complexd via_sum = oracles::mean_annihilation(psi.amplitudes);
        CHECK(std::abs(via_op - complexd(2.0, 0.0)) < 1e-8);
        CHECK(std::abs(via_op - via_sum) < 1e-12);
    }

    SECTION("complex amplitude carries the phase") {
        const StateVector rot = coherent_state(2.0 * std::exp(complexd(0.0, 0.8)), space);
        const complexd mean = oracles::mean_annihilation(rot.amplitudes);
        CHECK(std::abs(mean - 2.0 * std::exp(complexd(0.0, 0.8))) < 1e-8);
    }

    SECTION("tight truncation is rejected") {
        CHECK_THROWS_AS(coherent_state(4.0, FockSpace(10)), std::invalid_argument);
    }

    SECTION("increasing the cutoff moves moments by less than the weighted tail") {
        const FockSpace small(16);
        const StateVector trunc = coherent_state(2.0, small, 1e-4);
        double mean_small = 0.0;
        for (int n = 0; n < 16; ++n) mean_small += n * std::norm(trunc.amplitudes(n));
        double mean_big = 0.0;
        for (int n = 0; n < 40; ++n) mean_big += n * std::norm(psi.amplitudes(n));
        // the tail sits at n ~ dim, so weight it by twice the cutoff
        CHECK(std::abs(mean_big - mean_small) <= 32.0 * trunc.truncation_tail + 1e-12);
        const complexd a_small = oracles::mean_annihilation(trunc.amplitudes);
        const complexd a_big = oracles::mean_annihilation(psi.amplitudes);
        CHECK(std::abs(a_big - a_small) <= 32.0 * trunc.truncation_tail + 1e-12);
    }
}

TEST_CASE("density matrix validation") {
    const FockSpace space(16);
    DensityMatrix rho = DensityMatrix::from_pure(coherent_state(1.0, space));
    CHECK_NOTHROW(rho.validate());

    SECTION("broken trace") {
        rho.matrix *= 1.5;
        CHECK_THROWS_AS(rho.validate(), std::runtime_error);
    }
    SECTION("broken hermiticity") {
        rho.matrix(0, 3) += complexd(0.0, 1e-6);
        CHECK_THROWS_AS(rho.validate(), std::runtime_error);
    }
    SECTION("negative eigenvalue") {
        rho.matrix(5, 5) -= 1e-4;
        rho.matrix(0, 0) += 1e-4;
        rho.matrix(5, 5) -= rho.matrix(5, 5).real() * 2.0;  // force negativity
        CHECK_THROWS_AS(rho.validate(1e-12, 1.0, 1e-10), std::runtime_error);
    }
}

TEST_CASE("canonical phase distribution") {
    SECTION("number states carry no phase") {
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(8, 8);
        proj(5, 5) = 1.0;
        const PhaseDistribution dist = canonical_phase_distribution({proj}, 64);
        for (double v : dist.values) CHECK(v == Catch::Approx(1.0 / (2.0 * pi)).margin(1e-12));
        CHECK(dist.integral() == Catch::Approx(1.0).margin(1e-12));
        // the wrapped-square integrand has a kink at the antipode, so the
        // rectangle rule carries an O(1/K^2) error there
        CHECK(dist.variance == Catch::Approx(pi * pi / 3.0).epsilon(1e-3));
    }

    SECTION("coherent |alpha| = 5 has variance 1/(4 |alpha|^2) within 5%") {
        const int dim = coherent_dim(5.0);
        const FockSpace space(dim);
        const DensityMatrix rho = DensityMatrix::from_pure(coherent_state(5.0, space));
        const PhaseDistribution dist = canonical_phase_distribution(rho, 4 * dim);
        CHECK(dist.variance == Catch::Approx(0.01).epsilon(0.05));
        CHECK(std::abs(dist.circular_mean) < 1e-10);
        for (double v : dist.values) CHECK(v > -1e-10);
    }

    SECTION("number rotation shifts the distribution circularly") {
        const int dim = 30;
        const FockSpace space(dim);
        const DensityMatrix rho = DensityMatrix::from_pure(coherent_state(2.0, space));
        const int grid = 4 * dim;
        const int shift_bins = 9;
        const double theta0 = shift_bins * 2.0 * pi / grid;
        Eigen::MatrixXcd rotated = rho.matrix;
        for (int n = 0; n < dim; ++n)
            for (int m = 0; m < dim; ++m)
                rotated(n, m) *= std::exp(complexd(0.0, theta0 * (m - n)));
        const PhaseDistribution base = canonical_phase_distribution(rho, grid);
        const PhaseDistribution moved = canonical_phase_distribution({rotated}, grid);
        // rho -> e^{-i theta0 n} rho e^{i theta0 n} sends P(theta) to
        // P(theta + theta0), a shift of the peak by -theta0
        for (int k = 0; k < grid; ++k)
            CHECK(moved.values[k] ==
                  Catch::Approx(base.values[(k + shift_bins) % grid]).margin(1e-10));
    }

    SECTION("coarse grids are rejected") {
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(8, 8);
        proj(0, 0) = 1.0;
        CHECK_THROWS_AS(canonical_phase_distribution({proj}, 16), std::invalid_argument);
    }
}

TEST_CASE("coherent-state resolution of the identity") {
    const FockSpace space(16);

    SECTION("vacuum diagonal element") {
        const OvercompletenessResult r = overcompleteness_check(space, 8.0, 400, 0);
        CHECK(r.deviation < 1e-6);
    }

    SECTION("levels up to 10 at radius 10") {
        const OvercompletenessResult r = overcompleteness_check(space, 10.0, 2000, 10);
        CHECK(r.deviation < 1e-5);
        CHECK_FALSE(r.cutoff_limited);
    }

    SECTION("small radius is flagged as cutoff limited") {
        const OvercompletenessResult r = overcompleteness_check(space, 2.5, 2000, 4);
        CHECK(r.deviation > 1e-3);
        CHECK(r.cutoff_limited);
    }
}
