#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "generators.hpp"
#include "qrm/errors.hpp"
#include "qrm/rabi.hpp"

using namespace qrm;

namespace {

// Reference: dense self-adjoint solve of the {g,e} block.
RVector dense_eigenvalues(const ModelParams& p, int n_fock)
{
    const SpaceConfig cfg{n_fock};
    const CMatrix h = build_rabi_hamiltonian(p, cfg).dense();
    const RMatrix block = h.bottomRightCorner(2 * n_fock, 2 * n_fock).real();
    return Eigen::SelfAdjointEigenSolver<RMatrix>(block, Eigen::EigenvaluesOnly).eigenvalues();
}

} // namespace

TEST_SUITE("rabi")
{
    TEST_CASE("oracle: matches dense diagonalization at n_fock 30 and 60")
    {
        for (int N : {30, 60}) {
            for (double lambda : {0.0, 0.3, 0.6, 1.2}) {
                ModelParams p;
                p.lambda = lambda;
                const RabiSpectrum s = diagonalize(p, SpaceConfig{N}, {false});
                const RVector ref = dense_eigenvalues(p, N);
                REQUIRE(s.size() == ref.size());
                CHECK((s.eigenvalues - ref).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }

    TEST_CASE("oracle: Jaynes-Cummings splitting at weak coupling")
    {
        ModelParams p;
        p.lambda = 0.01;
        const RabiSpectrum s = diagonalize(p, SpaceConfig{30});
        // |g,1> and |e,0> split by 2 lambda, corrected at order lambda^2.
        CHECK(std::abs((s.eigenvalues(2) - s.eigenvalues(1)) - 2 * p.lambda) < 2 * p.lambda * p.lambda);
        CHECK(std::abs(s.eigenvalues(0)) < 2 * p.lambda * p.lambda);
        CHECK(std::abs(s.C(1, 1)) == doctest::Approx(std::sqrt(0.5)).epsilon(5e-3));
        CHECK(std::abs(s.D(1, 0)) == doctest::Approx(std::sqrt(0.5)).epsilon(5e-3));
    }

    TEST_CASE("uncoupled limit gives bare states")
    {
        ModelParams p;
        p.lambda = 0.0;
        p.omega_e = 1.3;
        const RabiSpectrum s = diagonalize(p, SpaceConfig{10}, {false});
        CHECK(s.eigenvalues(0) == doctest::Approx(0.0));
        CHECK(std::abs(s.C(0, 0)) == doctest::Approx(1.0));
        CHECK(s.eigenvalues(1) == doctest::Approx(1.0));
        CHECK(s.eigenvalues(2) == doctest::Approx(1.3));
    }

    TEST_CASE("property: parity selection rules are exact zeros")
    {
        test::Gen gen(201);
        for (int c = 0; c < test::kCases; ++c) {
            const ModelParams p = gen.model();
            const int N = gen.integer(10, 40);
            const RabiSpectrum s = diagonalize(p, SpaceConfig{N}, {false});
            for (Index n = 0; n < s.size(); ++n) {
                // even: g with even m, e with odd m; odd: the reverse
                const int g_zero = s.parity[n] == Parity::even ? 1 : 0;
                for (int m = 0; m < N; ++m) {
                    if (m % 2 == g_zero)
                        CHECK(s.C(n, m) == 0.0);
                    else
                        CHECK(s.D(n, m) == 0.0);
                }
            }
        }
    }

    TEST_CASE("property: eigenvectors are orthonormal and sorted")
    {
        test::Gen gen(202);
        for (int c = 0; c < test::kCases; ++c) {
            const ModelParams p = gen.model();
            const int N = gen.integer(6, 30);
            const RabiSpectrum s = diagonalize(p, SpaceConfig{N}, {false});
            RMatrix v(2 * N, s.size());
            for (Index n = 0; n < s.size(); ++n)
                v.col(n) = s.eigenvector(n);
            CHECK((v.transpose() * v - RMatrix::Identity(s.size(), s.size())).norm() < 1e-10);
            for (Index n = 1; n < s.size(); ++n)
                CHECK(s.eigenvalues(n) >= s.eigenvalues(n - 1));
        }
    }

    TEST_CASE("property: sign convention makes the first significant component positive")
    {
        test::Gen gen(203);
        for (int c = 0; c < 10; ++c) {
            const RabiSpectrum s = diagonalize(gen.model(), SpaceConfig{gen.integer(6, 25)}, {false});
            for (Index n = 0; n < s.size(); ++n) {
                const RVector v = s.eigenvector(n);
                const double scale = v.cwiseAbs().maxCoeff();
                Index k = 0;
                while (std::abs(v(k)) <= 1e-9 * scale)
                    ++k;
                CHECK(v(k) > 0.0);
            }
        }
    }

    TEST_CASE("truncation check")
    {
        ModelParams p;
        p.lambda = 1.2;
        CHECK(truncation_shift(p, SpaceConfig{60}) < 1e-6);
        CHECK_THROWS_AS(diagonalize(p, SpaceConfig{8}), Error);
        try {
            diagonalize(p, SpaceConfig{8});
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::TruncationNotConverged);
        }
    }

    TEST_CASE("find by parity rank")
    {
        ModelParams p;
        p.lambda = 0.6;
        const RabiSpectrum s = diagonalize(p, SpaceConfig{40});
        CHECK(s.find(Parity::even, 0) == 0);
        CHECK(s.parity[s.find(Parity::odd, 0)] == Parity::odd);
        CHECK_THROWS_AS(s.find(Parity::odd, 1000), Error);
    }

    TEST_CASE("coefficient sweep is continuous and tracks the ground state")
    {
        ModelParams p;
        std::vector<double> grid;
        for (int i = 0; i <= 30; ++i)
            grid.push_back(0.05 * i);
        const int ms[] = {0, 2, 4};
        const SweepTable t = coefficient_sweep(p, SpaceConfig{50}, grid, 0, ms);
        REQUIRE(t.values.rows() == Index(grid.size()));
        CHECK(std::abs(t.values(0, 0)) == doctest::Approx(1.0));
        for (Index i = 1; i < t.values.rows(); ++i)
            CHECK(std::abs(t.values(i, 0) - t.values(i - 1, 0)) < 0.1);
        for (double o : t.min_overlap)
            CHECK(o > 0.5);
    }

    TEST_CASE("eta ratio")
    {
        ModelParams p;
        p.lambda = 0.6;
        const RabiSpectrum s = diagonalize(p, SpaceConfig{40});
        CHECK(eta(s, 0, 0, 1) == doctest::Approx(std::abs(s.C(0, 0) / s.C(0, 2))));
        CHECK_THROWS_AS(eta(s, 0, 1, 1), Error); // C_{0,3} vanishes by parity
    }
}
