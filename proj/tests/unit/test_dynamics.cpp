#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "qrm/dynamics.hpp"
#include "qrm/errors.hpp"

using namespace qrm;

namespace {

struct Small {
    ModelParams p;
    SpaceConfig cfg;
    RabiSpectrum spec;
    DressedBasis basis;
    PulseTrain pt;
};

// A short, strongly driven toy version of the two-photon setup.
Small small_system(double lambda = 0.3, int n_fock = 8, Index n_dressed = 0)
{
    Small s;
    s.p.lambda = lambda;
    s.p.omega_b = -3.0;
    s.cfg = SpaceConfig{n_fock};
    s.spec = diagonalize(s.p, s.cfg, {false});
    s.basis = build_dressed_basis(s.spec, s.p, s.cfg, n_dressed);
    s.pt.amp_peak = {0.05, 0.08};
    s.pt.center_first = {80.0, 60.0};
    s.pt.width = 20.0;
    s.pt.period = 400.0;
    s.pt.n_cycles = 1;
    const Carriers w = solve_carriers(s.spec, s.p, BundleTarget{0, 0, 1, 0.0});
    s.pt.carriers = {w.omega1, w.omega2};
    return s;
}

std::vector<double> grid(double t1, int n)
{
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i)
        g[i] = t1 * i / n;
    return g;
}

} // namespace

TEST_SUITE("dynamics")
{
    TEST_CASE("property: dressed basis diagonalizes the bare Hamiltonian")
    {
        test::Gen gen(601);
        for (int c = 0; c < 10; ++c) {
            const ModelParams p = gen.model();
            const SpaceConfig cfg{gen.integer(6, 20)};
            const RabiSpectrum spec = diagonalize(p, cfg, {false});
            const DressedBasis b = build_dressed_basis(spec, p, cfg, gen.integer(1, 2 * cfg.n_fock));
            const RMatrix h0 = build_bare_hamiltonian(p, cfg).dense().real();
            const RMatrix proj = b.transform.transpose() * h0 * b.transform;
            CHECK((proj - RMatrix(b.energies.asDiagonal())).norm() < 1e-9);
            CHECK((b.transform.transpose() * b.transform - RMatrix::Identity(b.dim(), b.dim())).norm() < 1e-10);
            CHECK(b.energies(b.b(1)) == doctest::Approx(p.omega_b + p.omega_c));
            CHECK(int(b.labels.size()) == int(b.dim()));
        }
    }

    TEST_CASE("property: a-channel rate on the b ladder is kappa n")
    {
        test::Gen gen(602);
        for (int c = 0; c < 10; ++c) {
            const ModelParams p = gen.model();
            const SpaceConfig cfg{gen.integer(6, 20)};
            const DressedBasis b = build_dressed_basis(diagonalize(p, cfg, {false}), p, cfg, 6);
            const double kappa = gen.uniform(1e-5, 1e-3);
            const auto channels = build_channels(b, DissipationRates{kappa, 0.0, 0.0});
            for (int n = 1; n < cfg.n_fock; ++n) {
                bool found = false;
                for (const auto& ch : channels)
                    if (ch.from == b.b(n) && ch.to == b.b(n - 1)) {
                        CHECK(ch.rate == doctest::Approx(kappa * n));
                        found = true;
                    }
                CHECK(found);
            }
            for (const auto& ch : channels)
                CHECK(b.energies(ch.from) > b.energies(ch.to));
        }
    }

    TEST_CASE("transition matrices")
    {
        const Small s = small_system();
        const RMatrix ta = transition_matrix(s.basis, ChannelKind::a);
        CHECK(ta(s.basis.b(0), s.basis.b(1)) == doctest::Approx(1.0));
        CHECK(std::abs(ta(s.basis.b(2), s.basis.b(3))) == doctest::Approx(std::sqrt(3.0)));
        const RMatrix tbg = transition_matrix(s.basis, ChannelKind::bg);
        CHECK(std::abs(tbg(s.basis.b(0), s.basis.dressed(0))) == doctest::Approx(std::abs(s.spec.C(0, 0))));
        CHECK(tbg.isApprox(tbg.transpose()));
        CHECK_THROWS_AS(DissipationRates({-1.0, 0.0, 0.0}).validate(), Error);
    }

    TEST_CASE("property: interaction Hamiltonian matches the lab-frame drive operator")
    {
        const Small s = small_system();
        const InteractionHamiltonian h(s.basis, s.pt);
        const CMatrix drive_op =
            (build_atomic_projector(Level::g, Level::b, s.cfg) + build_atomic_projector(Level::b, Level::g, s.cfg))
                .dense();
        const CMatrix u = s.basis.transform.cast<Complex>();
        const CMatrix v_dressed = u.adjoint() * drive_op * u;
        test::Gen gen(603);
        for (int c = 0; c < test::kCases; ++c) {
            const double t = gen.uniform(0.0, 200.0);
            const CMatrix ref = h.drive(t) * to_interaction_picture(v_dressed, s.basis.energies, t);
            const CMatrix got = h.dense(t);
            CHECK((got - ref).norm() < 1e-10);
            CHECK((got - got.adjoint()).norm() < 1e-14);
            const CVector psi = gen.state(s.basis.dim());
            CVector out(s.basis.dim());
            h.apply(t, psi, out);
            CHECK((out - got * psi).norm() < 1e-12);
            const CMatrix rho = gen.density(s.basis.dim());
            CMatrix left(s.basis.dim(), s.basis.dim());
            h.apply_left(t, rho, left);
            CHECK((left - got * rho).norm() < 1e-12);
        }
    }

    TEST_CASE("interaction picture reproduces lab-frame populations")
    {
        const Small s = small_system();
        const auto g = grid(160.0, 40);
        const InteractionHamiltonian h(s.basis, s.pt);
        CVector c0 = CVector::Zero(s.basis.dim());
        c0(s.basis.b(0)) = 1.0;
        const OdeOptions opt{1e-10, 1e-12};
        const ClosedResult ip = propagate_closed(hamiltonian_source(h), c0, g, opt);
        const CVector psi0 = s.basis.transform.cast<Complex>() * c0;
        const ClosedResult lab = propagate_lab_frame(s.p, s.cfg, s.pt, psi0, g, opt);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const CVector proj = s.basis.transform.cast<Complex>().adjoint() * lab.states[i];
            worst = std::max(worst, (proj.cwiseAbs2() - ip.states[i].cwiseAbs2()).cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-6);
        CHECK(ip.max_norm_drift < 1e-8);
        // The drive actually moved population.
        CHECK(std::norm(ip.states.back()(s.basis.b(0))) < 0.99);
    }

    TEST_CASE("property: dissipator preserves trace and Hermiticity and matches its general form")
    {
        test::Gen gen(604);
        const Small s = small_system(0.4, 6, 6);
        const auto channels = build_channels(s.basis, DissipationRates{1e-3, 2e-3, 5e-4});
        const Dissipator d = Dissipator::from_channels(s.basis.dim(), channels);
        std::vector<CMatrix> ops;
        for (const auto& ch : channels) {
            CMatrix o = CMatrix::Zero(s.basis.dim(), s.basis.dim());
            o(ch.to, ch.from) = std::sqrt(ch.rate);
            ops.push_back(o);
        }
        const Dissipator dg = Dissipator::general(s.basis.dim(), ops);
        for (int c = 0; c < test::kCases; ++c) {
            const CMatrix rho = gen.density(s.basis.dim());
            CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
            d.add_to(rho, out);
            CHECK(std::abs(out.trace()) < 1e-15);
            CHECK((out - out.adjoint()).norm() < 1e-15);
            CMatrix ref = CMatrix::Zero(rho.rows(), rho.cols());
            dg.add_to(rho, ref);
            CHECK((out - ref).norm() < 1e-14);
        }
    }

    TEST_CASE("property: dissipator is invariant under jump-operator phases")
    {
        test::Gen gen(605);
        for (int c = 0; c < test::kCases; ++c) {
            const Index n = gen.integer(2, 6);
            std::vector<CMatrix> ops, rotated;
            for (int k = 0; k < gen.integer(1, 4); ++k) {
                CMatrix o(n, n);
                for (Index i = 0; i < n; ++i)
                    for (Index j = 0; j < n; ++j)
                        o(i, j) = gen.cnormal();
                ops.push_back(o);
                rotated.push_back(std::polar(1.0, gen.uniform(0.0, 2 * M_PI)) * o);
            }
            const CMatrix rho = gen.density(n);
            CMatrix a = CMatrix::Zero(n, n), b = CMatrix::Zero(n, n);
            Dissipator::general(n, ops).add_to(rho, a);
            Dissipator::general(n, rotated).add_to(rho, b);
            CHECK((a - b).norm() < 1e-10);
        }
    }

    TEST_CASE("master equation keeps a valid state")
    {
        const Small s = small_system(0.3, 6);
        const InteractionHamiltonian h(s.basis, s.pt);
        const auto channels = build_channels(s.basis, DissipationRates{5e-3, 5e-3, 5e-3});
        const Dissipator d = Dissipator::from_channels(s.basis.dim(), channels);
        CMatrix rho0 = CMatrix::Zero(s.basis.dim(), s.basis.dim());
        rho0(0, 0) = 1.0;
        std::size_t seen = 0;
        const MasterResult r = propagate_master(density_source(h), d, rho0, grid(200.0, 50), {},
                                                [&](std::size_t i, double, const CMatrix& rho) {
                                                    CHECK(i == seen++);
                                                    CHECK(std::abs(rho.trace() - 1.0) < 1e-6);
                                                });
        CHECK(seen == 51);
        CHECK(r.max_trace_drift < 1e-8);
        CHECK(r.min_eigenvalue > -1e-6);
        CHECK(r.max_hermiticity_error < 1e-10);
    }

    TEST_CASE("oracle: drive-off cascade follows the rate equations")
    {
        ModelParams p;
        p.lambda = 0.3;
        const SpaceConfig cfg{10};
        const DressedBasis b = build_dressed_basis(diagonalize(p, cfg, {false}), p, cfg, 4);
        PulseTrain off;
        off.amp_peak = {0.0, 0.0};
        const InteractionHamiltonian h(b, off);
        const double kappa = 0.01;
        const Dissipator d = Dissipator::from_channels(b.dim(), build_channels(b, DissipationRates{kappa, 0, 0}));
        CMatrix rho0 = CMatrix::Zero(b.dim(), b.dim());
        rho0(b.b(3), b.b(3)) = 1.0;
        const auto g = grid(300.0, 30);
        const MasterResult r = propagate_master(density_source(h), d, rho0, g, MasterOptions{{1e-10, 1e-12}});
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double q = std::exp(-kappa * g[i]);
            const double binom[4] = {std::pow(1 - q, 3), 3 * q * std::pow(1 - q, 2), 3 * q * q * (1 - q), q * q * q};
            for (int n = 0; n <= 3; ++n)
                CHECK(std::abs(r.populations[i](b.b(n)) - binom[n]) < 1e-6);
        }
    }

    TEST_CASE("interaction-picture expectation")
    {
        test::Gen gen(606);
        const Small s = small_system();
        for (int c = 0; c < 10; ++c) {
            const CMatrix op = gen.hermitian(s.basis.dim());
            const CMatrix rho = gen.density(s.basis.dim());
            const double t = gen.uniform(0.0, 100.0);
            const Complex ref = (to_interaction_picture(op, s.basis.energies, t) * rho).trace();
            CHECK(std::abs(expectation_interaction(op, s.basis.energies, t, rho) - ref) < 1e-10);
        }
    }

    TEST_CASE("two-time correlator at zero delay equals the equal-time value")
    {
        const Small s = small_system(0.3, 6);
        const InteractionHamiltonian h(s.basis, s.pt);
        const auto channels = build_channels(s.basis, DissipationRates{5e-3, 5e-3, 5e-3});
        const Dissipator d = Dissipator::from_channels(s.basis.dim(), channels);
        CMatrix rho0 = CMatrix::Zero(s.basis.dim(), s.basis.dim());
        rho0(0, 0) = 1.0;
        // Lowering operator on the b ladder, a simple stand-in for X.
        CMatrix x = CMatrix::Zero(s.basis.dim(), s.basis.dim());
        for (int n = 1; n < 6; ++n)
            x(s.basis.b(n - 1), s.basis.b(n)) = std::sqrt(double(n));
        const std::vector<double> taus{0.0, 10.0, 50.0};
        const MasterOptions opt{{1e-10, 1e-12}};
        const CorrelatorResult r = two_time_correlator(density_source(h), d, s.basis.energies, rho0, x, 100.0, taus, opt);
        CMatrix rho_t;
        const double tt[] = {0.0, 100.0};
        propagate_master(density_source(h), d, rho0, tt, opt,
                         [&](std::size_t i, double, const CMatrix& rho) { if (i == 1) rho_t = rho; });
        const Complex num = expectation_interaction(x.adjoint() * x.adjoint() * x * x, s.basis.energies, 100.0, rho_t);
        const Complex den = expectation_interaction(x.adjoint() * x, s.basis.energies, 100.0, rho_t);
        CHECK(r.value[0] == doctest::Approx(num.real() / (den.real() * den.real())).epsilon(1e-8));
        CHECK(r.tau.size() == 3);
    }
}
