#include "qrm/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "qrm/errors.hpp"

namespace qrm {

namespace {

/// Steps `solver` across the grid and hands the dense-output state at every
/// grid point to `sample`.
template <class Solver, class State, class Sample>
void sweep_grid(Solver& solver, std::span<const double> grid, const State& y0, Sample&& sample)
{
    solver.reset(grid.front(), y0);
    sample(std::size_t{0}, grid.front(), y0);
    State buf;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        while (solver.t() < grid[i])
            solver.step(grid.back());
        solver.interpolate(grid[i], buf);
        sample(i, grid[i], buf);
    }
}

void check_grid(std::span<const double> grid)
{
    if (grid.empty())
        fail(ErrorKind::InvalidArgument, "time grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            fail(ErrorKind::InvalidArgument, "time grid must be strictly increasing");
}

} // namespace

DressedBasis build_dressed_basis(const RabiSpectrum& spec, const ModelParams& p, const SpaceConfig& cfg,
                                 Index n_dressed)
{
    if (cfg.n_fock != spec.n_fock)
        fail(ErrorKind::InvalidArgument, "spectrum and space config disagree on n_fock");
    const Index k = n_dressed <= 0 ? spec.size() : std::min(n_dressed, spec.size());
    const int n = cfg.n_fock;

    DressedBasis basis;
    basis.params = p;
    basis.n_fock = n;
    basis.n_dressed = k;
    basis.energies.resize(n + k);
    basis.transform = RMatrix::Zero(cfg.dim(), n + k);
    for (int m = 0; m < n; ++m) {
        basis.energies(m) = p.omega_b + m * p.omega_c;
        basis.transform(cfg.index(Level::b, m), m) = 1.0;
        basis.labels.push_back("b," + std::to_string(m));
    }
    for (Index j = 0; j < k; ++j) {
        basis.energies(n + j) = spec.eigenvalues(j);
        basis.transform.col(n + j).segment(n, n) = spec.coeff_g.row(j).transpose();
        basis.transform.col(n + j).segment(2 * n, n) = spec.coeff_e.row(j).transpose();
        basis.labels.push_back("eps_" + std::to_string(j));
    }
    basis.coupling = spec.coeff_g.topRows(k);
    return basis;
}

Index default_dressed_count(const BundleTarget& tgt)
{
    return 2 * tgt.final_photons() + 8;
}

std::string to_string(ChannelKind k)
{
    switch (k) {
    case ChannelKind::a:
        return "a";
    case ChannelKind::ge:
        return "ge";
    case ChannelKind::bg:
        return "bg";
    }
    return "?";
}

void DissipationRates::validate() const
{
    if (!(kappa_a >= 0.0) || !(kappa_ge >= 0.0) || !(kappa_bg >= 0.0))
        fail(ErrorKind::ValidationError, "dissipation rates must be >= 0");
}

RMatrix transition_matrix(const DressedBasis& basis, ChannelKind kind)
{
    SpaceConfig cfg{basis.n_fock};
    OperatorMatrix op;
    switch (kind) {
    case ChannelKind::a:
        op = build_destroy(cfg) + build_create(cfg);
        break;
    case ChannelKind::ge:
        op = build_atomic_projector(Level::e, Level::g, cfg) + build_atomic_projector(Level::g, Level::e, cfg);
        break;
    case ChannelKind::bg:
        op = build_atomic_projector(Level::g, Level::b, cfg) + build_atomic_projector(Level::b, Level::g, cfg);
        break;
    }
    const RMatrix o = CMatrix(op.entries).real();
    return basis.transform.transpose() * o * basis.transform;
}

std::vector<JumpChannel> build_channels(const DressedBasis& basis, const DissipationRates& rates, double min_rate)
{
    rates.validate();
    std::vector<JumpChannel> out;
    const std::pair<ChannelKind, double> kinds[] = {
        {ChannelKind::a, rates.kappa_a}, {ChannelKind::ge, rates.kappa_ge}, {ChannelKind::bg, rates.kappa_bg}};
    for (const auto& [kind, kappa] : kinds) {
        if (kappa == 0.0)
            continue;
        const RMatrix c = transition_matrix(basis, kind);
        for (Index from = 0; from < basis.dim(); ++from) {
            for (Index to = 0; to < basis.dim(); ++to) {
                if (!(basis.energies(from) > basis.energies(to)))
                    continue;
                const double rate = kappa * c(to, from) * c(to, from);
                if (rate > min_rate)
                    out.push_back({kind, from, to, rate});
            }
        }
    }
    return out;
}

InteractionHamiltonian::InteractionHamiltonian(const DressedBasis& basis, const PulseTrain& pt)
    : n_b_(basis.n_fock),
      n_d_(basis.n_dressed),
      c_(basis.coupling),
      cc_(basis.coupling.cast<Complex>()),
      eps_(basis.energies.tail(basis.n_dressed)),
      omega_b_(basis.params.omega_b),
      omega_c_(basis.params.omega_c),
      pt_(pt)
{
}

double InteractionHamiltonian::drive(double t) const
{
    double f = 0.0;
    for (int l = 1; l <= 2; ++l) {
        const double env = envelope(pt_, l, t);
        if (env != 0.0)
            f += env * std::cos(pt_.carriers[l - 1] * t);
    }
    return f;
}

void InteractionHamiltonian::phases(double t, CVector& u, CVector& v) const
{
    u.resize(n_d_);
    v.resize(n_b_);
    for (Index k = 0; k < n_d_; ++k)
        u(k) = std::polar(1.0, eps_(k) * t);
    const Complex w = std::polar(1.0, -omega_c_ * t);
    v(0) = std::polar(1.0, -omega_b_ * t);
    for (Index m = 1; m < n_b_; ++m)
        v(m) = v(m - 1) * w;
}

void InteractionHamiltonian::coupling(double t, CMatrix& v) const
{
    const double f = drive(t);
    v.resize(n_d_, n_b_);
    if (f == 0.0) {
        v.setZero();
        return;
    }
    thread_local CVector pu, pv;
    phases(t, pu, pv);
    for (Index m = 0; m < n_b_; ++m)
        for (Index k = 0; k < n_d_; ++k)
            v(k, m) = f * c_(k, m) * pu(k) * pv(m);
}

CMatrix InteractionHamiltonian::dense(double t) const
{
    CMatrix h = CMatrix::Zero(dim(), dim());
    CMatrix v;
    coupling(t, v);
    h.bottomLeftCorner(n_d_, n_b_) = v;
    h.topRightCorner(n_b_, n_d_) = v.adjoint();
    return h;
}

void InteractionHamiltonian::apply(double t, const CVector& psi, CVector& out) const
{
    out.resize(dim());
    const double f = drive(t);
    if (f == 0.0) {
        out.setZero();
        return;
    }
    // Scratch is per thread so one Hamiltonian can serve parallel trajectories.
    thread_local CVector pu, pv, xb, xd;
    phases(t, pu, pv);
    xb = pv.cwiseProduct(psi.head(n_b_));
    xd = pu.conjugate().cwiseProduct(psi.tail(n_d_));
    out.tail(n_d_).noalias() = cc_ * xb;
    out.tail(n_d_).array() *= f * pu.array();
    out.head(n_b_).noalias() = cc_.transpose() * xd;
    out.head(n_b_).array() *= f * pv.array().conjugate();
}

void InteractionHamiltonian::apply_left(double t, const CMatrix& rho, CMatrix& out) const
{
    out.resize(dim(), rho.cols());
    if (drive(t) == 0.0) {
        out.setZero();
        return;
    }
    thread_local CMatrix v;
    coupling(t, v);
    out.bottomRows(n_d_).noalias() = v * rho.topRows(n_b_);
    out.topRows(n_b_).noalias() = v.adjoint() * rho.bottomRows(n_d_);
}

CMatrix build_interaction_hamiltonian(const DressedBasis& basis, const PulseTrain& pt, double t)
{
    return InteractionHamiltonian(basis, pt).dense(t);
}

HamiltonianApply hamiltonian_source(const InteractionHamiltonian& h)
{
    return [h](double t, const CVector& psi, CVector& out) { h.apply(t, psi, out); };
}

HamiltonianApply hamiltonian_source(const LambdaSystem& sys)
{
    return [sys](double t, const CVector& psi, CVector& out) { out = hamiltonian_at(sys, t) * psi; };
}

ClosedResult propagate_closed(const HamiltonianApply& h, const CVector& psi0, std::span<const double> t_grid,
                              const OdeOptions& opt)
{
    check_grid(t_grid);
    const double norm0 = psi0.norm();
    if (std::abs(norm0 - 1.0) > 1e-10)
        fail(ErrorKind::InvalidArgument, "initial state is not normalized");

    auto rhs = [&h](double t, const CVector& y, CVector& dy) {
        h(t, y, dy);
        dy *= -kI;
    };
    auto solver = make_integrator<CVector>(rhs, opt);
    ClosedResult r;
    r.time.assign(t_grid.begin(), t_grid.end());
    r.states.resize(t_grid.size());
    sweep_grid(solver, t_grid, psi0, [&](std::size_t i, double, const CVector& y) {
        r.states[i] = y;
        r.max_norm_drift = std::max(r.max_norm_drift, std::abs(y.norm() - 1.0));
    });
    r.steps = solver.accepted();
    return r;
}

TimeSeries population_series(const ClosedResult& r, std::span<const Index> indices,
                             std::span<const std::string> names)
{
    if (indices.size() != names.size())
        fail(ErrorKind::InvalidArgument, "population_series needs one name per index");
    TimeSeries ts;
    ts.time = r.time;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        auto& col = ts.columns[ts.add_column(names[j])];
        col.reserve(r.states.size());
        for (const auto& s : r.states)
            col.push_back(std::norm(s(indices[j])));
    }
    return ts;
}

ClosedResult propagate_lab_frame(const ModelParams& p, const SpaceConfig& cfg, const PulseTrain& pt,
                                 const CVector& psi0, std::span<const double> t_grid, const OdeOptions& opt)
{
    const SparseC bare = build_bare_hamiltonian(p, cfg).entries;
    const SparseC drive_op = (build_atomic_projector(Level::g, Level::b, cfg) +
                              build_atomic_projector(Level::b, Level::g, cfg)).entries;
    HamiltonianApply h = [&](double t, const CVector& psi, CVector& out) {
        double f = 0.0;
        for (int l = 1; l <= 2; ++l)
            f += envelope(pt, l, t) * std::cos(pt.carriers[l - 1] * t);
        out.noalias() = bare * psi;
        if (f != 0.0)
            out.noalias() += f * (drive_op * psi);
    };
    return propagate_closed(h, psi0, t_grid, opt);
}

Dissipator Dissipator::from_channels(Index dim, const std::vector<JumpChannel>& channels)
{
    Dissipator d;
    d.dim_ = dim;
    d.channels_ = channels;
    d.decay_ = RVector::Zero(dim);
    for (const auto& c : channels) {
        if (c.from >= dim || c.to >= dim || c.from < 0 || c.to < 0)
            fail(ErrorKind::InvalidArgument, "jump channel index outside the basis");
        d.decay_(c.from) += c.rate;
    }
    d.pair_decay_ = 0.5 * (d.decay_.replicate(1, dim) + d.decay_.transpose().replicate(dim, 1));
    return d;
}

Dissipator Dissipator::general(Index dim, std::vector<CMatrix> operators)
{
    Dissipator d;
    d.dim_ = dim;
    d.decay_ = RVector::Zero(dim);
    d.pair_decay_ = RMatrix::Zero(dim, dim);
    for (const auto& op : operators) {
        if (op.rows() != dim || op.cols() != dim)
            fail(ErrorKind::InvalidArgument, "jump operator has the wrong dimension");
        d.op_products_.push_back(op.adjoint() * op);
    }
    d.operators_ = std::move(operators);
    return d;
}

void Dissipator::add_to(const CMatrix& rho, CMatrix& out) const
{
    if (is_general()) {
        for (std::size_t c = 0; c < operators_.size(); ++c) {
            const CMatrix& o = operators_[c];
            const CMatrix& p = op_products_[c];
            out.noalias() += o * rho * o.adjoint();
            out.noalias() -= 0.5 * (p * rho);
            out.noalias() -= 0.5 * (rho * p);
        }
        return;
    }
    out.array() -= rho.array() * pair_decay_.array();
    for (const auto& c : channels_)
        out(c.to, c.to) += c.rate * rho(c.from, c.from);
}

DensityApply density_source(const InteractionHamiltonian& h)
{
    return [h](double t, const CMatrix& rho, CMatrix& out) { h.apply_left(t, rho, out); };
}

namespace {

struct DensityRun {
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;
    double max_hermiticity_error = 0.0;
    long steps = 0;
};

DensityRun integrate_density(const DensityApply& h, const Dissipator& d, const CMatrix& rho0,
                             std::span<const double> grid, const MasterOptions& opt, bool is_state,
                             const MasterObserver& observer)
{
    check_grid(grid);
    if (rho0.rows() != d.dim() || rho0.cols() != d.dim())
        fail(ErrorKind::InvalidArgument, "density matrix dimension does not match the dissipator");

    CMatrix a;
    auto rhs = [&h, &d, &a](double t, const CMatrix& rho, CMatrix& dr) {
        h(t, rho, a);
        dr = -kI * (a - a.adjoint());
        d.add_to(rho, dr);
    };
    auto solver = make_integrator<CMatrix>(rhs, opt.ode);
    DensityRun run;
    const double trace0 = rho0.trace().real();
    sweep_grid(solver, grid, rho0, [&](std::size_t i, double t, const CMatrix& rho) {
        const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        run.max_hermiticity_error = std::max(run.max_hermiticity_error, herm);
        if (is_state) {
            run.max_trace_drift = std::max(run.max_trace_drift, std::abs(rho.trace().real() - trace0));
            const bool check = opt.check_positivity &&
                               (i % std::size_t(std::max(1, opt.positivity_stride)) == 0 || i + 1 == grid.size());
            if (check) {
                const CMatrix hp = 0.5 * (rho + rho.adjoint());
                Eigen::SelfAdjointEigenSolver<CMatrix> es(hp, Eigen::EigenvaluesOnly);
                const double lo = es.eigenvalues().minCoeff();
                run.min_eigenvalue = std::min(run.min_eigenvalue, lo);
                if (lo < -opt.positivity_tolerance)
                    fail(ErrorKind::PositivityViolation,
                         "density matrix eigenvalue " + std::to_string(lo) + " at t=" + std::to_string(t) +
                             "; tighten the integrator tolerance");
            }
        }
        if (observer)
            observer(i, t, rho);
    });
    run.steps = solver.accepted();
    return run;
}

} // namespace

MasterResult propagate_master(const DensityApply& h, const Dissipator& d, const CMatrix& rho0,
                              std::span<const double> t_grid, const MasterOptions& opt,
                              const MasterObserver& observer)
{
    MasterResult r;
    r.time.assign(t_grid.begin(), t_grid.end());
    r.populations.resize(t_grid.size());
    auto obs = [&](std::size_t i, double t, const CMatrix& rho) {
        r.populations[i] = rho.diagonal().real();
        if (observer)
            observer(i, t, rho);
    };
    const DensityRun run = integrate_density(h, d, rho0, t_grid, opt, true, obs);
    r.max_trace_drift = run.max_trace_drift;
    r.min_eigenvalue = run.min_eigenvalue;
    r.max_hermiticity_error = run.max_hermiticity_error;
    r.steps = run.steps;
    return r;
}

CMatrix to_interaction_picture(const CMatrix& op, const RVector& energies, double t)
{
    CVector p(energies.size());
    for (Index i = 0; i < energies.size(); ++i)
        p(i) = std::polar(1.0, energies(i) * t);
    return p.asDiagonal() * op * p.conjugate().asDiagonal();
}

Complex expectation_interaction(const CMatrix& op, const RVector& energies, double t, const CMatrix& rho)
{
    const Index n = energies.size();
    CVector p(n);
    for (Index i = 0; i < n; ++i)
        p(i) = std::polar(1.0, energies(i) * t);
    Complex sum = 0.0;
    for (Index j = 0; j < n; ++j) {
        Complex col = 0.0;
        for (Index i = 0; i < n; ++i)
            col += p(i) * op(i, j) * rho(j, i);
        sum += col * std::conj(p(j));
    }
    return sum;
}

CorrelatorResult two_time_correlator(const DensityApply& h, const Dissipator& d, const RVector& energies,
                                     const CMatrix& rho0, const CMatrix& xn, double t,
                                     std::span<const double> tau_grid, const MasterOptions& opt)
{
    check_grid(tau_grid);
    if (tau_grid.front() < 0.0)
        fail(ErrorKind::InvalidArgument, "delays must be >= 0");
    constexpr double kMinDenominator = 1e-14;
    const CMatrix a = xn.adjoint() * xn;

    CMatrix rho_t = rho0;
    if (t > 0.0) {
        const double pre[] = {0.0, t};
        integrate_density(h, d, rho0, pre, opt, true, [&](std::size_t i, double, const CMatrix& rho) {
            if (i == 1)
                rho_t = rho;
        });
    }

    CorrelatorResult r;
    r.t = t;
    const double den_t = expectation_interaction(a, energies, t, rho_t).real();
    if (den_t < kMinDenominator)
        fail(ErrorKind::ZeroDenominator, "bundle intensity vanishes at the anchor time");

    const CMatrix x_t = to_interaction_picture(xn, energies, t);
    const CMatrix sigma = x_t * rho_t * x_t.adjoint();

    std::vector<double> times(tau_grid.size());
    for (std::size_t j = 0; j < tau_grid.size(); ++j)
        times[j] = t + tau_grid[j];

    // Both runs need to start at t: prepend it when the first delay is positive.
    std::vector<double> grid = times;
    const bool prepend = tau_grid.front() > 0.0;
    if (prepend)
        grid.insert(grid.begin(), t);
    const std::size_t shift = prepend ? 1 : 0;

    r.tau.assign(tau_grid.begin(), tau_grid.end());
    r.numerator.resize(times.size());
    r.denominator_tau.resize(times.size());
    r.denominator_t.assign(times.size(), den_t);
    r.value.resize(times.size());

    integrate_density(h, d, rho_t, grid, opt, true, [&](std::size_t i, double s, const CMatrix& rho) {
        if (i >= shift)
            r.denominator_tau[i - shift] = expectation_interaction(a, energies, s, rho).real();
    });
    integrate_density(h, d, sigma, grid, opt, false, [&](std::size_t i, double s, const CMatrix& sg) {
        if (i >= shift)
            r.numerator[i - shift] = expectation_interaction(a, energies, s, sg).real();
    });
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (r.denominator_tau[j] < kMinDenominator)
            fail(ErrorKind::ZeroDenominator, "bundle intensity vanishes at a delayed time");
        r.value[j] = r.numerator[j] / (den_t * r.denominator_tau[j]);
    }
    return r;
}

} // namespace qrm
