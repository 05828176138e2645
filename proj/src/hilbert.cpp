#include "qrm/hilbert.hpp"

#include <cmath>
#include <vector>

#include "qrm/errors.hpp"

namespace qrm {

namespace {

using Triplet = Eigen::Triplet<Complex>;

OperatorMatrix from_triplets(const SpaceConfig& cfg, const std::vector<Triplet>& t, bool hermitian)
{
    OperatorMatrix op;
    op.entries.resize(cfg.dim(), cfg.dim());
    op.entries.setFromTriplets(t.begin(), t.end());
    op.entries.makeCompressed();
    op.hermitian = hermitian;
    return op;
}

constexpr Level kLevels[] = {Level::b, Level::g, Level::e};

} // namespace

void SpaceConfig::validate() const
{
    if (n_fock < 2)
        fail(ErrorKind::ValidationError, "n_fock must be >= 2, got " + std::to_string(n_fock));
}

void ModelParams::validate() const
{
    if (!(omega_c > 0.0))
        fail(ErrorKind::ValidationError, "omega_c must be positive");
    if (!(omega_b < omega_g && omega_g < omega_e))
        fail(ErrorKind::ValidationError, "level ordering omega_b < omega_g < omega_e violated");
    if (!(lambda >= 0.0))
        fail(ErrorKind::ValidationError, "coupling lambda must be >= 0");
}

double OperatorMatrix::hermiticity_error() const
{
    SparseC diff = entries - SparseC(entries.adjoint());
    double worst = 0.0;
    for (Index k = 0; k < diff.outerSize(); ++k)
        for (SparseC::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

OperatorMatrix build_destroy(const SpaceConfig& cfg)
{
    cfg.validate();
    std::vector<Triplet> t;
    t.reserve(3 * cfg.n_fock);
    for (Level s : kLevels)
        for (int n = 1; n < cfg.n_fock; ++n)
            t.emplace_back(cfg.index(s, n - 1), cfg.index(s, n), std::sqrt(double(n)));
    return from_triplets(cfg, t, false);
}

OperatorMatrix build_create(const SpaceConfig& cfg)
{
    return adjoint(build_destroy(cfg));
}

OperatorMatrix build_number(const SpaceConfig& cfg)
{
    cfg.validate();
    std::vector<Triplet> t;
    for (Level s : kLevels)
        for (int n = 1; n < cfg.n_fock; ++n)
            t.emplace_back(cfg.index(s, n), cfg.index(s, n), double(n));
    return from_triplets(cfg, t, true);
}

OperatorMatrix build_atomic_projector(Level from, Level to, const SpaceConfig& cfg)
{
    cfg.validate();
    std::vector<Triplet> t;
    t.reserve(cfg.n_fock);
    for (int n = 0; n < cfg.n_fock; ++n)
        t.emplace_back(cfg.index(to, n), cfg.index(from, n), 1.0);
    return from_triplets(cfg, t, from == to);
}

OperatorMatrix build_rabi_hamiltonian(const ModelParams& p, const SpaceConfig& cfg)
{
    p.validate();
    cfg.validate();
    std::vector<Triplet> t;
    const int N = cfg.n_fock;
    t.reserve(6 * N);
    for (int n = 0; n < N; ++n) {
        t.emplace_back(cfg.index(Level::g, n), cfg.index(Level::g, n), p.omega_g + n * p.omega_c);
        t.emplace_back(cfg.index(Level::e, n), cfg.index(Level::e, n), p.omega_e + n * p.omega_c);
    }
    // lambda (a + a^dag)(|e><g| + |g><e|)
    for (int n = 1; n < N; ++n) {
        const double amp = p.lambda * std::sqrt(double(n));
        // <e,n-1|.|g,n>, <e,n|.|g,n-1> and their conjugates
        t.emplace_back(cfg.index(Level::e, n - 1), cfg.index(Level::g, n), amp);
        t.emplace_back(cfg.index(Level::g, n), cfg.index(Level::e, n - 1), amp);
        t.emplace_back(cfg.index(Level::e, n), cfg.index(Level::g, n - 1), amp);
        t.emplace_back(cfg.index(Level::g, n - 1), cfg.index(Level::e, n), amp);
    }
    return from_triplets(cfg, t, true);
}

OperatorMatrix build_bare_hamiltonian(const ModelParams& p, const SpaceConfig& cfg)
{
    OperatorMatrix h = build_rabi_hamiltonian(p, cfg);
    std::vector<Triplet> t;
    for (int n = 0; n < cfg.n_fock; ++n)
        t.emplace_back(cfg.index(Level::b, n), cfg.index(Level::b, n), p.omega_b + n * p.omega_c);
    OperatorMatrix hb = from_triplets(cfg, t, true);
    return h + hb;
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b)
{
    OperatorMatrix r;
    r.entries = a.entries + b.entries;
    r.hermitian = a.hermitian && b.hermitian;
    return r;
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b)
{
    OperatorMatrix r;
    r.entries = (a.entries * b.entries).pruned();
    r.hermitian = false;
    return r;
}

OperatorMatrix adjoint(const OperatorMatrix& a)
{
    OperatorMatrix r;
    r.entries = SparseC(a.entries.adjoint());
    r.hermitian = a.hermitian;
    return r;
}

} // namespace qrm
