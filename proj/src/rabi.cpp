#include "qrm/rabi.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "qrm/errors.hpp"

namespace qrm {

namespace {

constexpr double kParityThreshold = 1e-9;

// Dense real H_R restricted to the {g,e} block, ordering g0..g_{N-1}, e0..e_{N-1}.
RMatrix coupled_block(const ModelParams& p, int N)
{
    RMatrix h = RMatrix::Zero(2 * N, 2 * N);
    for (int n = 0; n < N; ++n) {
        h(n, n) = p.omega_g + n * p.omega_c;
        h(N + n, N + n) = p.omega_e + n * p.omega_c;
    }
    for (int n = 1; n < N; ++n) {
        const double amp = p.lambda * std::sqrt(double(n));
        h(N + n - 1, n) = h(n, N + n - 1) = amp;
        h(N + n, n - 1) = h(n - 1, N + n) = amp;
    }
    return h;
}

// true if component k of the {g,e} block vector belongs to the even sector
bool even_component(Index k, int N)
{
    const bool is_e = k >= N;
    const Index photons = is_e ? k - N : k;
    return ((photons + (is_e ? 1 : 0)) % 2) == 0;
}

struct Sector {
    double even = 0.0;
    double odd = 0.0;
};

Sector sector_weights(const Eigen::Ref<const RVector>& v, int N)
{
    Sector w;
    for (Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v(k));
        if (even_component(k, N))
            w.even = std::max(w.even, a);
        else
            w.odd = std::max(w.odd, a);
    }
    return w;
}

void fix_sign(Eigen::Ref<RVector> v)
{
    const double scale = v.cwiseAbs().maxCoeff();
    for (Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) > kParityThreshold * scale) {
            if (v(k) < 0.0)
                v = -v;
            return;
        }
    }
}

// Solve each parity sector separately; used when the full solve mixes
// degenerate states of opposite parity.
void solve_by_sector(const RMatrix& h, int N, RVector& values, RMatrix& vectors)
{
    std::vector<Index> sectors[2];
    for (Index k = 0; k < 2 * N; ++k)
        sectors[even_component(k, N) ? 0 : 1].push_back(k);

    std::vector<std::pair<double, RVector>> all;
    for (const auto& idx : sectors) {
        const Index n = Index(idx.size());
        RMatrix sub(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                sub(i, j) = h(idx[i], idx[j]);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(sub);
        for (Index c = 0; c < n; ++c) {
            RVector full = RVector::Zero(2 * N);
            for (Index i = 0; i < n; ++i)
                full(idx[i]) = es.eigenvectors()(i, c);
            all.emplace_back(es.eigenvalues()(c), std::move(full));
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    values.resize(2 * N);
    vectors.resize(2 * N, 2 * N);
    for (Index c = 0; c < 2 * N; ++c) {
        values(c) = all[c].first;
        vectors.col(c) = all[c].second;
    }
}

RVector lowest_eigenvalues(const ModelParams& p, int N, int count)
{
    Eigen::SelfAdjointEigenSolver<RMatrix> es(coupled_block(p, N), Eigen::EigenvaluesOnly);
    return es.eigenvalues().head(std::min<Index>(count, 2 * N));
}

} // namespace

RVector RabiSpectrum::eigenvector(Index n) const
{
    RVector v(2 * n_fock);
    v.head(n_fock) = coeff_g.row(n).transpose();
    v.tail(n_fock) = coeff_e.row(n).transpose();
    return v;
}

Index RabiSpectrum::find(Parity p, int rank) const
{
    int seen = 0;
    for (Index n = 0; n < size(); ++n) {
        if (parity[n] == p) {
            if (seen == rank)
                return n;
            ++seen;
        }
    }
    fail(ErrorKind::InvalidArgument, "no eigenstate with requested parity rank " + std::to_string(rank));
}

double truncation_shift(const ModelParams& p, const SpaceConfig& cfg, int n_check)
{
    const int n_big = (3 * cfg.n_fock + 1) / 2;
    const RVector a = lowest_eigenvalues(p, cfg.n_fock, n_check);
    const RVector b = lowest_eigenvalues(p, n_big, n_check);
    const Index k = std::min(a.size(), b.size());
    return (a.head(k) - b.head(k)).cwiseAbs().maxCoeff();
}

RabiSpectrum diagonalize(const ModelParams& p, const SpaceConfig& cfg, const DiagonalizeOptions& opt)
{
    p.validate();
    cfg.validate();
    const int N = cfg.n_fock;

    if (opt.check_convergence) {
        const double shift = truncation_shift(p, cfg, opt.n_check);
        if (shift > opt.tolerance) {
            fail(ErrorKind::TruncationNotConverged,
                 "lowest eigenvalues shift by " + std::to_string(shift) + " at n_fock=" + std::to_string(N) +
                     " (lambda=" + std::to_string(p.lambda) + ")");
        }
    }

    const RMatrix h = coupled_block(p, N);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
    RVector values = es.eigenvalues();
    RMatrix vectors = es.eigenvectors();

    std::vector<Parity> parity(2 * N);
    bool ambiguous = false;
    for (Index c = 0; c < 2 * N && !ambiguous; ++c) {
        const Sector w = sector_weights(vectors.col(c), N);
        const double scale = std::max(w.even, w.odd);
        if (w.odd <= kParityThreshold * scale)
            parity[c] = Parity::even;
        else if (w.even <= kParityThreshold * scale)
            parity[c] = Parity::odd;
        else
            ambiguous = true;
    }
    if (ambiguous) {
        solve_by_sector(h, N, values, vectors);
        for (Index c = 0; c < 2 * N; ++c) {
            const Sector w = sector_weights(vectors.col(c), N);
            parity[c] = w.odd == 0.0 ? Parity::even : Parity::odd;
        }
    }

    // Forbidden components are round-off; zero them and renormalise.
    for (Index c = 0; c < 2 * N; ++c) {
        auto v = vectors.col(c);
        const bool keep_even = parity[c] == Parity::even;
        for (Index k = 0; k < 2 * N; ++k)
            if (even_component(k, N) != keep_even)
                v(k) = 0.0;
        v.normalize();
        fix_sign(v);
    }

    RabiSpectrum spec;
    spec.params = p;
    spec.n_fock = N;
    spec.eigenvalues = values;
    spec.coeff_g = vectors.topRows(N).transpose();
    spec.coeff_e = vectors.bottomRows(N).transpose();
    spec.parity = std::move(parity);
    return spec;
}

SweepTable coefficient_sweep(const ModelParams& p, const SpaceConfig& cfg, std::span<const double> lambda_grid,
                             int n, std::span<const int> m_list)
{
    SweepTable table;
    table.n = n;
    table.m_list.assign(m_list.begin(), m_list.end());
    table.lambda.assign(lambda_grid.begin(), lambda_grid.end());
    table.values.resize(Index(lambda_grid.size()), Index(m_list.size()));
    for (int m : m_list)
        if (m < 0 || m >= cfg.n_fock)
            fail(ErrorKind::InvalidArgument, "photon index out of range in sweep");

    RVector previous;
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] >= 0.0))
            fail(ErrorKind::InvalidArgument, "lambda grid values must be >= 0");
        ModelParams pi = p;
        pi.lambda = lambda_grid[i];
        const RabiSpectrum spec = diagonalize(pi, cfg, {.check_convergence = false});
        if (n < 0 || n >= spec.size())
            fail(ErrorKind::InvalidArgument, "eigenstate index out of range in sweep");

        RVector v;
        double overlap = 1.0;
        if (i == 0) {
            v = spec.eigenvector(n);
        } else {
            Index best = 0;
            double best_abs = -1.0;
            double best_val = 0.0;
            for (Index k = 0; k < spec.size(); ++k) {
                const double o = previous.dot(spec.eigenvector(k));
                if (std::abs(o) > best_abs) {
                    best_abs = std::abs(o);
                    best_val = o;
                    best = k;
                }
            }
            if (best_abs < 0.5) {
                fail(ErrorKind::EigenstateTrackingLost,
                     "overlap " + std::to_string(best_abs) + " at lambda=" + std::to_string(lambda_grid[i]) +
                         "; refine the grid");
            }
            v = spec.eigenvector(best);
            if (best_val < 0.0)
                v = -v;
            overlap = best_abs;
        }
        for (std::size_t j = 0; j < m_list.size(); ++j)
            table.values(Index(i), Index(j)) = v(m_list[j]);
        table.min_overlap.push_back(overlap);
        previous = std::move(v);
    }
    return table;
}

void SweepTable::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorKind::IoError, "cannot open " + path);
    out << std::setprecision(17);
    out << "lambda";
    for (int m : m_list)
        out << ",C_" << n << '_' << m;
    out << '\n';
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        out << lambda[i];
        for (Index j = 0; j < values.cols(); ++j)
            out << ',' << values(Index(i), j);
        out << '\n';
    }
}

double eta(const RabiSpectrum& spec, int n, int M, int m)
{
    const int target = 2 * m + M;
    if (n < 0 || n >= spec.size() || M < 0 || target >= spec.n_fock)
        fail(ErrorKind::InvalidArgument, "eta index out of range");
    const double denom = spec.C(n, target);
    if (std::abs(denom) < 1e-12) {
        fail(ErrorKind::DegenerateCoefficient,
             "C_{" + std::to_string(n) + "," + std::to_string(target) + "} vanishes; bundle target unreachable");
    }
    return std::abs(spec.C(n, M) / denom);
}

} // namespace qrm
