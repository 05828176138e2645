#pragma once

#include <span>
#include <vector>

#include "qrm/hilbert.hpp"

namespace qrm {

/// Z2 parity of a Rabi eigenstate: parity of (photon number + [atom in e]).
enum class Parity { even, odd };

/// Spectrum of H_R on the coupled {g,e} (x) Fock block.
///
/// Row n of `coeff_g` / `coeff_e` holds C_{n,m} = <eps_n|g,m> and
/// D_{n,m} = <eps_n|e,m>. Eigenstates are sorted by ascending energy and the
/// first coefficient above 1e-9 of the largest (order g0..g_{N-1}, e0..e_{N-1})
/// is positive.
/// Coefficients forbidden by parity are exactly zero.
struct RabiSpectrum {
    ModelParams params;
    int n_fock = 0;
    RVector eigenvalues;
    RMatrix coeff_g;
    RMatrix coeff_e;
    std::vector<Parity> parity;

    Index size() const { return eigenvalues.size(); }
    double C(Index n, Index m) const { return coeff_g(n, m); }
    double D(Index n, Index m) const { return coeff_e(n, m); }

    /// Eigenvector in the {g,e} block ordering (g block first).
    RVector eigenvector(Index n) const;

    /// Index of the `rank`-th (0-based, ascending energy) eigenstate of a given parity.
    Index find(Parity p, int rank) const;
};

struct DiagonalizeOptions {
    bool check_convergence = true;
    int n_check = 10;
    double tolerance = 1e-6;
};

/// Throws TruncationNotConverged if the lowest `n_check` eigenvalues move by
/// more than `tolerance` when n_fock grows by 50%.
RabiSpectrum diagonalize(const ModelParams& p, const SpaceConfig& cfg, const DiagonalizeOptions& opt = {});

/// Largest shift of the lowest `n_check` eigenvalues between n_fock and ceil(1.5 n_fock).
double truncation_shift(const ModelParams& p, const SpaceConfig& cfg, int n_check = 10);

/// C_{n,m}(lambda) for a tracked eigenstate, signs continuous along the grid.
struct SweepTable {
    int n = 0;
    std::vector<int> m_list;
    std::vector<double> lambda;
    RMatrix values; // rows: lambda points, cols: m_list
    std::vector<double> min_overlap;

    void write_csv(const std::string& path) const;
};

/// Tracks eigenstate n (ascending-energy index at the first grid point) by
/// maximum overlap between consecutive grid points. Throws
/// EigenstateTrackingLost when the best overlap drops below 0.5.
SweepTable coefficient_sweep(const ModelParams& p, const SpaceConfig& cfg, std::span<const double> lambda_grid,
                             int n, std::span<const int> m_list);

/// eta_{2m+M} = |C_{n,M} / C_{n,2m+M}|. Throws DegenerateCoefficient when the
/// denominator is below 1e-12.
double eta(const RabiSpectrum& spec, int n, int M, int m);

} // namespace qrm
