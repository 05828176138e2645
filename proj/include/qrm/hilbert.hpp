#pragma once

#include "qrm/types.hpp"

namespace qrm {

/// Atomic levels of the ladder atom, lowest first.
enum class Level { b = 0, g = 1, e = 2 };

/// Truncated space: 3-level atom (x) Fock space with `n_fock` photon states.
///
/// Basis ordering is atom-major: |b,0>..|b,N-1>, |g,0>..|g,N-1>, |e,0>..|e,N-1>.
struct SpaceConfig {
    int n_fock = 40;

    Index dim() const { return 3 * Index(n_fock); }
    Index index(Level s, int n) const { return Index(static_cast<int>(s)) * n_fock + n; }

    void validate() const;
};

/// Physical constants of the driven system in units of the cavity frequency.
struct ModelParams {
    double omega_c = 1.0;
    double omega_e = 1.0;
    double omega_g = 0.0;
    double omega_b = -6.0;
    double lambda = 0.0;

    /// Throws ValidationError unless omega_b < omega_g < omega_e and lambda >= 0.
    void validate() const;
};

/// Sparse operator on the composite space.
struct OperatorMatrix {
    SparseC entries;
    bool hermitian = false;

    Index dim() const { return entries.rows(); }
    CMatrix dense() const { return CMatrix(entries); }

    /// max |A - A^dagger| over all entries.
    double hermiticity_error() const;
};

OperatorMatrix build_destroy(const SpaceConfig& cfg);
OperatorMatrix build_create(const SpaceConfig& cfg);
OperatorMatrix build_number(const SpaceConfig& cfg);

/// |to><from| (x) 1_Fock.
OperatorMatrix build_atomic_projector(Level from, Level to, const SpaceConfig& cfg);

/// Rabi Hamiltonian on the {g,e} (x) Fock block, zero on the |b> sector.
OperatorMatrix build_rabi_hamiltonian(const ModelParams& p, const SpaceConfig& cfg);

/// Static part of the full Hamiltonian: H_R + (omega_b + omega_c a^dag a)|b><b|.
OperatorMatrix build_bare_hamiltonian(const ModelParams& p, const SpaceConfig& cfg);

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix adjoint(const OperatorMatrix& a);

} // namespace qrm
