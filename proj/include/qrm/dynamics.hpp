#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qrm/drive.hpp"
#include "qrm/effective.hpp"
#include "qrm/ode.hpp"
#include "qrm/timeseries.hpp"

namespace qrm {

/// Eigenbasis of H0: |b,0>..|b,N-1> followed by the lowest retained Rabi
/// eigenstates |eps_0>, |eps_1>, ...
struct DressedBasis {
    ModelParams params;
    int n_fock = 0;
    Index n_dressed = 0;
    RVector energies;
    /// Columns are the basis states in the product basis (3N x dim()).
    RMatrix transform;
    /// C_{k,m} for the retained dressed states (n_dressed x n_fock).
    RMatrix coupling;
    std::vector<std::string> labels;

    Index dim() const { return n_fock + n_dressed; }
    Index b(int m) const { return m; }
    Index dressed(int k) const { return n_fock + k; }
};

/// `n_dressed` = 0 keeps every eigenstate of the spectrum.
DressedBasis build_dressed_basis(const RabiSpectrum& spec, const ModelParams& p, const SpaceConfig& cfg,
                                 Index n_dressed = 0);

/// Default number of retained Rabi eigenstates: 2(2m+M)+8.
Index default_dressed_count(const BundleTarget& tgt);

enum class ChannelKind { a, ge, bg };

std::string to_string(ChannelKind k);

struct DissipationRates {
    double kappa_a = 0.0;
    double kappa_ge = 0.0;
    double kappa_bg = 0.0;

    void validate() const;
};

/// |psi_to><psi_from| with rate kappa_u |<psi_to|O_u|psi_from>|^2.
struct JumpChannel {
    ChannelKind kind = ChannelKind::a;
    Index from = 0;
    Index to = 0;
    double rate = 0.0;
};

/// <psi_i|O_u|psi_j> in the dressed basis, O_a = a + a^dag,
/// O_ge = |g><e| + h.c., O_bg = |b><g| + h.c.
RMatrix transition_matrix(const DressedBasis& basis, ChannelKind kind);

/// Every lowering pair (E_from > E_to) with a nonzero rate.
std::vector<JumpChannel> build_channels(const DressedBasis& basis, const DissipationRates& rates,
                                        double min_rate = 1e-30);

/// H_I(t) of the driven model in the H0 interaction picture.
///
/// The only nonzero block couples dressed states to |b,m>:
/// <eps_k|H_I|b,m> = f(t) C_{k,m} exp(i (eps_k - omega_b - m omega_c) t),
/// f(t) = sum_l Omega_l(t) cos(omega_l t).
class InteractionHamiltonian {
public:
    InteractionHamiltonian(const DressedBasis& basis, const PulseTrain& pt);

    Index dim() const { return n_b_ + n_d_; }
    double drive(double t) const;
    /// V_{k,m} = <eps_k|H_I|b,m>.
    void coupling(double t, CMatrix& v) const;
    CMatrix dense(double t) const;
    /// out = H_I(t) psi
    void apply(double t, const CVector& psi, CVector& out) const;
    /// out = H_I(t) rho
    void apply_left(double t, const CMatrix& rho, CMatrix& out) const;

private:
    void phases(double t, CVector& u, CVector& v) const;

    Index n_b_ = 0;
    Index n_d_ = 0;
    RMatrix c_;
    CMatrix cc_;
    RVector eps_;
    double omega_b_ = 0.0;
    double omega_c_ = 1.0;
    PulseTrain pt_;
};

CMatrix build_interaction_hamiltonian(const DressedBasis& basis, const PulseTrain& pt, double t);

/// Callable computing h_psi = H(t) psi.
using HamiltonianApply = std::function<void(double t, const CVector& psi, CVector& h_psi)>;

HamiltonianApply hamiltonian_source(const InteractionHamiltonian& h);
HamiltonianApply hamiltonian_source(const LambdaSystem& sys);

struct ClosedResult {
    std::vector<double> time;
    std::vector<CVector> states;
    double max_norm_drift = 0.0;
    long steps = 0;
};

ClosedResult propagate_closed(const HamiltonianApply& h, const CVector& psi0, std::span<const double> t_grid,
                              const OdeOptions& opt = {});

/// |<k|psi(t)>|^2 for the listed basis indices.
TimeSeries population_series(const ClosedResult& r, std::span<const Index> indices,
                             std::span<const std::string> names);

/// Lab-frame propagation of the full model in the product basis.
ClosedResult propagate_lab_frame(const ModelParams& p, const SpaceConfig& cfg, const PulseTrain& pt,
                                 const CVector& psi0, std::span<const double> t_grid, const OdeOptions& opt = {});

/// Lindblad dissipator. The rank-one form uses the channel structure
/// directly; the general form stores explicit jump operators.
class Dissipator {
public:
    static Dissipator from_channels(Index dim, const std::vector<JumpChannel>& channels);
    static Dissipator general(Index dim, std::vector<CMatrix> operators);

    Index dim() const { return dim_; }
    /// out += D[rho]
    void add_to(const CMatrix& rho, CMatrix& out) const;
    /// Total outgoing rate of each basis state (rank-one form only).
    const RVector& decay() const { return decay_; }
    const std::vector<JumpChannel>& channels() const { return channels_; }
    bool is_general() const { return !operators_.empty(); }

private:
    Index dim_ = 0;
    RVector decay_;
    RMatrix pair_decay_;
    std::vector<JumpChannel> channels_;
    std::vector<CMatrix> operators_;
    std::vector<CMatrix> op_products_;
};

using DensityApply = std::function<void(double t, const CMatrix& rho, CMatrix& h_rho)>;

DensityApply density_source(const InteractionHamiltonian& h);

struct MasterOptions {
    OdeOptions ode{1e-7, 1e-10};
    double trace_tolerance = 1e-6;
    double positivity_tolerance = 1e-6;
    bool check_positivity = true;
    /// Check positivity on every k-th sample.
    int positivity_stride = 10;
};

/// Called on every grid point with the interaction-picture density matrix.
using MasterObserver = std::function<void(std::size_t i, double t, const CMatrix& rho)>;

struct MasterResult {
    std::vector<double> time;
    /// Diagonal of rho per grid point.
    std::vector<RVector> populations;
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;
    double max_hermiticity_error = 0.0;
    long steps = 0;
};

/// Integrates d rho/dt = -i[H_I(t), rho] + D[rho]. Throws PositivityViolation
/// when a sampled state has an eigenvalue below -positivity_tolerance.
MasterResult propagate_master(const DensityApply& h, const Dissipator& d, const CMatrix& rho0,
                              std::span<const double> t_grid, const MasterOptions& opt = {},
                              const MasterObserver& observer = {});

/// Operator O given in the Schroedinger picture, moved to the interaction
/// picture: O_I(t)_{ij} = O_{ij} exp(i (E_i - E_j) t).
CMatrix to_interaction_picture(const CMatrix& op, const RVector& energies, double t);

/// Tr(O_I(t) rho) without forming O_I.
Complex expectation_interaction(const CMatrix& op, const RVector& energies, double t, const CMatrix& rho);

struct CorrelatorResult {
    double t = 0.0;
    std::vector<double> tau;
    std::vector<double> value;
    std::vector<double> numerator;
    std::vector<double> denominator_t;
    std::vector<double> denominator_tau;
};

/// g_N(t, t+tau) = <Xd^N(t) Xd^N(t+tau) X^N(t+tau) X^N(t)> / (<Xd^N X^N>(t) <Xd^N X^N>(t+tau))
/// via the regression theorem. `xn` is X^N in the dressed basis.
/// Throws ZeroDenominator when an expectation falls below 1e-14.
CorrelatorResult two_time_correlator(const DensityApply& h, const Dissipator& d, const RVector& energies,
                                     const CMatrix& rho0, const CMatrix& xn, double t,
                                     std::span<const double> tau_grid, const MasterOptions& opt = {});

} // namespace qrm
