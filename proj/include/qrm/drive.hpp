#pragma once

#include <array>
#include <span>
#include <vector>

#include <json.hpp>

#include "qrm/rabi.hpp"

namespace qrm {

/// Two trains of Gaussian pulses driving the b <-> g transition.
///
/// Pulse l (1 or 2) has peak `amp_peak[l-1]`, first maximum at
/// `center_first[l-1]` and repeats every `period`. The envelope sums the
/// pulses k = 0 .. n_cycles (the last one is a trailing guard so that
/// the window [0, n_cycles * period] sees the same tails as the infinite
/// train).
struct PulseTrain {
    std::array<double, 2> amp_peak{};
    std::array<double, 2> center_first{};
    double width = 1.0;
    double period = 1.0;
    int n_cycles = 1;
    std::array<double, 2> carriers{};

    void validate() const;

    /// Upper bound on the relative contribution of neighbouring pulses at a
    /// pulse maximum: exp(-(period / (2 width))^2).
    double tail_error_bound() const;
};

double envelope(const PulseTrain& pt, int l, double t);

/// Bundle of 2m+M photons prepared from |b,M> through Rabi eigenstate n.
struct BundleTarget {
    int n = 0;
    int M = 0;
    int m = 1;
    double detuning = 0.0;

    int final_photons() const { return 2 * m + M; }
    void validate(int n_fock) const;
};

struct Carriers {
    double omega1 = 0.0;
    double omega2 = 0.0;
};

/// Delta_{n,m,p,l} = eps_n - omega_b - m omega_c + p omega_l.
double detuning(const RabiSpectrum& spec, const ModelParams& p, int n, int m, int side, double carrier);

/// Carrier frequencies that put both legs of the Lambda system at the target
/// detuning. Throws NegativeCarrier if either comes out non-positive.
Carriers solve_carriers(const RabiSpectrum& spec, const ModelParams& p, const BundleTarget& tgt);

/// Omega_{l,n,m}(t) = C_{n,m} Omega_l(t) / 2.
double effective_coupling(const RabiSpectrum& spec, const PulseTrain& pt, int l, int n, int m, double t);

struct MixingAngles {
    double theta = 0.0;
    double phi = 0.0;
    double omega_tilde = 0.0;
};

MixingAngles mixing_angles(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt, double t);

struct AdiabaticityOptions {
    double threshold = 0.5;
    /// The ratio is evaluated where both Lambda couplings exceed this
    /// fraction of the peak of their pointwise minimum.
    double overlap_fraction = 0.05;
};

struct AdiabaticityReport {
    double max_ratio = 0.0;
    double t_at_max = 0.0;
    double threshold = 0.0;
    bool flagged = false;
    double window_start = 0.0;
    double window_end = 0.0;
    std::vector<double> offending_times;

    nlohmann::json to_json() const;
};

/// Ratio |dtheta/dt| / min_pm |Delta/2 pm sqrt(Delta^2/4 + Omega~^2)| on
/// `t_grid` (central differences), restricted to the pulse-overlap window.
AdiabaticityReport adiabaticity_report(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt,
                                       std::span<const double> t_grid, const AdiabaticityOptions& opt = {});

/// Interval where both Lambda couplings exceed `fraction` of the peak of
/// their pointwise minimum, searched within the first cycle.
std::pair<double, double> overlap_window(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt,
                                         double fraction = 0.05);

struct RwaOptions {
    double threshold = 0.1;
    /// Number of lowest eigenstates considered; 0 means 2(2m+M)+8.
    int n_retained = 0;
};

struct RwaReport {
    double max_counter_rotating = 0.0; ///< max |Omega_{l,n,m}/Delta_{n,m,+1,l}|
    double max_off_resonant = 0.0;     ///< max |Omega_{l,n',m}/Delta_{n',m,-1,l}|, n' != n
    int worst_n = -1;
    int worst_m = -1;
    int worst_l = -1;
    double threshold = 0.0;
    bool flagged = false;

    nlohmann::json to_json() const;
};

/// Both ratio families at peak envelope, over retained eigenstates and the two
/// driven legs m = M and m = 2m+M.
RwaReport rwa_validity_report(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt,
                              const RwaOptions& opt = {});

/// Peak of the envelope of pulse l over the configured cycles.
double peak_envelope(const PulseTrain& pt, int l);

nlohmann::json to_json(const PulseTrain& pt);

} // namespace qrm
