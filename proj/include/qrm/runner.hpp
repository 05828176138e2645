#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qrm/mcwf.hpp"
#include "qrm/observables.hpp"
#include "qrm/scenario.hpp"

namespace qrm {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Spectrum, basis, pulses and gate reports for one scenario.
struct Prepared {
    Scenario scenario;
    RabiSpectrum spec;
    double truncation_shift = 0.0;
    DressedBasis basis;
    PulseTrain pulses;
    std::vector<JumpChannel> channels;
    AdiabaticityReport adiabaticity;
    RwaReport rwa;
    std::pair<double, double> window{0.0, 0.0};

    Index idx_initial() const { return basis.b(scenario.target.M); }
    Index idx_final() const { return basis.b(scenario.target.final_photons()); }
    /// |b, 4m+M>, or -1 when outside the truncation.
    Index idx_next() const;
    Index idx_dressed() const { return basis.dressed(scenario.target.n); }

    OdeOptions closed_options() const;
    MasterOptions master_options() const;
    TrajectoryOptions trajectory_options() const;
    /// Populations of b,0 .. b,2m+M and eps_n: indices and column names.
    std::pair<std::vector<Index>, std::vector<std::string>> reported_states() const;

    nlohmann::json provenance() const;
};

/// Diagonalizes, builds the retained basis and channels, and evaluates the
/// RWA and adiabaticity gates. Throws GateFailed when a gate is flagged and
/// `enforce_gates` is set.
Prepared prepare(const Scenario& s, bool enforce_gates = true);

std::vector<double> uniform_grid(double t0, double t1, int points);

/// End of the closed-run window: latest pulse centre plus five widths.
double closed_window_end(const Scenario& s);

struct ClosedSummary {
    TimeSeries exact;
    TimeSeries effective;
    double final_target = 0.0;
    double leakage_dressed = 0.0;
    double leakage_next = 0.0;
    double max_gap = 0.0;
    double norm_drift = 0.0;
    long steps = 0;

    nlohmann::json to_json() const;
};

ClosedSummary run_closed(const Prepared& p);

struct MasterSummary {
    TimeSeries populations;
    TimeSeries g2;
    double peak_target = 0.0;
    double t_peak = 0.0;
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;
    long steps = 0;
    Extremum g2_1_max;
    Extremum g2_n_min;
    int order = 1;
    /// g2 points masked for negative expectations.
    int g2_negative = 0;

    nlohmann::json to_json() const;
};

/// Runs `cycles` pulse cycles and records populations and g_1, g_N.
MasterSummary run_master(const Prepared& p, int cycles);

struct TrajectorySummary {
    EnsembleResult ensemble;
    TrajectoryRecord first;
    /// a-channel jump count per cycle -> number of (trajectory, cycle) pairs
    std::map<int, int> histogram;
    /// Fraction of trajectories with exactly 2m+M a-jumps in every cycle.
    double fraction_exact = 0.0;

    nlohmann::json to_json() const;
};

TrajectorySummary run_trajectories(const Prepared& p, int n_traj, int cycles);

struct CorrelatorSummary {
    MasterSummary equal_time;
    CorrelatorResult g1;
    CorrelatorResult gn;
    /// Fraction of tau > 0 with g_1(t_s1, t_s1) > g_1(t_s1, t_s1 + tau).
    double fraction_bunched = 0.0;
    /// Fraction of tau > 0 with g_N(t_sN, t_sN) < g_N(t_sN, t_sN + tau).
    double fraction_antibunched = 0.0;

    nlohmann::json to_json() const;
};

CorrelatorSummary run_correlators(const Prepared& p);

TimeSeries run_sweep(const Scenario& s);

/// Runs the scenario, writes CSV/JSON artifacts into out_dir and returns the summary.
nlohmann::json run_scenario(const Scenario& s, const std::string& out_dir);

} // namespace qrm
