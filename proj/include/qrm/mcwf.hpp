#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "qrm/dynamics.hpp"

namespace qrm {

struct JumpEvent {
    double time = 0.0;
    ChannelKind channel = ChannelKind::a;
    Index from = 0;
    Index to = 0;
};

struct TrajectoryOptions {
    OdeOptions ode{1e-7, 1e-9};
    /// Jump times are located to this accuracy by bisection on the dense output.
    double event_tolerance = 1e-3;
};

/// One quantum-jump trajectory. Populations are of the normalized state.
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<JumpEvent> jumps;
    std::vector<double> time;
    std::vector<RVector> populations;
    long steps = 0;

    nlohmann::json events_json() const;
    TimeSeries population_series(std::span<const Index> indices, std::span<const std::string> names) const;
};

/// Seed of trajectory i in an ensemble: SplitMix64 applied to seed0 + i.
std::uint64_t trajectory_seed(std::uint64_t seed0, std::uint64_t i);

/// Uniform double in (0, 1] from a 64-bit word, identical on every platform.
double unit_interval(std::uint64_t word);

/// Evolves under H(t) - (i/2) sum_c Gamma_c |from><from| and collapses when
/// the squared norm reaches a uniform threshold drawn from mt19937_64(seed).
TrajectoryRecord run_trajectory(const HamiltonianApply& h, const std::vector<JumpChannel>& channels,
                                const CVector& psi0, std::span<const double> t_grid, std::uint64_t seed,
                                const TrajectoryOptions& opt = {});

struct EnsembleResult {
    std::uint64_t seed0 = 0;
    int n_traj = 0;
    std::vector<double> time;
    std::vector<RVector> mean;
    std::vector<RVector> std_error;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<JumpEvent>> jumps;

    TimeSeries series(std::span<const Index> indices, std::span<const std::string> names) const;
    nlohmann::json jumps_json() const;
};

/// Runs n_traj trajectories with seeds trajectory_seed(seed0, i). `threads` = 0
/// uses the hardware concurrency. Results do not depend on the thread count.
EnsembleResult ensemble_average(const HamiltonianApply& h, const std::vector<JumpChannel>& channels,
                                const CVector& psi0, std::span<const double> t_grid, int n_traj,
                                std::uint64_t seed0, const TrajectoryOptions& opt = {}, int threads = 0);

/// Number of jumps of `kind` with time in [t0, t1).
int count_jumps(const std::vector<JumpEvent>& jumps, ChannelKind kind, double t0, double t1);

} // namespace qrm
