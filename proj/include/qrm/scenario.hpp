#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qrm/drive.hpp"
#include "qrm/dynamics.hpp"

namespace qrm {

enum class RunKind { closed, master, trajectory, correlators, coeff_sweep };

std::string to_string(RunKind k);
RunKind parse_run_kind(const std::string& s);

struct PulseSpec {
    double omega1 = 0.0;
    double ratio = 1.0; ///< Omega_2 / Omega_1
    double t1 = 0.0;
    double t2 = 0.0;
    double width = 1.0;
    double period = 1.0;
    int cycles = 1;
};

struct GridSpec {
    int points_per_cycle = 2000;
    int tau_points = 300;
    double tau_max = 0.0; ///< 0 means 3 / kappa_a
};

struct RunSpec {
    std::uint64_t seed = 1;
    int n_traj = 500;
    int threads = 0;
};

struct Tolerances {
    double rtol_closed = 1e-8;
    double atol_closed = 1e-12;
    double rtol_open = 1e-7;
    double atol_open = 1e-10;
    double atol_trajectory = 1e-9;
    double truncation = 1e-6;
    double adiabaticity = 0.5;
    double rwa = 0.1;
};

struct SweepSpec {
    double lambda_min = 0.0;
    double lambda_max = 1.5;
    int lambda_points = 151;
    std::vector<int> states{0};
    std::vector<int> photons{0, 2, 4, 6};
};

/// Everything needed to reproduce one experiment.
struct Scenario {
    std::string name;
    RunKind kind = RunKind::master;
    ModelParams model;
    SpaceConfig space;
    int n_dressed = 0; ///< 0 means 2(2m+M)+8
    PulseSpec pulses;
    BundleTarget target;
    DissipationRates kappa;
    GridSpec grid;
    RunSpec run;
    Tolerances tol;
    SweepSpec sweep;
    std::vector<std::string> overrides;

    /// Throws ValidationError naming the violated invariant.
    void validate() const;
    /// Non-fatal findings such as kappa_a T_1 < 5.
    std::vector<std::string> warnings() const;

    std::string to_text() const;
    nlohmann::json to_json() const;
    /// FNV-1a 64 of to_text(), hex.
    std::string hash() const;
};

/// Parses INI-style text; `source` names the input in error messages.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

/// Applies "section.key=value" (or "key=value" for top-level keys) and
/// records it in `overrides`.
void apply_override(Scenario& s, const std::string& assignment);

} // namespace qrm
