#include "qrm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "qrm/errors.hpp"

namespace qrm {

Index Prepared::idx_next() const
{
    const int j = 2 * scenario.target.final_photons() - scenario.target.M;
    return j < basis.n_fock ? basis.b(j) : -1;
}

OdeOptions Prepared::closed_options() const
{
    OdeOptions o;
    o.rtol = scenario.tol.rtol_closed;
    o.atol = scenario.tol.atol_closed;
    // Keeps the controller from stepping over a whole pulse in the quiet stretches.
    o.h_max = 0.1 * scenario.pulses.width;
    return o;
}

MasterOptions Prepared::master_options() const
{
    MasterOptions o;
    o.ode.rtol = scenario.tol.rtol_open;
    o.ode.atol = scenario.tol.atol_open;
    o.ode.h_max = 0.1 * scenario.pulses.width;
    return o;
}

TrajectoryOptions Prepared::trajectory_options() const
{
    TrajectoryOptions o;
    o.ode.rtol = scenario.tol.rtol_open;
    o.ode.atol = scenario.tol.atol_trajectory;
    o.ode.h_max = 0.1 * scenario.pulses.width;
    return o;
}

std::pair<std::vector<Index>, std::vector<std::string>> Prepared::reported_states() const
{
    std::vector<Index> idx;
    std::vector<std::string> names;
    for (int j = 0; j <= scenario.target.final_photons(); ++j) {
        idx.push_back(basis.b(j));
        names.push_back("P_b" + std::to_string(j));
    }
    idx.push_back(idx_dressed());
    names.push_back("P_eps" + std::to_string(scenario.target.n));
    return {idx, names};
}

nlohmann::json Prepared::provenance() const
{
    const Scenario& s = scenario;
    nlohmann::json j;
    j["scenario"] = s.to_json();
    j["scenario_hash"] = s.hash();
    j["code_version"] = kCodeVersion;
    j["seed"] = s.run.seed;
    j["overrides"] = s.overrides;
    j["tolerances"] = {{"rtol_closed", s.tol.rtol_closed},
                       {"atol_closed", s.tol.atol_closed},
                       {"rtol_open", s.tol.rtol_open},
                       {"atol_open", s.tol.atol_open},
                       {"atol_trajectory", s.tol.atol_trajectory},
                       {"truncation", s.tol.truncation}};
    j["truncation"] = {{"n_fock", s.space.n_fock}, {"n_dressed", basis.n_dressed}, {"shift", truncation_shift}};
    return j;
}

std::vector<double> uniform_grid(double t0, double t1, int points)
{
    if (points < 2)
        fail(ErrorKind::InvalidArgument, "a grid needs at least two points");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = t0 + (t1 - t0) * double(i) / double(points - 1);
    return g;
}

double closed_window_end(const Scenario& s)
{
    return std::max(s.pulses.t1, s.pulses.t2) + 5.0 * s.pulses.width;
}

Prepared prepare(const Scenario& s, bool enforce_gates)
{
    s.validate();
    Prepared p;
    p.scenario = s;
    p.spec = diagonalize(s.model, s.space, {false});
    p.truncation_shift = truncation_shift(s.model, s.space);
    if (p.truncation_shift > s.tol.truncation)
        fail(ErrorKind::TruncationNotConverged,
             "eigenvalues move by " + std::to_string(p.truncation_shift) + " when n_fock grows by 50%");
    if (s.kind == RunKind::coeff_sweep)
        return p;

    const Carriers c = solve_carriers(p.spec, s.model, s.target);
    p.pulses.amp_peak = {s.pulses.omega1, s.pulses.omega1 * s.pulses.ratio};
    p.pulses.center_first = {s.pulses.t1, s.pulses.t2};
    p.pulses.width = s.pulses.width;
    p.pulses.period = s.pulses.period;
    p.pulses.n_cycles = s.pulses.cycles;
    p.pulses.carriers = {c.omega1, c.omega2};
    p.pulses.validate();

    const Index n_dressed = s.n_dressed > 0 ? s.n_dressed : default_dressed_count(s.target);
    p.basis = build_dressed_basis(p.spec, s.model, s.space, n_dressed);
    p.channels = build_channels(p.basis, s.kappa);
    p.window = overlap_window(p.spec, p.pulses, s.target);

    const auto grid = uniform_grid(0.0, std::min(s.pulses.period, closed_window_end(s)), 20001);
    p.adiabaticity = adiabaticity_report(p.spec, p.pulses, s.target, grid, {s.tol.adiabaticity, 0.05});
    p.rwa = rwa_validity_report(p.spec, p.pulses, s.target, {s.tol.rwa, int(n_dressed)});
    if (enforce_gates && p.adiabaticity.flagged)
        fail(ErrorKind::GateFailed, "adiabaticity ratio " + std::to_string(p.adiabaticity.max_ratio) +
                                        " exceeds " + std::to_string(s.tol.adiabaticity));
    if (enforce_gates && p.rwa.flagged)
        fail(ErrorKind::GateFailed, "rotating-wave validity ratio exceeds " + std::to_string(s.tol.rwa));
    return p;
}

nlohmann::json ClosedSummary::to_json() const
{
    return {{"final_target", final_target}, {"leakage_dressed", leakage_dressed}, {"leakage_next", leakage_next},
            {"max_gap_exact_effective", max_gap}, {"norm_drift", norm_drift}, {"steps", steps}};
}

ClosedSummary run_closed(const Prepared& p)
{
    const Scenario& s = p.scenario;
    const auto grid = uniform_grid(0.0, closed_window_end(s), s.grid.points_per_cycle + 1);

    CVector psi0 = CVector::Zero(p.basis.dim());
    psi0(p.idx_initial()) = 1.0;
    const InteractionHamiltonian h(p.basis, p.pulses);
    const ClosedResult exact = propagate_closed(hamiltonian_source(h), psi0, grid, p.closed_options());

    const LambdaSystem sys = make_lambda_system(p.spec, p.pulses, s.target);
    CVector phi0 = CVector::Zero(3);
    phi0(0) = 1.0;
    const ClosedResult eff = propagate_closed(hamiltonian_source(sys), phi0, grid, p.closed_options());

    ClosedSummary out;
    auto [idx, names] = p.reported_states();
    if (p.idx_next() >= 0) {
        idx.push_back(p.idx_next());
        names.push_back("P_b" + std::to_string(p.idx_next()));
    }
    out.exact = population_series(exact, idx, names);
    const Index eff_idx[] = {0, 1, 2};
    const std::string eff_names[] = {"P_b" + std::to_string(s.target.M), "P_eps" + std::to_string(s.target.n),
                                     "P_b" + std::to_string(s.target.final_photons())};
    out.effective = population_series(eff, eff_idx, eff_names);

    const CVector& last = exact.states.back();
    out.final_target = std::norm(last(p.idx_final()));
    out.leakage_dressed = std::norm(last(p.idx_dressed()));
    out.leakage_next = p.idx_next() >= 0 ? std::norm(last(p.idx_next())) : 0.0;
    const Index exact_idx[] = {p.idx_initial(), p.idx_dressed(), p.idx_final()};
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (int k = 0; k < 3; ++k)
            out.max_gap = std::max(out.max_gap, std::abs(std::norm(exact.states[i](exact_idx[k])) -
                                                         std::norm(eff.states[i](k))));
    out.norm_drift = exact.max_norm_drift;
    out.steps = exact.steps;
    return out;
}

nlohmann::json MasterSummary::to_json() const
{
    return {{"peak_target", peak_target},
            {"t_peak", t_peak},
            {"max_trace_drift", max_trace_drift},
            {"min_eigenvalue", min_eigenvalue},
            {"steps", steps},
            {"order", order},
            {"t_s1", g2_1_max.t},
            {"g2_1_max", g2_1_max.value},
            {"t_sN", g2_n_min.t},
            {"g2_N_min", g2_n_min.value},
            {"g2_negative", g2_negative}};
}

MasterSummary run_master(const Prepared& p, int cycles)
{
    const Scenario& s = p.scenario;
    PulseTrain pt = p.pulses;
    pt.n_cycles = cycles;
    const auto grid = uniform_grid(0.0, cycles * s.pulses.period, cycles * s.grid.points_per_cycle + 1);

    const InteractionHamiltonian h(p.basis, pt);
    const Dissipator d = Dissipator::from_channels(p.basis.dim(), p.channels);
    CMatrix rho0 = CMatrix::Zero(p.basis.dim(), p.basis.dim());
    rho0(p.idx_initial(), p.idx_initial()) = 1.0;

    MasterSummary out;
    out.order = s.target.final_photons();
    std::vector<int> orders{1};
    if (out.order != 1)
        orders.push_back(out.order);
    G2Recorder rec(p.basis, orders);
    const MasterResult r = propagate_master(density_source(h), d, rho0, grid, p.master_options(), std::ref(rec));

    const auto [idx, names] = p.reported_states();
    out.populations.time = r.time;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        auto& col = out.populations.columns[out.populations.add_column(names[k])];
        for (const auto& pop : r.populations)
            col.push_back(pop(idx[k]));
    }
    for (std::size_t i = 0; i < r.time.size(); ++i) {
        const double v = r.populations[i](p.idx_final());
        if (v > out.peak_target) {
            out.peak_target = v;
            out.t_peak = r.time[i];
        }
    }
    out.g2 = rec.series();
    out.max_trace_drift = r.max_trace_drift;
    out.min_eigenvalue = r.min_eigenvalue;
    out.steps = r.steps;
    out.g2_negative = rec.negative();
    out.g2_1_max = find_extremum(out.g2.time, out.g2.column("g2_1"), ExtremumKind::max, p.window.first,
                                 p.window.second);
    out.g2_n_min = find_extremum(out.g2.time, out.g2.column("g2_" + std::to_string(out.order)),
                                 ExtremumKind::min, p.window.first, p.window.second);
    return out;
}

nlohmann::json TrajectorySummary::to_json() const
{
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [count, n] : histogram)
        hist[std::to_string(count)] = n;
    return {{"n_traj", ensemble.n_traj}, {"seed0", ensemble.seed0}, {"jump_histogram", hist},
            {"fraction_exact", fraction_exact}};
}

TrajectorySummary run_trajectories(const Prepared& p, int n_traj, int cycles)
{
    const Scenario& s = p.scenario;
    PulseTrain pt = p.pulses;
    pt.n_cycles = cycles;
    const auto grid = uniform_grid(0.0, cycles * s.pulses.period, cycles * s.grid.points_per_cycle + 1);
    const InteractionHamiltonian h(p.basis, pt);
    CVector psi0 = CVector::Zero(p.basis.dim());
    psi0(p.idx_initial()) = 1.0;

    TrajectorySummary out;
    const auto src = hamiltonian_source(h);
    out.ensemble = ensemble_average(src, p.channels, psi0, grid, n_traj, s.run.seed, p.trajectory_options(),
                                    s.run.threads);
    out.first = run_trajectory(src, p.channels, psi0, grid, out.ensemble.seeds.front(), p.trajectory_options());

    const int target = s.target.final_photons();
    int exact = 0;
    for (const auto& jumps : out.ensemble.jumps) {
        bool all = true;
        for (int c = 0; c < cycles; ++c) {
            const int k = count_jumps(jumps, ChannelKind::a, c * s.pulses.period, (c + 1) * s.pulses.period);
            ++out.histogram[k];
            all = all && k == target;
        }
        exact += all ? 1 : 0;
    }
    out.fraction_exact = double(exact) / double(n_traj);
    return out;
}

nlohmann::json CorrelatorSummary::to_json() const
{
    return {{"equal_time", equal_time.to_json()},
            {"t_s1", g1.t},
            {"t_sN", gn.t},
            {"g2_1_at_anchor", g1.value.front()},
            {"g2_N_at_anchor", gn.value.front()},
            {"fraction_bunched", fraction_bunched},
            {"fraction_antibunched", fraction_antibunched}};
}

CorrelatorSummary run_correlators(const Prepared& p)
{
    const Scenario& s = p.scenario;
    CorrelatorSummary out;
    out.equal_time = run_master(p, s.pulses.cycles);

    const double tau_max = s.grid.tau_max > 0.0 ? s.grid.tau_max : 3.0 / s.kappa.kappa_a;
    const auto taus = uniform_grid(0.0, tau_max, s.grid.tau_points + 1);
    PulseTrain pt = p.pulses;
    const InteractionHamiltonian h(p.basis, pt);
    const Dissipator d = Dissipator::from_channels(p.basis.dim(), p.channels);
    CMatrix rho0 = CMatrix::Zero(p.basis.dim(), p.basis.dim());
    rho0(p.idx_initial(), p.idx_initial()) = 1.0;
    const BundleOperator x = build_X(p.basis);
    const BundleOperator xn = bundle_power(x, out.equal_time.order);

    out.g1 = g2_delayed(density_source(h), d, p.basis, rho0, x, out.equal_time.g2_1_max.t, taus, p.master_options());
    out.gn = g2_delayed(density_source(h), d, p.basis, rho0, xn, out.equal_time.g2_n_min.t, taus,
                        p.master_options());
    int bunched = 0, anti = 0;
    for (std::size_t j = 1; j < taus.size(); ++j) {
        bunched += out.g1.value.front() > out.g1.value[j] ? 1 : 0;
        anti += out.gn.value.front() < out.gn.value[j] ? 1 : 0;
    }
    out.fraction_bunched = double(bunched) / double(taus.size() - 1);
    out.fraction_antibunched = double(anti) / double(taus.size() - 1);
    return out;
}

TimeSeries run_sweep(const Scenario& s)
{
    const auto grid = uniform_grid(s.sweep.lambda_min, s.sweep.lambda_max, s.sweep.lambda_points);
    TimeSeries ts;
    ts.axis = "lambda";
    ts.time = grid;
    for (int n : s.sweep.states) {
        const SweepTable tab = coefficient_sweep(s.model, s.space, grid, n, s.sweep.photons);
        for (std::size_t k = 0; k < tab.m_list.size(); ++k) {
            auto& col = ts.columns[ts.add_column("C_" + std::to_string(n) + "_" + std::to_string(tab.m_list[k]))];
            for (Index i = 0; i < tab.values.rows(); ++i)
                col.push_back(tab.values(i, Index(k)));
        }
        auto& ov = ts.columns[ts.add_column("min_overlap_" + std::to_string(n))];
        ov = tab.min_overlap;
    }
    return ts;
}

namespace {

std::string negative_g2_warning(int points)
{
    return std::to_string(points) + " g2 points masked for negative expectations; lower tolerances.atol_open";
}

} // namespace

nlohmann::json run_scenario(const Scenario& s, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const Prepared p = prepare(s);
    const nlohmann::json prov = p.provenance();
    auto path = [&](const std::string& f) { return (fs::path(out_dir) / f).string(); };
    auto write = [&](TimeSeries ts, const std::string& f) {
        ts.metadata["provenance"] = prov;
        ts.write_csv(path(f));
    };

    nlohmann::json summary;
    summary["provenance"] = prov;
    summary["kind"] = to_string(s.kind);
    summary["warnings"] = s.warnings();
    summary["convergence"] = {{"truncation_shift", p.truncation_shift}, {"converged", true}};
    if (s.kind != RunKind::coeff_sweep) {
        summary["gates"] = {{"adiabaticity", p.adiabaticity.to_json()}, {"rwa", p.rwa.to_json()}};
        summary["pulses"] = qrm::to_json(p.pulses);
        summary["overlap_window"] = {p.window.first, p.window.second};
    }

    switch (s.kind) {
    case RunKind::closed: {
        const ClosedSummary r = run_closed(p);
        write(r.exact, "closed_exact.csv");
        write(r.effective, "closed_effective.csv");
        summary["result"] = r.to_json();
        break;
    }
    case RunKind::master: {
        const MasterSummary r = run_master(p, s.pulses.cycles);
        write(r.populations, "master_populations.csv");
        write(r.g2, "master_g2.csv");
        summary["result"] = r.to_json();
        if (r.g2_negative > 0)
            summary["warnings"].push_back(negative_g2_warning(r.g2_negative));
        break;
    }
    case RunKind::trajectory: {
        const TrajectorySummary r = run_trajectories(p, s.run.n_traj, s.pulses.cycles);
        const auto [idx, names] = p.reported_states();
        write(r.ensemble.series(idx, names), "trajectory_mean.csv");
        write(r.first.population_series(idx, names), "trajectory_first.csv");
        nlohmann::json jumps = {{"provenance", prov}, {"trajectories", r.ensemble.jumps_json()}};
        write_json(path("trajectory_jumps.json"), jumps);
        summary["result"] = r.to_json();
        break;
    }
    case RunKind::correlators: {
        const CorrelatorSummary r = run_correlators(p);
        write(r.equal_time.g2, "g2_equal_time.csv");
        TimeSeries delayed;
        delayed.axis = "tau";
        delayed.time = r.g1.tau;
        delayed.columns[delayed.add_column("g2_1")] = r.g1.value;
        delayed.columns[delayed.add_column("g2_" + std::to_string(r.equal_time.order))] = r.gn.value;
        delayed.metadata["t_s1"] = r.g1.t;
        delayed.metadata["t_sN"] = r.gn.t;
        delayed.metadata["order"] = r.equal_time.order;
        write(delayed, "g2_delayed.csv");
        summary["result"] = r.to_json();
        if (r.equal_time.g2_negative > 0)
            summary["warnings"].push_back(negative_g2_warning(r.equal_time.g2_negative));
        break;
    }
    case RunKind::coeff_sweep: {
        write(run_sweep(s), "coefficients.csv");
        summary["result"] = {{"states", s.sweep.states}, {"photons", s.sweep.photons}};
        break;
    }
    }
    write_json(path("summary.json"), summary);
    return summary;
}

} // namespace qrm
