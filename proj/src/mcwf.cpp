#include "qrm/mcwf.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "qrm/errors.hpp"

namespace qrm {

std::uint64_t trajectory_seed(std::uint64_t seed0, std::uint64_t i)
{
    std::uint64_t z = seed0 + i + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit_interval(std::uint64_t word)
{
    return double((word >> 11) + 1) * 0x1.0p-53;
}

TrajectoryRecord run_trajectory(const HamiltonianApply& h, const std::vector<JumpChannel>& channels,
                                const CVector& psi0, std::span<const double> t_grid, std::uint64_t seed,
                                const TrajectoryOptions& opt)
{
    if (t_grid.empty())
        fail(ErrorKind::InvalidArgument, "time grid is empty");
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        fail(ErrorKind::InvalidArgument, "initial state is not normalized");
    const Index dim = psi0.size();

    RVector gamma = RVector::Zero(dim);
    for (const auto& c : channels) {
        if (c.from < 0 || c.from >= dim || c.to < 0 || c.to >= dim)
            fail(ErrorKind::InvalidArgument, "jump channel index outside the basis");
        gamma(c.from) += c.rate;
    }
    const RVector half_gamma = 0.5 * gamma;

    auto rhs = [&h, &half_gamma](double t, const CVector& y, CVector& dy) {
        h(t, y, dy);
        dy = -kI * dy - half_gamma.cwiseProduct(y);
    };
    auto solver = make_integrator<CVector>(rhs, opt.ode);

    std::mt19937_64 rng(seed);
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.time.assign(t_grid.begin(), t_grid.end());
    rec.populations.resize(t_grid.size());

    auto record = [&](std::size_t i, const CVector& y) {
        rec.populations[i] = y.cwiseAbs2() / y.squaredNorm();
    };

    const double t_end = t_grid.back();
    double threshold = unit_interval(rng());
    CVector psi = psi0;
    CVector buf;
    std::size_t next = 0;
    double t = t_grid.front();
    record(next++, psi);
    solver.reset(t, psi);

    while (next < t_grid.size()) {
        solver.step(t_end);
        const double norm2 = solver.y().squaredNorm();
        if (norm2 > threshold) {
            if (norm2 < 1e-12)
                fail(ErrorKind::NormUnderflow, "trajectory norm underflow without a jump");
            while (next < t_grid.size() && t_grid[next] <= solver.t()) {
                solver.interpolate(t_grid[next], buf);
                record(next++, buf);
            }
            continue;
        }

        // Locate the crossing on [t_prev, t]; keep the right end below threshold.
        double lo = solver.t_prev();
        double hi = solver.t();
        while (hi - lo > opt.event_tolerance) {
            const double mid = 0.5 * (lo + hi);
            solver.interpolate(mid, buf);
            if (buf.squaredNorm() > threshold)
                lo = mid;
            else
                hi = mid;
        }
        while (next < t_grid.size() && t_grid[next] < hi) {
            solver.interpolate(t_grid[next], buf);
            record(next++, buf);
        }
        solver.interpolate(hi, psi);

        double total = 0.0;
        for (const auto& c : channels)
            total += c.rate * std::norm(psi(c.from));
        if (!(total > 0.0))
            fail(ErrorKind::NormUnderflow, "jump requested but no channel has weight");
        const double pick = unit_interval(rng()) * total;
        double acc = 0.0;
        const JumpChannel* chosen = &channels.back();
        for (const auto& c : channels) {
            acc += c.rate * std::norm(psi(c.from));
            if (pick <= acc) {
                chosen = &c;
                break;
            }
        }
        const Complex amp = psi(chosen->from);
        rec.jumps.push_back({hi, chosen->kind, chosen->from, chosen->to});
        psi.setZero();
        psi(chosen->to) = amp / std::abs(amp);

        threshold = unit_interval(rng());
        rec.steps += solver.accepted();
        solver.reset(hi, psi);
        // A grid point that coincides with the jump time sees the post-jump state.
        while (next < t_grid.size() && t_grid[next] <= hi)
            record(next++, psi);
    }
    rec.steps += solver.accepted();
    return rec;
}

nlohmann::json TrajectoryRecord::events_json() const
{
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& j : jumps)
        ev.push_back({{"time", j.time}, {"channel", to_string(j.channel)}, {"from", j.from}, {"to", j.to}});
    return {{"seed", seed}, {"jumps", ev}};
}

TimeSeries TrajectoryRecord::population_series(std::span<const Index> indices,
                                               std::span<const std::string> names) const
{
    TimeSeries ts;
    ts.time = time;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        auto& col = ts.columns[ts.add_column(names[j])];
        for (const auto& p : populations)
            col.push_back(p(indices[j]));
    }
    ts.metadata["seed"] = seed;
    return ts;
}

EnsembleResult ensemble_average(const HamiltonianApply& h, const std::vector<JumpChannel>& channels,
                                const CVector& psi0, std::span<const double> t_grid, int n_traj,
                                std::uint64_t seed0, const TrajectoryOptions& opt, int threads)
{
    if (n_traj < 1)
        fail(ErrorKind::InvalidArgument, "n_traj must be >= 1");
    EnsembleResult res;
    res.seed0 = seed0;
    res.n_traj = n_traj;
    res.time.assign(t_grid.begin(), t_grid.end());
    res.seeds.resize(n_traj);
    res.jumps.resize(n_traj);
    for (int i = 0; i < n_traj; ++i)
        res.seeds[i] = trajectory_seed(seed0, std::uint64_t(i));

    const std::size_t n_t = t_grid.size();
    const Index dim = psi0.size();
    if (threads <= 0)
        threads = int(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n_traj);

    // Each trajectory's populations are summed in index order after all
    // workers finish, so the result is independent of scheduling.
    const int batch = std::max(1, std::min(n_traj, 4 * threads));
    std::vector<RVector> sum(n_t, RVector::Zero(dim)), sum_sq(n_t, RVector::Zero(dim));
    std::vector<TrajectoryRecord> recs(batch);
    for (int start = 0; start < n_traj; start += batch) {
        const int count = std::min(batch, n_traj - start);
        auto work = [&](int w) {
            for (int k = w; k < count; k += threads)
                recs[k] = run_trajectory(h, channels, psi0, t_grid, res.seeds[start + k], opt);
        };
        if (threads == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < threads; ++w)
                pool.emplace_back(work, w);
            for (auto& th : pool)
                th.join();
        }
        for (int k = 0; k < count; ++k) {
            for (std::size_t i = 0; i < n_t; ++i) {
                sum[i] += recs[k].populations[i];
                sum_sq[i] += recs[k].populations[i].cwiseAbs2();
            }
            res.jumps[start + k] = std::move(recs[k].jumps);
        }
    }

    res.mean.resize(n_t);
    res.std_error.resize(n_t);
    const double n = n_traj;
    for (std::size_t i = 0; i < n_t; ++i) {
        res.mean[i] = sum[i] / n;
        if (n_traj > 1) {
            const RVector var = ((sum_sq[i] - n * res.mean[i].cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
            res.std_error[i] = (var / n).cwiseSqrt();
        } else {
            res.std_error[i] = RVector::Zero(dim);
        }
    }
    return res;
}

TimeSeries EnsembleResult::series(std::span<const Index> indices, std::span<const std::string> names) const
{
    TimeSeries ts;
    ts.time = time;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        auto& mcol = ts.columns[ts.add_column(names[j])];
        for (const auto& m : mean)
            mcol.push_back(m(indices[j]));
        auto& scol = ts.columns[ts.add_column(names[j] + "_se")];
        for (const auto& s : std_error)
            scol.push_back(s(indices[j]));
    }
    ts.metadata["seed0"] = seed0;
    ts.metadata["n_traj"] = n_traj;
    return ts;
}

nlohmann::json EnsembleResult::jumps_json() const
{
    nlohmann::json all = nlohmann::json::array();
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        nlohmann::json ev = nlohmann::json::array();
        for (const auto& j : jumps[i])
            ev.push_back({{"time", j.time}, {"channel", to_string(j.channel)}, {"from", j.from}, {"to", j.to}});
        all.push_back({{"seed", seeds[i]}, {"jumps", ev}});
    }
    return all;
}

int count_jumps(const std::vector<JumpEvent>& jumps, ChannelKind kind, double t0, double t1)
{
    return int(std::count_if(jumps.begin(), jumps.end(),
                             [&](const JumpEvent& j) { return j.channel == kind && j.time >= t0 && j.time < t1; }));
}

} // namespace qrm
