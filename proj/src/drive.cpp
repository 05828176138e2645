#include "qrm/drive.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qrm/errors.hpp"

namespace qrm {

namespace {

void check_leg(int l)
{
    if (l != 1 && l != 2)
        fail(ErrorKind::InvalidArgument, "pulse index must be 1 or 2");
}

} // namespace

void PulseTrain::validate() const
{
    if (!(width > 0.0))
        fail(ErrorKind::ValidationError, "pulse width must be positive");
    if (!(period > 0.0))
        fail(ErrorKind::ValidationError, "pulse period must be positive");
    if (n_cycles < 1)
        fail(ErrorKind::ValidationError, "n_cycles must be >= 1");
    for (double a : amp_peak)
        if (!(a >= 0.0))
            fail(ErrorKind::ValidationError, "pulse amplitudes must be >= 0");
}

double PulseTrain::tail_error_bound() const
{
    const double r = period / (2.0 * width);
    return std::exp(-r * r);
}

double envelope(const PulseTrain& pt, int l, double t)
{
    check_leg(l);
    const double center = pt.center_first[l - 1];
    const double amp = pt.amp_peak[l - 1];
    if (amp == 0.0)
        return 0.0;
    // Only pulses within ~40 widths contribute above double precision.
    const double reach = 40.0 * pt.width;
    const long k_lo = std::max(0L, long(std::ceil((t - center - reach) / pt.period)));
    const long k_hi = std::min(long(pt.n_cycles), long(std::floor((t - center + reach) / pt.period)));
    double sum = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) {
        const double x = (t - center - double(k) * pt.period) / pt.width;
        sum += std::exp(-x * x);
    }
    return amp * sum;
}

double peak_envelope(const PulseTrain& pt, int l)
{
    double best = 0.0;
    for (int k = 0; k < pt.n_cycles; ++k)
        best = std::max(best, envelope(pt, l, pt.center_first[l - 1] + k * pt.period));
    return best;
}

void BundleTarget::validate(int n_fock) const
{
    if (n < 0)
        fail(ErrorKind::ValidationError, "eigenstate index n must be >= 0");
    if (M != 0 && M != 1)
        fail(ErrorKind::ValidationError, "M must be 0 or 1");
    if (M != n % 2)
        fail(ErrorKind::ValidationError, "M must equal n mod 2");
    if (m < 1)
        fail(ErrorKind::ValidationError, "m must be a positive integer");
    if (final_photons() >= n_fock - 2)
        fail(ErrorKind::ValidationError, "target photon number too close to the Fock truncation");
}

double detuning(const RabiSpectrum& spec, const ModelParams& p, int n, int m, int side, double carrier)
{
    return spec.eigenvalues(n) - p.omega_b - m * p.omega_c + side * carrier;
}

Carriers solve_carriers(const RabiSpectrum& spec, const ModelParams& p, const BundleTarget& tgt)
{
    if (tgt.n >= spec.size())
        fail(ErrorKind::InvalidArgument, "target eigenstate outside the spectrum");
    // Delta_{n,M,-1,1} = Delta_{n,2m+M,-1,2} = detuning
    const double base = spec.eigenvalues(tgt.n) - p.omega_b - tgt.detuning;
    Carriers c;
    c.omega1 = base - tgt.M * p.omega_c;
    c.omega2 = base - tgt.final_photons() * p.omega_c;
    if (!(c.omega1 > 0.0) || !(c.omega2 > 0.0))
        fail(ErrorKind::NegativeCarrier, "solved carrier frequency is not positive");
    return c;
}

double effective_coupling(const RabiSpectrum& spec, const PulseTrain& pt, int l, int n, int m, double t)
{
    return 0.5 * spec.C(n, m) * envelope(pt, l, t);
}

MixingAngles mixing_angles(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt, double t)
{
    const double eta_value = eta(spec, tgt.n, tgt.M, tgt.m);
    const double c_final = std::abs(spec.C(tgt.n, tgt.final_photons()));
    const double o1 = envelope(pt, 1, t);
    const double o2 = envelope(pt, 2, t);

    MixingAngles a;
    a.theta = std::atan2(eta_value * o1, o2);
    a.omega_tilde = 0.5 * c_final * std::hypot(eta_value * o1, o2);
    const double delta = tgt.detuning;
    const double root = std::sqrt(0.25 * delta * delta + a.omega_tilde * a.omega_tilde);
    const double denom = delta >= 0.0 ? 0.5 * delta + root : a.omega_tilde * a.omega_tilde / (root - 0.5 * delta);
    if (a.omega_tilde == 0.0 && delta == 0.0)
        a.phi = std::numbers::pi / 4.0;
    else
        a.phi = std::atan2(a.omega_tilde, denom);
    return a;
}

std::pair<double, double> overlap_window(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt,
                                         double fraction)
{
    const double c1 = std::abs(0.5 * spec.C(tgt.n, tgt.M));
    const double c2 = std::abs(0.5 * spec.C(tgt.n, tgt.final_photons()));
    auto overlap = [&](double t) { return std::min(c1 * envelope(pt, 1, t), c2 * envelope(pt, 2, t)); };

    // Scan the first cycle finely enough to resolve the Gaussians.
    const double t_end = std::min(pt.period, std::max(pt.center_first[0], pt.center_first[1]) + 10.0 * pt.width);
    const int samples = 20000;
    const double dt = t_end / samples;
    double peak = 0.0;
    for (int i = 0; i <= samples; ++i)
        peak = std::max(peak, overlap(i * dt));
    if (peak <= 0.0)
        return {0.0, 0.0};
    const double level = fraction * peak;
    double start = -1.0;
    double end = -1.0;
    for (int i = 0; i <= samples; ++i) {
        if (overlap(i * dt) >= level) {
            if (start < 0.0)
                start = i * dt;
            end = i * dt;
        }
    }
    return {start, end};
}

AdiabaticityReport adiabaticity_report(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt,
                                       std::span<const double> t_grid, const AdiabaticityOptions& opt)
{
    AdiabaticityReport rep;
    rep.threshold = opt.threshold;
    const std::size_t n = t_grid.size();
    if (n < 2)
        return rep;

    const double c1 = std::abs(0.5 * spec.C(tgt.n, tgt.M));
    const double c2 = std::abs(0.5 * spec.C(tgt.n, tgt.final_photons()));
    std::vector<MixingAngles> ang(n);
    std::vector<double> overlap(n);
    double overlap_peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ang[i] = mixing_angles(spec, pt, tgt, t_grid[i]);
        overlap[i] = std::min(c1 * envelope(pt, 1, t_grid[i]), c2 * envelope(pt, 2, t_grid[i]));
        overlap_peak = std::max(overlap_peak, overlap[i]);
    }
    if (overlap_peak <= 0.0)
        return rep;

    const double level = opt.overlap_fraction * overlap_peak;
    bool first = true;
    const double delta = tgt.detuning;
    for (std::size_t i = 0; i < n; ++i) {
        if (overlap[i] < level)
            continue;
        if (first) {
            rep.window_start = t_grid[i];
            first = false;
        }
        rep.window_end = t_grid[i];
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        const double theta_dot = (ang[hi].theta - ang[lo].theta) / (t_grid[hi] - t_grid[lo]);
        const double root = std::sqrt(0.25 * delta * delta + ang[i].omega_tilde * ang[i].omega_tilde);
        const double gap = std::min(std::abs(0.5 * delta + root), std::abs(0.5 * delta - root));
        const double ratio = gap > 0.0 ? std::abs(theta_dot) / gap : std::numeric_limits<double>::infinity();
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.t_at_max = t_grid[i];
        }
        if (ratio > opt.threshold)
            rep.offending_times.push_back(t_grid[i]);
    }
    rep.flagged = rep.max_ratio > opt.threshold;
    return rep;
}

RwaReport rwa_validity_report(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt,
                              const RwaOptions& opt)
{
    RwaReport rep;
    rep.threshold = opt.threshold;
    const ModelParams& p = spec.params;
    const int retained = std::min<int>(int(spec.size()), opt.n_retained > 0 ? opt.n_retained
                                                                            : 2 * tgt.final_photons() + 8);
    const std::array<double, 2> carriers = pt.carriers;
    const std::array<double, 2> peaks = {peak_envelope(pt, 1), peak_envelope(pt, 2)};

    // Only the two b-states the pulses connect carry population while the drive is on.
    const int legs[2] = {tgt.M, tgt.final_photons()};
    for (int n = 0; n < retained; ++n) {
        for (int m : legs) {
            const double c = std::abs(0.5 * spec.C(n, m));
            if (c == 0.0)
                continue;
            for (int l = 1; l <= 2; ++l) {
                const double amp = c * peaks[l - 1];
                const double counter = amp / std::abs(detuning(spec, p, n, m, +1, carriers[l - 1]));
                rep.max_counter_rotating = std::max(rep.max_counter_rotating, counter);
                if (n != tgt.n) {
                    const double off = amp / std::abs(detuning(spec, p, n, m, -1, carriers[l - 1]));
                    if (off > rep.max_off_resonant) {
                        rep.max_off_resonant = off;
                        rep.worst_n = n;
                        rep.worst_m = m;
                        rep.worst_l = l;
                    }
                }
            }
        }
    }
    rep.flagged = rep.max_counter_rotating > opt.threshold || rep.max_off_resonant > opt.threshold;
    return rep;
}

nlohmann::json AdiabaticityReport::to_json() const
{
    return {{"max_ratio", max_ratio},     {"t_at_max", t_at_max},         {"threshold", threshold},
            {"flagged", flagged},         {"window_start", window_start}, {"window_end", window_end},
            {"offending_times", offending_times}};
}

nlohmann::json RwaReport::to_json() const
{
    return {{"max_counter_rotating", max_counter_rotating},
            {"max_off_resonant", max_off_resonant},
            {"worst", {{"n", worst_n}, {"m", worst_m}, {"l", worst_l}}},
            {"threshold", threshold},
            {"flagged", flagged}};
}

nlohmann::json to_json(const PulseTrain& pt)
{
    return {{"amp_peak", pt.amp_peak}, {"center_first", pt.center_first}, {"width", pt.width},
            {"period", pt.period},     {"n_cycles", pt.n_cycles},         {"carriers", pt.carriers}};
}

} // namespace qrm
