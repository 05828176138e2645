#pragma once

#include <span>
#include <vector>

#include "qrm/dynamics.hpp"

namespace qrm {

/// X = sum_{E_m > E_n} <psi_n|(a + a^dag)|psi_m> |psi_n><psi_m| and its N-th power.
struct BundleOperator {
    int order = 1;
    CMatrix x;
    CMatrix x_pow;

    /// (X^N)^dag X^N
    CMatrix intensity() const { return x_pow.adjoint() * x_pow; }
    /// (X^2N)^dag X^2N
    CMatrix pair_intensity() const;
};

BundleOperator build_X(const DressedBasis& basis);
BundleOperator bundle_power(const BundleOperator& x, int order);

struct G2Options {
    double mask_threshold = 1e-14;
    double clip_tolerance = 1e-10;
};

/// Equal-time g_N(t,t) for several orders, filled from interaction-picture
/// density matrices (usable directly as a MasterObserver).
class G2Recorder {
public:
    G2Recorder(const DressedBasis& basis, std::vector<int> orders, const G2Options& opt = {});

    void operator()(std::size_t i, double t, const CMatrix& rho);

    /// Columns g2_N (NaN where masked), num_N and den_N per order.
    const TimeSeries& series() const { return ts_; }
    int clipped() const { return clipped_; }
    /// Points masked because an expectation was negative beyond clip_tolerance.
    /// Nonzero means rho is not accurate enough for this order.
    int negative() const { return negative_; }

private:
    RVector energies_;
    std::vector<int> orders_;
    std::vector<CMatrix> num_ops_;
    std::vector<CMatrix> den_ops_;
    G2Options opt_;
    TimeSeries ts_;
    int clipped_ = 0;
    int negative_ = 0;
};

/// g_N(t,t) = <Xd^N Xd^N X^N X^N> / <Xd^N X^N>^2 on a list of snapshots.
TimeSeries g2_equal_time(const DressedBasis& basis, std::span<const double> times, std::span<const CMatrix> rhos,
                         std::span<const int> orders, const G2Options& opt = {});

enum class ExtremumKind { max, min };

struct Extremum {
    double t = 0.0;
    double value = 0.0;
    std::size_t index = 0;
};

/// Grid arg-extremum over [t0, t1] (NaN skipped, earliest wins ties) refined by
/// a parabola through the neighbouring points. Throws EmptyWindow.
Extremum find_extremum(std::span<const double> time, std::span<const double> values, ExtremumKind kind,
                       double t0, double t1);

/// g_N(t_s, t_s + tau) for the bundle of order N.
CorrelatorResult g2_delayed(const DensityApply& h, const Dissipator& d, const DressedBasis& basis,
                            const CMatrix& rho0, const BundleOperator& xn, double t_s,
                            std::span<const double> tau_grid, const MasterOptions& opt = {});

} // namespace qrm
