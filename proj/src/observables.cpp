#include "qrm/observables.hpp"

#include <cmath>
#include <limits>

#include "qrm/errors.hpp"

namespace qrm {

CMatrix BundleOperator::pair_intensity() const
{
    const CMatrix x2 = x_pow * x_pow;
    return x2.adjoint() * x2;
}

BundleOperator build_X(const DressedBasis& basis)
{
    const RMatrix c = transition_matrix(basis, ChannelKind::a);
    const Index d = basis.dim();
    RMatrix x = RMatrix::Zero(d, d);
    for (Index m = 0; m < d; ++m)
        for (Index n = 0; n < d; ++n)
            if (basis.energies(m) > basis.energies(n))
                x(n, m) = c(n, m);
    BundleOperator op;
    op.order = 1;
    op.x = x.cast<Complex>();
    op.x_pow = op.x;
    return op;
}

BundleOperator bundle_power(const BundleOperator& x, int order)
{
    if (order < 1)
        fail(ErrorKind::InvalidArgument, "bundle order must be >= 1");
    BundleOperator op;
    op.order = order;
    op.x = x.x;
    op.x_pow = x.x;
    for (int k = 1; k < order; ++k)
        op.x_pow = op.x_pow * x.x;
    return op;
}

G2Recorder::G2Recorder(const DressedBasis& basis, std::vector<int> orders, const G2Options& opt)
    : energies_(basis.energies), orders_(std::move(orders)), opt_(opt)
{
    const BundleOperator x = build_X(basis);
    for (int n : orders_) {
        const BundleOperator xn = bundle_power(x, n);
        num_ops_.push_back(xn.pair_intensity());
        den_ops_.push_back(xn.intensity());
        const std::string s = std::to_string(n);
        ts_.add_column("g2_" + s);
        ts_.add_column("num_" + s);
        ts_.add_column("den_" + s);
    }
    ts_.metadata["mask_threshold"] = opt_.mask_threshold;
    ts_.metadata["orders"] = orders_;
}

void G2Recorder::operator()(std::size_t, double t, const CMatrix& rho)
{
    ts_.time.push_back(t);
    for (std::size_t k = 0; k < orders_.size(); ++k) {
        double num = expectation_interaction(num_ops_[k], energies_, t, rho).real();
        double den = expectation_interaction(den_ops_[k], energies_, t, rho).real();
        bool negative = false;
        for (double* v : {&num, &den}) {
            if (*v < 0.0 && *v > -opt_.clip_tolerance) {
                *v = 0.0;
                ++clipped_;
            }
            negative = negative || *v < 0.0;
        }
        if (negative)
            ++negative_;
        const double g2 = negative || den * den < opt_.mask_threshold ? std::numeric_limits<double>::quiet_NaN()
                                                                      : num / (den * den);
        ts_.columns[3 * k].push_back(g2);
        ts_.columns[3 * k + 1].push_back(num);
        ts_.columns[3 * k + 2].push_back(den);
    }
    ts_.metadata["clipped"] = clipped_;
    ts_.metadata["negative"] = negative_;
}

TimeSeries g2_equal_time(const DressedBasis& basis, std::span<const double> times, std::span<const CMatrix> rhos,
                         std::span<const int> orders, const G2Options& opt)
{
    if (times.size() != rhos.size())
        fail(ErrorKind::InvalidArgument, "one density matrix per time is required");
    G2Recorder rec(basis, std::vector<int>(orders.begin(), orders.end()), opt);
    for (std::size_t i = 0; i < times.size(); ++i)
        rec(i, times[i], rhos[i]);
    return rec.series();
}

Extremum find_extremum(std::span<const double> time, std::span<const double> values, ExtremumKind kind,
                       double t0, double t1)
{
    if (time.size() != values.size())
        fail(ErrorKind::InvalidArgument, "time and value lengths differ");
    const double sign = kind == ExtremumKind::max ? 1.0 : -1.0;
    std::size_t best = time.size();
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (time[i] < t0 || time[i] > t1 || std::isnan(values[i]))
            continue;
        if (best == time.size() || sign * values[i] > sign * values[best])
            best = i;
    }
    if (best == time.size())
        fail(ErrorKind::EmptyWindow, "no valid samples in the search window");

    Extremum e{time[best], values[best], best};
    if (best == 0 || best + 1 >= time.size())
        return e;
    const double xa = time[best - 1], xb = time[best], xc = time[best + 1];
    const double ya = values[best - 1], yb = values[best], yc = values[best + 1];
    if (std::isnan(ya) || std::isnan(yc) || xa < t0 || xc > t1)
        return e;
    // Parabola through the three points (divided differences).
    const double d1 = (yb - ya) / (xb - xa);
    const double d2 = (yc - yb) / (xc - xb);
    const double curv = (d2 - d1) / (xc - xa);
    if (sign * curv >= 0.0)
        return e;
    const double x_star = 0.5 * (xa + xb) - d1 / (2.0 * curv);
    if (x_star <= xa || x_star >= xc)
        return e;
    e.t = x_star;
    // Newton form: p(x) = ya + d1 (x - xa) + curv (x - xa)(x - xb).
    e.value = ya + d1 * (x_star - xa) + curv * (x_star - xa) * (x_star - xb);
    return e;
}

CorrelatorResult g2_delayed(const DensityApply& h, const Dissipator& d, const DressedBasis& basis,
                            const CMatrix& rho0, const BundleOperator& xn, double t_s,
                            std::span<const double> tau_grid, const MasterOptions& opt)
{
    return two_time_correlator(h, d, basis.energies, rho0, xn.x_pow, t_s, tau_grid, opt);
}

} // namespace qrm
