#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrm/errors.hpp"
#include "qrm/types.hpp"

namespace qrm {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 0.0; ///< 0 picks a step from the initial derivative
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-12;
    long max_steps = 100'000'000;
};

/// Dormand-Prince 5(4) with FSAL, PI step control and 4th order dense output.
///
/// `State` is any Eigen dense type; `Rhs` is callable as f(t, y, dydt).
template <class State, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs f, const OdeOptions& opt) : f_(std::move(f)), opt_(opt) {}

    void reset(double t0, const State& y0)
    {
        t_ = t_old_ = t0;
        y_ = y_old_ = y0;
        for (State* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_})
            k->resizeLike(y0);
        f_(t_, y_, k1_);
        facold_ = 1e-4;
        steps_ = accepted_ = rejected_ = 0;
        h_ = opt_.h_init > 0.0 ? opt_.h_init : initial_step();
        h_ = std::min(h_, opt_.h_max);
        have_dense_ = false;
        dense_ready_ = false;
    }

    double t() const { return t_; }
    const State& y() const { return y_; }
    double t_prev() const { return t_old_; }
    long accepted() const { return accepted_; }
    long rejected() const { return rejected_; }
    double next_step() const { return h_; }

    /// Makes one accepted step, never past `t_limit`.
    void step(double t_limit)
    {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                                a76 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;

        for (;;) {
            if (++steps_ > opt_.max_steps)
                fail(ErrorKind::StepSizeUnderflow, "integrator exceeded the step budget");
            double h = std::min(h_, t_limit - t_);
            const bool clipped = h < h_;
            if (h < opt_.h_min * std::max(1.0, std::abs(t_)))
                fail(ErrorKind::StepSizeUnderflow, "integrator step size underflow");

            tmp_ = y_ + h * a21 * k1_;
            f_(t_ + c2 * h, tmp_, k2_);
            tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
            f_(t_ + c3 * h, tmp_, k3_);
            tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
            f_(t_ + c4 * h, tmp_, k4_);
            tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
            f_(t_ + c5 * h, tmp_, k5_);
            tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
            f_(t_ + h, tmp_, k6_);
            y_new_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
            f_(t_ + h, y_new_, k7_);

            tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
            const double err = error_norm(tmp_, y_, y_new_);

            const double fac11 = std::pow(std::max(err, 1e-300), 0.17);
            if (err <= 1.0) {
                double fac = fac11 / std::pow(facold_, 0.04);
                fac = std::clamp(fac / 0.9, 0.1, 5.0);
                const double h_next = std::min(h / fac, opt_.h_max);
                facold_ = std::max(err, 1e-4);

                h_dense_ = h;
                have_dense_ = true;
                dense_ready_ = false;
                t_old_ = t_;
                y_old_.swap(y_);
                t_ = clipped ? t_limit : t_ + h;
                y_.swap(y_new_);
                k1_.swap(k7_);
                // A step shortened to hit t_limit says nothing about the natural step.
                h_ = clipped ? std::max(h_, h_next) : h_next;
                h_ = std::min(h_, opt_.h_max);
                ++accepted_;
                return;
            }
            h_ = h / std::min(5.0, fac11 / 0.9);
            ++rejected_;
        }
    }

    /// Advances until t() == t_end.
    void integrate_to(double t_end)
    {
        while (t_ < t_end)
            step(t_end);
    }

    /// Dense output on [t_prev(), t()].
    void interpolate(double t, State& out)
    {
        if (!have_dense_ || t == t_) {
            out = y_;
            return;
        }
        if (!dense_ready_)
            prepare_dense();
        const double theta = (t - t_old_) / h_dense_;
        const double theta1 = 1.0 - theta;
        out = r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_)));
    }

private:
    // Component scale uses max(|re|, |im|) to avoid a square root per entry.
    static auto inf_abs(const State& y) { return y.real().array().abs().max(y.imag().array().abs()); }

    double error_norm(const State& err, const State& y0, const State& y1) const
    {
        const auto scale = opt_.atol + opt_.rtol * inf_abs(y0).max(inf_abs(y1));
        const double mean = (err.array().abs2() / scale.square()).mean();
        return std::sqrt(mean);
    }

    double initial_step() const
    {
        const double d0 = std::sqrt(y_.array().abs().square().mean());
        const double d1 = std::sqrt(k1_.array().abs().square().mean());
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::max(h, 1e-6);
    }

    // After an accepted step k1_ holds the new slope and k7_ the old one.
    void prepare_dense()
    {
        const double h = h_dense_;
        static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        r1_ = y_old_;
        r2_ = y_ - y_old_;
        r3_ = h * k7_ - r2_;
        r4_ = r2_ - h * k1_ - r3_;
        r5_ = h * (d1 * k7_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k1_);
        dense_ready_ = true;
    }

    Rhs f_;
    OdeOptions opt_;
    double t_ = 0.0, t_old_ = 0.0, h_ = 0.0, h_dense_ = 0.0, facold_ = 1e-4;
    long steps_ = 0, accepted_ = 0, rejected_ = 0;
    bool have_dense_ = false;
    bool dense_ready_ = false;
    State y_, y_old_, y_new_, tmp_;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    State r1_, r2_, r3_, r4_, r5_;
};

template <class State, class Rhs>
DormandPrince<State, Rhs> make_integrator(Rhs f, const OdeOptions& opt)
{
    return DormandPrince<State, Rhs>(std::move(f), opt);
}

} // namespace qrm
