#include "qrm/effective.hpp"

#include <cmath>
#include <numbers>

#include "qrm/errors.hpp"

namespace qrm {

LambdaSystem make_lambda_system(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt)
{
    tgt.validate(spec.n_fock);
    LambdaSystem sys;
    sys.target = tgt;
    sys.pulses = pt;
    sys.c_initial = spec.C(tgt.n, tgt.M);
    sys.c_final = spec.C(tgt.n, tgt.final_photons());
    sys.labels = {"b," + std::to_string(tgt.M), "eps_" + std::to_string(tgt.n),
                  "b," + std::to_string(tgt.final_photons())};
    return sys;
}

Eigen::Matrix3cd hamiltonian_at(const LambdaSystem& sys, double t)
{
    const double o1 = sys.coupling_initial(t);
    const double o2 = sys.coupling_final(t);
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(1, 1) = sys.target.detuning;
    h(0, 1) = h(1, 0) = o1;
    h(2, 1) = h(1, 2) = o2;
    return h;
}

LambdaEigensystem instantaneous_eigensystem(const LambdaSystem& sys, double t)
{
    const double o1 = sys.coupling_initial(t);
    const double o2 = sys.coupling_final(t);
    const double total = std::hypot(o1, o2);
    if (total < 1e-14)
        fail(ErrorKind::DegeneratePoint, "Lambda couplings vanish, dressed states are degenerate");

    const double delta = sys.target.detuning;
    LambdaEigensystem es;
    es.omega_tilde = total;
    es.theta = std::atan2(std::abs(o1), std::abs(o2));
    const double root = std::sqrt(0.25 * delta * delta + total * total);
    // Each root written without cancellation for either sign of delta.
    const double upper = delta >= 0.0 ? 0.5 * delta + root : total * total / (root - 0.5 * delta);
    const double lower = delta <= 0.0 ? 0.5 * delta - root : -total * total / (root + 0.5 * delta);
    es.phi = std::atan2(total, upper);
    es.values = {0.0, upper, lower};

    // s = sign(C_{n,M} C_{n,2m+M}) enters the relative sign of the dark state.
    const double s = (o1 * o2 < 0.0) ? -1.0 : 1.0;
    const double sign_final = (o2 < 0.0) ? -1.0 : 1.0;
    const double st = std::sin(es.theta), ct = std::cos(es.theta);
    const double sp = std::sin(es.phi), cp = std::cos(es.phi);

    Eigen::Vector3cd dark(ct, 0.0, -s * st);
    Eigen::Vector3cd bright(s * st, 0.0, ct);
    Eigen::Vector3cd excited(0.0, sign_final, 0.0);
    es.vectors[0] = dark;
    es.vectors[1] = sp * bright + cp * excited;
    es.vectors[2] = cp * bright - sp * excited;
    return es;
}

double analytic_g2_equal_time(double theta)
{
    const double s = std::sin(theta);
    if (s <= 1e-12)
        fail(ErrorKind::UndefinedAtZeroAngle, "g2 estimate undefined at theta = 0");
    return 1.0 / (2.0 * s);
}

} // namespace qrm
