#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "qrm/drive.hpp"

namespace qrm {

/// Resonant three-level Lambda system |b,M> <-> |eps_n> <-> |b,2m+M>.
///
/// Basis order: 0 = |b,M>, 1 = |eps_n>, 2 = |b,2m+M>.
struct LambdaSystem {
    BundleTarget target;
    PulseTrain pulses;
    double c_initial = 0.0; ///< C_{n,M}
    double c_final = 0.0;   ///< C_{n,2m+M}
    std::array<std::string, 3> labels;

    double coupling_initial(double t) const { return 0.5 * c_initial * envelope(pulses, 1, t); }
    double coupling_final(double t) const { return 0.5 * c_final * envelope(pulses, 2, t); }
};

LambdaSystem make_lambda_system(const RabiSpectrum& spec, const PulseTrain& pt, const BundleTarget& tgt);

Eigen::Matrix3cd hamiltonian_at(const LambdaSystem& sys, double t);

/// Dark state and the two bright dressed states, in closed form.
struct LambdaEigensystem {
    double theta = 0.0;
    double phi = 0.0;
    double omega_tilde = 0.0;
    /// lambda_0, lambda_+, lambda_-
    std::array<double, 3> values{};
    /// |psi_0>, |psi_+>, |psi_->
    std::array<Eigen::Vector3cd, 3> vectors;
};

/// Throws DegeneratePoint when the total coupling vanishes.
LambdaEigensystem instantaneous_eigensystem(const LambdaSystem& sys, double t);

/// g2(0) = 1 / (2 sin theta). Throws UndefinedAtZeroAngle when sin theta <= 1e-12.
double analytic_g2_equal_time(double theta);

} // namespace qrm
