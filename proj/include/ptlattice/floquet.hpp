#pragma once

// ac-dc driven zig-zag lattice. The lab-frame amplitudes (A_n, B_n) feel the
// forces F_x(t) = U - Gamma omega cos(omega t + phi_d) and
// F_y(t) = -U - Gamma omega cos(omega t - phi_d) with U = M omega.
// After the gauge transformation
//   A_n = a_n exp[i phi n + i n Phi(t)],
//   B_n = b_n exp[i phi n + i beta + i n Phi(t) + i Theta(t)],
// the amplitudes (a_n, b_n) obey a translation-invariant system with
// T-periodic coefficients F(t), G(t), H(t). Everything here works in that
// frame; to_lab_frame() maps back.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "ptlattice/bessel.hpp"
#include "ptlattice/errors.hpp"
#include "ptlattice/lattice.hpp"

namespace ptlattice {

class DriveParams {
public:
    DriveParams(double kappa1, double kappa2, double kappa3, double g, int M, double Gamma,
                double drive_phase, double omega)
        : kappa1_(kappa1), kappa2_(kappa2), kappa3_(kappa3), g_(g), M_(M), Gamma_(Gamma),
          drive_phase_(drive_phase), omega_(omega) {
        auto check = [](double v, const char* name) {
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError(std::string(name) + " must be finite and >= 0, got " +
                                      std::to_string(v));
        };
        check(kappa1, "kappa1");
        check(kappa2, "kappa2");
        check(kappa3, "kappa3");
        check(g, "g");
        check(Gamma, "Gamma");
        if (M < 0) throw ValidationError("M must be >= 0");
        if (!std::isfinite(drive_phase)) throw ValidationError("drive phase must be finite");
        if (!std::isfinite(omega) || omega <= 0.0) throw ValidationError("omega must be > 0");
    }

    double kappa1() const { return kappa1_; }
    double kappa2() const { return kappa2_; }
    double kappa3() const { return kappa3_; }
    double g() const { return g_; }
    int M() const { return M_; }
    double Gamma() const { return Gamma_; }
    double drive_phase() const { return drive_phase_; }
    double omega() const { return omega_; }
    double period() const { return two_pi / omega_; }
    /// dc force magnitude, fixed by the resonance U = M omega.
    double U() const { return M_ * omega_; }

    DriveParams with_omega(double w) const { return {kappa1_, kappa2_, kappa3_, g_, M_, Gamma_, drive_phase_, w}; }
    DriveParams with_g(double g) const { return {kappa1_, kappa2_, kappa3_, g, M_, Gamma_, drive_phase_, omega_}; }
    DriveParams with_kappa3(double k3) const { return {kappa1_, kappa2_, k3, g_, M_, Gamma_, drive_phase_, omega_}; }

private:
    double kappa1_, kappa2_, kappa3_, g_;
    int M_;
    double Gamma_, drive_phase_, omega_;
};

/// Effective next-nearest phase M (2 phi_d + pi), in [0, 2 pi).
inline double effective_phase(const DriveParams& d) {
    return canonical_angle(d.M() * (2.0 * d.drive_phase() + std::numbers::pi));
}

struct Forces {
    double fx;
    double fy;
};

inline Forces forces(const DriveParams& d, double t) {
    const double a = d.Gamma() * d.omega();
    return {d.U() - a * std::cos(d.omega() * t + d.drive_phase()),
            -d.U() - a * std::cos(d.omega() * t - d.drive_phase())};
}

/// Phi(t) = int_0^t (F_x + F_y), Theta(t) = int_0^t F_x, in closed form.
struct PhaseIntegrals {
    double Phi;
    double Theta;
};

inline PhaseIntegrals phase_integrals(const DriveParams& d, double t) {
    const double w = d.omega(), ph = d.drive_phase(), G = d.Gamma();
    return {-2.0 * G * std::cos(ph) * std::sin(w * t),
            d.U() * t - G * (std::sin(w * t + ph) - std::sin(ph))};
}

struct GaugeCoefficients {
    cplx F;
    cplx G;
    cplx H;
};

inline GaugeCoefficients gauge_coefficients(const DriveParams& d, double t) {
    const double M = d.M(), w = d.omega(), ph = d.drive_phase(), Gm = d.Gamma();
    const double pi = std::numbers::pi;
    return {std::exp(I * (M * ph + M * w * t - Gm * std::sin(w * t + ph))),
            std::exp(I * (-M * (ph + pi) + M * w * t + Gm * std::sin(w * t - ph))),
            std::exp(I * (M * (2.0 * ph + pi) - 2.0 * Gm * std::cos(ph) * std::sin(w * t)))};
}

/// 2x2 Bloch generator of the gauge-frame system at quasi-momentum q:
/// i d/dt (A, B) = h(q, t) (A, B).
inline Eigen::Matrix2cd driven_bloch_generator(const DriveParams& d, double q, double t) {
    const auto c = gauge_coefficients(d, t);
    const double diag = -2.0 * d.kappa3() * std::real(c.H * std::exp(I * q));
    Eigen::Matrix2cd h;
    h(0, 0) = diag + I * d.g();
    h(0, 1) = -(d.kappa1() * c.F + d.kappa2() * c.G * std::exp(-I * q));
    h(1, 0) = -(d.kappa1() * std::conj(c.F) + d.kappa2() * std::conj(c.G) * std::exp(I * q));
    h(1, 1) = diag - I * d.g();
    return h;
}

/// One-period propagator U(T) of the Bloch system, RK4 with `steps` steps.
inline Eigen::Matrix2cd monodromy(const DriveParams& d, double q, int steps) {
    if (steps < 200) throw ValidationError("monodromy: steps must be >= 200 per period");
    const double dt = d.period() / steps;
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const Eigen::Matrix2cd h0 = -I * driven_bloch_generator(d, q, t);
        const Eigen::Matrix2cd hm = -I * driven_bloch_generator(d, q, t + 0.5 * dt);
        const Eigen::Matrix2cd h1 = -I * driven_bloch_generator(d, q, t + dt);
        const Eigen::Matrix2cd k1 = h0 * u;
        const Eigen::Matrix2cd k2 = hm * (u + 0.5 * dt * k1);
        const Eigen::Matrix2cd k3 = hm * (u + 0.5 * dt * k2);
        const Eigen::Matrix2cd k4 = h1 * (u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 1e150)
        throw Overflow("monodromy: propagator overflow");
    return u;
}

/// Real part folded into [-omega/2, omega/2).
inline cplx fold_quasi_energy(cplx e, double omega) {
    double re = std::fmod(e.real() + 0.5 * omega, omega);
    if (re < 0.0) re += omega;
    if (re >= omega) re = 0.0;
    return {re - 0.5 * omega, e.imag()};
}

/// Distance between two quasi-energies with the real part taken modulo omega.
inline double quasi_energy_distance(cplx a, cplx b, double omega) {
    return std::abs(fold_quasi_energy(a - b, omega));
}

struct QuasiEnergyBand {
    std::vector<double> q_grid;
    std::vector<cplx> E_plus;
    std::vector<cplx> E_minus;
    double omega = 0.0;
    /// Grid indices where |lambda_+ - lambda_-| < 1e-12; ordering there falls back to Re E.
    std::vector<std::size_t> degenerate_points;
};

inline constexpr int default_monodromy_steps = 1000;

/// Quasi-energies E = (i/T) log(lambda) of the monodromy eigenvalues,
/// folded and ordered into two q-continuous bands.
inline QuasiEnergyBand quasi_energies(const DriveParams& d, const std::vector<double>& q_grid,
                                      int steps = default_monodromy_steps) {
    for (std::size_t i = 1; i < q_grid.size(); ++i)
        if (!(q_grid[i] > q_grid[i - 1])) throw ValidationError("quasi_energies: q grid must be increasing");
    QuasiEnergyBand band;
    band.q_grid = q_grid;
    band.omega = d.omega();
    const double T = d.period(), w = d.omega();

    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        const Eigen::Matrix2cd u = monodromy(d, q_grid[i], steps);
        const cplx half_tr = 0.5 * u.trace();
        const cplx disc = std::sqrt(half_tr * half_tr - u.determinant());
        const cplx l1 = half_tr + disc, l2 = half_tr - disc;
        cplx e1 = fold_quasi_energy(I / T * std::log(l1), w);
        cplx e2 = fold_quasi_energy(I / T * std::log(l2), w);
        const bool degenerate = std::abs(l1 - l2) < 1e-12;
        if (degenerate) band.degenerate_points.push_back(i);

        bool swap = false;
        if (i == 0 || degenerate) {
            if (!degenerate && std::abs(e1.imag() - e2.imag()) > 1e-9) swap = e2.imag() > e1.imag();
            else swap = e2.real() > e1.real();
        } else {
            const cplx pp = band.E_plus.back(), pm = band.E_minus.back();
            const double keep = quasi_energy_distance(pp, e1, w) + quasi_energy_distance(pm, e2, w);
            const double flip = quasi_energy_distance(pp, e2, w) + quasi_energy_distance(pm, e1, w);
            swap = flip < keep;
        }
        if (swap) std::swap(e1, e2);
        band.E_plus.push_back(e1);
        band.E_minus.push_back(e2);
    }
    return band;
}

/// Time averages of the gauge coefficients: <F> = <G> = J_M(Gamma),
/// <H> = J_0(2 Gamma cos phi_d) exp(i phi).
/// Negative Bessel factors are absorbed by gauge choices (b_n -> -b_n for
/// kappa and sigma, phi -> phi + pi for rho) so the result satisfies the
/// non-negativity invariants of LatticeParams.
inline LatticeParams rwa_params(const DriveParams& d) {
    const double jm = bessel_j(d.M(), d.Gamma());
    const double j0 = bessel_j(0, 2.0 * d.Gamma() * std::cos(d.drive_phase()));
    double phi = effective_phase(d);
    if (j0 < 0.0) phi = canonical_angle(phi + std::numbers::pi);
    return {d.kappa1() * std::abs(jm), d.kappa2() * std::abs(jm), d.kappa3() * std::abs(j0), phi, d.g()};
}

enum class BendAxis { x, y };

/// Force induced by axis bending: F_x = -2 pi n_s d / lambda x0'', F_y = +2 pi n_s d / lambda y0''.
inline double bending_to_force(double displacement, double curvature, double wavelength,
                               double substrate_index, BendAxis axis) {
    if (!(wavelength > 0.0)) throw ValidationError("bending_to_force: wavelength must be > 0");
    const double f = 2.0 * std::numbers::pi * substrate_index * displacement / wavelength * curvature;
    return axis == BendAxis::x ? -f : f;
}

} // namespace ptlattice
