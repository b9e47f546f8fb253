#pragma once

// Static non-Hermitian Rice-Mele chain: parameters, Bloch dispersion and
// eigenvectors, PT threshold and drift velocity.
//
// Conventions used throughout the library:
//   - cell n holds the gain site a_n and the loss site b_n;
//   - Bloch modes are (A, B) exp(i q n - i E t), q in [0, 2 pi);
//   - the plus band carries Im E >= 0 in the broken phase.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "ptlattice/errors.hpp"

namespace ptlattice {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wrap an angle into [0, 2 pi).
inline double canonical_angle(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0; // fmod(-tiny) + 2pi can round up to 2pi
    return r;
}

enum class Branch { plus, minus };

inline const char* to_string(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

/// Rates of the static lattice (inverse time units).
/// kappa: intra-cell hopping, sigma: inter-cell hopping, rho: magnitude of
/// the next-nearest hopping rho*exp(i phi), g: gain/loss rate.
class LatticeParams {
public:
    LatticeParams(double kappa, double sigma, double rho, double phi, double g)
        : kappa_(kappa), sigma_(sigma), rho_(rho), phi_(0.0), g_(g) {
        auto check = [](double v, const char* name) {
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError(std::string(name) + " must be finite and >= 0, got " +
                                      std::to_string(v));
        };
        check(kappa, "kappa");
        check(sigma, "sigma");
        check(rho, "rho");
        check(g, "g");
        if (!std::isfinite(phi)) throw ValidationError("phi must be finite");
        if (!(kappa + sigma > 0.0))
            throw ValidationError("kappa + sigma must be > 0 (disconnected dimer chain)");
        phi_ = canonical_angle(phi);
    }

    double kappa() const { return kappa_; }
    double sigma() const { return sigma_; }
    double rho() const { return rho_; }
    double phi() const { return phi_; }
    double g() const { return g_; }

    LatticeParams with_g(double g) const { return {kappa_, sigma_, rho_, phi_, g}; }
    LatticeParams with_rho(double rho) const { return {kappa_, sigma_, rho, phi_, g_}; }

    friend bool operator==(const LatticeParams&, const LatticeParams&) = default;

private:
    double kappa_, sigma_, rho_, phi_, g_;
};

/// The quantity under the square root of the dispersion relation,
/// -g^2 + kappa^2 + sigma^2 + 2 kappa sigma cos q. Analytic in q.
template <class Q>
auto radicand(const LatticeParams& p, Q q) {
    using std::cos;
    return -p.g() * p.g() + p.kappa() * p.kappa() + p.sigma() * p.sigma() +
           2.0 * p.kappa() * p.sigma() * cos(q);
}

/// Square root with the band convention: +sqrt(r) for r >= 0 and +i sqrt(|r|) for r < 0.
inline cplx band_sqrt(double r) { return r >= 0.0 ? cplx{std::sqrt(r), 0.0} : cplx{0.0, std::sqrt(-r)}; }

struct BandPair {
    cplx plus;
    cplx minus;
};

/// E_{+-}(q) = -2 rho cos(q + phi) +- sqrt(radicand).
inline BandPair dispersion(const LatticeParams& p, double q) {
    q = canonical_angle(q);
    const double shift = -2.0 * p.rho() * std::cos(q + p.phi());
    const cplx root = band_sqrt(radicand(p, q));
    return {shift + root, shift - root};
}

inline cplx energy(const LatticeParams& p, double q, Branch b) {
    const auto e = dispersion(p, q);
    return b == Branch::plus ? e.plus : e.minus;
}

/// 2x2 Bloch Hamiltonian h(q) with h(q) (A, B)^T = E (A, B)^T.
inline Eigen::Matrix2cd bloch_hamiltonian(const LatticeParams& p, double q) {
    const double d = -2.0 * p.rho() * std::cos(q + p.phi());
    Eigen::Matrix2cd h;
    h(0, 0) = d + I * p.g();
    h(0, 1) = -(p.kappa() + p.sigma() * std::exp(-I * q));
    h(1, 0) = -(p.kappa() + p.sigma() * std::exp(I * q));
    h(1, 1) = d - I * p.g();
    return h;
}

namespace detail {

// Phase convention for fallback vectors: unit norm, first nonzero component real positive.
inline Eigen::Vector2cd fix_phase(Eigen::Vector2cd v) {
    v.normalize();
    const int k = std::abs(v(0)) > 1e-14 ? 0 : 1;
    v *= std::conj(v(k)) / std::abs(v(k));
    return v;
}

inline double bloch_scale(const LatticeParams& p) {
    return p.kappa() + p.sigma() + 2.0 * p.rho() + p.g();
}

} // namespace detail

/// Unnormalized Bloch amplitudes (A, B) = (kappa + sigma e^{-iq}, i g - E - 2 rho cos(q + phi)).
/// Where this vector vanishes (kappa = sigma, q = pi on the plus branch) the
/// null vector of the other row of the 2x2 system is returned instead,
/// normalized with its first nonzero component real positive. If the whole
/// system vanishes (scalar Bloch Hamiltonian) the plus branch gets (1, 0) and
/// the minus branch (0, 1).
inline Eigen::Vector2cd bloch_eigenvector(const LatticeParams& p, double q, Branch b) {
    q = canonical_angle(q);
    const cplx e = energy(p, q, b);
    const double c = 2.0 * p.rho() * std::cos(q + p.phi());
    Eigen::Vector2cd v(p.kappa() + p.sigma() * std::exp(-I * q), I * p.g() - e - c);
    const double tol = 1e-12 * detail::bloch_scale(p);
    if (v.norm() > tol) return v;

    Eigen::Vector2cd w(e + c + I * p.g(), -(p.kappa() + p.sigma() * std::exp(I * q)));
    if (w.norm() > tol) return detail::fix_phase(w);
    return b == Branch::plus ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0);
}

struct BlochMode {
    double q;
    cplx energy_plus;
    cplx energy_minus;
    Eigen::Vector2cd vector_plus;
    Eigen::Vector2cd vector_minus;
};

inline BlochMode bloch_mode(const LatticeParams& p, double q) {
    q = canonical_angle(q);
    const auto e = dispersion(p, q);
    return {q, e.plus, e.minus, bloch_eigenvector(p, q, Branch::plus),
            bloch_eigenvector(p, q, Branch::minus)};
}

/// Relative residual |(h - E) v| / |v| of a Bloch eigenpair.
inline double bloch_residual(const LatticeParams& p, double q, Branch b) {
    const Eigen::Vector2cd v = bloch_eigenvector(p, q, b);
    const Eigen::Vector2cd r = bloch_hamiltonian(p, q) * v - energy(p, q, b) * v;
    return r.norm() / v.norm();
}

struct ThresholdGap {
    double g_th;
    double gap;
};

/// g_th = |sigma - kappa|; the gap at q = pi is 2 sqrt(g_th^2 - g^2) below threshold, else 0.
inline ThresholdGap threshold_and_gap(const LatticeParams& p) {
    const double g_th = std::abs(p.sigma() - p.kappa());
    const double gap = p.g() <= g_th ? 2.0 * std::sqrt(g_th * g_th - p.g() * p.g()) : 0.0;
    return {g_th, gap};
}

/// Drift velocity of the most unstable mode (q = pi) at the breaking point.
inline double group_velocity(const LatticeParams& p) { return -2.0 * p.rho() * std::sin(p.phi()); }

/// sqrt(g^2 - g_th^2) above threshold, 0 otherwise.
inline double distance_above_threshold(const LatticeParams& p) {
    const double g_th = threshold_and_gap(p).g_th;
    return p.g() > g_th ? std::sqrt(p.g() * p.g() - g_th * g_th) : 0.0;
}

} // namespace ptlattice
