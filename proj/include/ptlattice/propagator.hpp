#pragma once

// Wave-packet dynamics on the static and driven lattices (fixed-step RK4),
// ray sampling, growth fits, and the exact Bloch resynthesis on a ring.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptlattice/errors.hpp"
#include "ptlattice/floquet.hpp"
#include "ptlattice/lattice.hpp"

namespace ptlattice {

/// Amplitudes (a_n, b_n) on cells n = -N/2 .. N/2 (N even) at time t.
class WavePacketField {
public:
    explicit WavePacketField(int N, double t = 0.0) : N_(N), a_(N + 1), b_(N + 1), t_(t) {
        if (N < 2 || N % 2 != 0)
            throw BadSize("WavePacketField: N must be even and >= 2 (N+1 >= 3 cells), got " +
                          std::to_string(N));
    }

    int N() const { return N_; }
    int cells() const { return N_ + 1; }
    int n_min() const { return -N_ / 2; }
    int n_max() const { return N_ / 2; }
    double t() const { return t_; }
    void set_t(double t) { t_ = t; }

    std::size_t index(int n) const { return static_cast<std::size_t>(n + N_ / 2); }
    cplx& a(int n) { return a_[index(n)]; }
    cplx& b(int n) { return b_[index(n)]; }
    cplx a(int n) const { return a_[index(n)]; }
    cplx b(int n) const { return b_[index(n)]; }

    std::vector<cplx>& a_data() { return a_; }
    std::vector<cplx>& b_data() { return b_; }
    const std::vector<cplx>& a_data() const { return a_; }
    const std::vector<cplx>& b_data() const { return b_; }

    double intensity(int n) const { return std::norm(a(n)) + std::norm(b(n)); }
    double total_intensity() const {
        double s = 0.0;
        for (std::size_t j = 0; j < a_.size(); ++j) s += std::norm(a_[j]) + std::norm(b_[j]);
        return s;
    }

private:
    int N_;
    std::vector<cplx> a_, b_;
    double t_;
};

inline double max_abs_difference(const WavePacketField& x, const WavePacketField& y) {
    if (x.N() != y.N()) throw DimensionMismatch("fields have different sizes");
    double m = 0.0;
    for (std::size_t j = 0; j < x.a_data().size(); ++j) {
        m = std::max(m, std::abs(x.a_data()[j] - y.a_data()[j]));
        m = std::max(m, std::abs(x.b_data()[j] - y.b_data()[j]));
    }
    return m;
}

/// a_n(0) = exp(-2 (n/w)^2 + i q0 n), b_n(0) = 0. Not normalized.
inline WavePacketField gaussian_packet(int N, double w, double q0) {
    if (!(w > 0.0)) throw ValidationError("gaussian_packet: w must be > 0");
    if (N < 4.0 * w) throw BadSize("gaussian_packet: N must be >= 4w to hold the packet");
    WavePacketField f(N);
    for (int n = f.n_min(); n <= f.n_max(); ++n) {
        const double x = n / w;
        f.a(n) = std::exp(-2.0 * x * x) * std::exp(I * (q0 * n));
    }
    return f;
}

/// Smallest even N with N >= 2 (|v| t_end + 4 w).
inline int suggested_cells(double drift, double t_end, double w) {
    int n = static_cast<int>(std::ceil(2.0 * (std::abs(drift) * t_end + 4.0 * w)));
    return n + n % 2;
}

enum class Boundary { open, periodic };

namespace detail {

// Nearest-neighbour couplings of one time instant.
//   i da_j = -intra b_j - inter b_{j-1} - nnn a_{j+1} - conj(nnn) a_{j-1} + i g_j a_j
//   i db_j = -conj(intra) a_j - conj(inter) a_{j+1} - nnn b_{j+1} - conj(nnn) b_{j-1} - i g_j b_j
struct Couplings {
    cplx intra;
    cplx inter;
    cplx nnn;
};

struct State {
    std::vector<cplx> a, b;
};

// out = -i H in
inline void apply_generator(const Couplings& c, std::span<const double> gains, Boundary bc,
                            const State& in, State& out) {
    const int m = static_cast<int>(in.a.size());
    const bool ring = bc == Boundary::periodic;
    const cplx ci = std::conj(c.intra), ce = std::conj(c.inter), cn = std::conj(c.nnn);
    for (int j = 0; j < m; ++j) {
        const int jp = j + 1 < m ? j + 1 : (ring ? 0 : -1);
        const int jm = j > 0 ? j - 1 : (ring ? m - 1 : -1);
        cplx ha = -c.intra * in.b[j] + I * gains[j] * in.a[j];
        cplx hb = -ci * in.a[j] - I * gains[j] * in.b[j];
        if (jm >= 0) {
            ha -= c.inter * in.b[jm] + cn * in.a[jm];
            hb -= cn * in.b[jm];
        }
        if (jp >= 0) {
            ha -= c.nnn * in.a[jp];
            hb -= ce * in.a[jp] + c.nnn * in.b[jp];
        }
        out.a[j] = -I * ha;
        out.b[j] = -I * hb;
    }
}

} // namespace detail

struct EvolveOptions {
    Boundary boundary = Boundary::open;
    /// Per-cell gain rates overriding the uniform g (static lattice only).
    std::optional<std::vector<double>> gains;
    /// Emit a snapshot every this many steps (0: none). The initial and final
    /// fields are always emitted when a callback is set.
    int snapshot_every = 0;
    std::function<void(const WavePacketField&)> on_snapshot;
    double overflow_limit = 1e150;
    double edge_fraction_limit = 1e-6;
    int edge_cells = 5;
};

struct Evolution {
    WavePacketField field;
    bool boundary_warning = false;
    double max_edge_fraction = 0.0;
    long steps = 0;
};

namespace detail {

inline double edge_fraction(const WavePacketField& f, int edge) {
    const double total = f.total_intensity();
    if (total <= 0.0) return 0.0;
    double e = 0.0;
    for (int k = 0; k < edge && k < f.cells(); ++k) {
        e += f.intensity(f.n_min() + k);
        if (f.n_max() - k > f.n_min() + k) e += f.intensity(f.n_max() - k);
    }
    return e / total;
}

inline void check_finite(const State& s, double limit, double t) {
    for (std::size_t j = 0; j < s.a.size(); ++j) {
        for (cplx z : {s.a[j], s.b[j]}) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw Overflow("evolve: non-finite amplitude at t = " + std::to_string(t));
            if (std::abs(z) > limit)
                throw Overflow("evolve: amplitude exceeded " + std::to_string(limit) + " at t = " +
                               std::to_string(t));
        }
    }
}

// Classical RK4 with a time-dependent coupling provider.
template <class CouplingAt>
Evolution run_rk4(WavePacketField field, double t_end, double dt, std::span<const double> gains,
                  const EvolveOptions& opt, CouplingAt&& coupling_at) {
    if (!(dt > 0.0)) throw ValidationError("evolve: dt must be > 0");
    if (!(t_end >= field.t())) throw ValidationError("evolve: t_end must be >= field time");
    const double span = t_end - field.t();
    const long steps = span == 0.0 ? 0 : static_cast<long>(std::ceil(span / dt - 1e-9));
    const double h = steps > 0 ? span / steps : 0.0;

    const std::size_t m = field.a_data().size();
    State y{field.a_data(), field.b_data()};
    State k1{std::vector<cplx>(m), std::vector<cplx>(m)}, k2 = k1, k3 = k1, k4 = k1, tmp = k1;

    Evolution out{field};
    auto emit = [&](double t) {
        field.a_data() = y.a;
        field.b_data() = y.b;
        field.set_t(t);
        if (opt.boundary == Boundary::open) {
            const double fr = edge_fraction(field, opt.edge_cells);
            out.max_edge_fraction = std::max(out.max_edge_fraction, fr);
        }
        if (opt.on_snapshot) opt.on_snapshot(field);
    };
    const double t0 = field.t();
    if (opt.on_snapshot) emit(t0);

    auto axpy = [m](const State& base, double s, const State& k, State& r) {
        for (std::size_t j = 0; j < m; ++j) {
            r.a[j] = base.a[j] + s * k.a[j];
            r.b[j] = base.b[j] + s * k.b[j];
        }
    };
    for (long n = 0; n < steps; ++n) {
        const double t = t0 + n * h;
        const Couplings c0 = coupling_at(t), cm = coupling_at(t + 0.5 * h), c1 = coupling_at(t + h);
        apply_generator(c0, gains, opt.boundary, y, k1);
        axpy(y, 0.5 * h, k1, tmp);
        apply_generator(cm, gains, opt.boundary, tmp, k2);
        axpy(y, 0.5 * h, k2, tmp);
        apply_generator(cm, gains, opt.boundary, tmp, k3);
        axpy(y, h, k3, tmp);
        apply_generator(c1, gains, opt.boundary, tmp, k4);
        for (std::size_t j = 0; j < m; ++j) {
            y.a[j] += h / 6.0 * (k1.a[j] + 2.0 * k2.a[j] + 2.0 * k3.a[j] + k4.a[j]);
            y.b[j] += h / 6.0 * (k1.b[j] + 2.0 * k2.b[j] + 2.0 * k3.b[j] + k4.b[j]);
        }
        const bool last = n + 1 == steps;
        if ((n + 1) % 64 == 0 || last) check_finite(y, opt.overflow_limit, t + h);
        const bool snap = opt.snapshot_every > 0 && (n + 1) % opt.snapshot_every == 0;
        if (last) emit(t_end);
        else if (snap) emit(t + h);
        else if (opt.boundary == Boundary::open && (n + 1) % 256 == 0) {
            field.a_data() = y.a;
            field.b_data() = y.b;
            out.max_edge_fraction = std::max(out.max_edge_fraction, edge_fraction(field, opt.edge_cells));
        }
    }
    if (steps == 0 && !opt.on_snapshot) emit(t0);
    field.a_data() = std::move(y.a);
    field.b_data() = std::move(y.b);
    field.set_t(t_end);
    out.field = std::move(field);
    out.steps = steps;
    out.boundary_warning = out.max_edge_fraction > opt.edge_fraction_limit;
    return out;
}

inline std::vector<double> resolve_gains(const WavePacketField& f, double g, const EvolveOptions& opt) {
    if (!opt.gains) return std::vector<double>(f.cells(), g);
    if (static_cast<int>(opt.gains->size()) != f.cells())
        throw DimensionMismatch("evolve: gain profile length does not match the field");
    for (double v : *opt.gains)
        if (!std::isfinite(v)) throw ValidationError("evolve: gain profile has non-finite entries");
    return *opt.gains;
}

} // namespace detail

/// RK4 integration of the static coupled-mode equations from field.t() to t_end.
/// Open boundaries drop hoppings past the ends; periodic closes the ring.
inline Evolution evolve_static(const LatticeParams& p, WavePacketField field, double t_end, double dt,
                               const EvolveOptions& opt = {}) {
    const auto gains = detail::resolve_gains(field, p.g(), opt);
    const detail::Couplings c{p.kappa(), p.sigma(), p.rho() * std::exp(I * p.phi())};
    return detail::run_rk4(std::move(field), t_end, dt, gains, opt, [&](double) { return c; });
}

/// RK4 integration of the driven lattice in the gauge frame. The forces enter
/// through the T-periodic coefficients F, G, H; dt must resolve the drive (dt <= T/200).
inline Evolution evolve_driven(const DriveParams& d, WavePacketField field, double t_end, double dt,
                               const EvolveOptions& opt = {}) {
    if (dt > d.period() / 200.0 * (1.0 + 1e-12))
        throw ValidationError("evolve_driven: dt must be <= T/200 = " + std::to_string(d.period() / 200.0));
    if (opt.gains) throw ValidationError("evolve_driven: gain profiles are not supported for the driven lattice");
    const std::vector<double> gains(field.cells(), d.g());
    return detail::run_rk4(std::move(field), t_end, dt, gains, opt, [&](double t) {
        const auto c = gauge_coefficients(d, t);
        return detail::Couplings{d.kappa1() * c.F, d.kappa2() * c.G, d.kappa3() * c.H};
    });
}

/// Lab-frame amplitudes (A_n, B_n) of a gauge-frame field at its time t.
inline WavePacketField to_lab_frame(const DriveParams& d, const WavePacketField& f) {
    const auto ph = phase_integrals(d, f.t());
    const double phi = effective_phase(d);
    const double beta = d.M() * d.drive_phase() - d.Gamma() * std::sin(d.drive_phase());
    WavePacketField out(f.N(), f.t());
    for (int n = f.n_min(); n <= f.n_max(); ++n) {
        const double theta_a = phi * n + n * ph.Phi;
        out.a(n) = f.a(n) * std::exp(I * theta_a);
        out.b(n) = f.b(n) * std::exp(I * (theta_a + beta + ph.Theta));
    }
    return out;
}

enum class RayObservable { total, a_only };

struct RayTrace {
    double v = 0.0;
    std::vector<double> times;
    std::vector<double> intensities;
    bool clamped = false;
};

/// Intensity at the cell nearest n = v t of each snapshot (clamped to the lattice, with a flag).
inline RayTrace sample_ray(std::span<const WavePacketField> snapshots, double v,
                           RayObservable obs = RayObservable::total) {
    RayTrace tr;
    tr.v = v;
    for (const auto& f : snapshots) {
        if (!tr.times.empty() && !(f.t() > tr.times.back()))
            throw ValidationError("sample_ray: snapshots must be strictly time-ordered");
        long n = std::lround(v * f.t());
        if (n < f.n_min() || n > f.n_max()) {
            tr.clamped = true;
            n = std::clamp<long>(n, f.n_min(), f.n_max());
        }
        const int c = static_cast<int>(n);
        tr.times.push_back(f.t());
        tr.intensities.push_back(obs == RayObservable::total ? f.intensity(c) : std::norm(f.a(c)));
    }
    return tr;
}

/// Least-squares slope of ln(intensity) against t over t >= t_min, halved
/// (amplitude growth rate).
inline double fit_growth(const RayTrace& trace, double t_min) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        if (trace.times[i] < t_min) continue;
        if (!(trace.intensities[i] > 0.0))
            throw InsufficientData("fit_growth: non-positive intensity in the fit window");
        xs.push_back(trace.times[i]);
        ys.push_back(std::log(trace.intensities[i]));
    }
    if (xs.size() < 10) throw InsufficientData("fit_growth: fewer than 10 samples with t >= t_min");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx <= 0.0) throw InsufficientData("fit_growth: degenerate time window");
    return 0.5 * sxy / sxx;
}

/// Exact evolution on a ring of N+1 cells: project onto the Bloch modes at
/// q_m = 2 pi m / (N+1), advance each by exp(-i E_{+-}(q_m) t), resynthesize.
inline WavePacketField ring_oracle(const LatticeParams& p, const WavePacketField& field0, double t) {
    const int m = field0.cells();
    WavePacketField out(field0.N(), field0.t() + t);
    std::vector<Eigen::Vector2cd> evolved(m);
    for (int k = 0; k < m; ++k) {
        const double q = two_pi * k / m;
        Eigen::Vector2cd c = Eigen::Vector2cd::Zero();
        for (int n = field0.n_min(); n <= field0.n_max(); ++n) {
            const cplx ph = std::exp(-I * (q * n));
            c(0) += field0.a(n) * ph;
            c(1) += field0.b(n) * ph;
        }
        c /= static_cast<double>(m);

        const auto mode = bloch_mode(p, q);
        Eigen::Matrix2cd basis;
        basis.col(0) = mode.vector_plus;
        basis.col(1) = mode.vector_minus;
        const double scale = mode.vector_plus.norm() * mode.vector_minus.norm();
        if (std::abs(basis.determinant()) < 1e-10 * scale)
            throw DegenerateMode("ring_oracle: Bloch modes coalesce at q = " + std::to_string(q));
        Eigen::Vector2cd coef = basis.partialPivLu().solve(c);
        coef(0) *= std::exp(-I * mode.energy_plus * t);
        coef(1) *= std::exp(-I * mode.energy_minus * t);
        evolved[k] = basis * coef;
    }
    for (int n = out.n_min(); n <= out.n_max(); ++n) {
        cplx sa = 0.0, sb = 0.0;
        for (int k = 0; k < m; ++k) {
            const cplx ph = std::exp(I * (two_pi * k / m * n));
            sa += evolved[k](0) * ph;
            sb += evolved[k](1) * ph;
        }
        out.a(n) = sa;
        out.b(n) = sb;
    }
    return out;
}

} // namespace ptlattice
