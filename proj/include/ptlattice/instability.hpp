#pragma once

// Saddle-point analysis of the plus band in the complex quasi-momentum plane.
//
// The analytic continuation of E_+(q) lives on the two-sheeted surface
// s^2 = R(q), R the dispersion radicand, E = -2 rho cos(q + phi) + s.
// Saddles of E(q) - v q are solved for as pairs (q, s), which keeps Newton
// iterations away from any particular branch cut: the two saddles
// pi +- i y of the absolute regime sit exactly on the cut of the principal
// square root.
//
// Growth along the ray n = v t is Im E(q_s) - v Im q_s. Not every saddle is
// relevant to the pulse response; the relevant one is tracked by
// continuation in v from the maximum-growth ray, where the saddle is real
// (q = pi, s = i eps, v = v_g).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ptlattice/errors.hpp"
#include "ptlattice/lattice.hpp"

namespace ptlattice {

struct SaddleSearchConfig {
    int seeds_re = 64;
    int seeds_im = 17;
    double q_im_max = 2.0;
    double dedup_tol = 1e-7;
    int max_newton_iterations = 100;
    double newton_tol = 1e-13;
    double branch_tol = 1e-12;
    double derivative_tol = 1e-9;   // |dE/dq - v| accepted as a saddle
    double order_threshold = 1e-6;  // |d^n E/dq^n| above which order = n
    double continuation_step = 0.02;
    double growth_tol = 1e-9;       // growth <= tol counts as non-growing
};

struct SaddlePoint {
    cplx q_s;             // complex quasi-momentum, Re in [0, 2 pi)
    cplx root;            // sheet value s with s^2 = R(q_s)
    cplx energy;          // E(q_s) on that sheet
    int order = 2;        // lowest derivative order >= 2 that does not vanish
    double growth_rate = 0.0;
    double velocity = 0.0; // ray velocity the saddle solves dE/dq = v for
};

namespace detail {

struct SheetPoint {
    cplx q;
    cplx s;
};

inline cplx sheet_energy(const LatticeParams& p, cplx q, cplx s) {
    return -2.0 * p.rho() * std::cos(q + p.phi()) + s;
}

inline cplx sheet_slope(const LatticeParams& p, cplx q, cplx s) {
    const double ks = p.kappa() * p.sigma();
    return 2.0 * p.rho() * std::sin(q + p.phi()) - ks * std::sin(q) / s;
}

// Derivatives E^{(k)}(q) on the sheet through (q, s), k = 1..4.
inline std::array<cplx, 5> sheet_derivatives(const LatticeParams& p, cplx q, cplx s) {
    const double ks = p.kappa() * p.sigma();
    const cplx sq = std::sin(q), cq = std::cos(q);
    const cplx r1 = -2.0 * ks * sq, r2 = -2.0 * ks * cq, r3 = 2.0 * ks * sq, r4 = 2.0 * ks * cq;
    const cplx s1 = r1 / (2.0 * s);
    const cplx s2 = (r2 - 2.0 * s1 * s1) / (2.0 * s);
    const cplx s3 = (r3 - 6.0 * s1 * s2) / (2.0 * s);
    const cplx s4 = (r4 - 8.0 * s1 * s3 - 6.0 * s2 * s2) / (2.0 * s);
    const cplx sp = std::sin(q + p.phi()), cp = std::cos(q + p.phi());
    const double two_rho = 2.0 * p.rho();
    return {sheet_energy(p, q, s), two_rho * sp + s1, two_rho * cp + s2, -two_rho * sp + s3,
            -two_rho * cp + s4};
}

enum class NewtonStatus { converged, diverged, branch_point };

// Damped Newton on f1 = s^2 - R(q), f2 = (2 rho sin(q + phi) - v) s - kappa sigma sin q.
inline NewtonStatus newton_saddle(const LatticeParams& p, double v, SheetPoint& x,
                                  const SaddleSearchConfig& cfg) {
    const double ks = p.kappa() * p.sigma();
    auto residual = [&](cplx q, cplx s) {
        const cplx f1 = s * s - radicand(p, q);
        const cplx f2 = (2.0 * p.rho() * std::sin(q + p.phi()) - v) * s - ks * std::sin(q);
        return std::array<cplx, 2>{f1, f2};
    };
    auto norm = [](const std::array<cplx, 2>& f) { return std::abs(f[0]) + std::abs(f[1]); };

    auto f = residual(x.q, x.s);
    for (int it = 0; it < cfg.max_newton_iterations; ++it) {
        const cplx drive = 2.0 * p.rho() * std::sin(x.q + p.phi()) - v;
        const cplx j11 = 2.0 * ks * std::sin(x.q), j12 = 2.0 * x.s;
        const cplx j21 = 2.0 * p.rho() * std::cos(x.q + p.phi()) * x.s - ks * std::cos(x.q);
        const cplx j22 = drive;
        const cplx det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-300) return NewtonStatus::diverged;
        cplx dq = -(j22 * f[0] - j12 * f[1]) / det;
        cplx ds = -(-j21 * f[0] + j11 * f[1]) / det;

        // Limit the step, then backtrack on the residual.
        const double len = std::abs(dq) + std::abs(ds);
        if (len > 0.5) {
            dq *= 0.5 / len;
            ds *= 0.5 / len;
        }
        double lambda = 1.0;
        auto trial = residual(x.q + dq, x.s + ds);
        while (norm(trial) > norm(f) && lambda > 1.0 / 64.0) {
            lambda *= 0.5;
            trial = residual(x.q + lambda * dq, x.s + lambda * ds);
        }
        x.q += lambda * dq;
        x.s += lambda * ds;
        f = trial;
        if (!std::isfinite(x.q.real()) || !std::isfinite(x.q.imag()) || std::abs(x.q.imag()) > 50.0)
            return NewtonStatus::diverged;
        if (std::abs(x.s) < cfg.branch_tol) return NewtonStatus::branch_point;
        if (lambda * (std::abs(dq) + std::abs(ds)) < cfg.newton_tol * (1.0 + std::abs(x.q)))
            break;
    }
    if (std::abs(x.s) < cfg.branch_tol) return NewtonStatus::branch_point;
    const double scale = 1.0 + p.kappa() * p.sigma() + p.rho() + std::abs(v);
    if (norm(f) > 1e-10 * scale) return NewtonStatus::diverged;
    if (std::abs(sheet_slope(p, x.q, x.s) - v) > cfg.derivative_tol) return NewtonStatus::diverged;
    return NewtonStatus::converged;
}

inline int saddle_order(const LatticeParams& p, cplx q, cplx s, double threshold) {
    const auto d = sheet_derivatives(p, q, s);
    for (int k = 2; k <= 4; ++k)
        if (std::abs(d[k]) > threshold) return k;
    return 5;
}

inline SaddlePoint make_saddle(const LatticeParams& p, double v, SheetPoint x,
                               const SaddleSearchConfig& cfg) {
    x.q = {canonical_angle(x.q.real()), x.q.imag()};
    SaddlePoint sp;
    sp.q_s = x.q;
    sp.root = x.s;
    sp.energy = sheet_energy(p, x.q, x.s);
    sp.order = saddle_order(p, x.q, x.s, cfg.order_threshold);
    sp.growth_rate = sp.energy.imag() - v * x.q.imag();
    sp.velocity = v;
    return sp;
}

inline double wrapped_distance(cplx a, cplx b) {
    double dr = std::abs(a.real() - b.real());
    dr = std::min(dr, two_pi - dr);
    return std::hypot(dr, a.imag() - b.imag());
}

} // namespace detail

/// All saddles (q_s, sheet) of E(q) - v q with |Im q_s| <= q_im_max, found by
/// damped Newton from a seeds_re x seeds_im grid (both sheets per seed).
/// Saddles at the same q on opposite sheets are distinct points and both reported.
/// Output order is canonical (Re q, Im q, Im s) and independent of seeding order.
inline std::vector<SaddlePoint> find_saddles(const LatticeParams& p, double v,
                                             const SaddleSearchConfig& cfg = {}) {
    std::vector<SaddlePoint> out;
    int branch_hits = 0;
    for (int i = 0; i < cfg.seeds_re; ++i) {
        const double re = two_pi * i / cfg.seeds_re;
        for (int j = 0; j < cfg.seeds_im; ++j) {
            const double im =
                cfg.seeds_im == 1 ? 0.0 : -cfg.q_im_max + 2.0 * cfg.q_im_max * j / (cfg.seeds_im - 1);
            for (double sign : {1.0, -1.0}) {
                cplx q0{re, im};
                detail::SheetPoint x{q0, sign * std::sqrt(radicand(p, q0))};
                auto status = detail::newton_saddle(p, v, x, cfg);
                if (status == detail::NewtonStatus::branch_point) {
                    // One retry from a perturbed seed.
                    q0 += cplx{1e-3 * (1 + i % 7), 1e-3 * (1 + j % 5)};
                    x = {q0, sign * std::sqrt(radicand(p, q0))};
                    status = detail::newton_saddle(p, v, x, cfg);
                    if (status == detail::NewtonStatus::branch_point) ++branch_hits;
                }
                if (status != detail::NewtonStatus::converged) continue;
                if (std::abs(x.q.imag()) > cfg.q_im_max + cfg.dedup_tol) continue;
                auto sp = detail::make_saddle(p, v, x, cfg);
                const bool dup = std::any_of(out.begin(), out.end(), [&](const SaddlePoint& o) {
                    return detail::wrapped_distance(o.q_s, sp.q_s) + std::abs(o.root - sp.root) <=
                           cfg.dedup_tol;
                });
                if (!dup) out.push_back(sp);
            }
        }
    }
    if (out.empty()) {
        if (branch_hits > 0)
            throw BranchCut("find_saddles: Newton iterates repeatedly hit the square-root branch point");
        throw NoConvergence("find_saddles: no seed converged to a saddle");
    }
    auto key = [](const SaddlePoint& s) {
        // Quantize so that roots equal within the dedup tolerance sort identically.
        auto qz = [](double x) { return std::round(x * 1e9) / 1e9; };
        return std::array<double, 3>{qz(s.q_s.real()), qz(s.q_s.imag()), qz(s.root.imag())};
    };
    std::sort(out.begin(), out.end(),
              [&](const SaddlePoint& a, const SaddlePoint& b) { return key(a) < key(b); });
    return out;
}

namespace detail {

// Starting point for continuation: a real saddle on the real q axis.
struct ContinuationStart {
    SheetPoint x;
    double v;
};

inline ContinuationStart continuation_start(const LatticeParams& p, double v) {
    const double eps = distance_above_threshold(p);
    if (eps > 0.0) return {{cplx{std::numbers::pi, 0.0}, cplx{0.0, eps}}, group_velocity(p)};

    // Unbroken phase: E_+ is real on the real axis. Use a real root of
    // dE/dq = v if one exists, otherwise the grid point whose slope is closest.
    auto slope = [&](double q) {
        const double s = std::sqrt(std::max(radicand(p, q), 0.0));
        return 2.0 * p.rho() * std::sin(q + p.phi()) - p.kappa() * p.sigma() * std::sin(q) / s;
    };
    constexpr int n = 2048;
    double best_q = 0.0, best_gap = INFINITY;
    double prev_q = 0.0, prev_f = 0.0;
    for (int i = 0; i < n; ++i) {
        const double q = two_pi * (i + 0.5) / n;
        const double f = slope(q) - v;
        if (std::isfinite(f) && std::abs(f) < best_gap) {
            best_gap = std::abs(f);
            best_q = q;
        }
        if (i > 0 && std::isfinite(f) && std::isfinite(prev_f) && f * prev_f <= 0.0) {
            double lo = prev_q, hi = q, flo = prev_f;
            for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
                const double mid = 0.5 * (lo + hi);
                const double fm = slope(mid) - v;
                if (fm * flo <= 0.0) hi = mid;
                else { lo = mid; flo = fm; }
            }
            const double qr = 0.5 * (lo + hi);
            return {{cplx{qr, 0.0}, cplx{std::sqrt(radicand(p, qr)), 0.0}}, v};
        }
        prev_q = q;
        prev_f = f;
    }
    return {{cplx{best_q, 0.0}, cplx{std::sqrt(radicand(p, best_q)), 0.0}}, slope(best_q)};
}

} // namespace detail

/// The saddle governing the pulse response along the ray n = v t: the saddle
/// of the maximum-growth ray, continued in v to the requested velocity.
inline SaddlePoint dominant_saddle(const LatticeParams& p, double v, const SaddleSearchConfig& cfg = {}) {
    auto start = detail::continuation_start(p, v);
    detail::SheetPoint x = start.x;
    double vc = start.v;
    // Polish the start (it is exact above threshold, bisected below).
    if (auto st = detail::newton_saddle(p, vc, x, cfg); st != detail::NewtonStatus::converged)
        throw NoConvergence("dominant_saddle: could not polish the continuation start");

    double step = cfg.continuation_step;
    while (vc != v) {
        const double remaining = v - vc;
        double dv = std::copysign(std::min(step, std::abs(remaining)), remaining);
        for (;;) {
            detail::SheetPoint trial = x;
            const auto st = detail::newton_saddle(p, vc + dv, trial, cfg);
            const double jump = std::abs(trial.q - x.q) + std::abs(trial.s - x.s);
            if (st == detail::NewtonStatus::converged && jump < 0.25) {
                x = trial;
                vc = std::abs(dv) >= std::abs(remaining) ? v : vc + dv;
                step = std::min(cfg.continuation_step, 2.0 * std::abs(dv));
                break;
            }
            dv *= 0.5;
            if (std::abs(dv) < 1e-10)
                throw NoConvergence("dominant_saddle: continuation stalled at v = " + std::to_string(vc));
        }
    }
    return detail::make_saddle(p, v, x, cfg);
}

/// Asymptotic growth rate of the pulse response along n = v t.
inline double growth_rate(const LatticeParams& p, double v, const SaddleSearchConfig& cfg = {}) {
    return dominant_saddle(p, v, cfg).growth_rate;
}

enum class AsymptoticCase { generic, cubic, quartic };

inline const char* to_string(AsymptoticCase c) {
    switch (c) {
    case AsymptoticCase::generic: return "generic";
    case AsymptoticCase::cubic: return "cubic";
    case AsymptoticCase::quartic: return "quartic";
    }
    return "?";
}

struct AsymptoticSaddle {
    std::vector<cplx> alpha_roots; // q_s = pi + alpha
    AsymptoticCase kind = AsymptoticCase::generic;
    double growth_rate_v0 = 0.0;
    cplx dominant_alpha{};
    cplx dominant_root{};          // sheet value sqrt(kappa sigma alpha^2 - eps^2)
    bool outside_small_epsilon = false; // eps^2 > 0.1 kappa sigma
};

/// Small-eps expansion of the v = 0 saddles about q = pi:
///   generic  (|v_g| != sqrt(kappa sigma)):        alpha^2 = eps^2 v_g^2 / (kappa sigma (v_g^2 - kappa sigma))
///   cubic    (|v_g| == sqrt(kappa sigma), cos phi != 0): alpha^3 = -sin phi eps^2 / (2 kappa sigma cos phi)
///   quartic  (|v_g| == sqrt(kappa sigma), cos phi == 0): alpha^4 = -eps^2 / (kappa sigma)
/// with E_+ ~ -2 rho cos phi - 2 rho sin phi alpha + sqrt(kappa sigma alpha^2 - eps^2).
/// The sign of the square root at each root is the one closest to the
/// leading-order saddle condition sqrt(...) = kappa sigma alpha / (2 rho sin phi).
inline AsymptoticSaddle asymptotic_saddle(const LatticeParams& p) {
    const double g_th = threshold_and_gap(p).g_th;
    if (p.g() <= g_th) throw OutOfRegime("asymptotic_saddle: requires g > g_th");
    const double ks = p.kappa() * p.sigma();
    if (ks <= 0.0) throw OutOfRegime("asymptotic_saddle: requires kappa * sigma > 0");

    const double eps2 = p.g() * p.g() - g_th * g_th;
    const double vg = group_velocity(p);
    const double vg2 = vg * vg;
    const double sphi = std::sin(p.phi()), cphi = std::cos(p.phi());

    AsymptoticSaddle out;
    out.outside_small_epsilon = eps2 > 0.1 * ks;

    auto nth_roots = [](cplx c, int n) {
        std::vector<cplx> r;
        const double mag = std::pow(std::abs(c), 1.0 / n);
        const double arg = std::arg(c);
        for (int k = 0; k < n; ++k) r.push_back(std::polar(mag, (arg + two_pi * k) / n));
        return r;
    };

    if (std::abs(vg2 - ks) > 1e-12 * ks) {
        out.kind = AsymptoticCase::generic;
        out.alpha_roots = nth_roots(cplx{eps2 * vg2 / (ks * (vg2 - ks)), 0.0}, 2);
    } else if (std::abs(cphi) > 1e-12) {
        out.kind = AsymptoticCase::cubic;
        out.alpha_roots = nth_roots(cplx{-sphi * eps2 / (2.0 * ks * cphi), 0.0}, 3);
    } else {
        out.kind = AsymptoticCase::quartic;
        out.alpha_roots = nth_roots(cplx{-eps2 / ks, 0.0}, 4);
    }

    const double base = -2.0 * p.rho() * cphi;
    double best = -INFINITY;
    for (const cplx alpha : out.alpha_roots) {
        cplx s = std::sqrt(ks * alpha * alpha - eps2);
        if (vg != 0.0) {
            const cplx target = ks * alpha / (2.0 * p.rho() * sphi);
            if (std::abs(-s - target) < std::abs(s - target)) s = -s;
        } else if (s.imag() < 0.0) {
            s = -s; // alpha = 0: the growing branch
        }
        const cplx e = base - 2.0 * p.rho() * sphi * alpha + s;
        if (e.imag() > best) {
            best = e.imag();
            out.dominant_alpha = alpha;
            out.dominant_root = s;
        }
    }
    out.growth_rate_v0 = best;
    return out;
}

enum class Regime { unbroken, convective, absolute };
enum class ClassifyMethod { numeric, asymptotic };

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::unbroken: return "unbroken";
    case Regime::convective: return "convective";
    case Regime::absolute: return "absolute";
    }
    return "?";
}

inline const char* to_string(ClassifyMethod m) { return m == ClassifyMethod::numeric ? "numeric" : "asymptotic"; }

struct ClassificationReport {
    double g_th = 0.0;
    double epsilon = 0.0;
    double v_g = 0.0;
    double critical_speed = 0.0; // sqrt(sigma kappa)
    Regime regime = Regime::unbroken;
    std::optional<SaddlePoint> saddle_v0;
    ClassifyMethod method = ClassifyMethod::numeric;
    bool validated = true;
    std::string note;
};

/// Unbroken for g <= g_th. Otherwise convective iff the v = 0 growth rate is
/// <= 0 (numeric) or iff |v_g| > sqrt(sigma kappa) (asymptotic). A numeric
/// verdict that disagrees with the small-eps criterion where that criterion
/// applies is reported with validated = false.
inline ClassificationReport classify(const LatticeParams& p, ClassifyMethod method,
                                     const SaddleSearchConfig& cfg = {}) {
    ClassificationReport r;
    r.method = method;
    r.g_th = threshold_and_gap(p).g_th;
    r.epsilon = distance_above_threshold(p);
    r.v_g = group_velocity(p);
    r.critical_speed = std::sqrt(p.sigma() * p.kappa());
    if (p.g() <= r.g_th) {
        r.regime = Regime::unbroken;
        return r;
    }
    const bool fast_drift = std::abs(r.v_g) > r.critical_speed;
    const double ks = p.kappa() * p.sigma();
    const bool small_eps = ks > 0.0 && r.epsilon * r.epsilon <= 0.1 * ks;

    if (method == ClassifyMethod::numeric) {
        r.saddle_v0 = dominant_saddle(p, 0.0, cfg);
        r.regime = r.saddle_v0->growth_rate <= cfg.growth_tol ? Regime::convective : Regime::absolute;
        if (small_eps) {
            const Regime asym = fast_drift ? Regime::convective : Regime::absolute;
            if (asym != r.regime) {
                r.validated = false;
                r.note = "numeric verdict differs from the small-epsilon drift criterion";
            }
        } else {
            r.note = "small-epsilon cross-check not applicable";
        }
        return r;
    }

    const auto a = asymptotic_saddle(p);
    r.regime = fast_drift ? Regime::convective : Regime::absolute;
    SaddlePoint sp;
    sp.q_s = cplx{std::numbers::pi, 0.0} + a.dominant_alpha;
    sp.q_s = {canonical_angle(sp.q_s.real()), sp.q_s.imag()};
    sp.root = a.dominant_root;
    sp.energy = -2.0 * p.rho() * std::cos(p.phi()) -
                2.0 * p.rho() * std::sin(p.phi()) * a.dominant_alpha + a.dominant_root;
    sp.growth_rate = a.growth_rate_v0;
    sp.velocity = 0.0;
    r.saddle_v0 = sp;
    if (a.outside_small_epsilon) r.note = "eps^2 > 0.1 kappa sigma: expansion outside its validity range";
    return r;
}

} // namespace ptlattice
