#include <catch_amalgamated.hpp>

#include <random>

#include "ptlattice/instability.hpp"
#include "ptlattice/propagator.hpp"

using namespace ptlattice;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double pi = std::numbers::pi;

LatticeParams fig4(double rho, double g = 0.05) { return {1, 1, rho, pi / 2, g}; }

// Derivative of the plus band by central differences on the real axis.
double real_slope(const LatticeParams& p, double q) {
    const double h = 1e-6;
    return (energy(p, q + h, Branch::plus).real() - energy(p, q - h, Branch::plus).real()) / (2 * h);
}

bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

TEST_CASE("saddles of the absolute case", "[instability]") {
    const auto p = fig4(0.3);
    const auto saddles = find_saddles(p, 0.0);
    // alpha = +-i eps |v_g| / sqrt(kappa sigma (kappa sigma - v_g^2))
    const double alpha = 0.05 * 0.6 / std::sqrt(1.0 - 0.36);
    bool up = false, down = false;
    for (const auto& s : saddles) {
        if (near(s.q_s, {pi, alpha}, 1e-3)) {
            up = true;
            CHECK_THAT(s.growth_rate, WithinAbs(0.04, 1e-3));
        }
        if (near(s.q_s, {pi, -alpha}, 1e-3)) {
            down = true;
            CHECK_THAT(s.growth_rate, WithinAbs(-0.04, 1e-3));
        }
    }
    CHECK(up);
    CHECK(down);
}

TEST_CASE("saddle on the maximum-growth ray", "[instability]") {
    const auto p = fig4(0.7);
    const auto s = dominant_saddle(p, -1.4);
    CHECK(near(s.q_s, {pi, 0.0}, 1e-9));
    CHECK_THAT(s.growth_rate, WithinAbs(0.05, 1e-12));
    CHECK_THAT(growth_rate(p, -1.4), WithinAbs(0.05, 1e-12));

    const LatticeParams still(1, 1, 0, 0, 0.05);
    const auto z = dominant_saddle(still, 0.0);
    CHECK(near(z.q_s, {pi, 0.0}, 1e-9));
    CHECK_THAT(z.growth_rate, WithinAbs(0.05, 1e-12));
}

TEST_CASE("growth rates", "[instability]") {
    CHECK_THAT(growth_rate(fig4(0.3), 0.0), WithinAbs(0.05 * std::sqrt(1 - 0.36), 1e-4));
    CHECK(growth_rate(LatticeParams(1, 0.8, 0, 0, 0.1), 0.0) <= 0.0);
    CHECK(growth_rate(fig4(0.7), 0.0) <= 1e-9);
}

TEST_CASE("every saddle satisfies the saddle equation", "[instability][property]") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> hop(0.5, 1.5), rho(0.05, 1.0), ang(0, two_pi), gain(0.01, 0.3), vel(-2, 2);
    for (int trial = 0; trial < 25; ++trial) {
        const LatticeParams p(hop(rng), hop(rng), rho(rng), ang(rng), 0.0);
        const auto q = p.with_g(threshold_and_gap(p).g_th + gain(rng));
        const double v = vel(rng);
        for (const auto& s : find_saddles(q, v)) {
            const cplx slope = 2.0 * q.rho() * std::sin(s.q_s + q.phi()) - q.kappa() * q.sigma() * std::sin(s.q_s) / s.root;
            CHECK(std::abs(slope - v) <= 1e-9);
            CHECK(std::abs(s.root * s.root - radicand(q, s.q_s)) <= 1e-9);
            CHECK(s.order >= 2);
            CHECK(s.q_s.real() >= 0.0);
            CHECK(s.q_s.real() < two_pi);
            CHECK(std::abs(s.q_s.imag()) <= 2.0 + 1e-12);
        }
    }
}

TEST_CASE("saddle list is deterministic and deduplicated", "[instability]") {
    const auto a = find_saddles(fig4(0.3), 0.0);
    const auto b = find_saddles(fig4(0.3), 0.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].q_s == b[i].q_s);
        for (std::size_t j = i + 1; j < a.size(); ++j)
            CHECK(std::abs(a[i].q_s - a[j].q_s) + std::abs(a[i].root - a[j].root) > 1e-7);
    }
}

TEST_CASE("asymptotic saddles", "[instability]") {
    // generic, real alpha
    auto a = asymptotic_saddle(fig4(0.7));
    CHECK(a.kind == AsymptoticCase::generic);
    const double alpha = std::sqrt(0.0025 * 1.96 / 0.96);
    REQUIRE(a.alpha_roots.size() == 2);
    CHECK_THAT(std::abs(a.alpha_roots[0].real()), WithinAbs(alpha, 1e-12));
    CHECK_THAT(a.alpha_roots[0].real(), WithinAbs(-a.alpha_roots[1].real(), 1e-12));
    CHECK(a.growth_rate_v0 <= 0.0);

    // generic, imaginary alpha
    a = asymptotic_saddle(fig4(0.3));
    CHECK(a.kind == AsymptoticCase::generic);
    CHECK_THAT(std::abs(a.alpha_roots[0].imag()), WithinAbs(0.0375, 1e-12));
    CHECK_THAT(a.growth_rate_v0, WithinAbs(0.04, 1e-12));

    // quartic at |v_g| = sqrt(kappa sigma), phi = pi/2
    a = asymptotic_saddle(fig4(0.5));
    CHECK(a.kind == AsymptoticCase::quartic);
    REQUIRE(a.alpha_roots.size() == 4);
    for (cplx r : a.alpha_roots) CHECK(std::abs(std::pow(r, 4) - cplx(-0.0025, 0)) < 1e-14);
    CHECK(a.growth_rate_v0 > 0.0);

    // cubic at |v_g| = sqrt(kappa sigma), cos phi != 0
    const double phi = 1.2, rho = 0.5 / std::sin(phi);
    a = asymptotic_saddle(LatticeParams(1, 1, rho, phi, 0.05));
    CHECK(a.kind == AsymptoticCase::cubic);
    for (cplx r : a.alpha_roots)
        CHECK(std::abs(std::pow(r, 3) - cplx(-std::sin(phi) * 0.0025 / (2 * std::cos(phi)), 0)) < 1e-14);

    CHECK_THROWS_AS(asymptotic_saddle(LatticeParams(1, 0.8, 0.3, 1, 0.1)), OutOfRegime);
    CHECK(asymptotic_saddle(fig4(0.3, 0.5)).outside_small_epsilon);
}

TEST_CASE("numeric saddle converges to the expansion at second order", "[instability][oracle]") {
    // phi = pi/2 makes the leading correction vanish, so use a generic phase.
    const double phi = 1.2, vg = -2 * 0.3 * std::sin(phi);
    std::vector<double> errors;
    for (double eps : {0.04, 0.02, 0.01}) {
        const LatticeParams p(1, 1, 0.3, phi, eps);
        const cplx alpha = cplx(0, eps * std::abs(vg) / std::sqrt(1 - vg * vg));
        const auto s = dominant_saddle(p, 0.0);
        errors.push_back(std::min(std::abs(s.q_s - (pi + alpha)), std::abs(s.q_s - (pi - alpha))));
    }
    CHECK_THAT(errors[0] / errors[1], WithinAbs(4.0, 2.0));
    CHECK_THAT(errors[1] / errors[2], WithinAbs(4.0, 2.0));
}

TEST_CASE("maximum growth over rays sits at the drift velocity", "[instability][property]") {
    for (double rho : {0.3, 0.7}) {
        const auto p = fig4(rho);
        double best = -INFINITY, best_v = 0;
        for (int i = 0; i <= 600; ++i) {
            const double v = -3 + 0.01 * i;
            const double r = growth_rate(p, v);
            if (r > best) {
                best = r;
                best_v = v;
            }
        }
        double max_im = 0;
        for (int i = 0; i <= 20000; ++i) max_im = std::max(max_im, energy(p, two_pi * i / 20000, Branch::plus).imag());
        CHECK_THAT(best_v, WithinAbs(group_velocity(p), 0.01 + 1e-12));
        CHECK_THAT(best, WithinAbs(max_im, 1e-6));
    }
}

TEST_CASE("fixed-site growth decreases with advection", "[instability][property]") {
    double prev = INFINITY;
    for (int i = 0; i <= 80; ++i) {
        const double r = growth_rate(fig4(0.1 + 0.01 * i), 0.0);
        CHECK(r <= prev + 1e-12);
        prev = r;
    }
}

TEST_CASE("classification", "[instability]") {
    auto r = classify(fig4(0.7), ClassifyMethod::numeric);
    CHECK(r.regime == Regime::convective);
    CHECK(r.validated);
    CHECK_THAT(r.v_g, WithinAbs(-1.4, 1e-15));
    CHECK(r.critical_speed == 1.0);
    CHECK_THAT(r.epsilon, WithinAbs(0.05, 1e-15));
    REQUIRE(r.saddle_v0);
    CHECK(r.saddle_v0->growth_rate <= 1e-9);

    r = classify(fig4(0.3), ClassifyMethod::numeric);
    CHECK(r.regime == Regime::absolute);
    CHECK(r.validated);

    r = classify(LatticeParams(1, 0.8, 0.6, pi / 2, 0.1), ClassifyMethod::numeric);
    CHECK(r.regime == Regime::unbroken);
    CHECK(!r.saddle_v0);

    CHECK(classify(fig4(0.7), ClassifyMethod::asymptotic).regime == Regime::convective);
    CHECK(classify(fig4(0.3), ClassifyMethod::asymptotic).regime == Regime::absolute);
}

TEST_CASE("numeric and small-eps criteria agree away from the boundary", "[instability][property]") {
    for (int i = 0; i <= 16; ++i) {
        const double rho = 0.1 + 0.05 * i;
        if (std::abs(rho - 0.5) <= 0.05 + 1e-9) continue;
        const auto p = fig4(rho, 0.02);
        INFO("rho = " << rho);
        CHECK(classify(p, ClassifyMethod::numeric).regime == classify(p, ClassifyMethod::asymptotic).regime);
    }
}

TEST_CASE("fixed-site growth matches direct propagation", "[instability][oracle]") {
    const auto p = fig4(0.3);
    std::vector<WavePacketField> frames;
    EvolveOptions opt;
    opt.snapshot_every = 50;
    opt.on_snapshot = [&](const WavePacketField& f) { frames.push_back(f); };
    evolve_static(p, gaussian_packet(400, 10, pi), 100, 0.01, opt);
    const double fit = fit_growth(sample_ray(frames, 0.0), 40.0);
    CHECK_THAT(fit, WithinRel(growth_rate(p, 0.0), 0.2));
}

TEST_CASE("real saddles on the real axis match the band slope", "[instability][oracle]") {
    // below threshold every v = slope(q) ray has a real saddle with zero growth
    const LatticeParams p(1, 0.8, 0.6, pi / 2, 0.1);
    const double v = real_slope(p, 1.0);
    const auto saddles = find_saddles(p, v);
    bool found = false;
    for (const auto& s : saddles)
        if (near(s.q_s, {1.0, 0.0}, 1e-6) && std::abs(s.energy - energy(p, 1.0, Branch::plus)) < 1e-8) {
            found = true;
            CHECK_THAT(s.growth_rate, WithinAbs(0.0, 1e-12));
        }
    CHECK(found);
}
