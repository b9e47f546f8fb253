#include <catch_amalgamated.hpp>

#include "ptlattice/finite_spectrum.hpp"

using namespace ptlattice;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double pi = std::numbers::pi;

LatticeParams fig7(double rho) { return {1, 1, rho, pi / 2, 0.5}; }

// Largest distance from a point of `a` to its nearest point in `b`.
double directed_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double worst = 0;
    for (cplx x : a) {
        double best = INFINITY;
        for (cplx y : b) best = std::min(best, std::abs(x - y));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

TEST_CASE("gain profiles", "[finite-spectrum]") {
    const auto sq = GainProfile::square(10, 0.5, 4);
    REQUIRE(sq.values.size() == 11);
    CHECK(sq.N() == 10);
    for (int n = -5; n <= 5; ++n) CHECK(sq.values[n + 5] == (std::abs(n) <= 2 ? 0.5 : 0.0));

    const auto sm = GainProfile::smooth(40, 0.5, 10, 4.0);
    for (int n = -20; n <= 20; ++n) {
        const double v = sm.values[n + 20];
        CHECK(v >= 0.0);
        CHECK(v <= 0.5);
        CHECK(v == sm.values[20 - n]);
        if (std::abs(n) <= 5) CHECK(v == 0.5);
        if (std::abs(n) >= 9) CHECK(v == 0.0);
        if (n > 0) CHECK(v <= sm.values[n + 19]);
    }
    CHECK(sm.values[27] > 0.0);

    CHECK_THROWS_AS(GainProfile::square(5, 0.5, 2), BadSize);
    CHECK_THROWS_AS(GainProfile::square(-2, 0.5, 2), BadSize);
    CHECK_THROWS_AS(GainProfile::custom({0.1, 0.2}), BadSize);
    CHECK_THROWS_AS(GainProfile::custom({0.1, NAN, 0.2}), ValidationError);
    CHECK_THROWS_AS(GainProfile::smooth(10, 0.5, 2, 0.0), ValidationError);
}

TEST_CASE("Hamiltonian assembly", "[finite-spectrum]") {
    const LatticeParams p(1.0, 0.7, 0.4, 0.9, 0.3);
    const auto h0 = build_hamiltonian(p, 20, GainProfile::uniform(20, 0.0));
    CHECK((h0 - h0.adjoint()).cwiseAbs().maxCoeff() <= 1e-15);

    const auto h = build_hamiltonian(p, 4, GainProfile::square(4, 0.3, 2));
    REQUIRE(h.rows() == 10);
    // a_0 is index 4, b_0 index 5, a_1 index 6
    CHECK(h(4, 4) == cplx(0, 0.3));
    CHECK(h(5, 5) == cplx(0, -0.3));
    CHECK(h(0, 0) == cplx(0));
    CHECK(h(4, 5) == cplx(-1.0));
    CHECK(h(6, 5) == cplx(-0.7));
    CHECK(std::abs(h(4, 6) + 0.4 * std::exp(I * 0.9)) < 1e-15);
    CHECK(std::abs(h(5, 7) + 0.4 * std::exp(I * 0.9)) < 1e-15);
    CHECK(std::abs(h(6, 4) + 0.4 * std::exp(-I * 0.9)) < 1e-15);
    CHECK(h(0, 9) == cplx(0));

    CHECK_THROWS_AS(build_hamiltonian(p, 4, GainProfile::uniform(6, 0.1)), DimensionMismatch);
    CHECK_THROWS_AS(build_hamiltonian(p, 3, GainProfile::custom({0, 0, 0, 0, 0})), BadSize);
}

TEST_CASE("single dimer", "[finite-spectrum]") {
    const LatticeParams p(1.0, 0.5, 0.7, 0.3, 0.0);
    for (double g : {0.0, 0.6, 1.5}) {
        const auto s = spectrum(build_hamiltonian(p, 0, GainProfile::uniform(0, g)));
        REQUIRE(s.eigenvalues.size() == 2);
        const cplx r = std::sqrt(cplx(1.0 - g * g));
        CHECK(directed_distance(s.eigenvalues, {r, -r}) <= 1e-14);
        CHECK(directed_distance({r, -r}, s.eigenvalues) <= 1e-14);
    }
}

TEST_CASE("periodic lattice reproduces the Bloch bands", "[finite-spectrum][oracle]") {
    for (const auto& p : {LatticeParams(1.0, 0.8, 0.6, pi / 2, 0.1), LatticeParams(1.2, 0.7, 0.35, 2.1, 0.9)}) {
        const int N = 40, m = N + 1;
        const auto s = spectrum(build_hamiltonian(p, N, GainProfile::uniform(N, p.g()), Boundary::periodic));
        std::vector<cplx> bands;
        for (int k = 0; k < m; ++k) {
            const auto e = dispersion(p, two_pi * k / m);
            bands.push_back(e.plus);
            bands.push_back(e.minus);
        }
        CHECK(directed_distance(s.eigenvalues, bands) <= 1e-10);
        CHECK(directed_distance(bands, s.eigenvalues) <= 1e-10);
    }
}

TEST_CASE("spectrum metrics", "[finite-spectrum]") {
    CHECK(pairing_defect({{1, 2}, {1, -2}, {3, 0}}) == 0.0);
    CHECK_THAT(pairing_defect({{1, 2}, {1, -1.5}}), WithinAbs(0.5, 1e-15));

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
    d(0, 0) = {2, 1};
    d(1, 1) = -1.0;
    d(2, 2) = {2, -1};
    const auto s = spectrum(d);
    CHECK(s.eigenvalues == std::vector<cplx>{-1.0, {2, -1}, {2, 1}});
    CHECK_THAT(s.matrix_norm, WithinAbs(std::sqrt(5.0), 1e-14));
    CHECK_THAT(s.max_abs_imag, WithinAbs(1.0, 1e-15));
    CHECK(s.pairing_defect == 0.0);
    CHECK(spectrum(Eigen::MatrixXcd(0, 0)).eigenvalues.empty());
    CHECK_THROWS_AS(spectrum(Eigen::MatrixXcd::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("Hermitian limit has a real spectrum", "[finite-spectrum][property]") {
    const auto s = spectrum(build_hamiltonian(fig7(2.0), 100, GainProfile::uniform(100, 0.0)));
    CHECK(s.max_abs_imag <= 1e-10);
}

TEST_CASE("symmetric profiles give conjugate-closed spectra", "[finite-spectrum][property]") {
    for (double rho : {0.0, 0.7, 2.0}) {
        for (const auto& prof : {GainProfile::square(100, 0.5, 20), GainProfile::smooth(100, 0.5, 20, 5.0)}) {
            const auto s = spectrum(build_hamiltonian(fig7(rho), 100, prof));
            CHECK(s.max_residual <= spectrum_residual_bound * s.matrix_norm);
            CHECK(s.pairing_defect <= 1e-8 * s.matrix_norm);
        }
    }
}

TEST_CASE("fully non-Hermitian lattice approaches the bulk growth rate", "[finite-spectrum]") {
    const auto p = fig7(0.0);
    const auto s = spectrum(build_hamiltonian(p, 150, GainProfile::uniform(150, p.g())));
    const double bulk = std::sqrt(p.g() * p.g() - std::pow(threshold_and_gap(p).g_th, 2));
    CHECK_THAT(s.max_abs_imag, WithinRel(bulk, 0.1));
}

TEST_CASE("confined gain region is insensitive to lattice size", "[finite-spectrum][size-convergence]") {
    const auto p = fig7(2.0);
    const auto a = spectrum(build_hamiltonian(p, 300, GainProfile::square(300, p.g(), 20)));
    const auto b = spectrum(build_hamiltonian(p, 400, GainProfile::square(400, p.g(), 20)));
    INFO("max |Im E|: N=300 " << a.max_abs_imag << ", N=400 " << b.max_abs_imag);
    CHECK(std::abs(a.max_abs_imag - b.max_abs_imag) < 1e-7);
}
