#pragma once

// Truncated lattice with a spatially confined gain/loss region: dense
// assembly and full complex diagonalization.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ptlattice/errors.hpp"
#include "ptlattice/lattice.hpp"
#include "ptlattice/propagator.hpp"

namespace ptlattice {

enum class ProfileKind { square, smooth, uniform, custom };

inline const char* to_string(ProfileKind k) {
    switch (k) {
    case ProfileKind::square: return "square";
    case ProfileKind::smooth: return "smooth";
    case ProfileKind::uniform: return "uniform";
    case ProfileKind::custom: return "custom";
    }
    return "?";
}

/// Gain rates g_n for n = -N/2 .. N/2 (index 0 is n = -N/2).
struct GainProfile {
    std::vector<double> values;
    ProfileKind kind = ProfileKind::custom;

    int N() const { return static_cast<int>(values.size()) - 1; }

    static void check_size(int N) {
        if (N < 0 || N % 2 != 0) throw BadSize("gain profile: N must be even and >= 0, got " + std::to_string(N));
    }

    /// g_n = g for |n| <= N_g/2, 0 otherwise.
    static GainProfile square(int N, double g, int N_g) {
        check_size(N);
        if (N_g < 0) throw ValidationError("gain profile: N_g must be >= 0");
        GainProfile p{std::vector<double>(N + 1, 0.0), ProfileKind::square};
        for (int n = -N / 2; n <= N / 2; ++n)
            if (2 * std::abs(n) <= N_g) p.values[n + N / 2] = g;
        return p;
    }

    /// Flat top |n| <= N_g/2 followed by a raised-cosine ramp of `ramp` cells on each side.
    static GainProfile smooth(int N, double g, int N_g, double ramp) {
        check_size(N);
        if (N_g < 0) throw ValidationError("gain profile: N_g must be >= 0");
        if (!(ramp > 0.0)) throw ValidationError("gain profile: ramp width must be > 0");
        GainProfile p{std::vector<double>(N + 1, 0.0), ProfileKind::smooth};
        for (int n = -N / 2; n <= N / 2; ++n) {
            const double x = std::abs(n) - 0.5 * N_g;
            double v = 0.0;
            if (x <= 0.0) v = g;
            else if (x < ramp) v = 0.5 * g * (1.0 + std::cos(std::numbers::pi * x / ramp));
            p.values[n + N / 2] = v;
        }
        return p;
    }

    static GainProfile uniform(int N, double g) {
        check_size(N);
        return {std::vector<double>(N + 1, g), ProfileKind::uniform};
    }

    static GainProfile custom(std::vector<double> values) {
        if (values.empty() || values.size() % 2 == 0)
            throw BadSize("gain profile: need an odd number of cells (N even)");
        for (double v : values)
            if (!std::isfinite(v)) throw ValidationError("gain profile: non-finite entry");
        return {std::move(values), ProfileKind::custom};
    }
};

/// Dense 2(N+1) x 2(N+1) Hamiltonian in the basis (a_{-N/2}, b_{-N/2}, a_{-N/2+1}, ...).
/// The profile carries g_n; params.g() is not used. Periodic closure is a test
/// harness for comparing against the Bloch dispersion.
inline Eigen::MatrixXcd build_hamiltonian(const LatticeParams& p, int N, const GainProfile& profile,
                                          Boundary bc = Boundary::open) {
    if (N < 0 || N % 2 != 0) throw BadSize("build_hamiltonian: N must be even and >= 0, got " + std::to_string(N));
    if (static_cast<int>(profile.values.size()) != N + 1)
        throw DimensionMismatch("build_hamiltonian: profile has " + std::to_string(profile.values.size()) +
                                " cells, expected " + std::to_string(N + 1));
    const int m = N + 1;
    const cplx nnn = p.rho() * std::exp(I * p.phi());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    auto a = [](int j) { return 2 * j; };
    auto b = [](int j) { return 2 * j + 1; };
    for (int j = 0; j < m; ++j) {
        const double g = profile.values[j];
        if (!std::isfinite(g)) throw ValidationError("build_hamiltonian: non-finite gain");
        h(a(j), a(j)) += I * g;
        h(b(j), b(j)) -= I * g;
        h(a(j), b(j)) += -p.kappa();
        h(b(j), a(j)) += -p.kappa();
        const bool has_next = j + 1 < m || (bc == Boundary::periodic && m > 1);
        if (!has_next) continue;
        const int k = (j + 1) % m;
        // sigma links b_j with a_{j+1}
        h(a(k), b(j)) += -p.sigma();
        h(b(j), a(k)) += -p.sigma();
        // i da_j/dt contains -rho e^{i phi} a_{j+1}, i.e. H(a_j, a_{j+1})
        h(a(j), a(k)) += -nnn;
        h(a(k), a(j)) += -std::conj(nnn);
        h(b(j), b(k)) += -nnn;
        h(b(k), b(j)) += -std::conj(nnn);
    }
    return h;
}

struct ComplexSpectrum {
    std::vector<cplx> eigenvalues; // sorted by Re E, then Im E
    double max_residual = 0.0;     // max_k |H v_k - E_k v_k| / |v_k|
    double max_abs_imag = 0.0;
    double pairing_defect = 0.0;   // Hausdorff distance between the spectrum and its conjugate
    double matrix_norm = 0.0;      // spectral norm |H|_2
};

inline constexpr double spectrum_residual_bound = 1e-8;

/// Set distance between the spectrum and its complex conjugate (symmetric by construction).
inline double pairing_defect(const std::vector<cplx>& ev) {
    double worst = 0.0;
    for (const cplx& l : ev) {
        double best = std::numeric_limits<double>::infinity();
        for (const cplx& m : ev) best = std::min(best, std::abs(l - std::conj(m)));
        worst = std::max(worst, best);
    }
    return worst;
}

/// All eigenvalues of a dense complex matrix, each residual-checked against
/// 1e-8 |H|_2. Throws NoConvergence if the iteration fails or a residual is out of bounds.
inline ComplexSpectrum spectrum(const Eigen::MatrixXcd& h) {
    if (h.rows() != h.cols()) throw DimensionMismatch("spectrum: matrix must be square");
    ComplexSpectrum out;
    if (h.rows() == 0) return out;
    if (!h.allFinite()) throw ValidationError("spectrum: matrix has non-finite entries");

    // |H|_2 from the largest eigenvalue of H^* H
    const Eigen::MatrixXcd gram = h.adjoint() * h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gs(gram, Eigen::EigenvaluesOnly);
    out.matrix_norm = std::sqrt(std::max(gs.eigenvalues().maxCoeff(), 0.0));

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, true);
    if (es.info() != Eigen::Success) throw NoConvergence("spectrum: eigenvalue iteration did not converge");
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    for (Eigen::Index k = 0; k < vals.size(); ++k) {
        const Eigen::VectorXcd v = vecs.col(k);
        const double r = (h * v - vals(k) * v).norm() / v.norm();
        out.max_residual = std::max(out.max_residual, r);
        out.eigenvalues.push_back(vals(k));
        out.max_abs_imag = std::max(out.max_abs_imag, std::abs(vals(k).imag()));
    }
    const double bound = spectrum_residual_bound * std::max(out.matrix_norm, std::numeric_limits<double>::min());
    if (!(out.max_residual <= bound))
        throw NoConvergence("spectrum: eigen-residual " + std::to_string(out.max_residual) + " exceeds " +
                            std::to_string(bound));
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    out.pairing_defect = pairing_defect(out.eigenvalues);
    return out;
}

} // namespace ptlattice
