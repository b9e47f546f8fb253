#pragma once

// CSV writers. Numbers use %.17g so repeated runs are byte-identical and
// values round-trip exactly.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ptlattice/errors.hpp"
#include "ptlattice/finite_spectrum.hpp"
#include "ptlattice/floquet.hpp"
#include "ptlattice/lattice.hpp"
#include "ptlattice/propagator.hpp"

namespace ptlattice::io {

inline std::string fmt(double x) {
    if (x == 0.0) x = 0.0; // no "-0" in output
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(int x) { return std::to_string(x); }
inline std::string fmt(long x) { return std::to_string(x); }
inline std::string fmt(std::size_t x) { return std::to_string(x); }

template <class... Ts>
void row(std::ostream& os, const Ts&... xs) {
    bool first = true;
    ((os << (first ? "" : ",") << fmt(xs), first = false), ...);
    os << '\n';
}

inline const char* snapshot_header = "t,n,re_a,im_a,re_b,im_b";
inline const char* ray_header = "t,intensity";
inline const char* band_header = "q,re_Eplus,im_Eplus,re_Eminus,im_Eminus";
inline const char* spectrum_header = "index,re_E,im_E";

/// Appends one field as rows of the snapshot stream (header written separately).
inline void write_snapshot_rows(std::ostream& os, const WavePacketField& f) {
    for (int n = f.n_min(); n <= f.n_max(); ++n)
        row(os, f.t(), n, f.a(n).real(), f.a(n).imag(), f.b(n).real(), f.b(n).imag());
}

inline void write_snapshots(std::ostream& os, std::span<const WavePacketField> fields) {
    os << snapshot_header << '\n';
    for (const auto& f : fields) write_snapshot_rows(os, f);
}

inline void write_ray(std::ostream& os, const RayTrace& tr) {
    os << ray_header << '\n';
    for (std::size_t i = 0; i < tr.times.size(); ++i) row(os, tr.times[i], tr.intensities[i]);
}

inline void write_bands(std::ostream& os, const std::vector<double>& q, const std::vector<cplx>& plus,
                        const std::vector<cplx>& minus) {
    if (q.size() != plus.size() || q.size() != minus.size())
        throw DimensionMismatch("write_bands: column lengths differ");
    os << band_header << '\n';
    for (std::size_t i = 0; i < q.size(); ++i)
        row(os, q[i], plus[i].real(), plus[i].imag(), minus[i].real(), minus[i].imag());
}

inline void write_bands(std::ostream& os, const QuasiEnergyBand& b) { write_bands(os, b.q_grid, b.E_plus, b.E_minus); }

/// Eigenvalues are written in Re E order (ComplexSpectrum already stores them that way).
inline void write_spectrum(std::ostream& os, const ComplexSpectrum& s) {
    os << spectrum_header << '\n';
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) row(os, i, s.eigenvalues[i].real(), s.eigenvalues[i].imag());
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file " + path);
    return os;
}

} // namespace ptlattice::io
