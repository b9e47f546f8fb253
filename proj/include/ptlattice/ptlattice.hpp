#pragma once

#include "ptlattice/bessel.hpp"
#include "ptlattice/errors.hpp"
#include "ptlattice/finite_spectrum.hpp"
#include "ptlattice/floquet.hpp"
#include "ptlattice/instability.hpp"
#include "ptlattice/io.hpp"
#include "ptlattice/lattice.hpp"
#include "ptlattice/propagator.hpp"
