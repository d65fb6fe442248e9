#pragma once

// Umbrella header. Users should generally include only this file.
//
// closefields is a header-only library for exact arithmetic at finite
// pi-adic precision: truncated local fields and their close-field
// isomorphisms, ramified (O-typical) Witt vectors, Lubin-Tate formal groups
// and torsion towers, and congruence-level Hecke algebras for split GL_r,
// culminating in machine verification of the Hecke-algebra isomorphism over
// close fields and its family version over N u {infinity}.

#include "closefields/common.hpp"
#include "closefields/comparison.hpp"
#include "closefields/family.hpp"
#include "closefields/fast_quotient.hpp"
#include "closefields/fq.hpp"
#include "closefields/hecke.hpp"
#include "closefields/local_field.hpp"
#include "closefields/lubin_tate.hpp"
#include "closefields/matrix.hpp"
#include "closefields/mpoly.hpp"
#include "closefields/series.hpp"
#include "closefields/witt.hpp"
