#pragma once

#include <string>

#include "fhinf/sdp.hpp"

namespace fhinf {

// Sparse SDPA text (".dat-s"): three header lines (scalar count, block count,
// block dimensions), then 5-column entries "k block i j value" with k = 0 for
// the constant matrix and upper-triangle entries only.  Block senses and
// labels are recorded in leading comment lines so that a round trip restores
// the problem exactly; negdef blocks are negated on export to fit the
// format's "positive semidefinite slack" convention.  Files without sense
// comments import with every block read as possemidef.
std::string export_sdpa(const SdpFeasibilityProblem& problem);
SdpFeasibilityProblem import_sdpa(const std::string& text);

}  // namespace fhinf
