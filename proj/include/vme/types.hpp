#pragma once

#include <string>

namespace vme {

/// Which Hermitian component of W is being evaluated.
enum class Part { Real, Imaginary };

/// Multiplier attached to the constraint on phi_i or on phi_j.
enum class Side { I, J };

/// Bra-side (a) or ket-side (b) constraint.
enum class Nu { A, B };

std::string to_string(Part p);
Part parse_part(const std::string& s);

}  // namespace vme
