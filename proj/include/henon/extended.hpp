#pragma once

#include "henon/core.hpp"

namespace henon {

// Direct escape-rate oracle in ~40 significant digits with a widened exponent range:
// d^{-n} log|pi_2 f^n(z)| (plus) or d^{-n} log|pi_1 f^{-n}(z)| (minus). The minus variant adds
// the closed-form remainder of the log|1/a| terms, which does not decay with |f^{-n}|.
double green_direct_extended(const HenonSystem& sys, const PlanePoint& z, int n, bool plus);

// f^n(z) evaluated in extended precision and rounded back.
PlanePoint iterate_extended(const HenonSystem& sys, const PlanePoint& z, int n);

}  // namespace henon
