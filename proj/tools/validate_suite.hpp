#pragma once

#include <ostream>

namespace holopos::cli {

// Runs the invariant suite (derivative checks against finite differences,
// closed-form vs quadrature equalities, bound orderings, bracket and asymptote
// checks, estimator sanity) and prints one PASS/FAIL line per property with
// its measured margin.  Returns the number of failed checks.
int run_validate_suite(std::ostream& out);

}  // namespace holopos::cli
