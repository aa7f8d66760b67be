#pragma once

#include "treesim/oracle.hpp"
#include "treesim/stats.hpp"

namespace treesim {

// Checks the coagulation-fragmentation product identity over every grouped
// composition of every n <= n_max and every admissible count of rightmost
// groups. Exact rationals up to n = 6, long double above; n_max capped at 8.
TestReport duality_check(const Rational& alpha, const Rational& theta, int n_max);

}  // namespace treesim
