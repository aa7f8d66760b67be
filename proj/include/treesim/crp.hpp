#pragma once

#include <vector>

#include "treesim/distributions.hpp"
#include "treesim/rng.hpp"

namespace treesim {

// Ordered (alpha, theta) Chinese restaurant: new tables open to the left of the
// first table or in any gap between tables with probability alpha/(k*alpha+theta)
// each, or to the right of all tables with probability theta/(k*alpha+theta).
struct CrpState {
  AlphaTheta params;  // theta > 0
  int n = 0;          // customers seated so far
  std::vector<int> tables_ltr;                    // occupancy, left to right
  std::vector<int> least_label_ltr;               // least customer label per table
  std::vector<std::vector<int>> customers_ltr;    // sorted labels per table

  // Least-label rank -> left-to-right position.
  std::vector<int> least_label_order() const;
};

CrpState crp_init(const AlphaTheta& params);

// Seat customer state.n + 1.
void crp_seat(CrpState& state, RngStream& rng);

// Left-to-right occupancies (a composition of n).
std::vector<int> composition(const CrpState& state);

// Occupancies / n in least-label order.
std::vector<double> limiting_frequencies(const CrpState& state);

// Classical (unordered) CRP occupancies in table-creation order; used as the
// reference law for block-size tests.
std::vector<int> classical_crp(const AlphaTheta& params, int n, RngStream& rng);

}  // namespace treesim
