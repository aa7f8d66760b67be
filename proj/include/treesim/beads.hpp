#pragma once

#include "treesim/distributions.hpp"
#include "treesim/rng.hpp"

namespace treesim {

// A string of beads, represented only by its scaled mass/length totals and its
// law; atoms are materialized lazily through split records.
struct StringDescriptor {
  AlphaTheta kind;
  double mass = 1.0;
  double length = 1.0;
};

// Outcome of selecting one atom on an (alpha, theta)-string.
struct StringSplit {
  double mass_frac_left = 0.0;
  double mass_frac_atom = 0.0;
  double mass_frac_right = 0.0;
  double length_frac_left = 0.0;  // Beta(1, theta/alpha), independent of the masses
  AlphaTheta left_kind;           // always (alpha, alpha); root-closest piece
  AlphaTheta right_kind;          // parent (alpha, theta)
};

// One beta-mixed string draw: scaled (beta,1-2beta)-string (marked, root-closest)
// concatenated with a scaled (beta,beta)-string, Beta(1-2beta,beta) mass split.
struct BetaMixedDraw {
  double total_length = 0.0;       // ML(beta, 1-beta) at unit mass
  double marked_length_frac = 0.0; // Beta(1/beta-2, 1); 0 at beta=1/2
  double marked_mass_frac = 0.0;   // Beta(1-2beta, beta); 0 at beta=1/2
};

// Coin-tossing atom selection: mass split Dirichlet(alpha, 1-alpha, theta).
StringSplit coin_toss_split(const StringDescriptor& desc, RngStream& rng);

// Uniform sampling from the mass measure; only valid for theta == alpha, where it
// coincides with coin tossing.
StringSplit uniform_atom_split(const StringDescriptor& desc, RngStream& rng);

BetaMixedDraw draw_beta_mixed(double beta, RngStream& rng);

}  // namespace treesim
