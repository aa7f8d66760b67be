#include "treesim/beads.hpp"

#include <cmath>

#include "treesim/errors.hpp"

namespace treesim {

StringSplit coin_toss_split(const StringDescriptor& desc, RngStream& rng) {
  desc.kind.validate();
  const double a = desc.kind.alpha, t = desc.kind.theta;
  if (!(t > 0.0)) throw domain_error("coin_toss_split: theta must be > 0");
  StringSplit s;
  const DirichletSplit d = sample_dirichlet({a, 1.0 - a, t}, rng);
  s.mass_frac_left = d.values[0];
  s.mass_frac_atom = d.values[1];
  s.mass_frac_right = d.values[2];
  s.length_frac_left = rng.beta(1.0, t / a);
  s.left_kind = {a, a};
  s.right_kind = {a, t};
  return s;
}

StringSplit uniform_atom_split(const StringDescriptor& desc, RngStream& rng) {
  desc.kind.validate();
  if (desc.kind.theta != desc.kind.alpha)
    throw domain_error("uniform_atom_split: requires theta == alpha");
  return coin_toss_split(desc, rng);
}

BetaMixedDraw draw_beta_mixed(double beta, RngStream& rng) {
  if (!(beta > 0.0 && beta <= 0.5)) throw domain_error("draw_beta_mixed: beta in (0,1/2]");
  BetaMixedDraw out;
  if (beta == 0.5) {
    // marked part degenerates; K ~ ML(1/2, 1/2)
    out.total_length = sample_ml({0.5, 0.5}, rng);
    return out;
  }
  const double k1 = sample_ml({beta, 1.0 - 2.0 * beta}, rng);
  const double k2 = sample_ml({beta, beta}, rng);
  const double b = rng.beta(1.0 - 2.0 * beta, beta);
  const double marked_len = std::pow(b, beta) * k1;
  const double unmarked_len = std::pow(1.0 - b, beta) * k2;
  out.total_length = marked_len + unmarked_len;
  out.marked_length_frac = marked_len / out.total_length;
  out.marked_mass_frac = b;
  return out;
}

}  // namespace treesim
