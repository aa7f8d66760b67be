#pragma once

#include <map>
#include <string>
#include <vector>

#include "treesim/beads.hpp"
#include "treesim/rtree.hpp"

namespace treesim {

// Bookkeeping for one marked component of the two-colour growth.
struct ComponentRecord {
  int id = 0;
  int size = 0;                   // external marked edges = Ford leaves
  int creation_step = -1;
  double creation_atom_mass = 0.0;  // mass of the atom the component grew from
  double creation_comp_mass = 0.0;  // marked mass at creation
  std::vector<int> insertion_steps;        // step at which size m was reached, m=1..
  std::vector<double> length_at_size;      // component length on reaching size m
  std::vector<std::string> shape_at_size;  // canonical component shape at size m
  std::map<int, int> junction_leaf;        // junction node id -> appearance index
};

struct GrowthState {
  DiscreteTree tree;
  double beta = 0.5;
  int step = 0;
  std::vector<ComponentRecord> components;
  // one-colour mode: (degree at selection, Q) for every branch-point split/growth
  std::vector<std::pair<int, double>> fragments;
};

// Contracted view: unmarked tree plus branch-point weights.
struct WeightedViewRecord {
  DiscreteTree tree;
  std::vector<double> weights;
  double total_length = 0.0;
};

// Two-colour mass-based growth (the master engine). The mass and shape
// process is sampled forward; edge lengths are realized afterwards as
// independent rescaled string lengths of the final pieces and summed back
// into every intermediate state, which keeps the joint law of masses and
// lengths exact at every step.
std::vector<GrowthState> grow_two_colour(double beta, int k_max, RngStream& rng);

// One-colour mass-based stable-tree growth, same length realization.
std::vector<GrowthState> grow_stable_mass(double beta, int k_max, RngStream& rng);

// Contract a two-colour state: component lengths become weights.
WeightedViewRecord weighted_view(const GrowthState& state);

// Independent sampler of the length-based marginal at step k: shape and masses
// from a one-colour run, lengths mass^beta times fresh ML draws.
WeightedViewRecord gh_marginal(double beta, int k, RngStream& rng);

// w(d) = (d-3)(1-beta) + 1-2beta
double branch_weight(double beta, int degree);

// Ford tree chain; tree m has m leaves (labels 0..m-1) and per-m exact lengths.
std::vector<DiscreteTree> grow_ford(double beta_prime, int m_max, RngStream& rng);

// Discrete models; unit edge lengths, leaves labeled 0..n in creation order.
DiscreteTree marchal(double beta, int n_max, RngStream& rng);
DiscreteTree alpha_gamma(double alpha, double gamma, int n_max, RngStream& rng);
DiscreteTree discrete_two_colour(double beta, int n_max, RngStream& rng);

// Replace every branch point of a one-colour state by an independent scaled
// Ford tree; n_sticks truncates the diversity estimate.
DiscreteTree branch_point_replace(const GrowthState& stable_state, int n_sticks,
                                  RngStream& rng);

struct RecursiveResult {
  DiscreteTree tree;
  std::vector<double> retained_mass;  // per level, sum of realized atom masses
};

// Finite-depth truncation of the recursive string-of-beads construction.
RecursiveResult recursive_construction(double beta, int depth, int atoms_per_string,
                                       RngStream& rng);

// Canonical shape of one marked component (leaves indexed by appearance order).
std::string component_shape_key(const DiscreteTree& tree, const ComponentRecord& rec);

}  // namespace treesim
