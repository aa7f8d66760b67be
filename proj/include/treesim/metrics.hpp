#pragma once

#include <vector>

#include "treesim/rtree.hpp"

namespace treesim {

// Upper bound on the Gromov-Hausdorff distance realized by the correspondence
// of shared leaf labels plus the root: half the max distance distortion.
double gh_labeled(const DiscreteTree& a, const DiscreteTree& b);

struct MarkedDistance {
  double value = 0.0;       // sum over k <= K of 2^-k times the k-marked term
  double tail_bound = 0.0;  // 2^-K max(diam a, diam b)
};

// Truncated marked-tree distance under the shared-label correspondence; the
// k-th term combines the ambient distortion with per-component Hausdorff
// distortions of components 1..k (missing components count as the root point).
MarkedDistance gh_marked_truncated(const DiscreteTree& a, const DiscreteTree& b, int k_max);

// Hausdorff distance between the unions of two edge subsets of one tree.
// An empty subset stands for the root point.
double hausdorff_subtree(const DiscreteTree& tree, const std::vector<int>& edges_a,
                         const std::vector<int>& edges_b);

// Prokhorov distance between two finite measures on a shared point set.
// Exact subset search for supports of at most 15 points, a max-flow
// feasibility check above; force_exact trips a capability error instead.
double prokhorov_finite(const std::vector<double>& mass_a,
                        const std::vector<double>& mass_b,
                        const std::vector<std::vector<double>>& dist,
                        bool force_exact = false);

}  // namespace treesim
