#pragma once

#include <string>
#include <vector>

#include "treesim/rng.hpp"

namespace treesim {

// (alpha, theta) parameter pair; alpha in (0,1), theta > -alpha.
struct AlphaTheta {
  double alpha;
  double theta;

  void validate() const;
};

// Size-biased stick-breaking sequence (GEM).
struct StickSequence {
  std::vector<double> sticks;
  AlphaTheta params;
};

struct DirichletSplit {
  std::vector<double> weights;
  std::vector<double> values;  // sums to 1
};

// p-th moment of the generalized Mittag-Leffler law ML(alpha, theta).
double ml_moment(const AlphaTheta& params, int p);

// One-sided stable: E[exp(-lambda T)] = exp(-lambda^alpha).
double sample_stable(double alpha, RngStream& rng);

// Guard on theta/alpha for the tilted-stable rejection sampler.
inline constexpr double kMlRejectionGuard = 15.0;

// Exact ML(alpha, theta) draw, theta >= 0, via gamma-mixture exponential tilting.
double sample_ml(const AlphaTheta& params, RngStream& rng);

DirichletSplit sample_dirichlet(const std::vector<double>& weights, RngStream& rng);

// First n sticks of GEM(alpha, theta): V_i ~ Beta(1-alpha, theta+i*alpha).
StickSequence gem_sticks(const AlphaTheta& params, int n, RngStream& rng);

enum class DiversityEstimator { stick_order, ranked };

struct DiversityEstimate {
  double value;
  DiversityEstimator estimator;
  int k;  // truncation actually used
};

// Truncation estimate of the alpha-diversity of a mass partition.
// stick_order: (1 - sum_{i<=k} P_i)^alpha * alpha^-alpha * k^(1-alpha).
// ranked:      k * Gamma(1-alpha) * (P_k^down)^alpha.
DiversityEstimate alpha_diversity(const std::vector<double>& masses, double alpha,
                                  DiversityEstimator which);

}  // namespace treesim
