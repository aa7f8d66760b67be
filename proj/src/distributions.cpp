#include "treesim/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "treesim/errors.hpp"

namespace treesim {

void AlphaTheta::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("alpha must lie in (0,1)");
  if (!(theta > -alpha)) throw domain_error("theta must exceed -alpha");
}

double ml_moment(const AlphaTheta& params, int p) {
  params.validate();
  if (p < 0) throw domain_error("ml_moment: p must be >= 0");
  if (p == 0) return 1.0;
  const double a = params.alpha, t = params.theta;
  // Gamma(theta+1) Gamma(theta/alpha+1+p) / (Gamma(theta/alpha+1) Gamma(theta+p*alpha+1))
  return std::exp(std::lgamma(t + 1.0) + std::lgamma(t / a + 1.0 + p) -
                  std::lgamma(t / a + 1.0) - std::lgamma(t + p * a + 1.0));
}

double sample_stable(double alpha, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("sample_stable: alpha in (0,1)");
  // Kanter's representation.
  const double u = rng.uniform() * M_PI;
  const double e = rng.exponential();
  const double a = alpha;
  const double au = std::pow(std::sin(a * u), a) *
                    std::pow(std::sin((1.0 - a) * u), 1.0 - a) / std::sin(u);
  const double A = std::pow(au, 1.0 / (1.0 - a));
  return std::pow(A / e, (1.0 - a) / a);
}

double sample_ml(const AlphaTheta& params, RngStream& rng) {
  params.validate();
  const double a = params.alpha, t = params.theta;
  if (t < 0.0) throw domain_error("sample_ml: theta must be >= 0");
  if (t / a > kMlRejectionGuard)
    throw capability_error(
        "sample_ml: theta/alpha exceeds rejection guard; use the constructive "
        "chain samplers in the growth module for large-theta marginals");
  if (t == 0.0) return std::pow(sample_stable(a, rng), -a);
  const double lambda = std::pow(rng.gamma(t / a), 1.0 / a);
  for (;;) {
    const double T = sample_stable(a, rng);
    if (rng.uniform() <= std::exp(-lambda * T)) return std::pow(T, -a);
  }
}

DirichletSplit sample_dirichlet(const std::vector<double>& weights, RngStream& rng) {
  if (weights.empty()) throw domain_error("sample_dirichlet: no weights");
  DirichletSplit out;
  out.weights = weights;
  out.values.resize(weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw domain_error("sample_dirichlet: weights must be > 0");
    out.values[i] = rng.gamma(weights[i]);
    sum += out.values[i];
  }
  if (sum <= 0.0) {
    // all gammas underflowed; fall back to the mean split
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (std::size_t i = 0; i < weights.size(); ++i) out.values[i] = weights[i] / wsum;
    return out;
  }
  for (double& v : out.values) v /= sum;
  return out;
}

StickSequence gem_sticks(const AlphaTheta& params, int n, RngStream& rng) {
  params.validate();
  if (n < 1) throw domain_error("gem_sticks: n must be >= 1");
  StickSequence seq;
  seq.params = params;
  seq.sticks.reserve(n);
  double remaining = 1.0;
  for (int i = 1; i <= n; ++i) {
    const double b = params.theta + i * params.alpha;
    if (b <= 0.0) throw domain_error("gem_sticks: theta + i*alpha must be > 0");
    const double v = rng.beta(1.0 - params.alpha, b);
    seq.sticks.push_back(remaining * v);
    remaining *= (1.0 - v);
  }
  return seq;
}

DiversityEstimate alpha_diversity(const std::vector<double>& masses, double alpha,
                                  DiversityEstimator which) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("alpha_diversity: alpha in (0,1)");
  const bool degenerate_single =
      masses.size() == 1 && std::abs(masses[0] - 1.0) < 1e-12;
  if (masses.size() < 10 && !degenerate_single)
    throw domain_error("alpha_diversity: need at least 10 masses");
  const int k = static_cast<int>(masses.size());
  if (which == DiversityEstimator::stick_order) {
    double tail = 1.0;
    for (double m : masses) tail -= m;
    tail = std::max(tail, 0.0);
    const double est =
        std::pow(tail, alpha) * std::pow(alpha, -alpha) * std::pow(double(k), 1.0 - alpha);
    return {est, which, k};
  }
  std::vector<double> ranked(masses);
  std::sort(ranked.begin(), ranked.end(), std::greater<double>());
  // With n size-biased masses the true i-th largest is only reliably present
  // for i well below n (an atom of size s is missed with probability roughly
  // e^{-ns}), so evaluate the ranked limit at i ~ sqrt(n).
  const int i = std::max(1, static_cast<int>(std::sqrt(double(k))));
  const double est = i * std::tgamma(1.0 - alpha) * std::pow(ranked[i - 1], alpha);
  return {est, which, i};
}

}  // namespace treesim
