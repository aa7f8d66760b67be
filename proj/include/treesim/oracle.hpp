#pragma once

#include <map>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace treesim {

using Rational = boost::multiprecision::cpp_rational;

enum class OracleModel { marchal, alpha_gamma, ford, discrete_two_colour };

struct OracleParams {
  Rational beta;   // marchal / discrete_two_colour
  Rational alpha;  // alpha_gamma; ford uses alpha = gamma = beta_prime
  Rational gamma;
};

// Exact labeled-shape probabilities after n insertions, by dynamic programming
// over all insertion histories. Capped at n <= 8.
std::map<std::string, Rational> shape_prob_oracle(OracleModel model,
                                                  const OracleParams& params, int n);

std::map<std::string, double> shape_prob_oracle_double(OracleModel model,
                                                       const OracleParams& params, int n);

}  // namespace treesim
