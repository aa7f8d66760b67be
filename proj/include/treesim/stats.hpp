#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace treesim {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  std::string reference;  // distribution name, numeric target or "two-sample"
  double p_value = -1.0;  // -1 when a tolerance band applies instead
  double tolerance = 0.0;
  std::size_t n1 = 0, n2 = 0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string to_json() const;
};

struct TestBundle {
  std::string name;
  std::vector<TestReport> reports;
  bool pass = false;
  std::string to_json() const;
};

// pass iff at least 90% of sub-tests pass and no p-value drops below 1e-4
bool bundle_rule(const std::vector<TestReport>& reports);
TestBundle make_bundle(std::string name, std::vector<TestReport> reports);

TestReport ks_two_sample(const std::string& name, std::vector<double> xs,
                         std::vector<double> ys);
TestReport ks_vs_beta(const std::string& name, std::vector<double> xs, double a,
                      double b);
// passes iff |mean - ref_mean| <= 4 se; se from the sample when ref_se < 0
TestReport moment_test(const std::string& name, const std::vector<double>& xs,
                       double ref_mean, double ref_se = -1.0);
TestReport chi_square(const std::string& name, const std::vector<long>& counts,
                      const std::vector<double>& probs);
TestReport chi_square_two_sample(const std::string& name,
                                 const std::map<std::string, long>& counts_a,
                                 const std::map<std::string, long>& counts_b);

// weighted contraction of the two-colour tree vs the directly sampled marginal
TestBundle verify_theorem_1_1(double beta, int k, int num_replicates,
                              std::uint64_t seed);

// marked components pooled over two-colour runs vs the Ford chain
TestBundle verify_ford_embedding(double beta, int runs, int m_max, std::uint64_t seed);

// own-null calibration, 100 seeds per test family; pass needs >= 98 each
std::vector<TestReport> calibration(std::uint64_t master_seed);

}  // namespace treesim
