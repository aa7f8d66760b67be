#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "treesim/growth.hpp"
#include "treesim/oracle.hpp"
#include "treesim/stats.hpp"

using namespace treesim;

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// chi-square of observed shape keys against an exact oracle table
double oracle_chi2_p(const std::map<std::string, long>& counts,
                     const std::map<std::string, double>& oracle) {
  std::vector<long> cs;
  std::vector<double> ps;
  for (const auto& [key, p] : oracle) {
    ps.push_back(p);
    const auto it = counts.find(key);
    cs.push_back(it == counts.end() ? 0 : it->second);
  }
  long total = 0;
  for (long c : cs) total += c;
  for (const auto& [key, c] : counts)
    if (!oracle.count(key)) return -1.0;  // impossible shape observed
  return chi_square("shapes", cs, ps).p_value;
}

std::vector<int> sorted_branch_degrees_minus_two(const DiscreteTree& contracted) {
  std::vector<int> out;
  for (int n = 0; n < contracted.num_nodes(); ++n) {
    const int deg = static_cast<int>(contracted.node(n).child_edges.size()) +
                    (contracted.node(n).parent == -1 ? 0 : 1);
    if (deg >= 3) out.push_back(deg - 2);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("two-colour structure invariants") {
  RngStream rng(1);
  for (int run = 0; run < 40; ++run) {
    const auto states = grow_two_colour(1.0 / 3, 5, rng);
    REQUIRE(states.size() == 6);
    for (int k = 0; k <= 5; ++k) {
      const auto& t = states[k].tree;
      CHECK(t.num_edges() == 3 * k + 1);
      CHECK(static_cast<int>(t.leaf_labels().size()) == k + 1);
      CHECK(t.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
      t.validate();
    }
    // component sizes equal contracted branch-point degrees minus two
    const auto& last = states.back();
    std::vector<int> sizes;
    for (const auto& c : last.components) sizes.push_back(c.size);
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == sorted_branch_degrees_minus_two(last.tree.contract_marked()));
  }
}

TEST_CASE("two-colour initial edge length is ML(beta,beta)") {
  RngStream rng(2);
  const int n = 5000;
  std::vector<double> m1(n), m2(n);
  for (int i = 0; i < n; ++i) {
    const auto states = grow_two_colour(1.0 / 3, 0, rng);
    m1[i] = states[0].tree.total_length();
    m2[i] = m1[i] * m1[i];
  }
  const auto s1 = mean_se(m1);
  const auto s2 = mean_se(m2);
  CHECK(std::abs(s1.mean - ml_moment({1.0 / 3, 1.0 / 3}, 1)) <= 4.0 * s1.se);
  CHECK(std::abs(s2.mean - ml_moment({1.0 / 3, 1.0 / 3}, 2)) <= 4.0 * s2.se);
}

TEST_CASE("two-colour total length at beta = 1/2 follows the line-breaking law") {
  RngStream rng(3);
  const int n = 4000, k = 2;  // direct ML draws get slow beyond theta/alpha ~ 5
  std::vector<double> grown(n), direct(n);
  for (int i = 0; i < n; ++i) {
    const auto states = grow_two_colour(0.5, k, rng);
    CHECK(states.back().tree.num_edges() == 2 * k + 1);  // no marked edges survive
    grown[i] = states.back().tree.total_length();
    direct[i] = sample_ml({0.5, 0.5 + k}, rng);
  }
  CHECK(ks_two_sample("s_k", grown, direct).p_value > 0.01);
}

TEST_CASE("weighted view is consistent with the two-colour tree") {
  RngStream rng(4);
  const auto states = grow_two_colour(1.0 / 3, 4, rng);
  const auto view = weighted_view(states.back());
  double w = 0.0;
  for (double x : view.weights) w += x;
  CHECK(view.total_length ==
        doctest::Approx(states.back().tree.total_length()).epsilon(1e-9));
  CHECK(view.tree.total_length() + w == doctest::Approx(view.total_length).epsilon(1e-9));

  const auto empty = weighted_view(grow_two_colour(1.0 / 3, 0, rng)[0]);
  CHECK(empty.weights.empty());
}

TEST_CASE("one-colour first step creates a degree-3 branch point with retained mass") {
  RngStream rng(5);
  const auto states = grow_stable_mass(1.0 / 3, 1, rng);
  const auto& t = states[1].tree;
  CHECK(t.num_edges() == 3);
  CHECK(static_cast<int>(t.leaf_labels().size()) == 2);
  double atoms = 0.0;
  for (int n = 0; n < t.num_nodes(); ++n) atoms += t.node(n).atom_mass;
  CHECK(atoms > 0.0);
  CHECK(t.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("one-colour shape chain matches the discrete vertex-weighted chain") {
  RngStream rng(6);
  const int runs = 30000, k = 3;
  std::map<std::string, long> counts;
  for (int r = 0; r < runs; ++r)
    ++counts[grow_stable_mass(1.0 / 3, k, rng).back().tree.shape_key()];
  const auto oracle = shape_prob_oracle_double(
      OracleModel::marchal, {Rational(1, 3), Rational(0), Rational(0)}, k);
  CHECK(oracle_chi2_p(counts, oracle) > 0.01);
}

TEST_CASE("first fragment at a fresh branch point is Beta(beta, 1-2beta)") {
  RngStream rng(7);
  std::vector<double> qs;
  while (qs.size() < 10000) {
    const auto states = grow_stable_mass(1.0 / 3, 6, rng);
    for (const auto& [deg, q] : states.back().fragments)
      if (deg == 2) qs.push_back(q);
  }
  CHECK(ks_vs_beta("first_fragment", qs, 1.0 / 3, 1.0 / 3).p_value > 0.01);
}

TEST_CASE("branch weight formula") {
  CHECK(branch_weight(1.0 / 3, 3) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(branch_weight(0.5, 3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(branch_weight(0.4, 5) == doctest::Approx(2 * 0.6 + 0.2).epsilon(1e-12));
}

TEST_CASE("length marginal sampler total length is ML(beta, beta+k)") {
  RngStream rng(8);
  const int n = 5000, k = 2;
  std::vector<double> m1(n), m2(n);
  for (int i = 0; i < n; ++i) {
    const auto rec = gh_marginal(1.0 / 3, k, rng);
    m1[i] = rec.total_length;
    m2[i] = m1[i] * m1[i];
  }
  const AlphaTheta target{1.0 / 3, 1.0 / 3 + k};
  const auto s1 = mean_se(m1);
  const auto s2 = mean_se(m2);
  CHECK(std::abs(s1.mean - ml_moment(target, 1)) <= 4.0 * s1.se);
  CHECK(std::abs(s2.mean - ml_moment(target, 2)) <= 4.0 * s2.se);
}

TEST_CASE("length marginal sampler has zero weights at beta = 1/2") {
  RngStream rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto rec = gh_marginal(0.5, 3, rng);
    for (double w : rec.weights) CHECK(w == 0.0);
  }
}

TEST_CASE("binary chain start and shape law") {
  RngStream rng(10);
  const int n = 5000;
  std::vector<double> first(n);
  for (int i = 0; i < n; ++i)
    first[i] = grow_ford(0.5, 1, rng)[0].total_length();
  const auto s1 = mean_se(first);
  CHECK(std::abs(s1.mean - ml_moment({0.5, 0.5}, 1)) <= 4.0 * s1.se);

  std::map<std::string, long> counts;
  for (int r = 0; r < 20000; ++r)
    ++counts[grow_ford(0.5, 3, rng).back().shape_key()];
  // the m-leaf tree corresponds to m-1 insertions after the single-edge start
  const auto oracle = shape_prob_oracle_double(
      OracleModel::ford, {Rational(1, 2), Rational(0), Rational(0)}, 2);
  CHECK(oracle_chi2_p(counts, oracle) > 0.01);

  CHECK_THROWS_AS(grow_ford(1.5, 2, rng), domain_error);
}

TEST_CASE("discrete chain exact shape probabilities") {
  // after two insertions with vertex weight w(3) = beta = 1/3 all four labeled
  // shapes (one star, three edge subdivisions) have probability 1/4
  const auto star_case = shape_prob_oracle(
      OracleModel::marchal, {Rational(1, 3), Rational(0), Rational(0)}, 2);
  CHECK(star_case.size() == 4);
  for (const auto& [key, p] : star_case) CHECK(p == Rational(1, 4));

  // at beta = 1/2 vertex weights vanish: trees stay binary and uniform
  const auto binary2 = shape_prob_oracle(
      OracleModel::marchal, {Rational(1, 2), Rational(0), Rational(0)}, 2);
  CHECK(binary2.size() == 3);
  for (const auto& [key, p] : binary2) CHECK(p == Rational(1, 3));
  const auto binary3 = shape_prob_oracle(
      OracleModel::marchal, {Rational(1, 2), Rational(0), Rational(0)}, 3);
  CHECK(binary3.size() == 15);
  for (const auto& [key, p] : binary3) CHECK(p == Rational(1, 15));

  CHECK_THROWS_AS(shape_prob_oracle(OracleModel::marchal,
                                    {Rational(1, 2), Rational(0), Rational(0)}, 9),
                  capability_error);
}

TEST_CASE("generalized model contains the vertex-weighted chain") {
  const OracleParams m{Rational(1, 3), Rational(0), Rational(0)};
  const OracleParams ag{Rational(0), Rational(2, 3), Rational(1, 3)};
  const auto a = shape_prob_oracle(OracleModel::marchal, m, 4);
  const auto b = shape_prob_oracle(OracleModel::alpha_gamma, ag, 4);
  REQUIRE(a.size() == b.size());
  for (const auto& [key, p] : a) {
    REQUIRE(b.count(key) == 1);
    CHECK(b.at(key) == p);
  }
}

TEST_CASE("discrete growth simulators match their oracles") {
  RngStream rng(15);
  const int runs = 20000, n = 3;
  std::map<std::string, long> cm, ca, cd;
  for (int r = 0; r < runs; ++r) {
    ++cm[marchal(1.0 / 3, n, rng).shape_key()];
    ++ca[alpha_gamma(0.6, 0.3, n, rng).shape_key()];
    ++cd[discrete_two_colour(1.0 / 3, n, rng).shape_key()];
  }
  CHECK(oracle_chi2_p(cm, shape_prob_oracle_double(
                              OracleModel::marchal,
                              {Rational(1, 3), Rational(0), Rational(0)}, n)) > 0.01);
  CHECK(oracle_chi2_p(ca, shape_prob_oracle_double(
                              OracleModel::alpha_gamma,
                              {Rational(0), Rational(3, 5), Rational(3, 10)}, n)) > 0.01);
  CHECK(oracle_chi2_p(cd, shape_prob_oracle_double(
                              OracleModel::discrete_two_colour,
                              {Rational(1, 3), Rational(0), Rational(0)}, n)) > 0.01);
}

TEST_CASE("discrete two-colour structure") {
  RngStream rng(12);
  for (int r = 0; r < 20; ++r) {
    const auto t = discrete_two_colour(1.0 / 3, 30, rng);
    CHECK(t.num_edges() == 91);  // 3n+1 unit edges
    CHECK(static_cast<int>(t.leaf_labels().size()) == 31);
    t.validate();  // includes binary marked components
  }
}

TEST_CASE("branch point replacement") {
  RngStream rng(13);
  const auto states = grow_stable_mass(1.0 / 3, 6, rng);
  CHECK_THROWS_AS(branch_point_replace(states.back(), 9, rng), domain_error);

  const auto replaced = branch_point_replace(states.back(), 100, rng);
  replaced.validate();
  const auto contracted = states.back().tree;  // one-colour tree: no marks
  // every branch point of degree d becomes a binary component with d-2 leaves,
  // i.e. 2(d-2)-1 edges
  std::map<int, int> comp_edges;
  for (int e = 0; e < replaced.num_edges(); ++e)
    if (replaced.edge(e).mark) ++comp_edges[replaced.edge(e).comp];
  std::vector<int> got;
  for (const auto& [comp, cnt] : comp_edges) got.push_back(cnt);
  std::sort(got.begin(), got.end());
  std::vector<int> want;
  for (int m : sorted_branch_degrees_minus_two(contracted)) want.push_back(2 * m - 1);
  std::sort(want.begin(), want.end());
  CHECK(got == want);
  // unmarked geodesics are preserved
  CHECK(replaced.total_length() > contracted.total_length());
}

TEST_CASE("recursive construction truncation") {
  RngStream rng(14);
  CHECK_THROWS_AS(recursive_construction(1.0 / 3, 7, 5, rng), capability_error);
  CHECK_THROWS_AS(recursive_construction(1.0 / 3, 2, 25, rng), capability_error);
  CHECK_THROWS_AS(recursive_construction(1.0 / 3, -1, 5, rng), domain_error);

  // depth 0: one string subdivided at its realized atoms, nothing attached
  const auto r0 = recursive_construction(1.0 / 3, 0, 5, rng);
  CHECK(r0.tree.num_edges() <= 6);
  CHECK(static_cast<int>(r0.retained_mass.size()) == 1);
  CHECK(r0.retained_mass[0] > 0.0);
  CHECK(r0.retained_mass[0] < 1.0);

  const int reps = 150;
  std::vector<double> l1(reps), l2(reps);
  for (int i = 0; i < reps; ++i) {
    const auto a = recursive_construction(1.0 / 3, 1, 5, rng);
    const auto b = recursive_construction(1.0 / 3, 2, 5, rng);
    REQUIRE(a.retained_mass.size() == 2);  // levels 0 and 1
    for (double m : a.retained_mass) CHECK(m > 0.0);
    l1[i] = a.tree.total_length();
    l2[i] = b.tree.total_length();
  }
  const auto s1 = mean_se(l1);
  const auto s2 = mean_se(l2);
  CHECK(s2.mean > s1.mean);  // deeper truncation only adds material
}
