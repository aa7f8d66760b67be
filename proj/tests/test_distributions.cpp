#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "treesim/distributions.hpp"
#include "treesim/errors.hpp"
#include "treesim/rng.hpp"

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

}  // namespace

TEST_CASE("ml_moment closed-form anchors") {
  // frozen reference values: sqrt(pi), Gamma(2.5)*Gamma(5)/(Gamma(4)*Gamma(3)),
  // 1/Gamma(1.5) = 2/sqrt(pi)
  CHECK(ml_moment({0.5, 0.5}, 1) == doctest::Approx(1.7724538509055159).epsilon(1e-12));
  CHECK(ml_moment({0.5, 1.5}, 1) == doctest::Approx(2.6586807763582737).epsilon(1e-12));
  CHECK(ml_moment({0.5, 0.0}, 1) == doctest::Approx(1.1283791670955126).epsilon(1e-12));
  CHECK(ml_moment({0.5, 0.5}, 0) == doctest::Approx(1.0).epsilon(1e-14));
  // second moment of ML(1/2,1/2): Gamma(1.5)*Gamma(4)/(Gamma(2)*Gamma(2.5)) = 4
  CHECK(ml_moment({0.5, 0.5}, 2) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  const AlphaTheta bad_alpha{1.5, 0.5};
  const AlphaTheta bad_theta{0.5, -0.6};
  CHECK_THROWS_AS(bad_alpha.validate(), domain_error);
  CHECK_THROWS_AS(bad_theta.validate(), domain_error);
  AlphaTheta ok{0.5, -0.4};  // theta > -alpha is allowed
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("ml sampler moments match the moment formula on the grid") {
  RngStream rng(11);
  const int n = 20000;
  const std::vector<AlphaTheta> grid = {
      {0.3, 0.0}, {0.3, 0.3}, {0.3, 0.4}, {0.3, 1.0},
      {0.5, 0.0}, {0.5, 0.5}, {0.5, 1.0}};
  for (const auto& at : grid) {
    std::vector<double> m1(n), m2(n);
    for (int i = 0; i < n; ++i) {
      const double x = sample_ml(at, rng);
      m1[i] = x;
      m2[i] = x * x;
    }
    for (int p = 1; p <= 2; ++p) {
      const auto ms = mean_se(p == 1 ? m1 : m2);
      const double ref = ml_moment(at, p);
      INFO("alpha=", at.alpha, " theta=", at.theta, " p=", p);
      CHECK(std::abs(ms.mean - ref) <= 4.0 * ms.se);
    }
  }
}

TEST_CASE("ml rejection guard rejects large theta/alpha") {
  RngStream rng(1);
  CHECK_THROWS_AS(sample_ml({0.5, 10.0}, rng), capability_error);  // theta/alpha = 20
}

TEST_CASE("stable sampler laplace transform") {
  RngStream rng(7);
  const int n = 20000;
  for (double alpha : {0.3, 0.5, 0.8}) {
    for (double lambda : {0.5, 1.0}) {
      std::vector<double> xs(n);
      for (int i = 0; i < n; ++i) xs[i] = std::exp(-lambda * sample_stable(alpha, rng));
      const auto ms = mean_se(xs);
      const double ref = std::exp(-std::pow(lambda, alpha));
      INFO("alpha=", alpha, " lambda=", lambda);
      CHECK(std::abs(ms.mean - ref) <= 4.0 * ms.se);
    }
  }
}

TEST_CASE("dirichlet basics") {
  RngStream rng(3);
  CHECK_THROWS_AS(sample_dirichlet({1.0, -0.5}, rng), domain_error);
  CHECK_THROWS_AS(sample_dirichlet({}, rng), domain_error);

  // single weight is deterministic
  const auto one = sample_dirichlet({5.0}, rng);
  CHECK(one.values.size() == 1);
  CHECK(one.values[0] == doctest::Approx(1.0).epsilon(1e-14));

  const int n = 20000;
  std::vector<double> a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    const auto d = sample_dirichlet({1.0 / 3, 1.0 / 3, 1.0 / 3}, rng);
    double s = 0.0;
    for (double v : d.values) s += v;
    REQUIRE(s == doctest::Approx(1.0).epsilon(1e-9));
    a[i] = d.values[0];
    b[i] = d.values[1];
    c[i] = d.values[2];
  }
  for (const auto& xs : {a, b, c}) {
    const auto ms = mean_se(xs);
    CHECK(std::abs(ms.mean - 1.0 / 3) <= 4.0 * ms.se);
  }
}

TEST_CASE("dirichlet deletion and renormalization") {
  RngStream rng(5);
  const int n = 20000;
  std::vector<double> first(n);
  for (int i = 0; i < n; ++i) {
    const auto d = sample_dirichlet({0.7, 1.3, 2.0}, rng);
    first[i] = d.values[0] / (d.values[0] + d.values[1]);
  }
  const auto ms = mean_se(first);
  CHECK(std::abs(ms.mean - 0.35) <= 4.0 * ms.se);  // Dirichlet(0.7,1.3) mean
}

TEST_CASE("dirichlet size-biased index") {
  RngStream rng(9);
  const int n = 40000;
  const std::vector<double> w = {1.0, 2.0, 3.0};
  std::vector<long> counts(3, 0);
  for (int i = 0; i < n; ++i) {
    const auto d = sample_dirichlet(w, rng);
    double r = rng.uniform();
    for (int j = 0; j < 3; ++j) {
      r -= d.values[j];
      if (r <= 0.0) {
        ++counts[j];
        break;
      }
    }
  }
  for (int j = 0; j < 3; ++j) {
    const double p = w[j] / 6.0;
    const double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(static_cast<double>(counts[j]) / n - p) <= 4.0 * se);
  }
}

TEST_CASE("gem sticks laws and partial sums") {
  RngStream rng(13);
  const int n = 20000;
  std::vector<double> v1(n);
  for (int i = 0; i < n; ++i) {
    const auto g = gem_sticks({2.0 / 3, -1.0 / 3}, 20, rng);
    v1[i] = g.sticks[0];
    double sum = 0.0;
    for (double s : g.sticks) {
      REQUIRE(s > 0.0);
      sum += s;
      REQUIRE(sum <= 1.0 + 1e-12);
    }
  }
  // first stick of GEM(1-beta, -beta) at beta=1/3 is Beta(1/3,1/3), mean 1/2
  const auto ms = mean_se(v1);
  CHECK(std::abs(ms.mean - 0.5) <= 4.0 * ms.se);
}

TEST_CASE("gem residual mass vanishes") {
  RngStream rng(17);
  const int n = 2000;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    const auto g = gem_sticks({0.5, 0.5}, 200, rng);
    double sum = 0.0;
    for (double s : g.sticks) sum += s;
    if (sum > 0.9) ++ok;
  }
  CHECK(static_cast<double>(ok) / n > 0.99);
}

TEST_CASE("alpha diversity estimators") {
  std::vector<double> degenerate = {1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(alpha_diversity(degenerate, 0.5, DiversityEstimator::stick_order).value ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(alpha_diversity({0.5, 0.5}, 0.5, DiversityEstimator::stick_order),
                  domain_error);

  RngStream rng(19);
  const int reps = 200;
  const int sticks = 10000;
  std::vector<double> stick_est(reps), ranked_est(reps);
  for (int i = 0; i < reps; ++i) {
    const auto g = gem_sticks({0.5, 0.5}, sticks, rng);
    stick_est[i] = alpha_diversity(g.sticks, 0.5, DiversityEstimator::stick_order).value;
    ranked_est[i] = alpha_diversity(g.sticks, 0.5, DiversityEstimator::ranked).value;
  }
  const double target = ml_moment({0.5, 0.5}, 1);
  const auto ms = mean_se(stick_est);
  const auto mr = mean_se(ranked_est);
  CHECK(std::abs(ms.mean - target) / target < 0.05);
  CHECK(std::abs(mr.mean - ms.mean) / ms.mean < 0.10);
}

TEST_CASE("scaled dirichlet vector equals independent rescaled parts") {
  // S*(Y1,Y2) with S ~ ML(b,2b), Y ~ Dirichlet(2,2) (params theta_i/b) has the
  // law of (X1^b*S1, X2^b*S2) with X ~ Dirichlet(b,b), Si ~ ML(b,b), b = 1/3.
  RngStream rng(23);
  const double b = 1.0 / 3;
  const int n = 30000;
  std::vector<double> l1(n), l2(n), lc(n), r1(n), r2(n), rc(n);
  for (int i = 0; i < n; ++i) {
    const double s = sample_ml({b, 2 * b}, rng);
    const auto y = sample_dirichlet({1.0, 1.0}, rng);  // params theta_i / b = 1
    l1[i] = s * y.values[0];
    l2[i] = s * y.values[1];
    lc[i] = l1[i] * l2[i];
    const auto x = sample_dirichlet({b, b}, rng);
    r1[i] = std::pow(x.values[0], b) * sample_ml({b, b}, rng);
    r2[i] = std::pow(x.values[1], b) * sample_ml({b, b}, rng);
    rc[i] = r1[i] * r2[i];
  }
  auto close = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto mx = mean_se(xs);
    const auto my = mean_se(ys);
    return std::abs(mx.mean - my.mean) <=
           4.0 * std::sqrt(mx.se * mx.se + my.se * my.se);
  };
  auto squared = [](std::vector<double> xs) {
    for (double& x : xs) x *= x;
    return xs;
  };
  CHECK(close(l1, r1));
  CHECK(close(l2, r2));
  CHECK(close(lc, rc));
  CHECK(close(squared(l1), squared(r1)));
  CHECK(close(squared(l2), squared(r2)));
}
