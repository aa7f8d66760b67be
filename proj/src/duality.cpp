#include "treesim/duality.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "treesim/errors.hpp"

namespace treesim {

namespace {

template <typename T>
T rising(T x, int n, T step) {
  T out = 1;
  for (int i = 0; i < n; ++i) out *= x + T(i) * step;
  return out;
}

template <typename T>
T ipow(T base, int e) {
  if (e < 0) return T(1) / ipow(base, -e);
  T out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

using Structure = std::vector<std::vector<int>>;  // groups of table sizes

std::vector<std::vector<int>> compositions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int rest) {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (int part = 1; part <= rest; ++part) {
      cur.push_back(part);
      rec(rest - part);
      cur.pop_back();
    }
  };
  rec(n);
  return out;
}

std::vector<Structure> grouped_compositions(int n) {
  std::vector<Structure> out;
  for (const auto& outer : compositions(n)) {
    std::vector<std::vector<std::vector<int>>> choices;
    for (int part : outer) choices.push_back(compositions(part));
    Structure cur(outer.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == outer.size()) {
        out.push_back(cur);
        return;
      }
      for (const auto& inner : choices[i]) {
        cur[i] = inner;
        rec(i + 1);
      }
    };
    rec(0);
  }
  return out;
}

// coagulation side: seat n in the finer restaurant, then coagulate the tables
template <typename T>
T coag_side(T alpha, T theta, T beta_prime, const Structure& s, int ell, int n) {
  const int m = static_cast<int>(s.size());
  int big_k = 0;
  T tables = 1;
  for (const auto& group : s) {
    big_k += static_cast<int>(group.size());
    for (int nij : group) tables *= rising(T(T(1) - alpha), nij - 1, T(1));
  }
  const T part1 = rising(T(theta + alpha), big_k - 1, alpha) * tables /
                  rising(T(T(1) + theta), n - 1, T(1));
  T groups = 1;
  for (const auto& group : s)
    groups *= rising(T(T(1) - beta_prime), static_cast<int>(group.size()) - 1, T(1));
  const T part2 = ipow(beta_prime, m - ell - 1) * ipow(T(theta / alpha), ell) * groups /
                  rising(T(T(1) + theta / alpha), big_k - 1, T(1));
  return part1 * part2;
}

// fragmentation side: seat n coarsely, then fragment each group
template <typename T>
T frag_side(T alpha, T theta, T beta_prime, const Structure& s, int ell, int n) {
  const int m = static_cast<int>(s.size());
  T coarse_tables = 1;
  T frag = 1;
  for (const auto& group : s) {
    int big_n = 0;
    for (int nij : group) big_n += nij;
    coarse_tables *= rising(T(T(1) - alpha * beta_prime), big_n - 1, T(1));
    T inner = rising(T(alpha - alpha * beta_prime),
                     static_cast<int>(group.size()) - 1, alpha);
    for (int nij : group) inner *= rising(T(T(1) - alpha), nij - 1, T(1));
    frag *= inner / rising(T(T(1) - alpha * beta_prime), big_n - 1, T(1));
  }
  const T part1 = ipow(T(alpha * beta_prime), m - ell - 1) * ipow(theta, ell) *
                  coarse_tables / rising(T(T(1) + theta), n - 1, T(1));
  return part1 * frag;
}

}  // namespace

TestReport duality_check(const Rational& alpha, const Rational& theta, int n_max) {
  if (n_max < 1 || n_max > 8) throw domain_error("duality_check: n_max in 1..8");
  if (!(alpha > 0 && alpha < 1) || !(theta > 0))
    throw domain_error("duality_check: need 0 < alpha < 1 and theta > 0");
  const Rational beta_prime = (1 - alpha) / alpha;
  if (!(beta_prime > 0 && beta_prime <= 1))
    throw domain_error("duality_check: matching beta_prime out of range");

  long structures = 0;
  bool exact_ok = true;
  double worst = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const bool exact = n <= 6;
    const long double a = static_cast<long double>(alpha);
    const long double t = static_cast<long double>(theta);
    const long double bp = static_cast<long double>(beta_prime);
    for (const auto& s : grouped_compositions(n)) {
      const int m = static_cast<int>(s.size());
      for (int ell = 1; ell <= m; ++ell) {
        ++structures;
        if (exact) {
          if (coag_side(alpha, theta, beta_prime, s, ell, n) !=
              frag_side(alpha, theta, beta_prime, s, ell, n))
            exact_ok = false;
        } else {
          const long double c = coag_side<long double>(a, t, bp, s, ell, n);
          const long double f = frag_side<long double>(a, t, bp, s, ell, n);
          const long double scale = std::max<long double>(
              1e-300L, std::max(std::abs(c), std::abs(f)));
          worst = std::max(worst, static_cast<double>(std::abs(c - f) / scale));
        }
      }
    }
  }

  TestReport r;
  r.name = "duality";
  r.statistic = worst;
  r.reference = "coagulation = fragmentation";
  r.tolerance = 1e-9;
  r.n1 = static_cast<std::size_t>(structures);
  r.pass = exact_ok && worst < 1e-9;
  return r;
}

}  // namespace treesim
