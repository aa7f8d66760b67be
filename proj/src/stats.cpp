#include "treesim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "treesim/distributions.hpp"
#include "treesim/errors.hpp"
#include "treesim/growth.hpp"
#include "treesim/oracle.hpp"
#include "treesim/parallel.hpp"
#include "treesim/rng.hpp"
#include "treesim/rtree.hpp"

namespace treesim {

namespace {

double ks_asymptotic_p(double lambda) {
  if (lambda < 1e-9) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

void require_sample(const std::vector<double>& xs, const char* who) {
  if (xs.size() < 2) throw domain_error(std::string(who) + ": sample too small");
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  if (*mn == *mx) throw domain_error(std::string(who) + ": degenerate sample");
}

double chi_square_p(double stat, int df) {
  if (df < 1) return 1.0;
  return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string TestReport::to_json() const {
  std::string out = "{";
  out += "\"name\":" + quoted(name);
  out += ",\"statistic\":" + format_double(statistic);
  out += ",\"reference\":" + quoted(reference);
  out += ",\"p_value\":" + format_double(p_value);
  out += ",\"tolerance\":" + format_double(tolerance);
  out += ",\"n1\":" + std::to_string(n1);
  out += ",\"n2\":" + std::to_string(n2);
  out += ",\"pass\":" + std::string(pass ? "true" : "false");
  out += ",\"seed\":" + std::to_string(seed);
  return out + "}";
}

std::string TestBundle::to_json() const {
  std::string out = "{\"name\":" + quoted(name) + ",\"pass\":" +
                    (pass ? std::string("true") : std::string("false")) +
                    ",\"reports\":[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) out += ",";
    out += reports[i].to_json();
  }
  return out + "]}";
}

bool bundle_rule(const std::vector<TestReport>& reports) {
  if (reports.empty()) return false;
  std::size_t passed = 0;
  for (const auto& r : reports) {
    if (r.pass) ++passed;
    if (r.p_value >= 0.0 && r.p_value < 1e-4) return false;
  }
  return 10 * passed >= 9 * reports.size();
}

TestBundle make_bundle(std::string name, std::vector<TestReport> reports) {
  TestBundle b;
  b.name = std::move(name);
  b.pass = bundle_rule(reports);
  b.reports = std::move(reports);
  return b;
}

TestReport ks_two_sample(const std::string& name, std::vector<double> xs,
                         std::vector<double> ys) {
  require_sample(xs, "ks_two_sample");
  require_sample(ys, "ks_two_sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double x = xs[i], y = ys[j];
    if (x <= y) ++i;
    if (y <= x) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  const double ne = n * m / (n + m);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  TestReport r;
  r.name = name;
  r.statistic = d;
  r.reference = "two-sample";
  r.p_value = ks_asymptotic_p(lambda);
  r.n1 = xs.size();
  r.n2 = ys.size();
  r.pass = r.p_value > 0.01;
  return r;
}

TestReport ks_vs_beta(const std::string& name, std::vector<double> xs, double a,
                      double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw domain_error("ks_vs_beta: params must be > 0");
  require_sample(xs, "ks_vs_beta");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = std::clamp(xs[i], 0.0, 1.0);
    const double cdf = boost::math::ibeta(a, b, x);
    d = std::max(d, std::abs(cdf - i / n));
    d = std::max(d, std::abs((i + 1) / n - cdf));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  TestReport r;
  r.name = name;
  r.statistic = d;
  r.reference = "Beta(" + format_double(a) + "," + format_double(b) + ")";
  r.p_value = ks_asymptotic_p(lambda);
  r.n1 = xs.size();
  r.pass = r.p_value > 0.01;
  return r;
}

TestReport moment_test(const std::string& name, const std::vector<double>& xs,
                       double ref_mean, double ref_se) {
  if (xs.size() < 2) throw domain_error("moment_test: sample too small");
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double se = ref_se;
  if (se < 0.0) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
  }
  if (se <= 0.0) throw domain_error("moment_test: degenerate sample");
  TestReport r;
  r.name = name;
  r.statistic = std::abs(mean - ref_mean) / se;
  r.reference = format_double(ref_mean);
  r.tolerance = 4.0;
  r.n1 = xs.size();
  r.pass = r.statistic <= 4.0;
  return r;
}

TestReport chi_square(const std::string& name, const std::vector<long>& counts,
                      const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty())
    throw domain_error("chi_square: size mismatch");
  long total = 0;
  for (long c : counts) {
    if (c < 0) throw domain_error("chi_square: negative count");
    total += c;
  }
  if (total == 0) throw domain_error("chi_square: empty sample");

  TestReport r;
  r.name = name;
  r.reference = "exact shape law";
  r.n1 = static_cast<std::size_t>(total);

  // merge low-expectation bins; any observation on a zero-probability bin fails
  double stat = 0.0;
  bool impossible = false;
  double acc_exp = 0.0;
  long acc_obs = 0;
  int bins = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] < 0.0) throw domain_error("chi_square: negative probability");
    if (probs[i] == 0.0) {
      if (counts[i] > 0) impossible = true;
      continue;
    }
    acc_exp += probs[i] * total;
    acc_obs += counts[i];
    if (acc_exp >= 5.0) {
      stat += (acc_obs - acc_exp) * (acc_obs - acc_exp) / acc_exp;
      acc_exp = 0.0;
      acc_obs = 0;
      ++bins;
    }
  }
  if (acc_exp > 0.0) {
    stat += (acc_obs - acc_exp) * (acc_obs - acc_exp) / acc_exp;
    ++bins;
  }
  r.statistic = stat;
  r.p_value = impossible ? 0.0 : chi_square_p(stat, bins - 1);
  r.pass = r.p_value > 0.01;
  return r;
}

TestReport chi_square_two_sample(const std::string& name,
                                 const std::map<std::string, long>& counts_a,
                                 const std::map<std::string, long>& counts_b) {
  std::set<std::string> keys;
  long n = 0, m = 0;
  for (const auto& [k, c] : counts_a) {
    keys.insert(k);
    n += c;
  }
  for (const auto& [k, c] : counts_b) {
    keys.insert(k);
    m += c;
  }
  if (n == 0 || m == 0) throw domain_error("chi_square_two_sample: empty sample");
  const double rn = std::sqrt(static_cast<double>(m) / n);
  const double rm = std::sqrt(static_cast<double>(n) / m);
  double stat = 0.0;
  int bins = 0;
  for (const auto& key : keys) {
    const auto ia = counts_a.find(key);
    const auto ib = counts_b.find(key);
    const double a = ia == counts_a.end() ? 0.0 : static_cast<double>(ia->second);
    const double b = ib == counts_b.end() ? 0.0 : static_cast<double>(ib->second);
    if (a + b <= 0.0) continue;
    stat += (rn * a - rm * b) * (rn * a - rm * b) / (a + b);
    ++bins;
  }
  TestReport r;
  r.name = name;
  r.statistic = stat;
  r.reference = "two-sample";
  r.p_value = chi_square_p(stat, bins - 1);
  r.n1 = static_cast<std::size_t>(n);
  r.n2 = static_cast<std::size_t>(m);
  r.pass = r.p_value > 0.01;
  return r;
}

namespace {

TestReport trivially_equal(const std::string& name, std::size_t n1, std::size_t n2) {
  TestReport r;
  r.name = name;
  r.statistic = 0.0;
  r.reference = "two-sample";
  r.p_value = 1.0;
  r.n1 = n1;
  r.n2 = n2;
  r.pass = true;
  return r;
}

bool all_equal(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  return !xs.empty() && !ys.empty() && constant(xs) && constant(ys) &&
         xs.front() == ys.front();
}

}  // namespace

TestBundle verify_theorem_1_1(double beta, int k, int num_replicates,
                              std::uint64_t seed) {
  if (k < 0 || k > 5) throw domain_error("verify_theorem_1_1: k must be in 0..5");
  if (num_replicates < 100) throw domain_error("verify_theorem_1_1: too few replicates");

  const std::size_t n = static_cast<std::size_t>(num_replicates);
  std::vector<std::string> shape_of_a(n), shape_of_b(n);
  std::vector<double> s_a(n), s_b(n), w_a(n), w_b(n);  // total length, total weight
  std::vector<double> max_w_a(n), max_w_b(n);
  parallel_for(n, [&](std::size_t rep) {
    RngStream rng_a(seed, 2 * static_cast<std::uint64_t>(rep));
    RngStream rng_b(seed, 2 * static_cast<std::uint64_t>(rep) + 1);
    const WeightedViewRecord a = weighted_view(grow_two_colour(beta, k, rng_a).back());
    const WeightedViewRecord b = gh_marginal(beta, k, rng_b);
    shape_of_a[rep] = a.tree.shape_key();
    shape_of_b[rep] = b.tree.shape_key();
    s_a[rep] = a.total_length;
    s_b[rep] = b.total_length;
    double wa = 0.0, wb = 0.0, ma = 0.0, mb = 0.0;
    for (double w : a.weights) {
      wa += w;
      ma = std::max(ma, w);
    }
    for (double w : b.weights) {
      wb += w;
      mb = std::max(mb, w);
    }
    w_a[rep] = wa;
    w_b[rep] = wb;
    max_w_a[rep] = ma;
    max_w_b[rep] = mb;
  });
  std::map<std::string, long> shapes_a, shapes_b;
  for (std::size_t rep = 0; rep < n; ++rep) {
    ++shapes_a[shape_of_a[rep]];
    ++shapes_b[shape_of_b[rep]];
  }

  std::vector<TestReport> reports;
  reports.push_back(chi_square_two_sample("shape", shapes_a, shapes_b));
  reports.push_back(ks_two_sample("total_length", s_a, s_b));

  std::string modal;
  long best = -1;
  for (const auto& [key, c] : shapes_a)
    if (c > best) {
      best = c;
      modal = key;
    }
  std::vector<double> cond_a, cond_b;
  for (int rep = 0; rep < num_replicates; ++rep) {
    if (shape_of_a[rep] == modal) cond_a.push_back(max_w_a[rep]);
    if (shape_of_b[rep] == modal) cond_b.push_back(max_w_b[rep]);
  }
  if (all_equal(cond_a, cond_b))
    reports.push_back(
        trivially_equal("largest_weight_modal_shape", cond_a.size(), cond_b.size()));
  else
    reports.push_back(ks_two_sample("largest_weight_modal_shape", cond_a, cond_b));

  if (all_equal(w_a, w_b))
    reports.push_back(trivially_equal("total_weight", w_a.size(), w_b.size()));
  else
    reports.push_back(ks_two_sample("total_weight", w_a, w_b));

  TestBundle bundle = make_bundle("theorem-1-1", std::move(reports));
  for (auto& r : bundle.reports) r.seed = seed;
  return bundle;
}

TestBundle verify_ford_embedding(double beta, int runs, int m_max,
                                 std::uint64_t seed) {
  if (m_max < 2 || m_max > 6) throw domain_error("verify_ford_embedding: m_max in 2..6");
  if (runs < 100) throw domain_error("verify_ford_embedding: too few runs");
  const int k_steps = 30;
  const double beta_prime = beta / (1.0 - beta);

  std::vector<std::vector<ComponentRecord>> per_run(runs);
  parallel_for(static_cast<std::size_t>(runs), [&](std::size_t rep) {
    RngStream rng(seed, static_cast<std::uint64_t>(rep));
    per_run[rep] = grow_two_colour(beta, k_steps, rng).back().components;
  });
  std::vector<std::map<std::string, long>> shape_counts(m_max + 1);
  std::vector<std::vector<double>> ratios(m_max);  // index m: size m -> m+1
  std::vector<double> start_lengths;
  for (const auto& comps : per_run) {
    for (const auto& comp : comps) {
      for (int m = 2; m <= m_max && m <= comp.size; ++m)
        ++shape_counts[m][comp.shape_at_size[m - 1]];
      for (int m = 1; m < m_max && m + 1 <= comp.size; ++m)
        ratios[m].push_back(comp.length_at_size[m - 1] / comp.length_at_size[m]);
      if (comp.creation_comp_mass > 0.0)
        start_lengths.push_back(comp.length_at_size[0] *
                                std::pow(comp.creation_comp_mass, -beta));
    }
  }

  std::vector<TestReport> reports;
  OracleParams op;
  op.beta = Rational(beta_prime);
  for (int m = 2; m <= m_max; ++m) {
    const auto oracle = shape_prob_oracle_double(OracleModel::ford, op, m - 1);
    std::vector<long> counts;
    std::vector<double> probs;
    for (const auto& [key, p] : oracle) {
      const auto it = shape_counts[m].find(key);
      counts.push_back(it == shape_counts[m].end() ? 0 : it->second);
      probs.push_back(p);
    }
    long stray = 0;
    for (const auto& [key, c] : shape_counts[m])
      if (!oracle.count(key)) stray += c;
    counts.push_back(stray);
    probs.push_back(0.0);
    reports.push_back(
        chi_square("shape_chain_m" + std::to_string(m), counts, probs));
  }
  for (int m = 1; m < m_max; ++m)
    reports.push_back(ks_vs_beta("length_ratio_m" + std::to_string(m), ratios[m],
                                 m * (1.0 / beta - 1.0), 1.0 / beta - 2.0));
  reports.push_back(moment_test("start_length_mean", start_lengths,
                                ml_moment({beta, 1.0 - 2.0 * beta}, 1)));
  std::vector<double> start_sq;
  for (double x : start_lengths) start_sq.push_back(x * x);
  reports.push_back(moment_test("start_length_second_moment", start_sq,
                                ml_moment({beta, 1.0 - 2.0 * beta}, 2)));

  TestBundle bundle = make_bundle("ford-embedding", std::move(reports));
  for (auto& r : bundle.reports) r.seed = seed;
  return bundle;
}

std::vector<TestReport> calibration(std::uint64_t master_seed) {
  const int kSeeds = 100, kSample = 2000;
  std::vector<TestReport> out;
  auto summarize = [&](const std::string& name, int passes) {
    TestReport r;
    r.name = name;
    r.statistic = passes;
    r.reference = "own-null, 100 seeds";
    r.tolerance = 98.0;
    r.n1 = kSeeds;
    r.pass = passes >= 98;
    r.seed = master_seed;
    out.push_back(r);
  };

  int passes = 0;
  for (int i = 0; i < kSeeds; ++i) {
    RngStream rng(master_seed, 1000 + i);
    std::vector<double> xs(kSample), ys(kSample);
    for (auto& x : xs) x = rng.uniform();
    for (auto& y : ys) y = rng.uniform();
    if (ks_two_sample("cal", xs, ys).pass) ++passes;
  }
  summarize("calibration_ks_two_sample", passes);

  passes = 0;
  for (int i = 0; i < kSeeds; ++i) {
    RngStream rng(master_seed, 2000 + i);
    std::vector<double> xs(kSample);
    for (auto& x : xs) x = rng.beta(2.0, 3.0);
    if (ks_vs_beta("cal", xs, 2.0, 3.0).pass) ++passes;
  }
  summarize("calibration_ks_vs_beta", passes);

  passes = 0;
  for (int i = 0; i < kSeeds; ++i) {
    RngStream rng(master_seed, 3000 + i);
    std::vector<double> xs(kSample);
    for (auto& x : xs) x = rng.uniform();
    if (moment_test("cal", xs, 0.5).pass) ++passes;
  }
  summarize("calibration_moment_test", passes);

  passes = 0;
  for (int i = 0; i < kSeeds; ++i) {
    RngStream rng(master_seed, 4000 + i);
    std::vector<long> counts(6, 0);
    std::vector<double> probs(6, 1.0 / 6.0);
    for (int s = 0; s < 3000; ++s) ++counts[rng.index(6)];
    if (chi_square("cal", counts, probs).pass) ++passes;
  }
  summarize("calibration_chi_square", passes);

  passes = 0;
  for (int i = 0; i < kSeeds; ++i) {
    RngStream rng(master_seed, 5000 + i);
    std::map<std::string, long> a, b;
    for (int s = 0; s < 3000; ++s) ++a["c" + std::to_string(rng.index(6))];
    for (int s = 0; s < 3000; ++s) ++b["c" + std::to_string(rng.index(6))];
    if (chi_square_two_sample("cal", a, b).pass) ++passes;
  }
  summarize("calibration_chi_square_two_sample", passes);

  return out;
}

}  // namespace treesim
