#include "treesim/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "treesim/errors.hpp"

namespace treesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_shared_labels(const DiscreteTree& a, const DiscreteTree& b) {
  if (a.leaf_labels() != b.leaf_labels())
    throw domain_error("trees must share their leaf label set");
}

// per-node distance signature: root first, then leaves by label
std::vector<std::vector<double>> node_signatures(const DiscreteTree& t) {
  std::vector<int> refs = {t.root()};
  for (int lab : t.leaf_labels()) refs.push_back(t.node_of_label(lab));
  std::vector<std::vector<double>> sig(t.num_nodes());
  for (int n = 0; n < t.num_nodes(); ++n) {
    sig[n].reserve(refs.size());
    for (int r : refs) sig[n].push_back(t.node_distance(n, r));
  }
  return sig;
}

// nodes touching the given component; root alone if the component is absent
std::vector<int> component_nodes(const DiscreteTree& t, int comp) {
  std::set<int> nodes;
  for (int e = 0; e < t.num_edges(); ++e)
    if (t.edge(e).mark && t.edge(e).comp == comp) {
      nodes.insert(t.edge(e).parent);
      nodes.insert(t.edge(e).child);
    }
  if (nodes.empty()) return {t.root()};
  return {nodes.begin(), nodes.end()};
}

double directed_signature_hausdorff(const std::vector<int>& xs,
                                    const std::vector<int>& ys,
                                    const std::vector<std::vector<double>>& sig_x,
                                    const std::vector<std::vector<double>>& sig_y) {
  double sup = 0.0;
  for (int x : xs) {
    double best = kInf;
    for (int y : ys) {
      double delta = 0.0;
      for (std::size_t c = 0; c < sig_x[x].size(); ++c)
        delta = std::max(delta, std::abs(sig_x[x][c] - sig_y[y][c]));
      best = std::min(best, delta);
    }
    sup = std::max(sup, best);
  }
  return sup;
}

// small Dinic network on doubles
struct FlowNet {
  struct Arc {
    int to;
    double cap;
    int rev;
  };
  std::vector<std::vector<Arc>> g;
  std::vector<int> level, iter;

  explicit FlowNet(int n) : g(n) {}

  void add(int u, int v, double cap) {
    g[u].push_back({v, cap, static_cast<int>(g[v].size())});
    g[v].push_back({u, 0.0, static_cast<int>(g[u].size()) - 1});
  }

  bool bfs(int s, int t) {
    level.assign(g.size(), -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const auto& a : g[u])
        if (a.cap > 1e-15 && level[a.to] < 0) {
          level[a.to] = level[u] + 1;
          q.push(a.to);
        }
    }
    return level[t] >= 0;
  }

  double dfs(int u, int t, double f) {
    if (u == t) return f;
    for (int& i = iter[u]; i < static_cast<int>(g[u].size()); ++i) {
      Arc& a = g[u][i];
      if (a.cap > 1e-15 && level[a.to] == level[u] + 1) {
        const double d = dfs(a.to, t, std::min(f, a.cap));
        if (d > 0.0) {
          a.cap -= d;
          g[a.to][a.rev].cap += d;
          return d;
        }
      }
    }
    return 0.0;
  }

  double max_flow(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      iter.assign(g.size(), 0);
      for (;;) {
        const double f = dfs(s, t, kInf);
        if (f <= 0.0) break;
        flow += f;
      }
    }
    return flow;
  }
};

// largest mu(S) - nu(S^tau) over subsets of the mu support, by bitmask scan
double worst_gap_exact(const std::vector<int>& sup_mu, const std::vector<int>& sup_nu,
                       const std::vector<double>& mu, const std::vector<double>& nu,
                       const std::vector<std::vector<double>>& dist, double tau) {
  const int na = static_cast<int>(sup_mu.size());
  const int nb = static_cast<int>(sup_nu.size());
  std::vector<unsigned> cover(na, 0);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (dist[sup_mu[i]][sup_nu[j]] <= tau) cover[i] |= 1u << j;
  std::vector<double> nu_sum(1u << nb, 0.0);
  for (unsigned m = 1; m < (1u << nb); ++m) {
    const unsigned low = m & (~m + 1u);
    const int j = std::countr_zero(low);
    nu_sum[m] = nu_sum[m ^ low] + nu[sup_nu[j]];
  }
  std::vector<double> mu_sum(1u << na, 0.0);
  std::vector<unsigned> cov(1u << na, 0);
  double worst = 0.0;
  for (unsigned m = 1; m < (1u << na); ++m) {
    const unsigned low = m & (~m + 1u);
    const int i = std::countr_zero(low);
    mu_sum[m] = mu_sum[m ^ low] + mu[sup_mu[i]];
    cov[m] = cov[m ^ low] | cover[i];
    worst = std::max(worst, mu_sum[m] - nu_sum[cov[m]]);
  }
  return worst;
}

double worst_gap_flow(const std::vector<int>& sup_a, const std::vector<int>& sup_b,
                      const std::vector<double>& a, const std::vector<double>& b,
                      const std::vector<std::vector<double>>& dist, double tau) {
  const int na = static_cast<int>(sup_a.size());
  const int nb = static_cast<int>(sup_b.size());
  FlowNet net(na + nb + 2);
  const int s = na + nb, t = na + nb + 1;
  double total_a = 0.0, total_b = 0.0;
  for (int i = 0; i < na; ++i) {
    net.add(s, i, a[sup_a[i]]);
    total_a += a[sup_a[i]];
  }
  for (int j = 0; j < nb; ++j) {
    net.add(na + j, t, b[sup_b[j]]);
    total_b += b[sup_b[j]];
  }
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (dist[sup_a[i]][sup_b[j]] <= tau) net.add(i, na + j, kInf);
  const double flow = net.max_flow(s, t);
  return std::max(total_a, total_b) - flow;
}

}  // namespace

double gh_labeled(const DiscreteTree& a, const DiscreteTree& b) {
  require_shared_labels(a, b);
  const auto ma = a.leaf_matrix();
  const auto mb = b.leaf_matrix();
  double worst = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i)
    for (std::size_t j = 0; j < ma.size(); ++j)
      worst = std::max(worst, std::abs(ma[i][j] - mb[i][j]));
  return 0.5 * worst;
}

MarkedDistance gh_marked_truncated(const DiscreteTree& a, const DiscreteTree& b,
                                   int k_max) {
  require_shared_labels(a, b);
  if (k_max < 1) throw domain_error("gh_marked_truncated: k_max must be >= 1");
  const double ambient = gh_labeled(a, b);
  const auto sig_a = node_signatures(a);
  const auto sig_b = node_signatures(b);

  MarkedDistance out;
  double comp_worst = 0.0;
  double scale = 1.0;
  for (int k = 1; k <= k_max; ++k) {
    const auto xs = component_nodes(a, k);
    const auto ys = component_nodes(b, k);
    const double h =
        0.5 * std::max(directed_signature_hausdorff(xs, ys, sig_a, sig_b),
                       directed_signature_hausdorff(ys, xs, sig_b, sig_a));
    comp_worst = std::max(comp_worst, h);
    scale *= 0.5;
    out.value += scale * std::max(ambient, comp_worst);
  }
  out.tail_bound = scale * std::max(a.diameter(), b.diameter());
  return out;
}

double hausdorff_subtree(const DiscreteTree& tree, const std::vector<int>& edges_a,
                         const std::vector<int>& edges_b) {
  for (int e : edges_a)
    if (e < 0 || e >= tree.num_edges()) throw domain_error("hausdorff_subtree: bad edge id");
  for (int e : edges_b)
    if (e < 0 || e >= tree.num_edges()) throw domain_error("hausdorff_subtree: bad edge id");

  auto dist_to_set = [&](const std::vector<int>& edges) {
    std::vector<double> d(tree.num_nodes(), kInf);
    if (edges.empty()) {
      for (int n = 0; n < tree.num_nodes(); ++n) d[n] = tree.depth_of(n);
      return d;
    }
    for (int n = 0; n < tree.num_nodes(); ++n)
      for (int e : edges) {
        d[n] = std::min(d[n], tree.node_distance(n, tree.edge(e).parent));
        d[n] = std::min(d[n], tree.node_distance(n, tree.edge(e).child));
      }
    return d;
  };
  const auto da = dist_to_set(edges_a);
  const auto db = dist_to_set(edges_b);

  auto directed = [&](const std::vector<int>& edges, const std::vector<int>& other,
                      const std::vector<double>& d_other, double root_fallback) {
    if (edges.empty()) return root_fallback;  // set is the root point
    const std::set<int> other_set(other.begin(), other.end());
    double sup = 0.0;
    for (int e : edges) {
      if (other_set.count(e)) continue;
      const double du = d_other[tree.edge(e).parent];
      const double dv = d_other[tree.edge(e).child];
      sup = std::max(sup, 0.5 * (du + dv + tree.edge(e).len));
    }
    return sup;
  };
  return std::max(directed(edges_a, edges_b, db, db[tree.root()]),
                  directed(edges_b, edges_a, da, da[tree.root()]));
}

double prokhorov_finite(const std::vector<double>& mass_a,
                        const std::vector<double>& mass_b,
                        const std::vector<std::vector<double>>& dist,
                        bool force_exact) {
  const std::size_t n = mass_a.size();
  if (mass_b.size() != n || dist.size() != n)
    throw domain_error("prokhorov_finite: size mismatch");
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mass_a[i] < 0.0 || mass_b[i] < 0.0)
      throw domain_error("prokhorov_finite: negative mass");
    total_a += mass_a[i];
    total_b += mass_b[i];
    if (dist[i].size() != n) throw domain_error("prokhorov_finite: ragged matrix");
    for (std::size_t j = 0; j < n; ++j)
      if (dist[i][j] < 0.0 || std::abs(dist[i][j] - dist[j][i]) > 1e-12)
        throw domain_error("prokhorov_finite: invalid distance matrix");
  }
  if (std::abs(total_a - 1.0) > 1e-9 || std::abs(total_b - 1.0) > 1e-9)
    throw domain_error("prokhorov_finite: measures must be probabilities");

  std::vector<int> sup_a, sup_b;
  for (std::size_t i = 0; i < n; ++i) {
    if (mass_a[i] > 0.0) sup_a.push_back(static_cast<int>(i));
    if (mass_b[i] > 0.0) sup_b.push_back(static_cast<int>(i));
  }
  const bool small = sup_a.size() <= 15 && sup_b.size() <= 15;
  if (force_exact && !small)
    throw capability_error("prokhorov_finite: exact mode limited to 15 support points");

  std::set<double> thresholds = {0.0};
  for (int i : sup_a)
    for (int j : sup_b) thresholds.insert(dist[i][j]);
  const std::vector<double> taus(thresholds.begin(), thresholds.end());

  double best = kInf;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    double gap;
    if (small) {
      gap = std::max(
          worst_gap_exact(sup_a, sup_b, mass_a, mass_b, dist, taus[t]),
          worst_gap_exact(sup_b, sup_a, mass_b, mass_a, dist, taus[t]));
    } else {
      gap = worst_gap_flow(sup_a, sup_b, mass_a, mass_b, dist, taus[t]);
    }
    const double candidate = std::max(taus[t], gap);
    const bool last = t + 1 == taus.size();
    if (last || candidate < taus[t + 1] + 1e-15) best = std::min(best, candidate);
  }
  return best;
}

}  // namespace treesim
