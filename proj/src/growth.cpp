#include "treesim/growth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "treesim/distributions.hpp"
#include "treesim/errors.hpp"

namespace treesim {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 0.5)) throw domain_error("beta must lie in (0,1/2]");
}

// children edge ids sorted by least leaf label below
std::vector<int> children_by_least_label(const DiscreteTree& t, int node_id) {
  std::function<int(int)> min_leaf = [&](int nid) -> int {
    const auto& n = t.node(nid);
    if (n.child_edges.empty()) return n.label >= 0 ? n.label : (1 << 30);
    int best = 1 << 30;
    for (int e : n.child_edges) best = std::min(best, min_leaf(t.edge(e).child));
    return best;
  };
  std::vector<int> kids = t.node(node_id).child_edges;
  std::sort(kids.begin(), kids.end(), [&](int a, int b) {
    return min_leaf(t.edge(a).child) < min_leaf(t.edge(b).child);
  });
  return kids;
}

double subtree_mass_below(const DiscreteTree& t, int edge_id) {
  const auto& e = t.edge(edge_id);
  double s = e.mass + t.node(e.child).atom_mass;
  for (int ce : t.node(e.child).child_edges) s += subtree_mass_below(t, ce);
  return s;
}

}  // namespace

double branch_weight(double beta, int degree) {
  return (degree - 3) * (1.0 - beta) + 1.0 - 2.0 * beta;
}

std::string component_shape_key(const DiscreteTree& tree, const ComponentRecord& rec) {
  int top_edge = -1;
  for (int e = 0; e < tree.num_edges(); ++e)
    if (tree.edge(e).mark && tree.edge(e).comp == rec.id) {
      top_edge = e;
      break;
    }
  if (top_edge < 0) throw domain_error("component_shape_key: empty component");
  for (;;) {
    const int p = tree.edge(top_edge).parent;
    const int pe = tree.node(p).parent_edge;
    if (pe == -1 || !tree.edge(pe).mark || tree.edge(pe).comp != rec.id) break;
    top_edge = pe;
  }
  const int comp_root = tree.edge(top_edge).parent;
  std::function<std::string(int)> enc = [&](int nid) -> std::string {
    std::vector<std::string> parts;
    for (int e : tree.node(nid).child_edges)
      if (tree.edge(e).mark && tree.edge(e).comp == rec.id)
        parts.push_back("u" + enc(tree.edge(e).child));
    if (parts.empty()) return "L" + std::to_string(rec.junction_leaf.at(nid));
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ",";
      out += parts[i];
    }
    return out + ")";
  };
  return enc(comp_root);
}

// ---------------- mass-first growth with deferred lengths ----------------
//
// The selection rules never look at lengths, so the mass and shape process is
// sampled forward with zero-length placeholders. The final pieces are then
// independent rescaled strings given the whole history, so their lengths are
// drawn as mass^beta times fresh ML variables and summed back into every
// earlier state (splitting never changes existing material, attaching only
// adds new material). This keeps the joint law of masses and lengths exact,
// which per-step independent length fractions would not.

namespace {

struct SplitTrace {
  // for every lower piece: the edge it was split off and the state index
  // from which it exists separately
  std::vector<int> from, at_state;

  void grow_to(int num_edges) {
    from.resize(num_edges, -1);
    at_state.resize(num_edges, -1);
  }

  // the edge that contained piece p in state j
  int ancestor(int p, int j) const {
    while (from[p] != -1 && at_state[p] > j) p = from[p];
    return p;
  }
};

void realize_lengths(std::vector<GrowthState>& states, const SplitTrace& trace,
                     double beta, RngStream& rng) {
  DiscreteTree& final_tree = states.back().tree;
  std::vector<double> final_len(final_tree.num_edges());
  for (int e = 0; e < final_tree.num_edges(); ++e) {
    const AlphaTheta kind = final_tree.position(e) == 'e'
                                ? AlphaTheta{beta, 1.0 - 2.0 * beta}
                                : AlphaTheta{beta, beta};
    final_len[e] = std::pow(final_tree.edge(e).mass, beta) * sample_ml(kind, rng);
  }
  for (std::size_t j = 0; j < states.size(); ++j) {
    DiscreteTree& t = states[j].tree;
    for (int e = 0; e < t.num_edges(); ++e) t.edge(e).len = 0.0;
    for (int p = 0; p < final_tree.num_edges(); ++p) {
      const int anc = trace.ancestor(p, static_cast<int>(j));
      if (anc < t.num_edges()) t.edge(anc).len += final_len[p];
    }
  }
  // component length snapshots: length on reaching size m is the component
  // length in the state right after that insertion
  for (auto& state : states)
    for (auto& rec : state.components)
      for (std::size_t m = 0; m < rec.insertion_steps.size(); ++m)
        rec.length_at_size[m] =
            states[rec.insertion_steps[m] + 1].tree.component_length(rec.id);
}

void two_colour_step(GrowthState& state, SplitTrace& trace, RngStream& rng) {
  DiscreteTree& t = state.tree;
  const double beta = state.beta;

  // select an edge proportional to mass
  double total = 0.0;
  for (int e = 0; e < t.num_edges(); ++e) total += t.edge(e).mass;
  double r = rng.uniform() * total;
  int eid = t.num_edges() - 1;
  for (int e = 0; e < t.num_edges(); ++e) {
    r -= t.edge(e).mass;
    if (r <= 0.0) {
      eid = e;
      break;
    }
  }

  const char pos = t.position(eid);
  const int edge_comp = t.edge(eid).comp;
  StringDescriptor desc;
  desc.mass = t.edge(eid).mass;
  desc.length = 1.0;  // lengths are deferred; the split laws ignore it
  StringSplit sp;
  if (pos == 'e') {
    desc.kind = {beta, 1.0 - 2.0 * beta};
    sp = coin_toss_split(desc, rng);
  } else {
    desc.kind = {beta, beta};
    sp = uniform_atom_split(desc, rng);
  }
  const auto res =
      t.split_edge(eid, 0.5, sp.mass_frac_left, sp.mass_frac_right);
  const double c = res.atom_mass;

  const BetaMixedDraw bm = draw_beta_mixed(beta, rng);
  const double marked_mass = c * bm.marked_mass_frac;
  const double unmarked_mass = c * (1.0 - bm.marked_mass_frac);

  const bool degenerate_mark = marked_mass == 0.0;
  int comp_id = 0;
  if (!degenerate_mark)
    comp_id = (edge_comp > 0) ? edge_comp
                              : static_cast<int>(state.components.size()) + 1;

  std::vector<DiscreteTree::Segment> segs;
  segs.push_back({0.0, marked_mass, true, comp_id});
  segs.push_back({0.0, unmarked_mass, false, 0});
  const auto created = t.attach_branch(res.mid_node, segs, state.step + 1);

  trace.grow_to(t.num_edges());
  trace.from[res.lower_edge] = eid;
  trace.at_state[res.lower_edge] = state.step + 1;

  if (!degenerate_mark) {
    const int junction = created.front();
    if (edge_comp > 0) {
      ComponentRecord& rec = state.components[comp_id - 1];
      rec.junction_leaf[junction] = rec.size;
      ++rec.size;
      rec.insertion_steps.push_back(state.step);
      rec.length_at_size.push_back(0.0);
      rec.shape_at_size.push_back(component_shape_key(t, rec));
    } else {
      ComponentRecord rec;
      rec.id = comp_id;
      rec.size = 1;
      rec.creation_step = state.step;
      rec.creation_atom_mass = c;
      rec.creation_comp_mass = marked_mass;
      rec.insertion_steps.push_back(state.step);
      rec.length_at_size.push_back(0.0);
      rec.junction_leaf[junction] = 0;
      state.components.push_back(rec);
      state.components.back().shape_at_size.push_back(
          component_shape_key(t, state.components.back()));
    }
  }
  ++state.step;
}

void stable_mass_step(GrowthState& state, SplitTrace& trace, RngStream& rng) {
  DiscreteTree& t = state.tree;
  const double beta = state.beta;

  double total = 0.0;
  for (int e = 0; e < t.num_edges(); ++e) total += t.edge(e).mass;
  for (int n = 0; n < t.num_nodes(); ++n) total += t.node(n).atom_mass;
  double r = rng.uniform() * total;

  int target_node = -1;
  double atom = 0.0;
  for (int e = 0; e < t.num_edges(); ++e) {
    r -= t.edge(e).mass;
    if (r <= 0.0) {
      StringDescriptor desc;
      desc.kind = {beta, beta};
      desc.mass = t.edge(e).mass;
      desc.length = 1.0;
      const StringSplit sp = uniform_atom_split(desc, rng);
      const auto res = t.split_edge(e, 0.5, sp.mass_frac_left, sp.mass_frac_right);
      trace.grow_to(t.num_edges());
      trace.from[res.lower_edge] = e;
      trace.at_state[res.lower_edge] = state.step + 1;
      target_node = res.mid_node;
      atom = res.atom_mass;
      break;
    }
  }
  if (target_node < 0) {
    for (int n = 0; n < t.num_nodes(); ++n) {
      r -= t.node(n).atom_mass;
      if (r <= 0.0) {
        target_node = n;
        atom = t.node(n).atom_mass;
        break;
      }
    }
  }
  if (target_node < 0) throw domain_error("grow_stable_mass: selection failed");

  const auto& node = t.node(target_node);
  const int degree =
      static_cast<int>(node.child_edges.size()) + (node.parent == -1 ? 0 : 1);
  const double q = rng.beta(beta, (degree - 2) * (1.0 - beta) + 1.0 - 2.0 * beta);
  state.fragments.emplace_back(degree, q);
  const double grabbed = q * atom;
  t.node(target_node).atom_mass = (1.0 - q) * atom;
  t.attach_branch(target_node, {{0.0, grabbed, false, 0}}, state.step + 1);
  trace.grow_to(t.num_edges());
  ++state.step;
}

}  // namespace

std::vector<GrowthState> grow_two_colour(double beta, int k_max, RngStream& rng) {
  check_beta(beta);
  if (k_max < 0) throw domain_error("grow_two_colour: k_max must be >= 0");
  GrowthState init;
  init.beta = beta;
  init.tree = DiscreteTree::single_edge(0.0, 1.0, 0);
  SplitTrace trace;
  trace.grow_to(1);
  std::vector<GrowthState> out;
  out.push_back(std::move(init));
  for (int k = 0; k < k_max; ++k) {
    GrowthState next = out.back();
    two_colour_step(next, trace, rng);
    out.push_back(std::move(next));
  }
  realize_lengths(out, trace, beta, rng);
  return out;
}

std::vector<GrowthState> grow_stable_mass(double beta, int k_max, RngStream& rng) {
  check_beta(beta);
  if (k_max < 0) throw domain_error("grow_stable_mass: k_max must be >= 0");
  GrowthState init;
  init.beta = beta;
  init.tree = DiscreteTree::single_edge(0.0, 1.0, 0);
  SplitTrace trace;
  trace.grow_to(1);
  std::vector<GrowthState> out;
  out.push_back(std::move(init));
  for (int k = 0; k < k_max; ++k) {
    GrowthState next = out.back();
    stable_mass_step(next, trace, rng);
    out.push_back(std::move(next));
  }
  realize_lengths(out, trace, beta, rng);
  return out;
}

// ---------------- views and marginals ----------------

WeightedViewRecord weighted_view(const GrowthState& state) {
  WeightedViewRecord rec;
  rec.tree = state.tree.contract_marked();
  const int r = state.tree.num_components();
  for (int i = 1; i <= r; ++i) rec.weights.push_back(state.tree.component_length(i));
  rec.total_length = state.tree.total_length();
  return rec;
}

WeightedViewRecord gh_marginal(double beta, int k, RngStream& rng) {
  GrowthState state = grow_stable_mass(beta, k, rng).back();
  WeightedViewRecord rec;
  rec.tree = state.tree;
  double total = 0.0;
  for (int e = 0; e < rec.tree.num_edges(); ++e) {
    auto& edge = rec.tree.edge(e);
    edge.len = std::pow(edge.mass, beta) * sample_ml({beta, beta}, rng);
    total += edge.len;
  }
  for (int n = 0; n < rec.tree.num_nodes(); ++n) {
    const auto& node = rec.tree.node(n);
    if (node.atom_mass <= 0.0) continue;
    const int degree =
        static_cast<int>(node.child_edges.size()) + (node.parent == -1 ? 0 : 1);
    const double w = std::pow(node.atom_mass, beta) *
                     sample_ml({beta, branch_weight(beta, degree)}, rng);
    rec.weights.push_back(w);
    total += w;
  }
  rec.total_length = total;
  return rec;
}

// ---------------- Ford chain ----------------

std::vector<DiscreteTree> grow_ford(double beta_prime, int m_max, RngStream& rng) {
  if (!(beta_prime > 0.0 && beta_prime < 1.0))
    throw domain_error("grow_ford: beta_prime in (0,1)");
  if (m_max < 1) throw domain_error("grow_ford: m_max >= 1");
  DiscreteTree shape = DiscreteTree::single_edge(1.0, 0.0, 0);
  std::vector<DiscreteTree> out;
  for (int m = 1; m <= m_max; ++m) {
    // per-m exact lengths: S'_m * Dirichlet(1,..,1, (1-b')/b',..)
    const double s = sample_ml({beta_prime, m - beta_prime}, rng);
    std::vector<int> eids;
    std::vector<double> weights;
    for (int e = 0; e < shape.num_edges(); ++e) {
      eids.push_back(e);
      const bool external = shape.node(shape.edge(e).child).child_edges.empty();
      weights.push_back(external ? (1.0 - beta_prime) / beta_prime : 1.0);
    }
    const DirichletSplit d = sample_dirichlet(weights, rng);
    DiscreteTree snap = shape;
    for (std::size_t i = 0; i < eids.size(); ++i) snap.edge(eids[i]).len = s * d.values[i];
    out.push_back(std::move(snap));

    if (m == m_max) break;
    // shape growth: internal weight b', external 1-b'
    double total = 0.0;
    std::vector<double> w(shape.num_edges());
    for (int e = 0; e < shape.num_edges(); ++e) {
      const bool external = shape.node(shape.edge(e).child).child_edges.empty();
      w[e] = external ? 1.0 - beta_prime : beta_prime;
      total += w[e];
    }
    double r = rng.uniform() * total;
    int pick = shape.num_edges() - 1;
    for (int e = 0; e < shape.num_edges(); ++e) {
      r -= w[e];
      if (r <= 0.0) {
        pick = e;
        break;
      }
    }
    const auto res = shape.split_edge(pick, 0.5, 0.0, 0.0);
    shape.edge(res.upper_edge).len = 1.0;
    shape.edge(res.lower_edge).len = 1.0;
    shape.attach_branch(res.mid_node, {{1.0, 0.0, false, 0}}, m);
  }
  return out;
}

// ---------------- discrete models ----------------

namespace {

// degree-keyed vertex buckets with O(1) move
struct VertexBuckets {
  std::vector<std::vector<int>> by_degree;  // index: degree
  std::vector<int> degree_of, pos_of;

  void ensure_node(int nid) {
    if (nid >= static_cast<int>(degree_of.size())) {
      degree_of.resize(nid + 1, -1);
      pos_of.resize(nid + 1, -1);
    }
  }

  void set_degree(int nid, int d) {
    ensure_node(nid);
    if (degree_of[nid] >= 0) {
      auto& bucket = by_degree[degree_of[nid]];
      const int p = pos_of[nid];
      bucket[p] = bucket.back();
      pos_of[bucket[p]] = p;
      bucket.pop_back();
    }
    if (d >= static_cast<int>(by_degree.size())) by_degree.resize(d + 1);
    degree_of[nid] = d;
    pos_of[nid] = static_cast<int>(by_degree[d].size());
    by_degree[d].push_back(nid);
  }
};

int tree_degree(const DiscreteTree& t, int nid) {
  return static_cast<int>(t.node(nid).child_edges.size()) +
         (t.node(nid).parent == -1 ? 0 : 1);
}

}  // namespace

DiscreteTree marchal(double beta, int n_max, RngStream& rng) {
  check_beta(beta);
  if (n_max < 0) throw domain_error("marchal: n_max >= 0");
  DiscreteTree t = DiscreteTree::single_edge(1.0, 0.0, 0);
  VertexBuckets verts;
  for (int n = 0; n < n_max; ++n) {
    double total = t.num_edges() * beta;
    for (int d = 3; d < static_cast<int>(verts.by_degree.size()); ++d)
      total += verts.by_degree[d].size() * branch_weight(beta, d);
    double r = rng.uniform() * total;
    if (r <= t.num_edges() * beta) {
      const int e = static_cast<int>(rng.index(t.num_edges()));
      const auto res = t.split_edge(e, 0.5, 0.0, 0.0);
      t.edge(res.upper_edge).len = 1.0;
      t.edge(res.lower_edge).len = 1.0;
      t.attach_branch(res.mid_node, {{1.0, 0.0, false, 0}}, n + 1);
      verts.set_degree(res.mid_node, 3);
    } else {
      r -= t.num_edges() * beta;
      int pick = -1;
      for (int d = 3; d < static_cast<int>(verts.by_degree.size()); ++d) {
        const double w = verts.by_degree[d].size() * branch_weight(beta, d);
        if (r <= w && !verts.by_degree[d].empty()) {
          pick = verts.by_degree[d][rng.index(verts.by_degree[d].size())];
          break;
        }
        r -= w;
      }
      if (pick < 0) {  // numeric slack: fall back to an edge
        const int e = static_cast<int>(rng.index(t.num_edges()));
        const auto res = t.split_edge(e, 0.5, 0.0, 0.0);
        t.edge(res.upper_edge).len = 1.0;
        t.edge(res.lower_edge).len = 1.0;
        t.attach_branch(res.mid_node, {{1.0, 0.0, false, 0}}, n + 1);
        verts.set_degree(res.mid_node, 3);
        continue;
      }
      t.attach_branch(pick, {{1.0, 0.0, false, 0}}, n + 1);
      verts.set_degree(pick, tree_degree(t, pick));
    }
  }
  return t;
}

DiscreteTree alpha_gamma(double alpha, double gamma, int n_max, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(gamma >= 0.0 && gamma <= alpha))
    throw domain_error("alpha_gamma: need 0 < alpha < 1 and 0 <= gamma <= alpha");
  if (n_max < 0) throw domain_error("alpha_gamma: n_max >= 0");
  DiscreteTree t = DiscreteTree::single_edge(1.0, 0.0, 0);
  VertexBuckets verts;
  auto vertex_weight = [&](int d) { return (d - 2) * alpha - gamma; };
  for (int n = 0; n < n_max; ++n) {
    int ext = 0, internal = 0;
    std::vector<char> is_ext(t.num_edges());
    for (int e = 0; e < t.num_edges(); ++e) {
      is_ext[e] = t.node(t.edge(e).child).child_edges.empty();
      (is_ext[e] ? ext : internal)++;
    }
    double total = ext * (1.0 - alpha) + internal * gamma;
    for (int d = 3; d < static_cast<int>(verts.by_degree.size()); ++d)
      total += verts.by_degree[d].size() * vertex_weight(d);
    double r = rng.uniform() * total;
    int pick_edge = -1;
    for (int e = 0; e < t.num_edges() && pick_edge < 0; ++e) {
      r -= is_ext[e] ? (1.0 - alpha) : gamma;
      if (r <= 0.0) pick_edge = e;
    }
    if (pick_edge >= 0) {
      const auto res = t.split_edge(pick_edge, 0.5, 0.0, 0.0);
      t.edge(res.upper_edge).len = 1.0;
      t.edge(res.lower_edge).len = 1.0;
      t.attach_branch(res.mid_node, {{1.0, 0.0, false, 0}}, n + 1);
      verts.set_degree(res.mid_node, 3);
    } else {
      int pick = -1;
      for (int d = 3; d < static_cast<int>(verts.by_degree.size()); ++d) {
        const double w = verts.by_degree[d].size() * vertex_weight(d);
        if (r <= w && !verts.by_degree[d].empty()) {
          pick = verts.by_degree[d][rng.index(verts.by_degree[d].size())];
          break;
        }
        r -= w;
      }
      if (pick < 0) pick = t.num_nodes() - 1;
      t.attach_branch(pick, {{1.0, 0.0, false, 0}}, n + 1);
      verts.set_degree(pick, tree_degree(t, pick));
    }
  }
  return t;
}

DiscreteTree discrete_two_colour(double beta, int n_max, RngStream& rng) {
  check_beta(beta);
  if (n_max < 0) throw domain_error("discrete_two_colour: n_max >= 0");
  DiscreteTree t = DiscreteTree::single_edge(1.0, 0.0, 0);
  int num_comps = 0;
  for (int n = 0; n < n_max; ++n) {
    // weight beta: unmarked + internal marked; weight 1-2beta: external marked
    double total = 0.0;
    std::vector<double> w(t.num_edges());
    for (int e = 0; e < t.num_edges(); ++e) {
      w[e] = (t.position(e) == 'e') ? 1.0 - 2.0 * beta : beta;
      total += w[e];
    }
    double r = rng.uniform() * total;
    int pick = t.num_edges() - 1;
    for (int e = 0; e < t.num_edges(); ++e) {
      r -= w[e];
      if (r <= 0.0) {
        pick = e;
        break;
      }
    }
    const bool was_marked = t.edge(pick).mark;
    const int comp = was_marked ? t.edge(pick).comp : ++num_comps;
    const auto res = t.split_edge(pick, 0.5, 0.0, 0.0);
    t.edge(res.upper_edge).len = 1.0;
    t.edge(res.lower_edge).len = 1.0;
    t.attach_branch(res.mid_node,
                    {{1.0, 0.0, true, comp}, {1.0, 0.0, false, 0}}, n + 1);
  }
  return t;
}

// ---------------- branch point replacement ----------------

DiscreteTree branch_point_replace(const GrowthState& stable_state, int n_sticks,
                                  RngStream& rng) {
  if (n_sticks < 10) throw domain_error("branch_point_replace: n_sticks must be >= 10");
  const DiscreteTree& t = stable_state.tree;
  const double beta = stable_state.beta;
  const double beta_prime = beta / (1.0 - beta);

  DiscreteTree out;
  out.add_root();
  out.node(0).atom_mass = t.node(t.root()).atom_mass;
  out.node(0).label = t.node(t.root()).label;
  int next_comp = 0;

  std::function<void(int, int)> build = [&](int old_node, int new_node) {
    const auto kids = children_by_least_label(t, old_node);
    const bool is_branch = kids.size() >= 2;
    if (!is_branch) {
      for (int e : kids) {
        const auto& edge = t.edge(e);
        const int nn = out.add_child(new_node, edge.len, edge.mass, false, 0,
                                     t.node(edge.child).label);
        out.node(nn).atom_mass = t.node(edge.child).atom_mass;
        build(edge.child, nn);
      }
      return;
    }
    const int m = static_cast<int>(kids.size()) - 1;  // degree - 2
    // continuation subtree (least label) stays at the Ford root
    {
      const auto& edge = t.edge(kids[0]);
      const int nn = out.add_child(new_node, edge.len, edge.mass, false, 0,
                                   t.node(edge.child).label);
      out.node(nn).atom_mass = t.node(edge.child).atom_mass;
      build(edge.child, nn);
    }
    // scale: (P^beta) (D^{beta/(1-beta)})
    double p = t.node(old_node).atom_mass;
    for (std::size_t j = 1; j < kids.size(); ++j) p += subtree_mass_below(t, kids[j]);
    const StickSequence sticks = gem_sticks({1.0 - beta, -beta}, n_sticks, rng);
    const double div =
        alpha_diversity(sticks.sticks, 1.0 - beta, DiversityEstimator::stick_order).value;
    const double c_inv = std::pow(p, beta) * std::pow(div, beta / (1.0 - beta));

    const DiscreteTree ford = grow_ford(beta_prime, m, rng).back();
    const int comp = ++next_comp;
    std::vector<int> junction_of_label(m, -1);
    std::function<void(int, int)> embed = [&](int ford_node, int target) {
      for (int fe : ford.node(ford_node).child_edges) {
        const auto& e = ford.edge(fe);
        const int nn = out.add_child(target, e.len * c_inv, 0.0, true, comp, -1);
        if (ford.node(e.child).child_edges.empty())
          junction_of_label[ford.node(e.child).label] = nn;
        embed(e.child, nn);
      }
    };
    embed(ford.root(), new_node);
    for (std::size_t j = 1; j < kids.size(); ++j) {
      const auto& edge = t.edge(kids[j]);
      const int target = junction_of_label[static_cast<int>(j) - 1];
      const int nn = out.add_child(target, edge.len, edge.mass, false, 0,
                                   t.node(edge.child).label);
      out.node(nn).atom_mass = t.node(edge.child).atom_mass;
      build(edge.child, nn);
    }
  };
  build(t.root(), 0);
  return out;
}

// ---------------- recursive construction ----------------

RecursiveResult recursive_construction(double beta, int depth, int atoms_per_string,
                                       RngStream& rng) {
  check_beta(beta);
  if (depth < 0 || atoms_per_string < 1)
    throw domain_error("recursive_construction: bad depth or atom count");
  if (depth > 6 || atoms_per_string > 20)
    throw capability_error("recursive_construction: depth <= 6, atoms_per_string <= 20");

  RecursiveResult result;
  DiscreteTree& t = result.tree;
  const int root = (t = DiscreteTree::single_edge(sample_ml({beta, beta}, rng), 1.0, -1),
                    t.root());
  (void)root;
  int next_comp = 0;

  struct Seg {
    int edge;
    AlphaTheta kind;
  };
  // realize `count` atoms on one string given as mass-carrying segments
  auto realize = [&](std::vector<Seg> segs, int count) {
    std::vector<std::pair<int, double>> atoms;
    for (int i = 0; i < count; ++i) {
      double total = 0.0;
      for (const auto& s : segs) total += t.edge(s.edge).mass;
      if (total <= 0.0) break;
      double r = rng.uniform() * total;
      std::size_t pick = segs.size() - 1;
      for (std::size_t j = 0; j < segs.size(); ++j) {
        r -= t.edge(segs[j].edge).mass;
        if (r <= 0.0) {
          pick = j;
          break;
        }
      }
      StringDescriptor desc;
      desc.kind = segs[pick].kind;
      desc.mass = t.edge(segs[pick].edge).mass;
      desc.length = t.edge(segs[pick].edge).len;
      const StringSplit sp = (desc.kind.theta == desc.kind.alpha)
                                 ? uniform_atom_split(desc, rng)
                                 : coin_toss_split(desc, rng);
      const auto res = t.split_edge(segs[pick].edge, sp.length_frac_left,
                                    sp.mass_frac_left, sp.mass_frac_right);
      t.node(res.mid_node).atom_mass = res.atom_mass;
      atoms.emplace_back(res.mid_node, res.atom_mass);
      const AlphaTheta parent_kind = segs[pick].kind;
      segs[pick] = {res.upper_edge, {parent_kind.alpha, parent_kind.alpha}};
      segs.push_back({res.lower_edge, parent_kind});
    }
    return atoms;
  };

  std::vector<std::pair<int, double>> level =
      realize({{t.node(t.num_nodes() - 1).parent_edge, {beta, beta}}}, atoms_per_string);
  double retained = 0.0;
  for (const auto& [n, a] : level) retained += a;
  result.retained_mass.push_back(retained);

  for (int lvl = 1; lvl <= depth; ++lvl) {
    std::vector<std::pair<int, double>> next_level;
    for (const auto& [v, a] : level) {
      const BetaMixedDraw bm = draw_beta_mixed(beta, rng);
      t.node(v).atom_mass = 0.0;
      const double len_scale = std::pow(a, beta);
      std::vector<DiscreteTree::Segment> segs;
      const double marked_len = len_scale * bm.total_length * bm.marked_length_frac;
      const double marked_mass = a * bm.marked_mass_frac;
      const bool degenerate = (marked_len == 0.0 && marked_mass == 0.0);
      if (!degenerate) segs.push_back({marked_len, marked_mass, true, ++next_comp});
      segs.push_back({len_scale * bm.total_length * (1.0 - bm.marked_length_frac),
                      a * (1.0 - bm.marked_mass_frac), false, 0});
      const auto created = t.attach_branch(v, segs, -1);
      std::vector<Seg> string;
      std::size_t idx = 0;
      if (!degenerate)
        string.push_back({t.node(created[idx++]).parent_edge,
                          {beta, 1.0 - 2.0 * beta}});
      string.push_back({t.node(created[idx]).parent_edge, {beta, beta}});
      const auto atoms = realize(string, atoms_per_string);
      next_level.insert(next_level.end(), atoms.begin(), atoms.end());
    }
    level = std::move(next_level);
    retained = 0.0;
    for (const auto& [n, a] : level) retained += a;
    result.retained_mass.push_back(retained);
  }
  return result;
}

}  // namespace treesim
