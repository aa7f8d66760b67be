#include "treesim/oracle.hpp"

#include <utility>
#include <vector>

#include "treesim/errors.hpp"
#include "treesim/rtree.hpp"

namespace treesim {

namespace {

int degree_of(const DiscreteTree& t, int nid) {
  return static_cast<int>(t.node(nid).child_edges.size()) +
         (t.node(nid).parent == -1 ? 0 : 1);
}

struct Move {
  Rational weight;
  bool on_edge;
  int target;  // edge id or node id
};

std::vector<Move> enumerate_moves(OracleModel model, const OracleParams& p,
                                  const DiscreteTree& t) {
  std::vector<Move> moves;
  const Rational one = 1;
  switch (model) {
    case OracleModel::marchal:
      for (int e = 0; e < t.num_edges(); ++e) moves.push_back({p.beta, true, e});
      for (int v = 0; v < t.num_nodes(); ++v) {
        const int d = degree_of(t, v);
        if (d < 3) continue;
        const Rational w = (d - 3) * (one - p.beta) + one - 2 * p.beta;
        if (w > 0) moves.push_back({w, false, v});
      }
      break;
    case OracleModel::alpha_gamma:
    case OracleModel::ford: {
      const Rational alpha = model == OracleModel::ford ? p.beta : p.alpha;
      const Rational gamma = model == OracleModel::ford ? p.beta : p.gamma;
      for (int e = 0; e < t.num_edges(); ++e) {
        const bool external = t.node(t.edge(e).child).child_edges.empty();
        const Rational w = external ? one - alpha : gamma;
        if (w > 0) moves.push_back({w, true, e});
      }
      for (int v = 0; v < t.num_nodes(); ++v) {
        const int d = degree_of(t, v);
        if (d < 3) continue;
        const Rational w = (d - 2) * alpha - gamma;
        if (w > 0) moves.push_back({w, false, v});
      }
      break;
    }
    case OracleModel::discrete_two_colour:
      for (int e = 0; e < t.num_edges(); ++e) {
        const Rational w =
            t.position(e) == 'e' ? one - 2 * p.beta : p.beta;
        if (w > 0) moves.push_back({w, true, e});
      }
      break;
  }
  return moves;
}

DiscreteTree apply_move(OracleModel model, const DiscreteTree& t, const Move& mv,
                        int new_leaf) {
  DiscreteTree out = t;
  if (model == OracleModel::discrete_two_colour) {
    const int comp =
        out.edge(mv.target).mark ? out.edge(mv.target).comp : out.num_components() + 1;
    const auto res = out.split_edge(mv.target, 0.5, 0.0, 0.0);
    out.edge(res.upper_edge).len = 1.0;
    out.edge(res.lower_edge).len = 1.0;
    out.attach_branch(res.mid_node, {{1.0, 0.0, true, comp}, {1.0, 0.0, false, 0}},
                      new_leaf);
    return out;
  }
  if (mv.on_edge) {
    const auto res = out.split_edge(mv.target, 0.5, 0.0, 0.0);
    out.edge(res.upper_edge).len = 1.0;
    out.edge(res.lower_edge).len = 1.0;
    out.attach_branch(res.mid_node, {{1.0, 0.0, false, 0}}, new_leaf);
  } else {
    out.attach_branch(mv.target, {{1.0, 0.0, false, 0}}, new_leaf);
  }
  return out;
}

}  // namespace

std::map<std::string, Rational> shape_prob_oracle(OracleModel model,
                                                  const OracleParams& params, int n) {
  if (n < 0) throw domain_error("shape_prob_oracle: n must be >= 0");
  if (n > 8) throw capability_error("shape_prob_oracle: capped at n <= 8");

  std::map<std::string, std::pair<DiscreteTree, Rational>> states;
  const DiscreteTree start = DiscreteTree::single_edge(1.0, 0.0, 0);
  states.emplace(start.shape_key(), std::make_pair(start, Rational(1)));

  for (int step = 0; step < n; ++step) {
    std::map<std::string, std::pair<DiscreteTree, Rational>> next;
    for (const auto& [key, entry] : states) {
      const auto& [tree, prob] = entry;
      const auto moves = enumerate_moves(model, params, tree);
      Rational total = 0;
      for (const auto& mv : moves) total += mv.weight;
      if (total <= 0) throw domain_error("shape_prob_oracle: no admissible move");
      for (const auto& mv : moves) {
        DiscreteTree child = apply_move(model, tree, mv, step + 1);
        const std::string ck = child.shape_key();
        auto it = next.find(ck);
        if (it == next.end())
          next.emplace(ck, std::make_pair(std::move(child), prob * mv.weight / total));
        else
          it->second.second += prob * mv.weight / total;
      }
    }
    states = std::move(next);
  }

  std::map<std::string, Rational> out;
  for (const auto& [key, entry] : states) out.emplace(key, entry.second);
  return out;
}

std::map<std::string, double> shape_prob_oracle_double(OracleModel model,
                                                       const OracleParams& params,
                                                       int n) {
  std::map<std::string, double> out;
  for (const auto& [key, prob] : shape_prob_oracle(model, params, n))
    out.emplace(key, static_cast<double>(prob));
  return out;
}

}  // namespace treesim
