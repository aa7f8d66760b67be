#pragma once

#include <string>
#include <vector>

#include "treesim/errors.hpp"

namespace treesim {

// Rooted finite R-tree with per-edge length, mass, mark and component id, plus
// optional per-node atom masses (one-colour mass mode keeps branch-point mass).
class DiscreteTree {
 public:
  struct Node {
    int parent = -1;       // node id, -1 for root
    int parent_edge = -1;  // edge id, -1 for root
    double atom_mass = 0.0;
    int label = -1;        // >= 0: leaf index; -1: internal/root
    std::vector<int> child_edges;
  };

  struct Edge {
    int parent = -1;
    int child = -1;
    double len = 0.0;
    double mass = 0.0;
    bool mark = false;
    int comp = 0;  // component id, 1-based; 0 for unmarked
  };

  struct Segment {  // one piece of an attach_branch spec
    double len = 0.0;
    double mass = 0.0;
    bool mark = false;
    int comp = 0;
  };

  DiscreteTree() = default;

  // root--leaf tree with a single edge
  static DiscreteTree single_edge(double len, double mass, int leaf_label = 0,
                                  bool mark = false, int comp = 0);

  int root() const { return root_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Node& node(int id) const { return nodes_.at(id); }
  const Edge& edge(int id) const { return edges_.at(id); }
  Node& node(int id) { return nodes_.at(id); }
  Edge& edge(int id) { return edges_.at(id); }

  int add_root();
  int add_child(int parent, double len, double mass, bool mark, int comp,
                int label = -1);

  // Split an edge at an atom: (length_frac, 1-length_frac) lengths, masses per
  // (left, atom, right) fractions; returns {new mid node id, extracted atom mass}.
  // "Left" is the root-closest piece. Mark/component are inherited by both pieces.
  struct SplitResult {
    int mid_node;
    int upper_edge;  // root-closest piece
    int lower_edge;
    double atom_mass;
  };
  SplitResult split_edge(int edge_id, double length_frac_left, double mass_frac_left,
                         double mass_frac_right);

  // Attach a chain of segments below `node_id`; the final node gets `leaf_label`.
  // Zero-length zero-mass segments are skipped (degenerate marks at beta = 1/2).
  // Returns the node ids created, last one is the tip.
  std::vector<int> attach_branch(int node_id, const std::vector<Segment>& segments,
                                 int leaf_label);

  // Collapse every marked component to a single branch point carrying the
  // component's aggregate mass as a node atom.
  DiscreteTree contract_marked() const;

  // Subtree spanned by the root and the given leaf labels; degree-2 non-root
  // nodes suppressed, pruned masses projected onto their attachment points.
  DiscreteTree reduce(const std::vector<int>& leaf_labels) const;

  // Depth-first edge order: unmarked and internal marked edges first, then
  // external marked edges; children ordered by least leaf label.
  std::vector<int> edge_order_dfs() const;

  // 'u' unmarked, 'i' internal marked, 'e' external marked.
  char position(int edge_id) const;

  // Canonical encoding of the leaf-labeled marked shape.
  std::string shape_key() const;

  // Distances between root (row/col 0) and leaves sorted by label.
  std::vector<std::vector<double>> leaf_matrix() const;

  // Sorted leaf labels present in the tree.
  std::vector<int> leaf_labels() const;
  int node_of_label(int label) const;

  double total_length() const;
  double component_length(int comp) const;
  double total_mass() const;
  int num_components() const;
  double depth_of(int node_id) const;
  double node_distance(int a, int b) const;
  double diameter() const;

  std::string to_newick() const;
  std::string to_json() const;
  static DiscreteTree from_newick(const std::string& text);
  static DiscreteTree from_json(const std::string& text);

  // Structural checks (tree-ness, mass sanity, component connectivity);
  // throws domain_error on violation.
  void validate() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  int root_ = -1;

  int min_leaf_below(int node_id) const;
  void dfs_edges(int node_id, std::vector<int>& out) const;
};

// 17-significant-digit float formatting used by all emitters.
std::string format_double(double x);

}  // namespace treesim
