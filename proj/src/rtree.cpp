#include "treesim/rtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace treesim {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

DiscreteTree DiscreteTree::single_edge(double len, double mass, int leaf_label,
                                       bool mark, int comp) {
  DiscreteTree t;
  const int r = t.add_root();
  t.add_child(r, len, mass, mark, comp, leaf_label);
  return t;
}

int DiscreteTree::add_root() {
  if (root_ != -1) throw domain_error("add_root: tree already has a root");
  nodes_.push_back({});
  root_ = 0;
  return 0;
}

int DiscreteTree::add_child(int parent, double len, double mass, bool mark, int comp,
                            int label) {
  if (parent < 0 || parent >= num_nodes()) throw domain_error("add_child: bad parent");
  const int nid = num_nodes();
  const int eid = num_edges();
  Node n;
  n.parent = parent;
  n.parent_edge = eid;
  n.label = label;
  nodes_.push_back(n);
  Edge e;
  e.parent = parent;
  e.child = nid;
  e.len = len;
  e.mass = mass;
  e.mark = mark;
  e.comp = comp;
  edges_.push_back(e);
  nodes_[parent].child_edges.push_back(eid);
  return nid;
}

DiscreteTree::SplitResult DiscreteTree::split_edge(int edge_id, double length_frac_left,
                                                   double mass_frac_left,
                                                   double mass_frac_right) {
  if (edge_id < 0 || edge_id >= num_edges()) throw domain_error("split_edge: bad edge");
  if (!(length_frac_left >= 0.0 && length_frac_left <= 1.0) ||
      !(mass_frac_left >= 0.0) || !(mass_frac_right >= 0.0) ||
      mass_frac_left + mass_frac_right > 1.0 + 1e-12)
    throw domain_error("split_edge: bad fractions");
  Edge& e = edges_[edge_id];
  const double len = e.len, mass = e.mass;
  const double atom = mass * std::max(0.0, 1.0 - mass_frac_left - mass_frac_right);
  const int upper_parent = e.parent;
  const int lower_child = e.child;

  // reuse edge_id as the upper (root-closest) piece, add a mid node + lower edge
  const int mid = num_nodes();
  Node mn;
  mn.parent = upper_parent;
  mn.parent_edge = edge_id;
  nodes_.push_back(mn);

  const int lower = num_edges();
  Edge le;
  le.parent = mid;
  le.child = lower_child;
  le.len = len * (1.0 - length_frac_left);
  le.mass = mass * mass_frac_right;
  le.mark = e.mark;
  le.comp = e.comp;
  edges_.push_back(le);

  Edge& ue = edges_[edge_id];
  ue.child = mid;
  ue.len = len * length_frac_left;
  ue.mass = mass * mass_frac_left;

  nodes_[mid].child_edges.push_back(lower);
  nodes_[lower_child].parent = mid;
  nodes_[lower_child].parent_edge = lower;
  return {mid, edge_id, lower, atom};
}

std::vector<int> DiscreteTree::attach_branch(int node_id,
                                             const std::vector<Segment>& segments,
                                             int leaf_label) {
  if (node_id < 0 || node_id >= num_nodes()) throw domain_error("attach_branch: bad node");
  std::vector<int> created;
  int cur = node_id;
  std::vector<Segment> live;
  for (const auto& s : segments)
    if (!(s.len == 0.0 && s.mass == 0.0)) live.push_back(s);
  if (live.empty()) throw domain_error("attach_branch: all segments degenerate");
  for (std::size_t i = 0; i < live.size(); ++i) {
    const bool last = (i + 1 == live.size());
    cur = add_child(cur, live[i].len, live[i].mass, live[i].mark, live[i].comp,
                    last ? leaf_label : -1);
    created.push_back(cur);
  }
  return created;
}

int DiscreteTree::min_leaf_below(int node_id) const {
  const Node& n = nodes_[node_id];
  if (n.child_edges.empty()) return n.label >= 0 ? n.label : 1 << 30;
  int best = 1 << 30;
  for (int e : n.child_edges) best = std::min(best, min_leaf_below(edges_[e].child));
  return best;
}

void DiscreteTree::dfs_edges(int node_id, std::vector<int>& out) const {
  std::vector<int> kids = nodes_[node_id].child_edges;
  std::sort(kids.begin(), kids.end(), [this](int a, int b) {
    return min_leaf_below(edges_[a].child) < min_leaf_below(edges_[b].child);
  });
  for (int e : kids) {
    out.push_back(e);
    dfs_edges(edges_[e].child, out);
  }
}

std::vector<int> DiscreteTree::edge_order_dfs() const {
  std::vector<int> dfs;
  if (root_ >= 0) dfs_edges(root_, dfs);
  std::vector<int> out;
  for (int e : dfs)
    if (position(e) != 'e') out.push_back(e);
  for (int e : dfs)
    if (position(e) == 'e') out.push_back(e);
  return out;
}

char DiscreteTree::position(int edge_id) const {
  const Edge& e = edges_.at(edge_id);
  if (!e.mark) return 'u';
  for (int ce : nodes_[e.child].child_edges)
    if (edges_[ce].mark && edges_[ce].comp == e.comp) return 'i';
  return 'e';
}

std::string DiscreteTree::shape_key() const {
  std::function<std::string(int)> enc = [&](int nid) -> std::string {
    const Node& n = nodes_[nid];
    if (n.child_edges.empty())
      return n.label >= 0 ? "L" + std::to_string(n.label) : "L?";
    std::vector<std::string> parts;
    for (int e : n.child_edges)
      parts.push_back(std::string(edges_[e].mark ? "m" : "u") + enc(edges_[e].child));
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ",";
      out += parts[i];
    }
    return out + ")";
  };
  if (root_ < 0) return "";
  return enc(root_);
}

std::vector<int> DiscreteTree::leaf_labels() const {
  std::vector<int> out;
  for (const auto& n : nodes_)
    if (n.label >= 0) out.push_back(n.label);
  std::sort(out.begin(), out.end());
  return out;
}

int DiscreteTree::node_of_label(int label) const {
  for (int i = 0; i < num_nodes(); ++i)
    if (nodes_[i].label == label) return i;
  throw domain_error("node_of_label: unknown leaf label " + std::to_string(label));
}

double DiscreteTree::depth_of(int node_id) const {
  double d = 0.0;
  for (int cur = node_id; nodes_[cur].parent != -1; cur = nodes_[cur].parent)
    d += edges_[nodes_[cur].parent_edge].len;
  return d;
}

double DiscreteTree::node_distance(int a, int b) const {
  std::map<int, double> up;  // ancestor -> distance from a
  double d = 0.0;
  for (int cur = a;; cur = nodes_[cur].parent) {
    up[cur] = d;
    if (nodes_[cur].parent == -1) break;
    d += edges_[nodes_[cur].parent_edge].len;
  }
  d = 0.0;
  for (int cur = b;; cur = nodes_[cur].parent) {
    auto it = up.find(cur);
    if (it != up.end()) return d + it->second;
    if (nodes_[cur].parent == -1) break;
    d += edges_[nodes_[cur].parent_edge].len;
  }
  throw domain_error("node_distance: disconnected nodes");
}

std::vector<std::vector<double>> DiscreteTree::leaf_matrix() const {
  std::vector<int> pts = {root_};
  for (int lab : leaf_labels()) pts.push_back(node_of_label(lab));
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      m[i][j] = m[j][i] = node_distance(pts[i], pts[j]);
  return m;
}

double DiscreteTree::total_length() const {
  double s = 0.0;
  for (const auto& e : edges_) s += e.len;
  return s;
}

double DiscreteTree::component_length(int comp) const {
  double s = 0.0;
  for (const auto& e : edges_)
    if (e.mark && e.comp == comp) s += e.len;
  return s;
}

double DiscreteTree::total_mass() const {
  double s = 0.0;
  for (const auto& e : edges_) s += e.mass;
  for (const auto& n : nodes_) s += n.atom_mass;
  return s;
}

int DiscreteTree::num_components() const {
  int r = 0;
  for (const auto& e : edges_) r = std::max(r, e.comp);
  return r;
}

double DiscreteTree::diameter() const {
  // two-pass farthest-point works on tree metrics
  if (num_nodes() < 2) return 0.0;
  auto farthest = [this](int from) {
    int best = from;
    double bd = -1.0;
    for (int i = 0; i < num_nodes(); ++i) {
      const double d = node_distance(from, i);
      if (d > bd) {
        bd = d;
        best = i;
      }
    }
    return std::pair<int, double>(best, bd);
  };
  const auto [a, d0] = farthest(root_);
  (void)d0;
  return farthest(a).second;
}

DiscreteTree DiscreteTree::contract_marked() const {
  DiscreteTree out;
  if (root_ < 0) return out;
  out.add_root();
  out.nodes_[0].atom_mass = nodes_[root_].atom_mass;
  out.nodes_[0].label = nodes_[root_].label;

  std::function<void(int, int)> absorb_comp;  // marked edge -> collapse into new node
  std::function<void(int, int)> copy;

  copy = [&](int old_node, int new_node) {
    for (int eid : nodes_[old_node].child_edges) {
      const Edge& e = edges_[eid];
      if (!e.mark) {
        const int c = out.add_child(new_node, e.len, e.mass, false, 0,
                                    nodes_[e.child].label);
        out.nodes_[c].atom_mass = nodes_[e.child].atom_mass;
        copy(e.child, c);
      } else {
        absorb_comp(eid, new_node);
      }
    }
  };

  absorb_comp = [&](int eid, int new_node) {
    const Edge& e = edges_[eid];
    out.nodes_[new_node].atom_mass += e.mass + nodes_[e.child].atom_mass;
    for (int ce : nodes_[e.child].child_edges) {
      const Edge& c = edges_[ce];
      if (c.mark && c.comp == e.comp) {
        absorb_comp(ce, new_node);
      } else {
        const int nn = out.add_child(new_node, c.len, c.mass, c.mark, c.comp,
                                     nodes_[c.child].label);
        out.nodes_[nn].atom_mass = nodes_[c.child].atom_mass;
        copy(c.child, nn);
      }
    }
  };

  copy(root_, 0);
  return out;
}

DiscreteTree DiscreteTree::reduce(const std::vector<int>& leaf_labels_sel) const {
  if (leaf_labels_sel.empty()) throw domain_error("reduce: no leaves given");
  std::set<int> on_path;  // node ids on root-to-leaf paths
  std::set<int> sel_nodes;
  for (int lab : leaf_labels_sel) {
    int cur = node_of_label(lab);
    sel_nodes.insert(cur);
    for (;; cur = nodes_[cur].parent) {
      on_path.insert(cur);
      if (nodes_[cur].parent == -1) break;
    }
  }

  // mass below a node (its atom + everything hanging under it)
  std::function<double(int)> subtree_mass = [&](int nid) -> double {
    double s = nodes_[nid].atom_mass;
    for (int e : nodes_[nid].child_edges)
      s += edges_[e].mass + subtree_mass(edges_[e].child);
    return s;
  };
  // projected mass sitting at a path node: its atom + all pruned subtrees there
  auto extra_mass = [&](int nid) -> double {
    double s = nodes_[nid].atom_mass;
    for (int e : nodes_[nid].child_edges)
      if (!on_path.count(edges_[e].child))
        s += edges_[e].mass + subtree_mass(edges_[e].child);
    return s;
  };
  auto path_children = [&](int nid) {
    std::vector<int> out;
    for (int e : nodes_[nid].child_edges)
      if (on_path.count(edges_[e].child)) out.push_back(e);
    return out;
  };
  auto kept = [&](int nid) {
    return nid == root_ || sel_nodes.count(nid) || path_children(nid).size() >= 2;
  };

  DiscreteTree out;
  out.add_root();
  out.nodes_[0].atom_mass = extra_mass(root_);
  out.nodes_[0].label = nodes_[root_].label;

  std::function<void(int, int)> build = [&](int old_node, int new_node) {
    for (int e0 : path_children(old_node)) {
      double len = 0.0, mass = 0.0;
      bool mark = edges_[e0].mark;
      int comp = edges_[e0].comp;
      bool uniform_mark = true;
      int eid = e0;
      for (;;) {
        len += edges_[eid].len;
        mass += edges_[eid].mass;
        if (edges_[eid].mark != mark || edges_[eid].comp != comp) uniform_mark = false;
        const int child = edges_[eid].child;
        if (kept(child)) {
          const int nn = out.add_child(new_node, len, mass + 0.0,
                                       uniform_mark && mark, uniform_mark ? comp : 0,
                                       nodes_[child].label);
          out.nodes_[nn].atom_mass = extra_mass(child);
          build(child, nn);
          break;
        }
        // suppressed degree-2 path node: its projected mass joins the merged edge
        mass += extra_mass(child);
        const auto pc = path_children(child);
        eid = pc.front();
      }
    }
  };
  build(root_, 0);
  return out;
}

void DiscreteTree::validate() const {
  if (root_ < 0) throw domain_error("validate: no root");
  if (nodes_[root_].parent != -1) throw domain_error("validate: root has a parent");
  std::vector<int> seen(num_nodes(), 0);
  std::function<void(int)> walk = [&](int nid) {
    if (seen[nid]++) throw domain_error("validate: cycle");
    for (int e : nodes_[nid].child_edges) {
      if (edges_[e].parent != nid || nodes_[edges_[e].child].parent != nid ||
          nodes_[edges_[e].child].parent_edge != e)
        throw domain_error("validate: inconsistent parent/child links");
      if (edges_[e].len < 0.0 || edges_[e].mass < -1e-12)
        throw domain_error("validate: negative length or mass");
      if (edges_[e].mark != (edges_[e].comp > 0))
        throw domain_error("validate: mark/component mismatch");
      walk(edges_[e].child);
    }
  };
  walk(root_);
  for (int s : seen)
    if (s != 1) throw domain_error("validate: disconnected node");
  // component connectivity: edges of one component form a connected subtree
  const int r = num_components();
  for (int c = 1; c <= r; ++c) {
    int root_count = 0;
    bool any = false;
    for (int e = 0; e < num_edges(); ++e) {
      if (!edges_[e].mark || edges_[e].comp != c) continue;
      any = true;
      const int p = edges_[e].parent;
      const int pe = nodes_[p].parent_edge;
      if (pe == -1 || !edges_[pe].mark || edges_[pe].comp != c) ++root_count;
    }
    if (!any) throw domain_error("validate: component ids not dense");
    if (root_count != 1) throw domain_error("validate: component not connected");
  }
}

// ---------------- serialization ----------------

namespace {

void newick_node(const DiscreteTree& t, int nid, std::string& out) {
  const auto& n = t.node(nid);
  std::vector<int> kids = n.child_edges;
  std::sort(kids.begin(), kids.end());
  if (!kids.empty()) {
    out += "(";
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) out += ",";
      newick_node(t, t.edge(kids[i]).child, out);
    }
    out += ")";
  }
  if (nid == t.root())
    out += "root";
  else if (n.label >= 0)
    out += "S" + std::to_string(n.label);
  if (n.parent_edge != -1) {
    const auto& e = t.edge(n.parent_edge);
    out += "[len=" + format_double(e.len) + ",mass=" + format_double(e.mass) +
           ",mark=" + (e.mark ? std::string("1") : std::string("0")) +
           ",comp=" + std::to_string(e.comp) + ",pos=" + t.position(n.parent_edge) + "]";
  }
}

struct NewickParser {
  const std::string& s;
  std::size_t i = 0;

  explicit NewickParser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  // returns node id in t
  int parse_subtree(DiscreteTree& t, int parent) {
    skip_ws();
    std::vector<std::size_t> pending;  // child marker; children parsed after node exists
    int nid;
    if (i < s.size() && s[i] == '(') {
      // need the node before children; create placeholder then parse children into it
      nid = (parent == -1) ? t.add_root() : -2;
      // for non-root we cannot create the node before knowing the edge block,
      // so parse children into a scratch tree is overkill; instead parse the
      // source span first.
      (void)pending;
      std::size_t depth = 0;
      const std::size_t start = i;
      do {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        ++i;
      } while (i < s.size() && depth > 0);
      const std::string inner = s.substr(start + 1, i - start - 2);
      // parse name + block after ')'
      const std::string name = parse_name();
      auto attrs = parse_block();
      if (parent == -1) {
        // root created above
      } else {
        nid = t.add_child(parent, attrs.len, attrs.mass, attrs.mark, attrs.comp,
                          label_of(name));
      }
      // split inner on top-level commas and recurse
      std::vector<std::string> parts;
      std::size_t d = 0, last = 0;
      bool in_block = false;  // commas inside [..] attribute blocks don't split
      for (std::size_t j = 0; j <= inner.size(); ++j) {
        if (j == inner.size() || (inner[j] == ',' && d == 0 && !in_block)) {
          parts.push_back(inner.substr(last, j - last));
          last = j + 1;
        } else if (inner[j] == '[') {
          in_block = true;
        } else if (inner[j] == ']') {
          in_block = false;
        } else if (inner[j] == '(') {
          ++d;
        } else if (inner[j] == ')') {
          --d;
        }
      }
      for (const auto& p : parts) {
        NewickParser sub(p);
        sub.parse_subtree(t, nid);
      }
      return nid;
    }
    const std::string name = parse_name();
    auto attrs = parse_block();
    if (parent == -1) {
      nid = t.add_root();
      t.node(nid).label = label_of(name);
      return nid;
    }
    return t.add_child(parent, attrs.len, attrs.mass, attrs.mark, attrs.comp,
                       label_of(name));
  }

  static int label_of(const std::string& name) {
    if (name.size() >= 2 && name[0] == 'S') return std::stoi(name.substr(1));
    return -1;
  }

  std::string parse_name() {
    skip_ws();
    const std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    return s.substr(start, i - start);
  }

  struct Attrs {
    double len = 0.0, mass = 0.0;
    bool mark = false;
    int comp = 0;
  };

  Attrs parse_block() {
    Attrs a;
    skip_ws();
    if (i >= s.size() || s[i] != '[') return a;
    const std::size_t end = s.find(']', i);
    if (end == std::string::npos) throw domain_error("newick: unterminated block");
    std::string body = s.substr(i + 1, end - i - 1);
    i = end + 1;
    std::stringstream ss(body);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "len") a.len = std::stod(val);
      else if (key == "mass") a.mass = std::stod(val);
      else if (key == "mark") a.mark = (val == "1");
      else if (key == "comp") a.comp = std::stoi(val);
      // pos is recomputed
    }
    return a;
  }
};

}  // namespace

std::string DiscreteTree::to_newick() const {
  std::string out;
  newick_node(*this, root_, out);
  out += ";";
  return out;
}

DiscreteTree DiscreteTree::from_newick(const std::string& text) {
  std::string body = text;
  const auto semi = body.find_last_of(';');
  if (semi != std::string::npos) body = body.substr(0, semi);
  DiscreteTree t;
  NewickParser p(body);
  p.parse_subtree(t, -1);
  return t;
}

std::string DiscreteTree::to_json() const {
  std::string out = "{\"nodes\":[";
  for (int i = 0; i < num_nodes(); ++i) {
    const auto& n = nodes_[i];
    if (i) out += ",";
    out += "{\"id\":" + std::to_string(i) + ",\"parent\":" + std::to_string(n.parent) +
           ",\"label\":" + std::to_string(n.label) +
           ",\"atom_mass\":" + format_double(n.atom_mass) + "}";
  }
  out += "],\"edges\":[";
  for (int i = 0; i < num_edges(); ++i) {
    const auto& e = edges_[i];
    if (i) out += ",";
    out += "{\"child\":" + std::to_string(e.child) + ",\"len\":" + format_double(e.len) +
           ",\"mass\":" + format_double(e.mass) +
           ",\"mark\":" + std::to_string(e.mark ? 1 : 0) +
           ",\"comp\":" + std::to_string(e.comp) + "}";
  }
  out += "]}";
  return out;
}

DiscreteTree DiscreteTree::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DiscreteTree t;
  const auto& nodes = j.at("nodes");
  const auto& edges = j.at("edges");
  // map original id -> (parent id, label, atom)
  std::map<int, std::tuple<int, int, double>> info;
  int root_id = -1;
  for (const auto& n : nodes) {
    const int id = n.at("id").get<int>();
    const int parent = n.at("parent").get<int>();
    info[id] = {parent, n.at("label").get<int>(), n.at("atom_mass").get<double>()};
    if (parent == -1) root_id = id;
  }
  if (root_id == -1) throw domain_error("from_json: no root node");
  std::map<int, std::tuple<double, double, bool, int>> edge_of_child;
  for (const auto& e : edges)
    edge_of_child[e.at("child").get<int>()] = {
        e.at("len").get<double>(), e.at("mass").get<double>(),
        e.at("mark").get<int>() != 0, e.at("comp").get<int>()};
  // children lists
  std::map<int, std::vector<int>> children;
  for (const auto& [id, inf] : info)
    if (std::get<0>(inf) != -1) children[std::get<0>(inf)].push_back(id);
  for (auto& [id, kids] : children) std::sort(kids.begin(), kids.end());

  std::map<int, int> remap;
  const int r = t.add_root();
  remap[root_id] = r;
  t.node(r).label = std::get<1>(info[root_id]);
  t.node(r).atom_mass = std::get<2>(info[root_id]);
  std::function<void(int)> build = [&](int old_id) {
    for (int c : children[old_id]) {
      const auto& [len, mass, mark, comp] = edge_of_child.at(c);
      const int nn =
          t.add_child(remap[old_id], len, mass, mark, comp, std::get<1>(info[c]));
      t.node(nn).atom_mass = std::get<2>(info[c]);
      remap[c] = nn;
      build(c);
    }
  };
  build(root_id);
  return t;
}

}  // namespace treesim
