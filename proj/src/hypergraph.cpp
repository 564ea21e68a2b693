#include "faqai/hypergraph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "faqai/errors.hpp"

namespace faqai {

std::vector<VSet> Hypergraph::finite_edges() const {
  std::vector<VSet> out;
  for (size_t i = 0; i < skeleton.size(); ++i)
    if (finite[i]) out.push_back(skeleton[i]);
  return out;
}

int Hypergraph::index_of(const std::string& name) const {
  for (int i = 0; i < n(); ++i)
    if (names[i] == name) return i;
  return -1;
}

VSet Hypergraph::set_of(const std::vector<std::string>& vars) const {
  VSet s = 0;
  for (const auto& v : vars) {
    int i = index_of(v);
    if (i < 0) throw StructuralError("unknown variable '" + v + "'");
    s |= VSet(1) << i;
  }
  return s;
}

std::vector<std::string> Hypergraph::names_of(VSet s) const {
  std::vector<std::string> out;
  for (int i = 0; i < n(); ++i)
    if (s >> i & 1) out.push_back(names[i]);
  return out;
}

void Hypergraph::check() const {
  if (n() > 32) throw CapacityError("hypergraphs are limited to 32 vertices");
  if (finite.size() != skeleton.size()) throw StructuralError("finite flags do not match skeleton edges");
  for (VSet e : skeleton)
    if (!subset_of(e, all())) throw StructuralError("skeleton edge outside the vertex set");
  for (VSet e : ligaments)
    if (!subset_of(e, all())) throw StructuralError("ligament edge outside the vertex set");
  VSet covered = 0;
  for (VSet e : finite_edges()) covered |= e;
  if (covered != all()) {
    throw StructuralError("finite edges do not cover variables " + format_set(*this, all() & ~covered));
  }
}

std::string format_set(const Hypergraph& h, VSet s) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (int i = 0; i < h.n(); ++i) {
    if (!(s >> i & 1)) continue;
    if (!first) os << ",";
    os << h.names[i];
    first = false;
  }
  os << "}";
  return os.str();
}

std::vector<std::vector<int>> TreeDecomposition::adjacency() const {
  std::vector<std::vector<int>> adj(bags.size());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& l : adj) std::sort(l.begin(), l.end());
  return adj;
}

bool TreeDecomposition::adjacent(int a, int b) const {
  for (auto [x, y] : edges)
    if ((x == a && y == b) || (x == b && y == a)) return true;
  return false;
}

std::vector<VSet> TreeDecomposition::bag_set() const {
  std::vector<VSet> s = bags;
  std::sort(s.begin(), s.end());
  return s;
}

namespace {

// Connected components of the subgraph induced by `members`.
std::vector<std::vector<int>> components(const std::vector<std::vector<int>>& adj, const std::vector<bool>& members) {
  std::vector<std::vector<int>> comps;
  std::vector<bool> seen(adj.size(), false);
  for (size_t s = 0; s < adj.size(); ++s) {
    if (!members[s] || seen[s]) continue;
    std::vector<int> comp, stack{static_cast<int>(s)};
    seen[s] = true;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      comp.push_back(x);
      for (int y : adj[x]) {
        if (members[y] && !seen[y]) {
          seen[y] = true;
          stack.push_back(y);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(comp);
  }
  return comps;
}

bool is_tree(const TreeDecomposition& td) {
  size_t m = td.bags.size();
  if (m == 0) return false;
  if (td.edges.size() != m - 1) return false;
  for (auto [a, b] : td.edges)
    if (a < 0 || b < 0 || static_cast<size_t>(a) >= m || static_cast<size_t>(b) >= m || a == b) return false;
  auto comps = components(td.adjacency(), std::vector<bool>(m, true));
  return comps.size() == 1;
}

}  // namespace

std::optional<std::vector<int>> find_f_core(const TreeDecomposition& td, VSet free_vars) {
  if (free_vars == 0) return std::vector<int>{};
  std::vector<bool> inside(td.bags.size());
  for (size_t i = 0; i < td.bags.size(); ++i) inside[i] = subset_of(td.bags[i], free_vars);
  for (const auto& comp : components(td.adjacency(), inside)) {
    VSet u = 0;
    for (int t : comp) u |= td.bags[t];
    if (u == free_vars) return comp;
  }
  return std::nullopt;
}

CoverageCertificate validate_relaxed(const TreeDecomposition& td, const Hypergraph& h, VSet free_vars, bool relaxed) {
  CoverageCertificate cert;
  auto fail = [&](const std::string& msg) {
    cert.valid = false;
    cert.violations.push_back(msg);
  };
  if (!is_tree(td)) {
    fail("tree edges do not form a tree");
    return cert;
  }
  VSet all = h.all();
  VSet covered = 0;
  for (VSet b : td.bags) {
    if (!subset_of(b, all)) fail("bag outside the vertex set");
    covered |= b;
  }
  if (covered != all) fail("bags do not cover " + format_set(h, all & ~covered));

  auto adj = td.adjacency();
  for (int v = 0; v < h.n(); ++v) {
    std::vector<bool> has(td.bags.size());
    bool any = false;
    for (size_t t = 0; t < td.bags.size(); ++t) {
      has[t] = td.bags[t] >> v & 1;
      any = any || has[t];
    }
    if (any && components(adj, has).size() != 1) fail("running intersection broken for " + h.names[v]);
  }

  for (size_t e = 0; e < h.skeleton.size(); ++e) {
    int w = -1;
    for (size_t t = 0; t < td.bags.size() && w < 0; ++t)
      if (subset_of(h.skeleton[e], td.bags[t])) w = static_cast<int>(t);
    if (w < 0) fail("skeleton edge " + format_set(h, h.skeleton[e]) + " not inside any bag");
    cert.skeleton_witness.push_back(w);
  }

  for (size_t l = 0; l < h.ligaments.size(); ++l) {
    VSet s = h.ligaments[l];
    std::pair<int, int> w{-1, -1};
    for (size_t t = 0; t < td.bags.size() && w.first < 0; ++t)
      if (subset_of(s, td.bags[t])) w = {static_cast<int>(t), -1};
    if (w.first < 0 && relaxed) {
      for (auto [a, b] : td.edges) {
        if (subset_of(s, td.bags[a] | td.bags[b])) {
          w = {std::min(a, b), std::max(a, b)};
          break;
        }
      }
    }
    if (w.first < 0) {
      fail("ligament " + format_set(h, s) + (relaxed ? " not inside two adjacent bags" : " not inside any bag"));
    }
    cert.ligament_witness.push_back(w);
  }

  cert.core = find_f_core(td, free_vars);
  if (!cert.core) fail("not F-connex for F = " + format_set(h, free_vars));
  return cert;
}

TreeDecomposition make_non_redundant(const TreeDecomposition& td, std::optional<VSet> free_vars) {
  size_t m = td.bags.size();
  std::vector<std::set<int>> adj(m);
  for (auto [a, b] : td.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::vector<bool> alive(m, true), in_core(m, false);
  if (free_vars) {
    auto core = find_f_core(td, *free_vars);
    if (core)
      for (int t : *core) in_core[t] = true;
  }
  auto allowed = [&](int x, int y) { return !(in_core[x] && !in_core[y]); };
  auto absorb = [&](int x, int y) {
    for (int z : adj[x]) {
      if (z == y) continue;
      adj[z].erase(x);
      adj[z].insert(y);
      adj[y].insert(z);
    }
    adj[y].erase(x);
    adj[x].clear();
    alive[x] = false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t a = 0; a < m && !changed; ++a) {
      if (!alive[a]) continue;
      for (int b : adj[a]) {
        int x = static_cast<int>(a);
        if (subset_of(td.bags[x], td.bags[b]) && allowed(x, b)) {
          absorb(x, b);
          changed = true;
        } else if (subset_of(td.bags[b], td.bags[x]) && allowed(b, x)) {
          absorb(b, x);
          changed = true;
        }
        if (changed) break;
      }
    }
  }
  std::vector<int> remap(m, -1);
  TreeDecomposition out;
  for (size_t t = 0; t < m; ++t) {
    if (!alive[t]) continue;
    remap[t] = static_cast<int>(out.bags.size());
    out.bags.push_back(td.bags[t]);
  }
  for (size_t t = 0; t < m; ++t) {
    if (!alive[t]) continue;
    for (int z : adj[t])
      if (static_cast<int>(t) < z) out.edges.emplace_back(remap[t], remap[z]);
  }
  if (free_vars) out.core = find_f_core(out, *free_vars);
  return out;
}

TreeDecomposition canonicalize(const TreeDecomposition& td) {
  std::vector<int> idx(td.bags.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return td.bags[a] < td.bags[b]; });
  std::vector<int> pos(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);
  TreeDecomposition out;
  for (int i : idx) out.bags.push_back(td.bags[i]);
  for (auto [a, b] : td.edges) {
    int x = pos[a], y = pos[b];
    out.edges.emplace_back(std::min(x, y), std::max(x, y));
  }
  std::sort(out.edges.begin(), out.edges.end());
  if (td.core) {
    std::vector<int> c;
    for (int t : *td.core) c.push_back(pos[t]);
    std::sort(c.begin(), c.end());
    out.core = c;
  }
  return out;
}

namespace {

constexpr size_t kMaxEliminationStates = 2000000;

struct Step {
  int v;
  VSet bag;
  int parent;  // vertex whose bag is the parent, -1 while unresolved
  bool operator<(const Step& o) const { return std::tie(v, bag, parent) < std::tie(o.v, o.bag, o.parent); }
  bool operator==(const Step& o) const { return v == o.v && bag == o.bag && parent == o.parent; }
};

class EliminationEnumerator {
 public:
  EliminationEnumerator(int n, std::vector<VSet> adj, VSet free_vars)
      : n_(n), adj0_(std::move(adj)), free_(free_vars) {}

  std::vector<TreeDecomposition> run() {
    std::vector<Step> steps;
    dfs(0, adj0_, steps);
    return std::move(out_);
  }

 private:
  void dfs(VSet done, const std::vector<VSet>& adj, std::vector<Step>& steps) {
    VSet all = (n_ == 32) ? ~VSet(0) : ((VSet(1) << n_) - 1);
    if (done == all) {
      emit(steps);
      return;
    }
    auto key_steps = steps;
    std::sort(key_steps.begin(), key_steps.end());
    if (!seen_.insert({done, key_steps}).second) return;
    if (seen_.size() > kMaxEliminationStates) throw CapacityError("elimination-order enumeration budget exceeded");

    VSet remaining = all & ~done;
    VSet pool = remaining & ~free_;
    if (pool == 0) pool = remaining;
    for (int v = 0; v < n_; ++v) {
      if (!(pool >> v & 1)) continue;
      VSet nb = adj[v] & remaining & ~(VSet(1) << v);
      std::vector<VSet> next = adj;
      for (int u = 0; u < n_; ++u) {
        if (nb >> u & 1) next[u] = (next[u] | nb) & ~(VSet(1) << u);
        next[u] &= ~(VSet(1) << v);
      }
      std::vector<Step> ns = steps;
      for (auto& s : ns)
        if (s.parent < 0 && (s.bag >> v & 1)) s.parent = v;
      ns.push_back({v, nb | (VSet(1) << v), -1});
      dfs(done | (VSet(1) << v), next, ns);
    }
  }

  void emit(const std::vector<Step>& steps) {
    TreeDecomposition td;
    std::map<int, int> node_of;
    for (const auto& s : steps) {
      node_of[s.v] = static_cast<int>(td.bags.size());
      td.bags.push_back(s.bag);
    }
    std::vector<int> roots;
    for (const auto& s : steps) {
      if (s.parent >= 0) {
        td.edges.emplace_back(node_of[s.v], node_of[s.parent]);
      } else {
        roots.push_back(node_of[s.v]);
      }
    }
    // Disconnected primal graphs give a forest; hang every root off the last one.
    for (size_t i = 0; i + 1 < roots.size(); ++i) td.edges.emplace_back(roots[i], roots.back());
    out_.push_back(std::move(td));
  }

  int n_;
  std::vector<VSet> adj0_;
  VSet free_;
  std::set<std::pair<VSet, std::vector<Step>>> seen_;
  std::vector<TreeDecomposition> out_;
};

std::vector<VSet> primal_graph(int n, const std::vector<VSet>& edges) {
  std::vector<VSet> adj(n, 0);
  for (VSet e : edges)
    for (int v = 0; v < n; ++v)
      if (e >> v & 1) adj[v] |= e & ~(VSet(1) << v);
  return adj;
}

}  // namespace

std::vector<TreeDecomposition> enumerate_tds(const Hypergraph& h, VSet free_vars, bool relaxed) {
  if (h.n() > kMaxEnumVertices) {
    throw CapacityError("TD enumeration supports at most " + std::to_string(kMaxEnumVertices) + " vertices");
  }
  h.check();
  if (!subset_of(free_vars, h.all())) throw StructuralError("free variables outside the vertex set");
  const int n = h.n();

  std::vector<std::vector<VSet>> graphs;
  if (!relaxed) {
    std::vector<VSet> edges = h.skeleton;
    edges.insert(edges.end(), h.ligaments.begin(), h.ligaments.end());
    graphs.push_back(edges);
  } else {
    size_t k = h.ligaments.size();
    std::vector<uint32_t> subsets;
    if (k <= 6) {
      for (uint32_t s = 0; s < (1u << k); ++s) subsets.push_back(s);
    } else {
      subsets = {0u, (1u << k) - 1};
    }
    for (uint32_t s : subsets) {
      std::vector<VSet> edges = h.skeleton;
      for (size_t l = 0; l < k; ++l)
        if (s >> l & 1) edges.push_back(h.ligaments[l]);
      graphs.push_back(edges);
    }
  }

  std::vector<TreeDecomposition> candidates;
  if (n == 0) {
    candidates.push_back(TreeDecomposition{{0}, {}, std::nullopt});
  } else {
    std::set<std::vector<VSet>> seen_graphs;
    for (const auto& edges : graphs) {
      auto adj = primal_graph(n, edges);
      if (!seen_graphs.insert(adj).second) continue;
      auto tds = EliminationEnumerator(n, adj, free_vars).run();
      candidates.insert(candidates.end(), tds.begin(), tds.end());
    }
    candidates.push_back(TreeDecomposition{{h.all()}, {}, std::nullopt});
    if (relaxed) {
      VSet all = h.all();
      for (VSet b1 = 1; b1 < all; ++b1) {
        VSet rest = all & ~b1;
        // b2 = rest ∪ t for every proper subset t of b1.
        for (VSet t = b1;; t = (t - 1) & b1) {
          if (t != b1) {
            VSet b2 = rest | t;
            if (b1 < b2) {
              bool ok = true;
              for (VSet e : h.skeleton)
                if (!subset_of(e, b1) && !subset_of(e, b2)) ok = false;
              if (ok) candidates.push_back(TreeDecomposition{{b1, b2}, {{0, 1}}, std::nullopt});
            }
          }
          if (t == 0) break;
        }
      }
    }
  }

  std::set<std::pair<std::vector<VSet>, std::vector<std::pair<int, int>>>> seen;
  std::vector<TreeDecomposition> out;
  for (const auto& cand : candidates) {
    TreeDecomposition td = canonicalize(make_non_redundant(cand, free_vars));
    if (!seen.insert({td.bags, td.edges}).second) continue;
    auto cert = validate_relaxed(td, h, free_vars, relaxed);
    if (!cert.valid) continue;
    td.core = cert.core;
    out.push_back(std::move(td));
  }
  std::sort(out.begin(), out.end(), [](const TreeDecomposition& a, const TreeDecomposition& b) {
    return std::tie(a.bags, a.edges) < std::tie(b.bags, b.edges);
  });
  return out;
}

}  // namespace faqai
