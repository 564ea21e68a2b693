#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace faqai {

// Vertex sets are bitmasks over vertex indices.
using VSet = uint32_t;

inline int popcount(VSet s) { return __builtin_popcount(s); }
inline bool subset_of(VSet a, VSet b) { return (a & ~b) == 0; }

constexpr int kMaxEnumVertices = 10;

struct Hypergraph {
  std::vector<std::string> names;
  std::vector<VSet> skeleton;
  std::vector<bool> finite;  // parallel to skeleton
  std::vector<VSet> ligaments;

  int n() const { return static_cast<int>(names.size()); }
  VSet all() const { return n() == 32 ? ~VSet(0) : ((VSet(1) << n()) - 1); }
  std::vector<VSet> finite_edges() const;
  int index_of(const std::string& name) const;
  VSet set_of(const std::vector<std::string>& vars) const;
  std::vector<std::string> names_of(VSet s) const;
  // Throws StructuralError when an edge leaves V or finite edges do not cover V.
  void check() const;
};

std::string format_set(const Hypergraph& h, VSet s);

struct TreeDecomposition {
  std::vector<VSet> bags;
  std::vector<std::pair<int, int>> edges;
  std::optional<std::vector<int>> core;  // F-connex core V'

  std::vector<std::vector<int>> adjacency() const;
  bool adjacent(int a, int b) const;
  // Bags sorted, for canonical comparison.
  std::vector<VSet> bag_set() const;
};

struct CoverageCertificate {
  bool valid = true;
  std::vector<std::string> violations;
  std::vector<int> skeleton_witness;                  // bag per skeleton edge
  std::vector<std::pair<int, int>> ligament_witness;  // bag pair per ligament; second = -1 when one bag suffices
  std::optional<std::vector<int>> core;
};

// Checks the tree shape, running intersection, skeleton coverage, ligament coverage
// (relaxed: one bag or two adjacent bags; otherwise one bag) and F-connexity.
CoverageCertificate validate_relaxed(const TreeDecomposition& td, const Hypergraph& h, VSet free_vars,
                                     bool relaxed = true);

// Nodes whose bags lie inside F and form a connected subtree with union F; nullopt if none.
std::optional<std::vector<int>> find_f_core(const TreeDecomposition& td, VSet free_vars);

// Absorbs bags into adjacent supersets; skips an absorption only when it would break
// F-connexity (a core bag inside a non-core neighbour).
TreeDecomposition make_non_redundant(const TreeDecomposition& td, std::optional<VSet> free_vars = std::nullopt);

// Canonical ordering: bags sorted, edges re-indexed and sorted.
TreeDecomposition canonicalize(const TreeDecomposition& td);

std::vector<TreeDecomposition> enumerate_tds(const Hypergraph& h, VSet free_vars, bool relaxed);

}  // namespace faqai
