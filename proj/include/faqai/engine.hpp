#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "faqai/hypergraph.hpp"
#include "faqai/query.hpp"
#include "faqai/relation.hpp"

namespace faqai {

struct LigamentRoute {
  enum class Kind { Absorbed, Step, Final };
  Kind kind = Kind::Absorbed;
  int bag = -1;     // Absorbed: the bag; Step: the leaf being eliminated
  int parent = -1;  // Step: the parent bag
};

struct EvalPlan {
  TreeDecomposition td;
  mpq_class width = 0;  // max over bags of rho_star
  VSet free_vars = 0;
  int root = 0;
  std::vector<int> parent;        // per bag, -1 at the root
  std::vector<bool> in_core;      // bags never aggregated away
  std::vector<int> elimination;   // non-core bags, leaves first
  std::vector<int> assignment;    // factor -> bag
  std::vector<LigamentRoute> routes;  // per ligament
  std::vector<std::string> notes;
};

EvalPlan plan(const FaqAiQuery& q);
EvalPlan plan_for_td(const FaqAiQuery& q, const TreeDecomposition& td);
std::string describe_plan(const FaqAiQuery& q, const EvalPlan& p);

// Phi_t: assigned factors joined with indicator projections of the other finite factors that
// meet the bag, times assigned function factors, filtered by ligaments absorbed into t.
Relation bag_factor(const Database& db, const FaqAiQuery& q, const EvalPlan& p, int t, Counters* counters = nullptr);

// sum over the leaf-only variables of leaf(x_L) * prod 1[ligament], times parent(x_U),
// grouped by the parent's variables. Uses one dominance index per bucket of x_{U∩L}.
Relation two_bag_eliminate(const Relation& parent, const Relation& leaf, const std::vector<CompiledLigament>& ligaments,
                           Counters* counters = nullptr);

Relation evaluate(const Database& db, const FaqAiQuery& q, Counters* counters = nullptr);
Relation evaluate_with_plan(const Database& db, const FaqAiQuery& q, const EvalPlan& p, Counters* counters = nullptr);

}  // namespace faqai
