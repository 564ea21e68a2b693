#pragma once

#include "faqai/probiq.hpp"
#include "faqai/query.hpp"
#include "faqai/relation.hpp"

namespace faqai {

constexpr size_t kOracleJoinBudget = 1000000;
constexpr size_t kOracleWorldTuples = 20;

// The query read literally: enumerate every assignment supported by all finite
// factors, multiply everything, sum by the free variables.
Relation oracle_eval(const Database& db, const FaqAiQuery& q, size_t budget = kOracleJoinBudget);

// Sum over all 2^m subsets of the tuples of the world probability times query truth.
double oracle_worlds(const Database& db, const IqQuery& q);

}  // namespace faqai
