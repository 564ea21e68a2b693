#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "faqai/relation.hpp"

namespace faqai {

struct IqFactor {
  std::string relation;
  std::vector<std::string> vars;
  std::string ineq_var;  // empty for inequality-free factors
};

struct IqQuery {
  std::vector<IqFactor> factors;
  std::vector<std::pair<std::string, std::string>> inequalities;  // first <= second

  void validate(const Database& db) const;
};

IqQuery parse_iq(const std::string& json_text);
IqQuery load_iq(const std::string& path);

// Reduced unary factor over one inequality variable: distinct values ascending with S_i(x).
struct UnaryFactor {
  std::string var;
  std::vector<double> values;
  std::vector<double> probs;
};

struct UnaryReduction {
  std::vector<UnaryFactor> unary;  // one per inequality variable
  double nullary = 1;              // product over inequality-free factors
};

UnaryReduction reduce_to_unary(const Database& db, const IqQuery& q);

// Edges a -> b mean a <= b. Throws DataError on cycles or when the reduction is not a forest.
std::vector<std::pair<std::string, std::string>> transitive_reduce(
    const std::vector<std::string>& nodes, const std::vector<std::pair<std::string, std::string>>& edges);

struct IqTrace {
  double probability = 0;
  std::map<std::string, std::vector<double>> q_values;  // Q_p per node, aligned with its values
};

double iq_probability(const Database& db, const IqQuery& q, IqTrace* trace = nullptr);

}  // namespace faqai
