#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "faqai/hypergraph.hpp"
#include "faqai/relation.hpp"
#include "faqai/semiring.hpp"

namespace faqai {

struct UnaryExpr {
  // affine a*x+b, square a*(x+b)^2, negsquare -a*(x+b)^2, table: lookup of x in a binary
  // relation (key, value), eq: a if x == b else 0.
  enum class Kind { Affine, Square, NegSquare, Table, Eq };
  Kind kind = Kind::Affine;
  double a = 1;
  double b = 0;
  std::string table;

  static UnaryExpr affine(double a, double b = 0) { return {Kind::Affine, a, b, {}}; }
  static UnaryExpr square(double a, double b = 0) { return {Kind::Square, a, b, {}}; }
  static UnaryExpr negsquare(double a, double b = 0) { return {Kind::NegSquare, a, b, {}}; }
  static UnaryExpr lookup(std::string rel) { return {Kind::Table, 1, 0, std::move(rel)}; }
  static UnaryExpr eq(double b, double a = 1) { return {Kind::Eq, a, b, {}}; }
};

struct UnaryTerm {
  std::string var;
  UnaryExpr expr;
};

// 1[sum of terms <= 0], or < 0 when strict.
struct Ligament {
  std::vector<UnaryTerm> terms;
  bool strict = false;

  std::vector<std::string> vars() const;
};

// Finite factors bind a stored relation positionally to vars. Infinite factors have no
// stored support; their value is the product of the unary terms in fn.
struct Factor {
  std::vector<std::string> vars;
  std::string relation;
  bool finite = true;
  std::vector<UnaryTerm> fn;
};

struct FaqAiQuery {
  Semiring semiring;
  std::vector<std::string> variables;
  std::vector<Factor> factors;
  std::vector<std::string> free;
  std::vector<Ligament> ligaments;

  Hypergraph hypergraph() const;
  VSet free_set() const;
  // Structural checks; with a database also checks relation names and arities.
  void validate(const Database* db = nullptr) const;
};

FaqAiQuery parse_query(const std::string& json_text);
FaqAiQuery load_query(const std::string& path);
std::string query_to_json(const FaqAiQuery& q);

class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const UnaryExpr& e, const Database& db);
  double eval(const Value& x) const;

 private:
  UnaryExpr::Kind kind_ = UnaryExpr::Kind::Affine;
  double a_ = 1, b_ = 0;
  std::string table_name_;
  std::shared_ptr<const std::map<Value, double>> table_;
};

struct CompiledTerm {
  std::string var;
  CompiledExpr expr;
};

struct CompiledLigament {
  std::vector<CompiledTerm> terms;
  bool strict = false;
  std::string label;  // for diagnostics

  bool holds(double sum) const { return strict ? sum < 0 : sum <= 0; }
};

CompiledLigament compile_ligament(const Ligament& l, const Database& db);
std::vector<CompiledTerm> compile_terms(const std::vector<UnaryTerm>& terms, const Database& db);
std::string ligament_label(const Ligament& l);

// Rename a stored relation's columns to the factor's variables.
Relation bind_factor(const Database& db, const Factor& f);

}  // namespace faqai
