#include "faqai/query.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "faqai/errors.hpp"
#include "json.hpp"

namespace faqai {

using nlohmann::json;

std::vector<std::string> Ligament::vars() const {
  std::vector<std::string> out;
  for (const auto& t : terms) out.push_back(t.var);
  return out;
}

Hypergraph FaqAiQuery::hypergraph() const {
  Hypergraph h;
  h.names = variables;
  for (const auto& f : factors) {
    h.skeleton.push_back(h.set_of(f.vars));
    h.finite.push_back(f.finite);
  }
  for (const auto& l : ligaments) h.ligaments.push_back(h.set_of(l.vars()));
  return h;
}

VSet FaqAiQuery::free_set() const { return hypergraph().set_of(free); }

void FaqAiQuery::validate(const Database* db) const {
  std::set<std::string> seen;
  for (const auto& v : variables)
    if (!seen.insert(v).second) throw StructuralError("duplicate variable '" + v + "'");
  if (variables.size() > 32) throw CapacityError("queries are limited to 32 variables");
  auto check_vars = [&](const std::vector<std::string>& vs, const std::string& what) {
    std::set<std::string> local;
    for (const auto& v : vs) {
      if (!seen.count(v)) throw StructuralError(what + " uses unknown variable '" + v + "'");
      if (!local.insert(v).second) throw StructuralError(what + " repeats variable '" + v + "'");
    }
  };
  for (const auto& f : factors) {
    std::string what = f.finite ? "factor " + f.relation : "function factor";
    check_vars(f.vars, what);
    if (f.vars.empty()) throw StructuralError(what + " has no variables");
    if (f.finite) {
      if (f.relation.empty()) throw StructuralError("finite factor without a relation");
      if (db) {
        if (!db->contains(f.relation)) throw DataError("relation '" + f.relation + "' not found");
        if (db->get(f.relation).arity() != f.vars.size()) {
          throw DataError("relation '" + f.relation + "' has arity " + std::to_string(db->get(f.relation).arity()) +
                          " but the factor binds " + std::to_string(f.vars.size()) + " variables");
        }
      }
    } else {
      std::set<std::string> fv(f.vars.begin(), f.vars.end());
      for (const auto& t : f.fn)
        if (!fv.count(t.var)) throw StructuralError("function factor term on '" + t.var + "' outside its edge");
    }
  }
  for (const auto& l : ligaments) {
    if (l.terms.empty()) throw StructuralError("ligament without terms");
    check_vars(l.vars(), "ligament " + ligament_label(l));
  }
  check_vars(free, "free variable list");
  hypergraph().check();
}

namespace {

UnaryExpr::Kind parse_kind(const std::string& k) {
  if (k == "affine") return UnaryExpr::Kind::Affine;
  if (k == "square") return UnaryExpr::Kind::Square;
  if (k == "negsquare") return UnaryExpr::Kind::NegSquare;
  if (k == "table") return UnaryExpr::Kind::Table;
  if (k == "eq") return UnaryExpr::Kind::Eq;
  throw StructuralError("unknown term kind '" + k + "'");
}

const char* kind_text(UnaryExpr::Kind k) {
  switch (k) {
    case UnaryExpr::Kind::Affine: return "affine";
    case UnaryExpr::Kind::Square: return "square";
    case UnaryExpr::Kind::NegSquare: return "negsquare";
    case UnaryExpr::Kind::Table: return "table";
    case UnaryExpr::Kind::Eq: return "eq";
  }
  return "?";
}

std::vector<UnaryTerm> parse_terms(const json& arr) {
  std::vector<UnaryTerm> out;
  for (const auto& t : arr) {
    UnaryTerm term;
    term.var = t.at("var").get<std::string>();
    const json& e = t.at("expr");
    term.expr.kind = parse_kind(e.at("kind").get<std::string>());
    if (term.expr.kind == UnaryExpr::Kind::Table) {
      term.expr.table = e.at("table").get<std::string>();
    } else {
      term.expr.a = e.value("a", 1.0);
      term.expr.b = e.value("b", 0.0);
    }
    out.push_back(std::move(term));
  }
  return out;
}

json terms_json(const std::vector<UnaryTerm>& terms) {
  json arr = json::array();
  for (const auto& t : terms) {
    json e = {{"kind", kind_text(t.expr.kind)}};
    if (t.expr.kind == UnaryExpr::Kind::Table) {
      e["table"] = t.expr.table;
    } else {
      e["a"] = t.expr.a;
      e["b"] = t.expr.b;
    }
    arr.push_back({{"var", t.var}, {"expr", e}});
  }
  return arr;
}

}  // namespace

FaqAiQuery parse_query(const std::string& json_text) {
  FaqAiQuery q;
  try {
    json j = json::parse(json_text);
    q.semiring = Semiring::parse(j.value("semiring", std::string("count-int")));
    q.variables = j.at("variables").get<std::vector<std::string>>();
    for (const auto& f : j.at("factors")) {
      Factor fac;
      fac.vars = f.contains("vars") ? f.at("vars").get<std::vector<std::string>>()
                                    : f.at("edge").get<std::vector<std::string>>();
      fac.finite = f.value("finite", true);
      fac.relation = f.value("relation", std::string());
      if (f.contains("fn")) fac.fn = parse_terms(f.at("fn"));
      q.factors.push_back(std::move(fac));
    }
    if (j.contains("free")) q.free = j.at("free").get<std::vector<std::string>>();
    if (j.contains("ligaments")) {
      for (const auto& l : j.at("ligaments")) {
        Ligament lig;
        lig.terms = parse_terms(l.at("terms"));
        lig.strict = l.value("strict", false);
        q.ligaments.push_back(std::move(lig));
      }
    }
  } catch (const json::exception& e) {
    throw StructuralError(std::string("malformed query: ") + e.what());
  }
  q.validate();
  return q;
}

FaqAiQuery load_query(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_query(ss.str());
}

std::string query_to_json(const FaqAiQuery& q) {
  json j;
  j["semiring"] = q.semiring.name();
  j["variables"] = q.variables;
  j["factors"] = json::array();
  for (const auto& f : q.factors) {
    json o = {{"vars", f.vars}, {"finite", f.finite}};
    if (f.finite) o["relation"] = f.relation;
    if (!f.fn.empty()) o["fn"] = terms_json(f.fn);
    j["factors"].push_back(o);
  }
  j["free"] = q.free;
  j["ligaments"] = json::array();
  for (const auto& l : q.ligaments) j["ligaments"].push_back({{"terms", terms_json(l.terms)}, {"strict", l.strict}});
  return j.dump(2);
}

CompiledExpr::CompiledExpr(const UnaryExpr& e, const Database& db) : kind_(e.kind), a_(e.a), b_(e.b) {
  if (kind_ != UnaryExpr::Kind::Table) return;
  table_name_ = e.table;
  if (!db.contains(e.table)) throw DataError("lookup table '" + e.table + "' not found");
  const Relation& r = db.get(e.table);
  if (r.arity() != 2) throw DataError("lookup table '" + e.table + "' must be binary");
  auto t = std::make_shared<std::map<Value, double>>();
  for (const auto& row : r.tuples()) {
    if (!t->emplace(row[0], numeric_value(row[1])).second) {
      throw DataError("lookup table '" + e.table + "' repeats key " + value_to_string(row[0]));
    }
  }
  table_ = std::move(t);
}

double CompiledExpr::eval(const Value& x) const {
  switch (kind_) {
    case UnaryExpr::Kind::Affine: return a_ * numeric_value(x) + b_;
    case UnaryExpr::Kind::Square: {
      double d = numeric_value(x) + b_;
      return a_ * d * d;
    }
    case UnaryExpr::Kind::NegSquare: {
      double d = numeric_value(x) + b_;
      return -a_ * d * d;
    }
    case UnaryExpr::Kind::Eq: return numeric_value(x) == b_ ? a_ : 0.0;
    case UnaryExpr::Kind::Table: {
      auto it = table_->find(x);
      if (it == table_->end()) {
        throw DataError("lookup table '" + table_name_ + "' has no entry for " + value_to_string(x));
      }
      return it->second;
    }
  }
  return 0;
}

std::vector<CompiledTerm> compile_terms(const std::vector<UnaryTerm>& terms, const Database& db) {
  std::vector<CompiledTerm> out;
  for (const auto& t : terms) out.push_back({t.var, CompiledExpr(t.expr, db)});
  return out;
}

std::string ligament_label(const Ligament& l) {
  std::ostringstream os;
  for (size_t i = 0; i < l.terms.size(); ++i) {
    const auto& t = l.terms[i];
    if (i) os << " + ";
    os << kind_text(t.expr.kind) << "(" << t.var << ")";
  }
  os << (l.strict ? " < 0" : " <= 0");
  return os.str();
}

CompiledLigament compile_ligament(const Ligament& l, const Database& db) {
  CompiledLigament c;
  c.terms = compile_terms(l.terms, db);
  c.strict = l.strict;
  c.label = ligament_label(l);
  return c;
}

Relation bind_factor(const Database& db, const Factor& f) {
  if (!db.contains(f.relation)) throw DataError("relation '" + f.relation + "' not found");
  const Relation& r = db.get(f.relation);
  if (r.arity() != f.vars.size()) {
    throw DataError("relation '" + f.relation + "' has arity " + std::to_string(r.arity()) + ", factor binds " +
                    std::to_string(f.vars.size()));
  }
  if (r.semiring() != db.semiring()) throw StructuralError("relation '" + f.relation + "' semiring mismatch");
  return Relation::from_sorted(r.semiring(), f.vars, r.tuples(), r.weights());
}

}  // namespace faqai
