#include "faqai/probiq.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "faqai/errors.hpp"
#include "json.hpp"

namespace faqai {

using nlohmann::json;

void IqQuery::validate(const Database& db) const {
  if (db.semiring().id() != SemiringId::RealSumProd) throw DataError("probabilistic relations need real annotations");
  std::set<std::string> vars, ineq;
  for (const auto& f : factors) {
    if (!db.contains(f.relation)) throw DataError("relation '" + f.relation + "' not found");
    const Relation& r = db.get(f.relation);
    if (r.arity() != f.vars.size()) throw DataError("relation '" + f.relation + "' arity does not match its variables");
    for (const auto& v : f.vars)
      if (!vars.insert(v).second) throw DataError("variable '" + v + "' appears in two factors; IQ factors must be disjoint");
    if (!f.ineq_var.empty()) {
      if (std::find(f.vars.begin(), f.vars.end(), f.ineq_var) == f.vars.end()) {
        throw DataError("inequality variable '" + f.ineq_var + "' not in factor " + f.relation);
      }
      ineq.insert(f.ineq_var);
    }
    for (const auto& w : r.weights()) {
      double p = std::get<double>(w);
      if (p < 0 || p > 1) throw DataError("relation '" + f.relation + "' has a probability outside [0,1]");
    }
  }
  for (const auto& [a, b] : inequalities) {
    if (!ineq.count(a) || !ineq.count(b)) {
      throw DataError("inequality " + a + " <= " + b + " uses a variable that is not an inequality variable");
    }
  }
}

IqQuery parse_iq(const std::string& json_text) {
  IqQuery q;
  try {
    json j = json::parse(json_text);
    for (const auto& f : j.at("factors")) {
      IqFactor fac;
      fac.relation = f.at("relation").get<std::string>();
      fac.vars = f.at("vars").get<std::vector<std::string>>();
      fac.ineq_var = f.value("ineq_var", std::string());
      q.factors.push_back(std::move(fac));
    }
    if (j.contains("inequalities")) {
      for (const auto& e : j.at("inequalities")) {
        if (e.size() != 2) throw StructuralError("inequality must be a pair [A, B] meaning A <= B");
        q.inequalities.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw StructuralError(std::string("malformed IQ query: ") + e.what());
  }
  return q;
}

IqQuery load_iq(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_iq(ss.str());
}

UnaryReduction reduce_to_unary(const Database& db, const IqQuery& q) {
  q.validate(db);
  UnaryReduction out;
  for (const auto& f : q.factors) {
    const Relation& r = db.get(f.relation);
    if (f.ineq_var.empty()) {
      double none = 1;
      for (const auto& w : r.weights()) none *= 1 - std::get<double>(w);
      out.nullary *= 1 - none;
      continue;
    }
    int col = static_cast<int>(std::find(f.vars.begin(), f.vars.end(), f.ineq_var) - f.vars.begin());
    std::map<double, double> absent;  // value -> prod (1 - p) over rows carrying it
    for (size_t i = 0; i < r.size(); ++i) {
      double x = numeric_value(r.tuple(i)[col]);
      auto [it, fresh] = absent.emplace(x, 1.0);
      it->second *= 1 - std::get<double>(r.weight(i));
    }
    UnaryFactor u;
    u.var = f.ineq_var;
    for (const auto& [x, a] : absent) {
      u.values.push_back(x);
      u.probs.push_back(1 - a);
    }
    out.unary.push_back(std::move(u));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> transitive_reduce(
    const std::vector<std::string>& nodes, const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, int> id;
  for (const auto& n : nodes) id.emplace(n, static_cast<int>(id.size()));
  const int n = static_cast<int>(id.size());
  std::vector<std::set<int>> succ(n);
  for (const auto& [a, b] : edges) {
    if (!id.count(a) || !id.count(b)) throw DataError("inequality over unknown node " + (id.count(a) ? b : a));
    if (a == b) continue;
    succ[id[a]].insert(id[b]);
  }
  // reach[u] = nodes reachable from u by a path of length >= 1
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<int> state(n, 0);
  std::function<void(int)> dfs = [&](int u) {
    state[u] = 1;
    for (int v : succ[u]) {
      if (state[v] == 1) throw DataError("inequality graph has a cycle");
      if (state[v] == 0) dfs(v);
      reach[u][v] = true;
      for (int w = 0; w < n; ++w)
        if (reach[v][w]) reach[u][w] = true;
    }
    state[u] = 2;
  };
  for (int u = 0; u < n; ++u)
    if (state[u] == 0) dfs(u);

  std::vector<std::string> name(n);
  for (const auto& [s, i] : id) name[i] = s;
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<int> indeg(n, 0);
  for (int u = 0; u < n; ++u) {
    for (int v : succ[u]) {
      bool redundant = false;
      for (int w : succ[u])
        if (w != v && reach[w][v]) redundant = true;
      if (redundant) continue;
      out.emplace_back(name[u], name[v]);
      if (++indeg[v] > 1) throw DataError("inequality graph is not a forest after transitive reduction at " + name[v]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double iq_probability(const Database& db, const IqQuery& q, IqTrace* trace) {
  UnaryReduction red = reduce_to_unary(db, q);
  std::map<std::string, const UnaryFactor*> node;
  std::vector<std::string> names;
  for (const auto& u : red.unary) {
    node[u.var] = &u;
    names.push_back(u.var);
  }
  auto forest = transitive_reduce(names, q.inequalities);
  std::map<std::string, std::vector<std::string>> children;
  std::set<std::string> has_parent;
  for (const auto& [p, c] : forest) {
    children[p].push_back(c);
    has_parent.insert(c);
  }

  std::map<std::string, std::vector<double>> Q;
  std::function<void(const std::string&)> solve = [&](const std::string& p) {
    for (const auto& c : children[p]) solve(c);
    const UnaryFactor& f = *node[p];
    const size_t m = f.values.size();
    std::vector<double> qp(m + 1, 0.0);
    for (size_t j = m; j-- > 0;) {
      double with = f.probs[j];
      for (const auto& c : children[p]) {
        const UnaryFactor& cf = *node[c];
        size_t at = std::lower_bound(cf.values.begin(), cf.values.end(), f.values[j]) - cf.values.begin();
        with *= at < cf.values.size() ? Q[c][at] : 0.0;
      }
      qp[j] = with + (1 - f.probs[j]) * qp[j + 1];
    }
    qp.pop_back();
    Q[p] = std::move(qp);
  };

  double prob = red.nullary;
  for (const auto& u : red.unary) {
    if (has_parent.count(u.var)) continue;
    solve(u.var);
    prob *= Q[u.var].empty() ? 0.0 : Q[u.var][0];
  }
  if (trace) {
    trace->probability = prob;
    trace->q_values = Q;
  }
  return prob;
}

}  // namespace faqai
