#include "faqai/heavylight.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "faqai/engine.hpp"
#include "faqai/errors.hpp"

namespace faqai {

size_t sqrt_threshold(size_t n) {
  size_t t = static_cast<size_t>(std::sqrt(static_cast<double>(n)));
  while (t * t < n) ++t;
  while (t > 0 && (t - 1) * (t - 1) >= n) --t;
  return t;
}

DegreeSplit degree_split(const Relation& r, const std::vector<std::string>& x_vars, size_t threshold) {
  std::vector<int> cols;
  for (const auto& v : x_vars) {
    int c = r.column(v);
    if (c < 0) throw StructuralError("split variable '" + v + "' not in relation schema");
    cols.push_back(c);
  }
  auto key = [&](const Tuple& t) {
    Tuple k;
    for (int c : cols) k.push_back(t[c]);
    return k;
  };
  std::map<Tuple, size_t> deg;
  for (const auto& t : r.tuples()) ++deg[key(t)];
  DegreeSplit out;
  out.split_vars = x_vars;
  out.threshold = threshold;
  out.light = select_rows(r, [&](const Tuple& t) { return deg[key(t)] <= threshold; });
  out.heavy = select_rows(r, [&](const Tuple& t) { return deg[key(t)] > threshold; });
  return out;
}

namespace {

Relation rebind(const Relation& r, Schema vars, const std::string& what) {
  if (r.arity() != vars.size()) throw StructuralError(what + " has arity " + std::to_string(r.arity()));
  return Relation::from_sorted(r.semiring(), std::move(vars), r.tuples(), r.weights());
}

using HeavySet = std::set<Value>;

// Rows of r whose listed variables have the requested heaviness.
Relation restrict(const Relation& r, const std::vector<std::pair<std::string, bool>>& want,
                  const std::map<std::string, HeavySet>& heavy) {
  if (want.empty()) return r;
  std::vector<std::pair<int, bool>> cols;
  for (const auto& [v, h] : want) cols.emplace_back(r.column(v), h);
  return select_rows(r, [&](const Tuple& t) {
    for (size_t i = 0; i < cols.size(); ++i) {
      const HeavySet& hs = heavy.at(want[i].first);
      if ((hs.count(t[cols[i].first]) > 0) != cols[i].second) return false;
    }
    return true;
  });
}

// S_ijk over (vi, vj, vk) as a disjoint union of filtered joins of rij and rjk. Each
// case lists the heaviness of some of vi, vj, vk.
Relation filtered_part(const Relation& rij, const Relation& rjk, const Schema& vars,
                       const std::vector<std::map<std::string, bool>>& cases,
                       const std::map<std::string, HeavySet>& heavy, Counters* counters) {
  std::vector<std::pair<Tuple, SVal>> rows;
  for (const auto& c : cases) {
    std::vector<std::pair<std::string, bool>> left, right;
    for (const auto& [v, h] : c) {
      if (rij.has(v)) left.emplace_back(v, h);
      else right.emplace_back(v, h);
    }
    Relation a = restrict(rij, left, heavy);
    Relation b = restrict(rjk, right, heavy);
    Relation j = reorder(multiway_join({a, b}, counters), vars);
    for (size_t i = 0; i < j.size(); ++i) rows.emplace_back(j.tuple(i), j.weight(i));
  }
  return Relation::from_rows(rij.semiring(), vars, std::move(rows));
}

SVal branch_total(const Relation& left, const Relation& right, const Schema& pair, Counters* counters) {
  Relation a = group_aggregate(left, pair);
  Relation b = group_aggregate(right, pair);
  return multiway_join({a, b}, counters).total();
}

}  // namespace

CycleParts four_cycle_parts(const Relation& r12, const Relation& r23, const Relation& r34, const Relation& r41,
                            Counters* counters) {
  const Semiring& sr = r12.semiring();
  for (const Relation* r : {&r23, &r34, &r41})
    if (r->semiring() != sr) throw StructuralError("cycle relations use different semirings");
  Relation a = rebind(r12, {"x1", "x2"}, "R12");
  Relation b = rebind(r23, {"x2", "x3"}, "R23");
  Relation c = rebind(r34, {"x3", "x4"}, "R34");
  Relation d = rebind(r41, {"x4", "x1"}, "R41");
  size_t n = std::max({a.size(), b.size(), c.size(), d.size()});
  size_t t = sqrt_threshold(n);

  // A vertex value is heavy when its degree exceeds t in either incident relation.
  std::map<std::string, HeavySet> heavy;
  for (const Relation* r : {&a, &b, &c, &d}) {
    for (int col = 0; col < 2; ++col) {
      std::map<Value, size_t> deg;
      for (const auto& tup : r->tuples()) ++deg[tup[col]];
      HeavySet& hs = heavy[r->schema()[col]];
      for (const auto& [v, k] : deg)
        if (k > t) hs.insert(v);
    }
  }

  CycleParts parts;
  parts.threshold = t;
  // Branch one keeps H_i or H_k or not H_j; branch two keeps not H_j and (H_i or H_k).
  auto branch_one = [&](const std::string& i, const std::string& j, const std::string& k) {
    return std::vector<std::map<std::string, bool>>{{{i, true}}, {{i, false}, {k, true}}, {{i, false}, {k, false}, {j, false}}};
  };
  auto branch_two = [&](const std::string& i, const std::string& j, const std::string& k) {
    return std::vector<std::map<std::string, bool>>{{{j, false}, {i, true}}, {{j, false}, {i, false}, {k, true}}};
  };
  parts.s123 = filtered_part(a, b, {"x1", "x2", "x3"}, branch_one("x1", "x2", "x3"), heavy, counters);
  parts.s341 = filtered_part(c, d, {"x3", "x4", "x1"}, branch_one("x3", "x4", "x1"), heavy, counters);
  parts.s234 = filtered_part(b, c, {"x2", "x3", "x4"}, branch_two("x2", "x3", "x4"), heavy, counters);
  parts.s412 = filtered_part(d, a, {"x4", "x1", "x2"}, branch_two("x4", "x1", "x2"), heavy, counters);
  return parts;
}

SVal count_4cycle(const Relation& r12, const Relation& r23, const Relation& r34, const Relation& r41,
                  Counters* counters) {
  CycleParts p = four_cycle_parts(r12, r23, r34, r41, counters);
  const Semiring& sr = r12.semiring();
  SVal one = branch_total(p.s123, p.s341, {"x1", "x3"}, counters);
  SVal two = branch_total(p.s234, p.s412, {"x2", "x4"}, counters);
  return sr.add(one, two);
}

namespace {

// Applies ligament filters that fit entirely inside r's schema.
Relation prefilter(const Relation& r, const CompiledLigament& lig) {
  std::vector<int> cols;
  for (const auto& t : lig.terms) {
    int c = r.column(t.var);
    if (c < 0) return r;
    cols.push_back(c);
  }
  return select_rows(r, [&](const Tuple& t) {
    double s = 0;
    for (size_t i = 0; i < cols.size(); ++i) s += lig.terms[i].expr.eval(t[cols[i]]);
    return lig.holds(s);
  });
}

Relation eliminate_with(const Relation& parent, const Relation& leaf, const CompiledLigament& lig, Counters* counters) {
  std::set<std::string> vars;
  for (const auto& t : lig.terms) vars.insert(t.var);
  bool in_parent = true, in_leaf = true;
  for (const auto& v : vars) {
    in_parent = in_parent && parent.has(v);
    in_leaf = in_leaf && leaf.has(v);
  }
  if (in_parent) return two_bag_eliminate(prefilter(parent, lig), leaf, {}, counters);
  if (in_leaf) return two_bag_eliminate(parent, prefilter(leaf, lig), {}, counters);
  return two_bag_eliminate(parent, leaf, {lig}, counters);
}

}  // namespace

PathIneqResult count_path_ineq(const Database& db, const std::string& r, const std::string& s, const std::string& t,
                               const Ligament& ligament) {
  for (const auto& term : ligament.terms) {
    if (term.var != "a" && term.var != "b" && term.var != "c" && term.var != "d") {
      throw StructuralError("path ligament uses variable '" + term.var + "' outside a, b, c, d");
    }
  }
  Relation R = rebind(db.get(r), {"a", "b"}, r);
  Relation S = rebind(db.get(s), {"b", "c"}, s);
  Relation T = rebind(db.get(t), {"c", "d"}, t);
  const Semiring& sr = db.semiring();
  PathIneqResult res;
  size_t n = std::max({R.size(), S.size(), T.size()});
  res.threshold = sqrt_threshold(n);
  DegreeSplit split = degree_split(S, {"b"}, res.threshold);
  CompiledLigament lig = compile_ligament(ligament, db);

  Relation U = reorder(multiway_join({R, split.light}, &res.counters), {"a", "b", "c"});
  Relation W = reorder(multiway_join({split.heavy, T}, &res.counters), {"b", "c", "d"});
  res.u_size = U.size();
  res.w_size = W.size();

  Relation light_part = eliminate_with(U, T, lig, &res.counters);
  Relation heavy_part = eliminate_with(W, R, lig, &res.counters);
  res.value = sr.add(light_part.total(), heavy_part.total());
  return res;
}

Ligament a_le_d_ligament() {
  Ligament l;
  l.terms = {{"a", UnaryExpr::affine(1)}, {"b", UnaryExpr::affine(0)}, {"c", UnaryExpr::affine(0)},
             {"d", UnaryExpr::affine(-1)}};
  return l;
}

FaqAiQuery path_query(const Semiring& sr, const Ligament& ligament) {
  FaqAiQuery q;
  q.semiring = sr;
  q.variables = {"a", "b", "c", "d"};
  q.factors = {{{"a", "b"}, "R", true, {}}, {{"b", "c"}, "S", true, {}}, {{"c", "d"}, "T", true, {}}};
  q.ligaments = {ligament};
  return q;
}

FaqAiQuery three_ineq_query(const Semiring& sr) {
  FaqAiQuery q;
  q.semiring = sr;
  q.variables = {"a", "b", "c", "d"};
  q.factors = {{{"a", "b"}, "R", true, {}}, {{"b", "c"}, "S", true, {}}, {{"c", "d"}, "T", true, {}}};
  auto le = [](const std::string& x, const std::string& y) {
    Ligament l;
    l.terms = {{x, UnaryExpr::affine(1)}, {y, UnaryExpr::affine(-1)}};
    return l;
  };
  q.ligaments = {le("a", "c"), le("c", "b"), le("d", "b")};
  return q;
}

namespace {

Relation random_binary(size_t n, size_t domain, std::mt19937_64& rng, const Schema& schema) {
  std::uniform_int_distribution<int64_t> pick(0, static_cast<int64_t>(domain) - 1);
  std::vector<std::pair<Tuple, SVal>> rows;
  for (size_t i = 0; i < n; ++i) rows.emplace_back(Tuple{pick(rng), pick(rng)}, mpz_class(1));
  // Duplicate draws collapse to one tuple with annotation one.
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  rows.erase(std::unique(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first == y.first; }),
             rows.end());
  return Relation::from_rows(Semiring::count(), schema, std::move(rows));
}

Relation pairs(const std::vector<std::pair<int64_t, int64_t>>& ps, const Schema& schema) {
  std::vector<std::pair<Tuple, SVal>> rows;
  for (auto [x, y] : ps) rows.emplace_back(Tuple{x, y}, mpz_class(1));
  return Relation::from_rows(Semiring::count(), schema, std::move(rows));
}

}  // namespace

Database random_path_db(size_t n, size_t domain, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Database db(Semiring::count());
  db.put("R", random_binary(n, domain, rng, {"x", "y"}));
  db.put("S", random_binary(n, domain, rng, {"x", "y"}));
  db.put("T", random_binary(n, domain, rng, {"x", "y"}));
  return db;
}

Database adversarial_path_db(size_t m) {
  const int64_t M = static_cast<int64_t>(m);
  const int64_t off = 10 * M, off2 = 30 * M;
  std::vector<std::pair<int64_t, int64_t>> r, s, t;
  for (int64_t j = 1; j <= M; ++j) {
    r.emplace_back(j, 0);
    r.emplace_back(0, off + j);
    s.emplace_back(0, j);
    s.emplace_back(off + j, off2);
    t.emplace_back(j, 0);
    t.emplace_back(off2, j);
  }
  Database db(Semiring::count());
  db.put("R", pairs(r, {"x", "y"}));
  db.put("S", pairs(s, {"x", "y"}));
  db.put("T", pairs(t, {"x", "y"}));
  return db;
}

Database adversarial_star_db(size_t m) {
  std::vector<std::pair<int64_t, int64_t>> r, s, t;
  for (int64_t j = 1; j <= static_cast<int64_t>(m); ++j) {
    r.emplace_back(j, 0);
    s.emplace_back(0, j);
    t.emplace_back(j, 0);
  }
  Database db(Semiring::count());
  db.put("R", pairs(r, {"x", "y"}));
  db.put("S", pairs(s, {"x", "y"}));
  db.put("T", pairs(t, {"x", "y"}));
  return db;
}

Database random_cycle_db(size_t n, size_t domain, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Database db(Semiring::count());
  for (const char* name : {"R12", "R23", "R34", "R41"}) db.put(name, random_binary(n, domain, rng, {"x", "y"}));
  return db;
}

}  // namespace faqai
