#include "faqai/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>

#include "faqai/errors.hpp"

namespace faqai {

Relation oracle_eval(const Database& db, const FaqAiQuery& q, size_t budget) {
  q.validate(&db);
  if (db.semiring() != q.semiring) throw StructuralError("query and database semirings differ");
  const Semiring& sr = q.semiring;
  const size_t n = q.variables.size();
  auto var_index = [&](const std::string& v) {
    return static_cast<int>(std::find(q.variables.begin(), q.variables.end(), v) - q.variables.begin());
  };

  struct Finite {
    Relation rel;
    std::vector<int> cols;
  };
  std::vector<Finite> finite;
  struct Fn {
    std::vector<CompiledTerm> terms;
    std::vector<int> cols;
  };
  std::vector<Fn> fns;
  for (const auto& f : q.factors) {
    std::vector<int> cols;
    for (const auto& v : f.vars) cols.push_back(var_index(v));
    if (f.finite) {
      finite.push_back({bind_factor(db, f), cols});
    } else {
      Fn fn{compile_terms(f.fn, db), {}};
      for (const auto& t : fn.terms) fn.cols.push_back(var_index(t.var));
      fns.push_back(std::move(fn));
    }
  }
  std::vector<CompiledLigament> ligs;
  std::vector<std::vector<int>> lig_cols;
  for (const auto& l : q.ligaments) {
    ligs.push_back(compile_ligament(l, db));
    std::vector<int> cols;
    for (const auto& t : l.terms) cols.push_back(var_index(t.var));
    lig_cols.push_back(cols);
  }
  std::vector<int> free_cols;
  for (const auto& v : q.free) free_cols.push_back(var_index(v));

  std::vector<std::optional<Value>> asg(n);
  std::map<Tuple, SVal> groups;
  size_t leaves = 0;

  std::function<void(size_t, const SVal&)> rec = [&](size_t i, const SVal& w) {
    if (i == finite.size()) {
      if (++leaves > budget) throw CapacityError("oracle join exceeds its budget of " + std::to_string(budget));
      for (size_t k = 0; k < ligs.size(); ++k) {
        double s = 0;
        for (size_t j = 0; j < ligs[k].terms.size(); ++j) s += ligs[k].terms[j].expr.eval(*asg[lig_cols[k][j]]);
        if (!ligs[k].holds(s)) return;
      }
      SVal total = w;
      for (const auto& fn : fns) {
        double v = 1;
        for (size_t j = 0; j < fn.terms.size(); ++j) v *= fn.terms[j].expr.eval(*asg[fn.cols[j]]);
        sr.mul_into(total, sr.from_double(v));
      }
      if (sr.is_zero(total)) return;
      Tuple key;
      for (int c : free_cols) key.push_back(*asg[c]);
      auto it = groups.find(key);
      if (it == groups.end()) groups.emplace(std::move(key), std::move(total));
      else sr.add_into(it->second, total);
      return;
    }
    const Finite& f = finite[i];
    for (size_t r = 0; r < f.rel.size(); ++r) {
      const Tuple& t = f.rel.tuple(r);
      std::vector<int> bound;
      bool ok = true;
      for (size_t j = 0; j < f.cols.size() && ok; ++j) {
        auto& slot = asg[f.cols[j]];
        if (slot) {
          ok = *slot == t[j];
        } else {
          slot = t[j];
          bound.push_back(f.cols[j]);
        }
      }
      if (ok) rec(i + 1, sr.mul(w, f.rel.weight(r)));
      for (int c : bound) asg[c].reset();
    }
  };
  rec(0, sr.one());

  std::vector<std::pair<Tuple, SVal>> rows(groups.begin(), groups.end());
  return Relation::from_rows(sr, q.free, std::move(rows));
}

double oracle_worlds(const Database& db, const IqQuery& q) {
  q.validate(db);
  struct Item {
    size_t factor;
    double p;
    std::optional<double> x;
  };
  std::vector<Item> items;
  for (size_t f = 0; f < q.factors.size(); ++f) {
    const auto& fac = q.factors[f];
    const Relation& r = db.get(fac.relation);
    int col = -1;
    if (!fac.ineq_var.empty())
      col = static_cast<int>(std::find(fac.vars.begin(), fac.vars.end(), fac.ineq_var) - fac.vars.begin());
    for (size_t i = 0; i < r.size(); ++i) {
      Item it{f, std::get<double>(r.weight(i)), std::nullopt};
      if (col >= 0) it.x = numeric_value(r.tuple(i)[col]);
      items.push_back(it);
    }
  }
  if (items.size() > kOracleWorldTuples) {
    throw CapacityError("world enumeration supports at most " + std::to_string(kOracleWorldTuples) + " tuples");
  }
  std::map<std::string, size_t> factor_of;
  for (size_t f = 0; f < q.factors.size(); ++f)
    if (!q.factors[f].ineq_var.empty()) factor_of[q.factors[f].ineq_var] = f;
  std::vector<std::pair<size_t, size_t>> ineqs;
  for (const auto& [a, b] : q.inequalities) ineqs.emplace_back(factor_of.at(a), factor_of.at(b));

  const size_t m = items.size();
  const size_t F = q.factors.size();
  double total = 0;
  std::vector<std::vector<double>> vals(F);
  std::vector<double> pick(F);
  for (uint64_t world = 0; world < (uint64_t(1) << m); ++world) {
    double pw = 1;
    for (auto& v : vals) v.clear();
    for (size_t i = 0; i < m; ++i) {
      bool in = world >> i & 1;
      pw *= in ? items[i].p : 1 - items[i].p;
      if (in) vals[items[i].factor].push_back(items[i].x.value_or(0));
    }
    if (pw == 0) continue;
    bool nonempty = true;
    for (const auto& v : vals) nonempty = nonempty && !v.empty();
    if (!nonempty) continue;
    // Any choice of one present tuple per factor satisfying every inequality.
    std::function<bool(size_t)> choose = [&](size_t f) {
      if (f == F) {
        for (auto [a, b] : ineqs)
          if (!(pick[a] <= pick[b])) return false;
        return true;
      }
      for (double x : vals[f]) {
        pick[f] = x;
        if (choose(f + 1)) return true;
      }
      return false;
    };
    if (choose(0)) total += pw;
  }
  return total;
}

}  // namespace faqai
