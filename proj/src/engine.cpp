#include "faqai/engine.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>

#include "faqai/dominance.hpp"
#include "faqai/errors.hpp"
#include "faqai/widths.hpp"
#include "json.hpp"

namespace faqai {

namespace {

std::vector<std::string> ordered_names(const Hypergraph& h, VSet s) { return h.names_of(s); }

std::string uncovered_ligament(const FaqAiQuery& q, VSet free_vars) {
  Hypergraph h = q.hypergraph();
  std::string names;
  for (size_t i = 0; i < q.ligaments.size(); ++i) {
    Hypergraph one = h;
    one.ligaments = {h.ligaments[i]};
    if (enumerate_tds(one, free_vars, true).empty()) {
      if (!names.empty()) names += "; ";
      names += ligament_label(q.ligaments[i]);
    }
  }
  return names;
}

}  // namespace

EvalPlan plan(const FaqAiQuery& q) {
  q.validate();
  Hypergraph h = q.hypergraph();
  VSet free_vars = q.free_set();
  auto tds = enumerate_tds(h, free_vars, true);
  if (tds.empty()) {
    std::string which = uncovered_ligament(q, free_vars);
    if (which.empty()) which = "the ligament set as a whole";
    throw PlanningError("no relaxed F-connex tree decomposition covers " + which);
  }
  WidthReport rep = faqw(h, free_vars, true);
  EvalPlan p = plan_for_td(q, *rep.witness_td);
  p.notes.push_back(rep.search_family_note);
  return p;
}

EvalPlan plan_for_td(const FaqAiQuery& q, const TreeDecomposition& td) {
  Hypergraph h = q.hypergraph();
  VSet free_vars = q.free_set();
  CoverageCertificate cert = validate_relaxed(td, h, free_vars, true);
  if (!cert.valid) {
    std::string msg = "invalid relaxed tree decomposition:";
    for (const auto& v : cert.violations) msg += " " + v + ";";
    throw PlanningError(msg);
  }
  EvalPlan p;
  p.td = td;
  p.td.core = cert.core;
  p.free_vars = free_vars;
  const int m = static_cast<int>(td.bags.size());
  p.in_core.assign(m, false);
  if (free_vars != 0)
    for (int t : *cert.core) p.in_core[t] = true;
  p.root = free_vars != 0 ? cert.core->front() : 0;

  for (VSet b : td.bags) p.width = std::max(p.width, rho_star(h, b));

  auto adj = td.adjacency();
  p.parent.assign(m, -1);
  std::function<void(int, int)> walk = [&](int t, int from) {
    for (int c : adj[t]) {
      if (c == from) continue;
      p.parent[c] = t;
      walk(c, t);
    }
    if (!p.in_core[t] && t != p.root) p.elimination.push_back(t);
  };
  walk(p.root, -1);
  // With F empty the root is the last bag standing and is summed out at the end.

  for (size_t f = 0; f < q.factors.size(); ++f) {
    VSet e = h.skeleton[f];
    int at = -1;
    for (int t = 0; t < m && at < 0; ++t)
      if (subset_of(e, td.bags[t])) at = t;
    if (at < 0) throw PlanningError("factor over " + format_set(h, e) + " is not inside any bag");
    p.assignment.push_back(at);
  }

  std::vector<int> rank(m);
  for (int t = 0; t < m; ++t) rank[t] = m + t;
  for (size_t i = 0; i < p.elimination.size(); ++i) rank[p.elimination[i]] = static_cast<int>(i);
  std::vector<int> by_rank(m);
  for (int t = 0; t < m; ++t) by_rank[t] = t;
  std::sort(by_rank.begin(), by_rank.end(), [&](int a, int b) { return rank[a] < rank[b]; });

  for (size_t l = 0; l < q.ligaments.size(); ++l) {
    VSet s = h.ligaments[l];
    LigamentRoute r;
    for (int t : by_rank) {
      if (subset_of(s, td.bags[t])) {
        r.kind = LigamentRoute::Kind::Absorbed;
        r.bag = t;
        break;
      }
    }
    if (r.bag < 0) {
      for (int c : p.elimination) {
        if (subset_of(s, td.bags[c] | td.bags[p.parent[c]])) {
          r.kind = LigamentRoute::Kind::Step;
          r.bag = c;
          r.parent = p.parent[c];
          break;
        }
      }
    }
    if (r.bag < 0) {
      for (int t = 0; t < m && r.bag < 0; ++t) {
        if (p.parent[t] >= 0 && p.in_core[t] && p.in_core[p.parent[t]] &&
            subset_of(s, td.bags[t] | td.bags[p.parent[t]])) {
          r.kind = LigamentRoute::Kind::Final;
          r.bag = t;
          r.parent = p.parent[t];
        }
      }
    }
    if (r.bag < 0) throw PlanningError("ligament " + ligament_label(q.ligaments[l]) + " is not covered by the plan");
    p.routes.push_back(r);
  }
  p.notes.push_back("ligaments not inside one bag are routed to the earliest covering elimination step");
  return p;
}

std::string describe_plan(const FaqAiQuery& q, const EvalPlan& p) {
  using nlohmann::json;
  Hypergraph h = q.hypergraph();
  json j;
  j["width"] = fraction_string(p.width);
  j["bags"] = json::array();
  for (VSet b : p.td.bags) j["bags"].push_back(h.names_of(b));
  j["tree_edges"] = json::array();
  for (auto [a, b] : p.td.edges) j["tree_edges"].push_back({a, b});
  j["root"] = p.root;
  j["core"] = json::array();
  for (size_t t = 0; t < p.in_core.size(); ++t)
    if (p.in_core[t]) j["core"].push_back(t);
  j["elimination"] = p.elimination;
  j["assignment"] = p.assignment;
  j["ligaments"] = json::array();
  for (size_t l = 0; l < p.routes.size(); ++l) {
    const auto& r = p.routes[l];
    json o = {{"ligament", ligament_label(q.ligaments[l])}};
    switch (r.kind) {
      case LigamentRoute::Kind::Absorbed: o["absorbed_into"] = r.bag; break;
      case LigamentRoute::Kind::Step: o["eliminated_at"] = {r.bag, r.parent}; break;
      case LigamentRoute::Kind::Final: o["core_filter"] = {r.bag, r.parent}; break;
    }
    j["ligaments"].push_back(o);
  }
  j["notes"] = p.notes;
  return j.dump();
}

namespace {

// Column position of each term's variable in `schema`, or -1.
std::vector<int> term_columns(const std::vector<CompiledTerm>& terms, const Schema& schema) {
  std::vector<int> out;
  for (const auto& t : terms) {
    auto it = std::find(schema.begin(), schema.end(), t.var);
    out.push_back(it == schema.end() ? -1 : static_cast<int>(it - schema.begin()));
  }
  return out;
}

Relation apply_row_filters(const Relation& r, const std::vector<const CompiledLigament*>& ligs,
                           const std::vector<std::vector<CompiledTerm>>& fns) {
  if (ligs.empty() && fns.empty()) return r;
  const Semiring& sr = r.semiring();
  std::vector<std::vector<int>> lcols, fcols;
  for (const auto* l : ligs) lcols.push_back(term_columns(l->terms, r.schema()));
  for (const auto& f : fns) fcols.push_back(term_columns(f, r.schema()));
  std::vector<Tuple> ts;
  std::vector<SVal> ws;
  for (size_t i = 0; i < r.size(); ++i) {
    const Tuple& t = r.tuple(i);
    bool keep = true;
    for (size_t k = 0; k < ligs.size() && keep; ++k) {
      double sum = 0;
      for (size_t j = 0; j < ligs[k]->terms.size(); ++j) sum += ligs[k]->terms[j].expr.eval(t[lcols[k][j]]);
      keep = ligs[k]->holds(sum);
    }
    if (!keep) continue;
    SVal w = r.weight(i);
    for (size_t k = 0; k < fns.size(); ++k) {
      double v = 1;
      for (size_t j = 0; j < fns[k].size(); ++j) v *= fns[k][j].expr.eval(t[fcols[k][j]]);
      sr.mul_into(w, sr.from_double(v));
    }
    if (sr.is_zero(w)) continue;
    ts.push_back(t);
    ws.push_back(std::move(w));
  }
  return Relation::from_sorted(sr, r.schema(), std::move(ts), std::move(ws));
}

}  // namespace

Relation bag_factor(const Database& db, const FaqAiQuery& q, const EvalPlan& p, int t, Counters* counters) {
  Hypergraph h = q.hypergraph();
  VSet bag = p.td.bags[t];
  Schema vars = ordered_names(h, bag);
  std::vector<Relation> parts;
  std::vector<std::vector<CompiledTerm>> fns;
  for (size_t f = 0; f < q.factors.size(); ++f) {
    const Factor& fac = q.factors[f];
    if (!fac.finite) {
      if (p.assignment[f] == t) fns.push_back(compile_terms(fac.fn, db));
      continue;
    }
    if (p.assignment[f] == t) {
      parts.push_back(bind_factor(db, fac));
    } else if (h.skeleton[f] & bag) {
      parts.push_back(indicator_projection(bind_factor(db, fac), vars));
    }
  }
  if (parts.empty()) throw PlanningError("bag " + format_set(h, bag) + " meets no finite factor");
  Relation joined = reorder(multiway_join(parts, counters), vars);
  std::vector<CompiledLigament> absorbed;
  for (size_t l = 0; l < q.ligaments.size(); ++l) {
    const auto& r = p.routes[l];
    if (r.kind == LigamentRoute::Kind::Absorbed && r.bag == t) absorbed.push_back(compile_ligament(q.ligaments[l], db));
  }
  std::vector<const CompiledLigament*> ptrs;
  for (const auto& l : absorbed) ptrs.push_back(&l);
  return apply_row_filters(joined, ptrs, fns);
}

Relation two_bag_eliminate(const Relation& parent, const Relation& leaf, const std::vector<CompiledLigament>& ligaments,
                           Counters* counters) {
  const Semiring& sr = parent.semiring();
  if (leaf.semiring() != sr) throw StructuralError("two_bag_eliminate over mixed semirings");
  const Schema& U = parent.schema();
  const Schema& L = leaf.schema();
  auto in = [](const Schema& s, const std::string& v) { return std::find(s.begin(), s.end(), v) != s.end(); };

  Schema shared;
  for (const auto& v : U)
    if (in(L, v)) shared.push_back(v);
  std::vector<int> ukey, lkey;
  for (const auto& v : shared) {
    ukey.push_back(parent.column(v));
    lkey.push_back(leaf.column(v));
  }

  const size_t k = ligaments.size();
  // Per ligament: parent-side and leaf-only term columns.
  std::vector<std::vector<std::pair<int, const CompiledExpr*>>> qside(k), pside(k);
  std::vector<Cmp> strict(k);
  for (size_t i = 0; i < k; ++i) {
    bool touches_u_only = true, touches_l_only = true;
    for (const auto& term : ligaments[i].terms) {
      bool inu = in(U, term.var), inl = in(L, term.var);
      if (!inu && !inl) {
        throw PlanningError("ligament " + ligaments[i].label + " uses '" + term.var + "' outside both bags");
      }
      if (inu) {
        qside[i].emplace_back(parent.column(term.var), &term.expr);
      } else {
        pside[i].emplace_back(leaf.column(term.var), &term.expr);
      }
      touches_u_only = touches_u_only && inu;
      touches_l_only = touches_l_only && inl;
    }
    if (touches_u_only || touches_l_only) {
      throw PlanningError("ligament " + ligaments[i].label + " lies inside one bag and should have been absorbed");
    }
    strict[i] = ligaments[i].strict ? Cmp::Lt : Cmp::Le;
  }

  struct Bucket {
    std::vector<size_t> rows;
    SVal sum;
    std::optional<DominanceIndex> index;
    std::vector<double> point;  // single-row buckets compare directly
  };
  std::map<Tuple, Bucket> buckets;
  for (size_t i = 0; i < leaf.size(); ++i) {
    Tuple key;
    key.reserve(lkey.size());
    for (int c : lkey) key.push_back(leaf.tuple(i)[c]);
    buckets[std::move(key)].rows.push_back(i);
  }
  auto leaf_point = [&](size_t row, double* out) {
    const Tuple& t = leaf.tuple(row);
    for (size_t i = 0; i < k; ++i) {
      double s = 0;
      for (const auto& [c, e] : pside[i]) s += e->eval(t[c]);
      out[i] = -s;
    }
  };
  for (auto& [key, b] : buckets) {
    if (k == 0) {
      b.sum = sr.zero();
      for (size_t r : b.rows) sr.add_into(b.sum, leaf.weight(r));
    } else if (b.rows.size() == 1) {
      b.point.resize(k);
      leaf_point(b.rows[0], b.point.data());
    } else {
      std::vector<double> coords(b.rows.size() * k);
      std::vector<SVal> weights;
      weights.reserve(b.rows.size());
      for (size_t j = 0; j < b.rows.size(); ++j) {
        leaf_point(b.rows[j], &coords[j * k]);
        weights.push_back(leaf.weight(b.rows[j]));
      }
      b.index.emplace(DominanceIndex::build(sr, static_cast<int>(k), std::move(coords), std::move(weights), strict));
    }
    if (counters) counters->tuples_materialized += b.rows.size();
  }

  std::vector<Tuple> ts;
  std::vector<SVal> ws;
  std::vector<double> qv(k);
  Tuple key;
  for (size_t i = 0; i < parent.size(); ++i) {
    const Tuple& t = parent.tuple(i);
    key.clear();
    for (int c : ukey) key.push_back(t[c]);
    if (counters) ++counters->trie_probes;
    auto it = buckets.find(key);
    if (it == buckets.end()) continue;
    const Bucket& b = it->second;
    SVal agg;
    if (k == 0) {
      agg = b.sum;
    } else {
      for (size_t j = 0; j < k; ++j) {
        double s = 0;
        for (const auto& [c, e] : qside[j]) s += e->eval(t[c]);
        qv[j] = s;
      }
      if (counters) ++counters->dominance_queries;
      if (b.index) {
        agg = b.index->query(qv);
      } else {
        bool ok = true;
        for (size_t j = 0; j < k && ok; ++j) ok = strict[j] == Cmp::Le ? qv[j] <= b.point[j] : qv[j] < b.point[j];
        agg = ok ? leaf.weight(b.rows[0]) : sr.zero();
      }
    }
    SVal w = sr.mul(parent.weight(i), agg);
    if (sr.is_zero(w)) continue;
    ts.push_back(t);
    ws.push_back(std::move(w));
  }
  if (counters) counters->tuples_materialized += ts.size();
  return Relation::from_sorted(sr, U, std::move(ts), std::move(ws));
}

Relation evaluate(const Database& db, const FaqAiQuery& q, Counters* counters) {
  q.validate(&db);
  return evaluate_with_plan(db, q, plan(q), counters);
}

Relation evaluate_with_plan(const Database& db, const FaqAiQuery& q, const EvalPlan& p, Counters* counters) {
  q.validate(&db);
  if (db.semiring() != q.semiring) {
    throw StructuralError("query semiring " + q.semiring.name() + " does not match database semiring " +
                          db.semiring().name());
  }
  const int m = static_cast<int>(p.td.bags.size());
  std::vector<Relation> phi;
  phi.reserve(m);
  for (int t = 0; t < m; ++t) phi.push_back(bag_factor(db, q, p, t, counters));

  std::vector<CompiledLigament> compiled;
  for (const auto& l : q.ligaments) compiled.push_back(compile_ligament(l, db));

  for (int c : p.elimination) {
    std::vector<CompiledLigament> routed;
    for (size_t l = 0; l < p.routes.size(); ++l)
      if (p.routes[l].kind == LigamentRoute::Kind::Step && p.routes[l].bag == c) routed.push_back(compiled[l]);
    int par = p.parent[c];
    phi[par] = two_bag_eliminate(phi[par], phi[c], routed, counters);
  }

  if (p.free_vars == 0) return group_aggregate(phi[p.root], {});

  // Core bags: full reducer over the core subtree, then one join.
  std::vector<int> core;
  for (int t = 0; t < m; ++t)
    if (p.in_core[t]) core.push_back(t);
  auto reduce = [&](int into, int from) {
    Schema common;
    for (const auto& v : phi[into].schema())
      if (phi[from].has(v)) common.push_back(v);
    if (common.empty()) return;
    phi[into] = semijoin_reduce(phi[into], indicator_projection(phi[from], common));
  };
  std::vector<int> post;
  std::function<void(int)> order = [&](int t) {
    for (int c : core)
      if (p.parent[c] == t) order(c);
    post.push_back(t);
  };
  order(p.root);
  for (int t : post)
    if (p.parent[t] >= 0) reduce(p.parent[t], t);
  for (auto it = post.rbegin(); it != post.rend(); ++it)
    if (p.parent[*it] >= 0) reduce(*it, p.parent[*it]);

  std::vector<Relation> parts;
  for (int t : core) parts.push_back(phi[t]);
  Relation joined = multiway_join(parts, counters);
  std::vector<const CompiledLigament*> finals;
  for (size_t l = 0; l < p.routes.size(); ++l)
    if (p.routes[l].kind == LigamentRoute::Kind::Final) finals.push_back(&compiled[l]);
  joined = apply_row_filters(joined, finals, {});
  return group_aggregate(joined, q.free);
}

}  // namespace faqai
