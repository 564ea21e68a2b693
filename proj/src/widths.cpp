#include "faqai/widths.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "faqai/errors.hpp"
#include "faqai/lp.hpp"

namespace faqai {

std::string kind_name(WidthKind k) {
  switch (k) {
    case WidthKind::RhoStar: return "rho_star";
    case WidthKind::Faqw: return "faqw";
    case WidthKind::FaqwL: return "faqw_l";
    case WidthKind::Smfw: return "smfw";
    case WidthKind::SmfwL: return "smfw_l";
    case WidthKind::SharpSmfw: return "sharp_smfw";
    case WidthKind::SharpSmfwL: return "sharp_smfw_l";
  }
  return "?";
}

WidthKind parse_kind(const std::string& s) {
  static const std::map<std::string, WidthKind> names = {
      {"rho_star", WidthKind::RhoStar},     {"faqw", WidthKind::Faqw},
      {"faqw_l", WidthKind::FaqwL},         {"smfw", WidthKind::Smfw},
      {"smfw_l", WidthKind::SmfwL},         {"sharp_smfw", WidthKind::SharpSmfw},
      {"sharp_smfw_l", WidthKind::SharpSmfwL}, {"fhtw", WidthKind::Faqw},
      {"subw", WidthKind::Smfw},            {"sharp_subw", WidthKind::SharpSmfw},
  };
  auto it = names.find(s);
  if (it == names.end()) throw StructuralError("unknown width kind '" + s + "'");
  return it->second;
}

std::string fraction_string(const mpq_class& q) {
  mpq_class c = q;
  c.canonicalize();
  return c.get_str();
}

mpq_class rho_star(const Hypergraph& h, VSet target) {
  if (!subset_of(target, h.all())) throw StructuralError("target outside the vertex set");
  if (target == 0) return 0;
  auto edges = h.finite_edges();
  LinearProgram lp;
  lp.maximize = false;
  for (size_t k = 0; k < edges.size(); ++k) lp.add_var(1);
  for (int v = 0; v < h.n(); ++v) {
    if (!(target >> v & 1)) continue;
    std::vector<std::pair<int, mpq_class>> row;
    for (size_t k = 0; k < edges.size(); ++k)
      if (edges[k] >> v & 1) row.emplace_back(static_cast<int>(k), 1);
    if (row.empty()) throw InfeasibleError("variable " + h.names[v] + " is not covered by any finite edge");
    lp.add_row(std::move(row), RowSense::Ge, 1);
  }
  return solve_lp(lp).value;
}

namespace {

using Expr = std::vector<std::pair<int, mpq_class>>;

// LP over set functions h restricted to edge domination and one of the three cones.
class SetFunctionLp {
 public:
  SetFunctionLp(const Hypergraph& h, HSpace space) : space_(space), n_(h.n()) {
    if (space != HSpace::Modular && n_ > kMaxLpVertices) {
      throw CapacityError("set-function LPs support at most " + std::to_string(kMaxLpVertices) + " vertices");
    }
    VSet all = h.all();
    auto edges = h.finite_edges();
    if (space == HSpace::EPolymatroid) {
      inside_edge_.assign(size_t(1) << n_, false);
      for (VSet s = 0; s < (VSet(1) << n_); ++s)
        for (VSet e : edges)
          if (subset_of(s, e)) inside_edge_[s] = true;
      inside_edge_[0] = true;
    }

    if (space == HSpace::Modular) {
      for (int v = 0; v < n_; ++v) lp.add_var();
    } else {
      var_.assign(size_t(1) << n_, -1);
      for (VSet s = 1; s < (VSet(1) << n_); ++s) var_[s] = lp.add_var();
    }
    for (VSet e : edges) add_le(lp, expr(e), {}, 1);

    if (space == HSpace::Polymatroid || space == HSpace::EPolymatroid) {
      for (int i = 0; i < n_; ++i) {
        if (space == HSpace::Polymatroid) {
          add_le(lp, expr(all & ~(VSet(1) << i)), expr(all), 0);
        } else {
          for (VSet s = 0; s < (VSet(1) << n_); ++s)
            if (!(s >> i & 1)) add_le(lp, expr(s), expr(s | VSet(1) << i), 0);
        }
      }
      for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
          VSet ij = (VSet(1) << i) | (VSet(1) << j);
          for (VSet k = 0; k < (VSet(1) << n_); ++k) {
            if (k & ij) continue;
            if (space == HSpace::EPolymatroid && !inside_edge_[k]) continue;
            add_submodular(lp, k | VSet(1) << i, k | VSet(1) << j);
          }
        }
      }
    }
  }

  Expr expr(VSet s) const {
    Expr e;
    if (space_ == HSpace::Modular) {
      for (int v = 0; v < n_; ++v)
        if (s >> v & 1) e.emplace_back(v, 1);
    } else if (s != 0) {
      e.emplace_back(var_[s], 1);
    }
    return e;
  }

  // lhs - rhs <= b
  void add_le(LinearProgram& p, const Expr& lhs, const Expr& rhs, const mpq_class& b) const {
    std::map<int, mpq_class> acc;
    for (const auto& [v, c] : lhs) acc[v] += c;
    for (const auto& [v, c] : rhs) acc[v] -= c;
    Expr row;
    for (auto& [v, c] : acc)
      if (::sgn(c) != 0) row.emplace_back(v, c);
    if (row.empty()) return;
    p.add_row(std::move(row), RowSense::Le, b);
  }

  void add_submodular(LinearProgram& p, VSet x, VSet y) const {
    Expr lhs = expr(x | y), rhs = expr(x);
    Expr e = expr(x & y);
    lhs.insert(lhs.end(), e.begin(), e.end());
    Expr r2 = expr(y);
    rhs.insert(rhs.end(), r2.begin(), r2.end());
    add_le(p, lhs, rhs, 0);
  }

  std::vector<mpq_class> table(const LpSolution& sol) const {
    std::vector<mpq_class> t(size_t(1) << n_, 0);
    for (VSet s = 1; s < (VSet(1) << n_); ++s)
      for (const auto& [v, c] : expr(s)) t[s] += c * sol.x[v];
    return t;
  }

  // E-polymatroid submodularity is stated for every pair whose intersection lies inside a
  // finite edge. Only the elemental ones are seeded; violated pairs are added until none remain.
  LpSolution solve(LinearProgram& prog) const {
    for (;;) {
      LpSolution sol = solve_lp(prog);
      if (space_ != HSpace::EPolymatroid) return sol;
      auto t = table(sol);
      size_t before = prog.rows.size();
      for (VSet x = 1; x < (VSet(1) << n_); ++x) {
        for (VSet y = x + 1; y < (VSet(1) << n_); ++y) {
          if (subset_of(x, y) || subset_of(y, x) || !inside_edge_[x & y]) continue;
          if (t[x | y] + t[x & y] > t[x] + t[y]) add_submodular(prog, x, y);
        }
      }
      if (prog.rows.size() == before) return sol;
    }
  }

  LinearProgram lp;

 private:
  HSpace space_;
  int n_;
  std::vector<int> var_;
  std::vector<bool> inside_edge_;
};

void check_cover(const Hypergraph& h) {
  h.check();
}

std::string family_note(size_t count, bool relaxed) {
  return "minimum over " + std::to_string(count) + (relaxed ? " relaxed" : "") +
         " F-connex TDs from elimination orders" + (relaxed ? " and two-bag covers" : "") +
         "; optimality is relative to this family";
}

}  // namespace

mpq_class max_h_over_bag(const Hypergraph& h, VSet bag, HSpace space) {
  check_cover(h);
  if (!subset_of(bag, h.all())) throw StructuralError("bag outside the vertex set");
  SetFunctionLp base(h, space);
  if (bag == 0) return 0;
  LinearProgram prog = base.lp;
  for (const auto& [v, c] : base.expr(bag)) prog.objective[v] += c;
  return base.solve(prog).value;
}

WidthReport faqw(const Hypergraph& h, VSet free_vars, bool relaxed) {
  auto tds = enumerate_tds(h, free_vars, relaxed);
  if (tds.empty()) throw PlanningError("no valid F-connex tree decomposition for F = " + format_set(h, free_vars));
  std::map<VSet, mpq_class> cache;
  auto rho = [&](VSet b) -> const mpq_class& {
    auto it = cache.find(b);
    if (it == cache.end()) it = cache.emplace(b, rho_star(h, b)).first;
    return it->second;
  };
  WidthReport rep;
  rep.kind = relaxed ? WidthKind::FaqwL : WidthKind::Faqw;
  rep.family_size = tds.size();
  rep.search_family_note = family_note(tds.size(), relaxed);
  for (const auto& td : tds) {
    mpq_class w = 0;
    for (VSet b : td.bags) w = std::max(w, rho(b));
    if (!rep.witness_td || w < rep.value) {
      rep.value = w;
      rep.witness_td = td;
    }
  }
  return rep;
}

WidthReport smfw(const Hypergraph& h, VSet free_vars, bool relaxed, bool sharp) {
  if (h.n() > kMaxLpVertices) {
    throw CapacityError("submodular widths support at most " + std::to_string(kMaxLpVertices) + " vertices");
  }
  auto tds = enumerate_tds(h, free_vars, relaxed);
  if (tds.empty()) throw PlanningError("no valid F-connex tree decomposition for F = " + format_set(h, free_vars));

  std::vector<std::vector<VSet>> fam;
  std::vector<int> rep_td;
  {
    std::set<std::vector<VSet>> seen;
    for (size_t i = 0; i < tds.size(); ++i) {
      if (seen.insert(tds[i].bag_set()).second) {
        fam.push_back(tds[i].bag_set());
        rep_td.push_back(static_cast<int>(i));
      }
    }
  }
  // T2 dominates T1 when each bag of T2 sits inside a bag of T1: T1 never attains the minimum.
  auto dominates = [](const std::vector<VSet>& t2, const std::vector<VSet>& t1) {
    for (VSet b2 : t2) {
      bool inside = false;
      for (VSet b1 : t1) inside = inside || subset_of(b2, b1);
      if (!inside) return false;
    }
    return true;
  };
  std::vector<bool> dropped(fam.size(), false);
  for (size_t i = 0; i < fam.size(); ++i) {
    for (size_t j = 0; j < fam.size() && !dropped[i]; ++j) {
      if (i == j || dropped[j] || !dominates(fam[j], fam[i])) continue;
      if (dominates(fam[i], fam[j]) && j > i) continue;
      dropped[i] = true;
    }
  }
  std::vector<std::vector<VSet>> kept;
  for (size_t i = 0; i < fam.size(); ++i)
    if (!dropped[i]) kept.push_back(fam[i]);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });

  double selections = 1;
  for (const auto& t : kept) selections *= static_cast<double>(t.size());
  if (selections > kMaxBagSelections) throw CapacityError("too many bag selections for the submodular width search");

  HSpace space = sharp ? HSpace::EPolymatroid : HSpace::Polymatroid;
  SetFunctionLp base(h, space);
  const int z = base.lp.add_var(1);

  std::map<std::vector<VSet>, std::pair<mpq_class, std::vector<mpq_class>>> cache;
  auto lp_value = [&](const std::vector<VSet>& chosen) -> const std::pair<mpq_class, std::vector<mpq_class>>& {
    auto it = cache.find(chosen);
    if (it != cache.end()) return it->second;
    LinearProgram prog = base.lp;
    for (VSet b : chosen) {
      Expr row{{z, 1}};
      for (const auto& [v, c] : base.expr(b)) row.emplace_back(v, -c);
      prog.add_row(std::move(row), RowSense::Le, 0);
    }
    LpSolution sol = base.solve(prog);
    return cache.emplace(chosen, std::make_pair(sol.value, base.table(sol))).first->second;
  };

  mpq_class upper = -1;
  for (const auto& t : kept) {
    mpq_class m = 0;
    for (VSet b : t) m = std::max(m, lp_value({b}).first);
    if (upper < 0 || m < upper) upper = m;
  }

  WidthReport rep;
  rep.kind = relaxed ? (sharp ? WidthKind::SharpSmfwL : WidthKind::SmfwL) : (sharp ? WidthKind::SharpSmfw : WidthKind::Smfw);
  rep.family_size = tds.size();
  rep.search_family_note = family_note(tds.size(), relaxed);
  mpq_class best = -1;
  std::vector<mpq_class> best_h;
  bool done = false;

  std::function<void(size_t, const std::vector<VSet>&)> search = [&](size_t i, const std::vector<VSet>& chosen) {
    if (done) return;
    if (i == kept.size()) {
      const auto& [v, table] = lp_value(chosen);
      if (v > best) {
        best = v;
        best_h = table;
        if (best == upper) done = true;
      }
      return;
    }
    for (VSet c : chosen)
      for (VSet b : kept[i])
        if (subset_of(c, b)) return search(i + 1, chosen);
    for (VSet b : kept[i]) {
      std::vector<VSet> next;
      for (VSet c : chosen)
        if (!subset_of(b, c)) next.push_back(c);
      next.push_back(b);
      std::sort(next.begin(), next.end());
      if (lp_value(next).first <= best) continue;
      search(i + 1, next);
      if (done) return;
    }
  };
  search(0, {});
  rep.value = best;
  rep.witness_h = best_h;
  // Report the TD attaining the minimax for the witness h.
  if (!best_h.empty()) {
    mpq_class lo = -1;
    for (int idx : rep_td) {
      mpq_class m = 0;
      for (VSet b : tds[idx].bags) m = std::max(m, best_h[b]);
      if (lo < 0 || m < lo) {
        lo = m;
        rep.witness_td = tds[idx];
      }
    }
  }
  return rep;
}

WidthReport compute_width(const Hypergraph& h, VSet free_vars, WidthKind kind) {
  switch (kind) {
    case WidthKind::RhoStar: {
      WidthReport rep;
      rep.kind = kind;
      rep.value = rho_star(h, h.all());
      rep.search_family_note = "fractional edge cover of all variables";
      return rep;
    }
    case WidthKind::Faqw: return faqw(h, free_vars, false);
    case WidthKind::FaqwL: return faqw(h, free_vars, true);
    case WidthKind::Smfw: return smfw(h, free_vars, false, false);
    case WidthKind::SmfwL: return smfw(h, free_vars, true, false);
    case WidthKind::SharpSmfw: return smfw(h, free_vars, false, true);
    case WidthKind::SharpSmfwL: return smfw(h, free_vars, true, true);
  }
  throw StructuralError("unknown width kind");
}

}  // namespace faqai
