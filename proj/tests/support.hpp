#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "faqai/heavylight.hpp"
#include "faqai/hypergraph.hpp"
#include "faqai/ml.hpp"
#include "faqai/probiq.hpp"
#include "faqai/query.hpp"
#include "faqai/relation.hpp"

namespace testing {

using namespace faqai;

inline SVal random_weight(const Semiring& s, std::mt19937_64& rng) {
  switch (s.id()) {
    case SemiringId::Boolean: return true;
    case SemiringId::CountInt: return mpz_class(std::uniform_int_distribution<int>(1, 3)(rng));
    case SemiringId::RealSumProd: return std::uniform_real_distribution<double>(0.25, 2.0)(rng);
  }
  return s.one();
}

inline Relation random_relation(const Semiring& s, const Schema& schema, size_t rows, int domain, std::mt19937_64& rng) {
  std::uniform_int_distribution<int64_t> pick(0, domain - 1);
  std::vector<std::pair<Tuple, SVal>> out;
  for (size_t i = 0; i < rows; ++i) {
    Tuple t;
    for (size_t c = 0; c < schema.size(); ++c) t.push_back(pick(rng));
    out.emplace_back(std::move(t), random_weight(s, rng));
  }
  // Duplicate draws would be summed; keep the first to make weights predictable.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first == b.first; }), out.end());
  return Relation::from_rows(s, schema, std::move(out));
}

inline UnaryExpr random_expr(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-3, 3), off(-4, 4), kind(0, 5);
  switch (kind(rng)) {
    case 0: return UnaryExpr::square(std::uniform_int_distribution<int>(1, 2)(rng), off(rng));
    case 1: return UnaryExpr::negsquare(1, off(rng));
    default: return UnaryExpr::affine(coef(rng), off(rng));
  }
}

struct RandomInstance {
  FaqAiQuery query;
  Database db;
};

// Up to 5 variables, up to 4 finite edges covering them, up to 2 ligaments with integer
// affine/square terms, relations with at most max_rows rows.
inline RandomInstance random_instance(const Semiring& s, std::mt19937_64& rng, size_t max_rows = 20,
                                      bool allow_free = true) {
  std::uniform_int_distribution<int> nv(2, 5);
  const int n = nv(rng);
  std::vector<std::string> vars;
  for (int i = 0; i < n; ++i) vars.push_back(std::string(1, static_cast<char>('a' + i)));
  RandomInstance inst{FaqAiQuery{}, Database(s)};
  FaqAiQuery& q = inst.query;
  q.semiring = s;
  q.variables = vars;
  std::set<std::string> covered;
  std::uniform_int_distribution<int> ne(1, 4), arity(1, 3), vpick(0, n - 1);
  int edges = ne(rng);
  for (int e = 0; e < edges || static_cast<int>(covered.size()) < n; ++e) {
    if (e >= 6) break;
    std::set<std::string> ev;
    int a = arity(rng);
    // Later edges start from an uncovered variable so that everything gets covered.
    if (e >= edges) {
      for (const auto& v : vars)
        if (!covered.count(v)) {
          ev.insert(v);
          break;
        }
    }
    while (static_cast<int>(ev.size()) < std::min(a, n)) ev.insert(vars[vpick(rng)]);
    std::vector<std::string> ordered(ev.begin(), ev.end());
    std::shuffle(ordered.begin(), ordered.end(), rng);
    std::string name = "R" + std::to_string(e);
    q.factors.push_back({ordered, name, true, {}});
    covered.insert(ordered.begin(), ordered.end());
    std::uniform_int_distribution<size_t> rows(0, max_rows);
    Schema cols;
    for (size_t c = 0; c < ordered.size(); ++c) cols.push_back("c" + std::to_string(c));
    inst.db.put(name, random_relation(s, cols, rows(rng), 4, rng));
  }
  if (static_cast<int>(covered.size()) < n) {
    std::vector<std::string> rest;
    for (const auto& v : vars)
      if (!covered.count(v)) rest.push_back(v);
    q.factors.push_back({rest, "Rx", true, {}});
    Schema cols;
    for (size_t c = 0; c < rest.size(); ++c) cols.push_back("c" + std::to_string(c));
    inst.db.put("Rx", random_relation(s, cols, max_rows, 4, rng));
  }
  std::uniform_int_distribution<int> nl(0, 2);
  int ligs = nl(rng);
  for (int l = 0; l < ligs; ++l) {
    std::set<std::string> lv;
    int a = std::uniform_int_distribution<int>(1, n)(rng);
    while (static_cast<int>(lv.size()) < a) lv.insert(vars[vpick(rng)]);
    Ligament lig;
    lig.strict = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    for (const auto& v : lv) lig.terms.push_back({v, random_expr(rng)});
    q.ligaments.push_back(lig);
  }
  if (allow_free) {
    for (const auto& v : vars)
      if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) q.free.push_back(v);
  }
  return inst;
}

inline bool same_relation(const Relation& a, const Relation& b, double tol = kRealTolerance) {
  if (a.schema() != b.schema() || a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.tuple(i) != b.tuple(i)) return false;
    if (!a.semiring().equal(a.weight(i), b.weight(i), tol)) return false;
  }
  return true;
}

// Count of R12(x1,x2) R23(x2,x3) R34(x3,x4) R41(x4,x1) by four nested loops.
inline mpz_class nested_cycle_count(const Database& db) {
  const Relation &a = db.get("R12"), &b = db.get("R23"), &c = db.get("R34"), &d = db.get("R41");
  mpz_class total = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) {
      if (a.tuple(i)[1] != b.tuple(j)[0]) continue;
      for (size_t k = 0; k < c.size(); ++k) {
        if (b.tuple(j)[1] != c.tuple(k)[0]) continue;
        for (size_t l = 0; l < d.size(); ++l) {
          if (c.tuple(k)[1] != d.tuple(l)[0] || d.tuple(l)[1] != a.tuple(i)[0]) continue;
          total += std::get<mpz_class>(a.weight(i)) * std::get<mpz_class>(b.weight(j)) *
                   std::get<mpz_class>(c.weight(k)) * std::get<mpz_class>(d.weight(l));
        }
      }
    }
  return total;
}

// Count of R(a,b) S(b,c) T(c,d) with sum of the ligament's affine terms <= 0.
inline mpz_class nested_path_count(const Database& db, const std::function<bool(double, double, double, double)>& keep) {
  const Relation &r = db.get("R"), &s = db.get("S"), &t = db.get("T");
  mpz_class total = 0;
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = 0; j < s.size(); ++j) {
      if (r.tuple(i)[1] != s.tuple(j)[0]) continue;
      for (size_t k = 0; k < t.size(); ++k) {
        if (s.tuple(j)[1] != t.tuple(k)[0]) continue;
        double a = numeric_value(r.tuple(i)[0]), b = numeric_value(r.tuple(i)[1]);
        double c = numeric_value(s.tuple(j)[1]), d = numeric_value(t.tuple(k)[1]);
        if (!keep(a, b, c, d)) continue;
        total += std::get<mpz_class>(r.weight(i)) * std::get<mpz_class>(s.weight(j)) * std::get<mpz_class>(t.weight(k));
      }
    }
  return total;
}

// Unary probabilistic relations named P0.., one per inequality variable X0.., plus random
// forest-shaped inequalities between them.
struct RandomIq {
  IqQuery query;
  Database db{Semiring::real()};
};

inline RandomIq random_forest_iq(std::mt19937_64& rng, size_t max_tuples = 16) {
  RandomIq out;
  int k = std::uniform_int_distribution<int>(1, 4)(rng);
  size_t budget = max_tuples;
  for (int i = 0; i < k; ++i) {
    size_t left = budget - static_cast<size_t>(k - i - 1);
    size_t rows = std::uniform_int_distribution<size_t>(1, std::min<size_t>(left, 5))(rng);
    budget -= rows;
    bool binary = std::uniform_int_distribution<int>(0, 2)(rng) == 0;
    std::vector<std::pair<Tuple, SVal>> data;
    std::set<Tuple> seen;
    while (data.size() < rows) {
      Tuple t{static_cast<int64_t>(std::uniform_int_distribution<int>(0, 5)(rng))};
      if (binary) t.push_back(static_cast<int64_t>(std::uniform_int_distribution<int>(0, 2)(rng)));
      if (!seen.insert(t).second) continue;
      double p = std::uniform_int_distribution<int>(0, 4)(rng) == 0 ? 1.0 : std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      data.emplace_back(t, p);
    }
    std::string name = "P" + std::to_string(i), var = "X" + std::to_string(i);
    Schema schema = binary ? Schema{"v", "w"} : Schema{"v"};
    out.db.put(name, Relation::from_rows(Semiring::real(), schema, std::move(data)));
    IqFactor f{name, binary ? std::vector<std::string>{var, "W" + std::to_string(i)} : std::vector<std::string>{var}, var};
    out.query.factors.push_back(f);
    // Each node after the first gets at most one parent among earlier nodes, in either direction.
    if (i > 0 && std::uniform_int_distribution<int>(0, 3)(rng) != 0) {
      int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
      std::string pv = "X" + std::to_string(parent);
      out.query.inequalities.emplace_back(pv, var);
    }
  }
  return out;
}

// Hypergraph over single-letter vertices; edges are strings like "ab".
inline Hypergraph make_hypergraph(const std::string& vertices, const std::vector<std::string>& skeleton,
                                  const std::vector<std::string>& ligaments = {},
                                  const std::vector<std::string>& infinite = {}) {
  Hypergraph h;
  for (char c : vertices) h.names.push_back(std::string(1, c));
  auto set = [&](const std::string& e) {
    VSet s = 0;
    for (char c : e) s |= VSet(1) << h.index_of(std::string(1, c));
    return s;
  };
  for (const auto& e : skeleton) {
    h.skeleton.push_back(set(e));
    h.finite.push_back(true);
  }
  for (const auto& e : infinite) {
    h.skeleton.push_back(set(e));
    h.finite.push_back(false);
  }
  for (const auto& e : ligaments) h.ligaments.push_back(set(e));
  return h;
}

// Random hypergraph: 2..max_n vertices, finite edges covering V, up to two ligaments.
inline Hypergraph random_hypergraph(std::mt19937_64& rng, int max_n = 5, int max_edges = 5) {
  Hypergraph h;
  int n = std::uniform_int_distribution<int>(2, max_n)(rng);
  for (int i = 0; i < n; ++i) h.names.push_back(std::string(1, static_cast<char>('a' + i)));
  VSet covered = 0;
  int m = std::uniform_int_distribution<int>(1, max_edges)(rng);
  std::uniform_int_distribution<VSet> pick(1, h.all());
  for (int e = 0; e < m; ++e) {
    VSet s = pick(rng);
    while (popcount(s) > 3) s &= s - 1;
    h.skeleton.push_back(s);
    h.finite.push_back(true);
    covered |= s;
  }
  if (covered != h.all()) {
    h.skeleton.push_back(h.all() & ~covered);
    h.finite.push_back(true);
  }
  int l = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < l; ++i) {
    VSet s = pick(rng);
    if (popcount(s) >= 2) h.ligaments.push_back(s);
  }
  return h;
}

enum class LabelKind { Real, Binary, Ordinal, None };

struct FeatureInstance {
  FeatureQuery fq;
  Database db{Semiring::real()};
};

// Feature joins over a shared key: R(a,x1) S(a,x2,y), or the three-relation path
// R(a,x1,y) S(a,b) T(b,x2). Feature values are continuous so that no row sits on a kink.
inline FeatureInstance random_feature_instance(std::mt19937_64& rng, LabelKind labels, int levels = 3,
                                               bool intercept = false, size_t max_rows = 6) {
  FeatureInstance out;
  Semiring r = Semiring::real();
  std::uniform_real_distribution<double> val(-2, 2);
  std::uniform_int_distribution<int64_t> key(0, 2);
  std::uniform_int_distribution<size_t> rows(1, max_rows);
  auto label = [&]() -> Value {
    switch (labels) {
      case LabelKind::Binary: return rng() % 2 ? 1.0 : -1.0;
      case LabelKind::Ordinal: return static_cast<double>(std::uniform_int_distribution<int>(1, levels)(rng));
      default: return val(rng) * 2;
    }
  };
  auto weight = [&]() -> SVal { return rng() % 4 == 0 ? 2.0 : 1.0; };
  auto table = [&](size_t arity, const std::function<Tuple()>& gen) {
    std::vector<std::pair<Tuple, SVal>> data;
    size_t n = rows(rng);
    for (size_t i = 0; i < n; ++i) data.emplace_back(gen(), weight());
    Schema schema;
    for (size_t c = 0; c < arity; ++c) schema.push_back("c" + std::to_string(c));
    return Relation::from_rows(r, schema, std::move(data));
  };
  const bool has_label = labels != LabelKind::None;
  FaqAiQuery& q = out.fq.join;
  q.semiring = r;
  if (rng() % 2 == 0) {
    q.variables = {"a", "x1", "x2"};
    q.factors = {{{"a", "x1"}, "R", true, {}}, {{"a", "x2"}, "S", true, {}}};
    out.db.put("R", table(2, [&] { return Tuple{key(rng), val(rng)}; }));
    if (has_label) {
      q.variables.push_back("y");
      q.factors[1].vars.push_back("y");
      out.db.put("S", table(3, [&] { return Tuple{key(rng), val(rng), label()}; }));
    } else {
      out.db.put("S", table(2, [&] { return Tuple{key(rng), val(rng)}; }));
    }
  } else {
    q.variables = {"a", "b", "x1", "x2"};
    q.factors = {{{"a", "x1"}, "R", true, {}}, {{"a", "b"}, "S", true, {}}, {{"b", "x2"}, "T", true, {}}};
    if (has_label) {
      q.variables.push_back("y");
      q.factors[0].vars.push_back("y");
      out.db.put("R", table(3, [&] { return Tuple{key(rng), val(rng), label()}; }));
    } else {
      out.db.put("R", table(2, [&] { return Tuple{key(rng), val(rng)}; }));
    }
    out.db.put("S", table(2, [&] { return Tuple{key(rng), key(rng)}; }));
    out.db.put("T", table(2, [&] { return Tuple{key(rng), val(rng)}; }));
  }
  out.fq.features = {"x1", "x2"};
  if (has_label) out.fq.label = "y";
  out.fq.intercept = intercept;
  return out;
}

inline const Loss kLosses[] = {Loss::Huber, Loss::Hinge, Loss::EpsInsensitive, Loss::Ordinal, Loss::Scalene};

inline LabelKind labels_for(Loss l) {
  if (l == Loss::Hinge) return LabelKind::Binary;
  if (l == Loss::Ordinal) return LabelKind::Ordinal;
  return LabelKind::Real;
}

// Distance of s = beta.z from the nearest kink of the loss for this row.
inline double kink_distance(Loss l, double s, double y, const TrainConfig& cfg) {
  switch (l) {
    case Loss::Huber: return std::min(std::abs(y - s - 1), std::abs(y - s + 1));
    case Loss::Hinge: return std::abs(y * s - 1);
    case Loss::EpsInsensitive:
      return std::min(std::abs(y - s - cfg.eps_insensitive), std::abs(y - s + cfg.eps_insensitive));
    case Loss::Ordinal: {
      double d = INFINITY;
      for (int t = 1; t <= cfg.ordinal_levels; ++t) d = std::min({d, std::abs(s - 1 - t), std::abs(s - t + 1)});
      return d;
    }
    case Loss::Scalene: return std::abs(y - s);
  }
  return INFINITY;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Lloyd on the materialized rows by direct distances; ties go to the lowest index.
inline std::vector<std::vector<std::vector<double>>> lloyd(const std::vector<MaterializedRow>& rows,
                                                           std::vector<std::vector<double>> mu, size_t iters) {
  std::vector<std::vector<std::vector<double>>> out;
  for (size_t it = 0; it < iters; ++it) {
    std::vector<double> cnt(mu.size(), 0);
    std::vector<std::vector<double>> sum(mu.size(), std::vector<double>(mu[0].size(), 0));
    for (const auto& r : rows) {
      size_t best = 0;
      double bd = INFINITY;
      for (size_t i = 0; i < mu.size(); ++i) {
        double d = 0;
        for (size_t l = 0; l < r.z.size(); ++l) d += (r.z[l] - mu[i][l]) * (r.z[l] - mu[i][l]);
        if (d < bd) {
          bd = d;
          best = i;
        }
      }
      cnt[best] += r.weight;
      for (size_t l = 0; l < r.z.size(); ++l) sum[best][l] += r.weight * r.z[l];
    }
    for (size_t i = 0; i < mu.size(); ++i)
      if (cnt[i] > 0)
        for (size_t l = 0; l < mu[i].size(); ++l) mu[i][l] = sum[i][l] / cnt[i];
    out.push_back(mu);
  }
  return out;
}

// Each key joins one R row with one S row: points around (2,2) labelled +1 and around
// (-2,-2) labelled -1.
inline FeatureInstance blobs(std::mt19937_64& rng, int n, bool all_positive = false) {
  FeatureInstance inst;
  Semiring r = Semiring::real();
  std::normal_distribution<double> jitter(0, 0.4);
  std::vector<std::pair<Tuple, SVal>> rr, ss;
  for (int64_t i = 0; i < n; ++i) {
    double y = all_positive || i % 2 == 0 ? 1.0 : -1.0;
    rr.push_back({{i, 2 * y + jitter(rng)}, 1.0});
    ss.push_back({{i, 2 * y + jitter(rng), y}, 1.0});
  }
  inst.fq.join.semiring = r;
  inst.fq.join.variables = {"a", "x1", "x2", "y"};
  inst.fq.join.factors = {{{"a", "x1"}, "R", true, {}}, {{"a", "x2", "y"}, "S", true, {}}};
  inst.fq.features = {"x1", "x2"};
  inst.fq.label = "y";
  inst.db.put("R", Relation::from_rows(r, {"k", "v"}, rr));
  inst.db.put("S", Relation::from_rows(r, {"k", "v", "y"}, ss));
  return inst;
}

// Least-squares slope of log2(counter) against log2(N).
inline double growth_exponent(const std::vector<double>& ns, const std::vector<double>& cs) {
  double mx = 0, my = 0;
  const size_t m = ns.size();
  for (size_t i = 0; i < m; ++i) {
    mx += std::log2(ns[i]);
    my += std::log2(cs[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < m; ++i) {
    sxy += (std::log2(ns[i]) - mx) * (std::log2(cs[i]) - my);
    sxx += (std::log2(ns[i]) - mx) * (std::log2(ns[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace testing
