#include "faqai/ml.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "faqai/errors.hpp"
#include "faqai/oracle.hpp"
#include "faqai/widths.hpp"
#include "json.hpp"

namespace faqai {

using nlohmann::json;

Loss parse_loss(const std::string& name) {
  if (name == "huber") return Loss::Huber;
  if (name == "hinge") return Loss::Hinge;
  if (name == "eps" || name == "eps_insensitive") return Loss::EpsInsensitive;
  if (name == "ordinal" || name == "ordinal_hinge") return Loss::Ordinal;
  if (name == "scalene") return Loss::Scalene;
  throw StructuralError("unknown loss '" + name + "'");
}

std::string loss_name(Loss l) {
  switch (l) {
    case Loss::Huber: return "huber";
    case Loss::Hinge: return "hinge";
    case Loss::EpsInsensitive: return "eps";
    case Loss::Ordinal: return "ordinal";
    case Loss::Scalene: return "scalene";
  }
  return "?";
}

void FeatureQuery::validate(const Database& db) const {
  join.validate(&db);
  if (join.semiring.id() != SemiringId::RealSumProd || db.semiring().id() != SemiringId::RealSumProd) {
    throw StructuralError("feature joins are evaluated over the real semiring");
  }
  if (!join.ligaments.empty()) throw StructuralError("the feature join must not carry ligaments of its own");
  if (!join.free.empty()) throw StructuralError("the feature join must have no free variables");
  std::set<std::string> vars(join.variables.begin(), join.variables.end());
  std::set<std::string> covered;
  for (const auto& f : join.factors)
    if (f.finite) covered.insert(f.vars.begin(), f.vars.end());
  std::set<std::string> seen;
  for (const auto& f : features) {
    if (!vars.count(f)) throw StructuralError("feature '" + f + "' is not a join variable");
    if (!covered.count(f)) throw StructuralError("feature '" + f + "' is in no finite factor");
    if (!seen.insert(f).second) throw StructuralError("feature '" + f + "' listed twice");
  }
  if (!label.empty()) {
    if (!vars.count(label) || !covered.count(label)) throw StructuralError("label '" + label + "' is not a join variable");
    if (seen.count(label)) throw StructuralError("label '" + label + "' is also a feature");
  }
}

FeatureQuery parse_feature_query(const std::string& json_text) {
  FeatureQuery fq;
  try {
    json j = json::parse(json_text);
    if (!j.contains("semiring")) j["semiring"] = "real-sum-prod";
    fq.join = parse_query(j.dump());
    fq.features = j.at("features").get<std::vector<std::string>>();
    fq.label = j.value("label", std::string());
    fq.intercept = j.value("intercept", false);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("malformed feature query: ") + e.what());
  }
  return fq;
}

FeatureQuery load_feature_query(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_feature_query(ss.str());
}

FeatureEngine::FeatureEngine(const Database& db, FeatureQuery fq) : db_(db), fq_(std::move(fq)) {
  fq_.validate(db_);
  FaqAiQuery ext = fq_.join;
  Ligament all;
  for (const auto& v : ext.variables) all.terms.push_back({v, UnaryExpr::affine(0)});
  if (!all.terms.empty()) ext.ligaments.push_back(all);
  Hypergraph h = ext.hypergraph();
  if (enumerate_tds(h, 0, true).empty()) {
    throw PlanningError("no relaxed tree decomposition has adjacent bags covering all join variables");
  }
  WidthReport rep = faqw(h, 0, true);
  td_ = *rep.witness_td;
  width_ = rep.value;
}

double FeatureEngine::aggregate(const std::vector<UnaryTerm>& factors, const std::vector<Ligament>& ligaments) {
  FaqAiQuery q = fq_.join;
  std::string key;
  for (const auto& t : factors) {
    q.factors.push_back({{t.var}, "", false, {t}});
    key += t.var + ",";
  }
  q.ligaments = ligaments;
  key += "|" + std::to_string(ligaments.size());
  auto it = plans_.find(key);
  if (it == plans_.end()) it = plans_.emplace(key, plan_for_td(q, td_)).first;
  ++queries_;
  Relation r = evaluate_with_plan(db_, q, it->second, &counters_);
  return std::get<double>(r.total());
}

Ligament FeatureEngine::linear_ligament(const std::vector<double>& coefs, double coef_y, double constant,
                                        bool strict) const {
  size_t off = fq_.intercept ? 1 : 0;
  if (fq_.intercept) constant += coefs[0];
  Ligament l;
  l.strict = strict;
  for (const auto& v : fq_.join.variables) {
    double a = 0;
    if (v == fq_.label) a = coef_y;
    auto f = std::find(fq_.features.begin(), fq_.features.end(), v);
    if (f != fq_.features.end()) a = coefs[off + (f - fq_.features.begin())];
    l.terms.push_back({v, UnaryExpr::affine(a)});
  }
  l.terms.front().expr.b = constant;
  return l;
}

std::optional<UnaryTerm> FeatureEngine::feature_term(size_t j) const {
  if (fq_.intercept) {
    if (j == 0) return std::nullopt;
    --j;
  }
  return UnaryTerm{fq_.features.at(j), UnaryExpr::affine(1)};
}

namespace {

struct Moments {
  double n = 0, y = 0, yy = 0;
  std::vector<double> z, yz;
  std::vector<std::vector<double>> zz;
};

// Sums of 1, z_j, y (and y z_j, y^2, z_i z_j when second is set) over the rows of the join
// that satisfy every ligament, each weighted by the extra unary factors.
Moments moments(FeatureEngine& fe, const std::vector<Ligament>& ligs, const std::vector<UnaryTerm>& extra, bool second) {
  const FeatureQuery& fq = fe.query();
  const size_t d = fq.dim();
  auto with = [&](std::vector<UnaryTerm> ts) {
    ts.insert(ts.begin(), extra.begin(), extra.end());
    return fe.aggregate(ts, ligs);
  };
  UnaryTerm yterm{fq.label, UnaryExpr::affine(1)};
  Moments m;
  m.n = with({});
  m.z.resize(d);
  for (size_t j = 0; j < d; ++j) {
    auto t = fe.feature_term(j);
    m.z[j] = t ? with({*t}) : m.n;
  }
  if (!fq.label.empty()) m.y = with({yterm});
  if (!second) return m;
  m.yz.resize(d);
  m.zz.assign(d, std::vector<double>(d, 0));
  if (!fq.label.empty()) {
    m.yy = with({{fq.label, UnaryExpr::square(1)}});
    for (size_t j = 0; j < d; ++j) {
      auto t = fe.feature_term(j);
      m.yz[j] = t ? with({yterm, *t}) : m.y;
    }
  }
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = i; j < d; ++j) {
      auto a = fe.feature_term(i), b = fe.feature_term(j);
      double v;
      if (!a && !b) v = m.n;
      else if (!a) v = m.z[j];
      else if (!b) v = m.z[i];
      else if (i == j) v = with({{a->var, UnaryExpr::square(1)}});
      else v = with({*a, *b});
      m.zz[i][j] = m.zz[j][i] = v;
    }
  }
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> scaled(const std::vector<double>& v, double c) {
  std::vector<double> out(v);
  for (auto& x : out) x *= c;
  return out;
}

void axpy(std::vector<double>& acc, double c, const std::vector<double>& v) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += c * v[i];
}

void check_labels(FeatureEngine& fe, const std::vector<double>& allowed, const std::string& what) {
  const std::string& y = fe.query().label;
  if (y.empty()) throw StructuralError(what + " needs a label variable");
  double total = fe.aggregate({}, {});
  double hit = 0;
  for (double v : allowed) hit += fe.aggregate({{y, UnaryExpr::eq(v)}}, {});
  if (std::abs(total - hit) > 1e-9 * std::max(1.0, std::abs(total))) {
    throw DataError("label '" + y + "' has values outside the " + what + " domain");
  }
}

}  // namespace

LossEval loss_eval(FeatureEngine& fe, const std::vector<double>& beta, Loss loss, const TrainConfig& cfg) {
  const FeatureQuery& fq = fe.query();
  const size_t d = fq.dim();
  if (beta.size() != d) throw StructuralError("parameter vector has the wrong length");
  for (double b : beta)
    if (!std::isfinite(b)) throw DivergenceError("parameter vector is not finite");
  if (fq.label.empty()) throw StructuralError(loss_name(loss) + " loss needs a label variable");
  size_t before = fe.queries();
  std::vector<double> neg = scaled(beta, -1);
  LossEval out;
  out.gradient.assign(d, 0);
  double& J = out.objective;
  std::vector<double>& g = out.gradient;

  switch (loss) {
    case Loss::Huber: {
      // r = y - s; |r| <= 1 is quadratic, beyond it linear.
      Moments a = moments(fe, {fe.linear_ligament(neg, 1, -1, false), fe.linear_ligament(beta, -1, -1, false)}, {}, true);
      std::vector<double> zzb(d, 0);
      for (size_t i = 0; i < d; ++i) zzb[i] = dot(a.zz[i], beta);
      J += 0.5 * (a.yy - 2 * dot(beta, a.yz) + dot(beta, zzb));
      for (size_t j = 0; j < d; ++j) g[j] -= a.yz[j] - zzb[j];
      Moments up = moments(fe, {fe.linear_ligament(beta, -1, 1, true)}, {}, false);
      J += 0.5 * (up.y - dot(beta, up.z) - up.n);
      axpy(g, -0.5, up.z);
      Moments dn = moments(fe, {fe.linear_ligament(neg, 1, 1, true)}, {}, false);
      J += 0.5 * (dot(beta, dn.z) - dn.y - dn.n);
      axpy(g, 0.5, dn.z);
      break;
    }
    case Loss::Hinge: {
      check_labels(fe, {1, -1}, "hinge");
      Moments pos = moments(fe, {fe.linear_ligament(beta, 0, -1, false)}, {{fq.label, UnaryExpr::eq(1)}}, false);
      J += pos.n - dot(beta, pos.z);
      axpy(g, -1, pos.z);
      Moments negs = moments(fe, {fe.linear_ligament(neg, 0, -1, false)}, {{fq.label, UnaryExpr::eq(-1)}}, false);
      J += negs.n + dot(beta, negs.z);
      axpy(g, 1, negs.z);
      break;
    }
    case Loss::EpsInsensitive: {
      const double e = cfg.eps_insensitive;
      Moments up = moments(fe, {fe.linear_ligament(beta, -1, e, true)}, {}, false);
      J += up.y - dot(beta, up.z) - e * up.n;
      axpy(g, -1, up.z);
      Moments dn = moments(fe, {fe.linear_ligament(neg, 1, e, true)}, {}, false);
      J += dot(beta, dn.z) - dn.y - e * dn.n;
      axpy(g, 1, dn.z);
      break;
    }
    case Loss::Ordinal: {
      const int levels = cfg.ordinal_levels;
      std::vector<double> allowed;
      for (int v = 1; v <= levels; ++v) allowed.push_back(v);
      check_labels(fe, allowed, "ordinal");
      std::vector<double> zero(d, 0);
      for (int t = 1; t <= levels; ++t) {
        // t < y and s < 1 + t
        Moments lo = moments(fe, {fe.linear_ligament(beta, 0, -1.0 - t, true), fe.linear_ligament(zero, -1, t, true)}, {},
                             false);
        J += (1.0 + t) * lo.n - dot(beta, lo.z);
        axpy(g, -1, lo.z);
        // t > y and s > t - 1
        Moments hi = moments(fe, {fe.linear_ligament(neg, 0, t - 1.0, true), fe.linear_ligament(zero, 1, -t, true)}, {},
                             false);
        J += (1.0 - t) * hi.n + dot(beta, hi.z);
        axpy(g, 1, hi.z);
      }
      break;
    }
    case Loss::Scalene: {
      const double al = cfg.scalene_alpha;
      Moments up = moments(fe, {fe.linear_ligament(beta, -1, 0, true)}, {}, false);
      J += al * (up.y - dot(beta, up.z));
      axpy(g, -al, up.z);
      Moments dn = moments(fe, {fe.linear_ligament(neg, 1, 0, true)}, {}, false);
      J += (1 - al) * (dot(beta, dn.z) - dn.y);
      axpy(g, 1 - al, dn.z);
      break;
    }
  }
  J += 0.5 * cfg.lambda * dot(beta, beta);
  axpy(g, cfg.lambda, beta);
  out.queries = fe.queries() - before;
  return out;
}

LossEval loss_eval(const Database& db, const FeatureQuery& fq, const std::vector<double>& beta, Loss loss,
                   const TrainConfig& cfg) {
  FeatureEngine fe(db, fq);
  return loss_eval(fe, beta, loss, cfg);
}

std::vector<MaterializedRow> materialize(const Database& db, const FeatureQuery& fq) {
  fq.validate(db);
  FaqAiQuery q = fq.join;
  q.free = q.variables;
  Relation g = oracle_eval(db, q);
  auto col = [&](const std::string& v) { return g.column(v); };
  std::vector<int> fcols;
  for (const auto& f : fq.features) fcols.push_back(col(f));
  int ycol = fq.label.empty() ? -1 : col(fq.label);
  std::vector<MaterializedRow> rows;
  for (size_t i = 0; i < g.size(); ++i) {
    MaterializedRow r;
    if (fq.intercept) r.z.push_back(1);
    for (int c : fcols) r.z.push_back(numeric_value(g.tuple(i)[c]));
    if (ycol >= 0) r.y = numeric_value(g.tuple(i)[ycol]);
    r.weight = std::get<double>(g.weight(i));
    rows.push_back(std::move(r));
  }
  return rows;
}

LossEval reference_loss(const std::vector<MaterializedRow>& rows, const std::vector<double>& beta, Loss loss,
                        const TrainConfig& cfg) {
  LossEval out;
  out.gradient.assign(beta.size(), 0);
  for (const auto& row : rows) {
    const double s = dot(beta, row.z), y = row.y, w = row.weight;
    double l = 0, gs = 0;  // loss and its derivative in s
    switch (loss) {
      case Loss::Huber: {
        double r = y - s;
        if (std::abs(r) <= 1) {
          l = 0.5 * r * r;
          gs = -r;
        } else if (r > 1) {
          l = 0.5 * (r - 1);
          gs = -0.5;
        } else {
          l = 0.5 * (-r - 1);
          gs = 0.5;
        }
        break;
      }
      case Loss::Hinge:
        if (y * s <= 1) {
          l = 1 - y * s;
          gs = -y;
        }
        break;
      case Loss::EpsInsensitive: {
        double r = y - s, e = cfg.eps_insensitive;
        if (r > e) {
          l = r - e;
          gs = -1;
        } else if (-r > e) {
          l = -r - e;
          gs = 1;
        }
        break;
      }
      case Loss::Ordinal:
        for (int t = 1; t <= cfg.ordinal_levels; ++t) {
          if (t < y && s < 1 + t) {
            l += 1 + t - s;
            gs -= 1;
          }
          if (t > y && s > t - 1) {
            l += 1 + s - t;
            gs += 1;
          }
        }
        break;
      case Loss::Scalene: {
        double a = cfg.scalene_alpha;
        if (y > s) {
          l = a * (y - s);
          gs = -a;
        } else if (s > y) {
          l = (1 - a) * (s - y);
          gs = 1 - a;
        }
        break;
      }
    }
    out.objective += w * l;
    axpy(out.gradient, w * gs, row.z);
  }
  out.objective += 0.5 * cfg.lambda * dot(beta, beta);
  axpy(out.gradient, cfg.lambda, beta);
  return out;
}

TrainResult bgd_train(const Database& db, const FeatureQuery& fq, Loss loss, const TrainConfig& cfg) {
  FeatureEngine fe(db, fq);
  const size_t d = fq.dim();
  TrainResult res;
  if (cfg.init) {
    if (cfg.init->size() != d) throw StructuralError("initial parameter vector has the wrong length");
    res.beta = *cfg.init;
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    res.beta.resize(d);
    for (auto& b : res.beta) b = u(rng);
  }
  LossEval cur = loss_eval(fe, res.beta, loss, cfg);
  if (!std::isfinite(cur.objective)) throw DivergenceError("objective is not finite at the starting point");
  res.objectives.push_back(cur.objective);
  for (int t = 1; t <= cfg.max_iters; ++t) {
    double gn2 = dot(cur.gradient, cur.gradient);
    if (std::sqrt(gn2) < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    double alpha = cfg.lambda > 0 ? 1 / (cfg.lambda * t) : cfg.step0;
    std::vector<double> cand;
    LossEval next;
    bool accepted = false;
    while (alpha >= 1e-12) {
      cand = res.beta;
      axpy(cand, -alpha, cur.gradient);
      next = loss_eval(fe, cand, loss, cfg);
      if (!std::isfinite(next.objective)) throw DivergenceError("objective became non-finite");
      if (!cfg.armijo || next.objective < cur.objective - alpha / 2 * gn2) {
        accepted = true;
        break;
      }
      alpha /= 2;
    }
    // No step of at least 1e-12 decreases the objective enough: treat as a stationary point.
    if (!accepted) {
      res.converged = true;
      break;
    }
    res.beta = cand;
    cur = next;
    res.objectives.push_back(cur.objective);
    res.iterations = t;
  }
  res.queries = fe.queries();
  return res;
}

namespace {

// Euclidean projection onto {a >= 0, sum a <= budget}.
std::vector<double> project_capped(std::vector<double> v, double budget) {
  std::vector<double> c(v);
  double sum = 0;
  for (auto& x : c) {
    x = std::max(x, 0.0);
    sum += x;
  }
  if (sum <= budget) return c;
  std::vector<double> s(v);
  std::sort(s.rbegin(), s.rend());
  double acc = 0, tau = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    acc += s[i];
    double t = (acc - budget) / static_cast<double>(i + 1);
    if (i + 1 == s.size() || s[i + 1] <= t) {
      tau = t;
      break;
    }
  }
  for (auto& x : v) x = std::max(x - tau, 0.0);
  return v;
}

}  // namespace

DualResult wolfe_dual_solve(const std::vector<std::vector<double>>& x, const std::vector<double>& sizes, double budget) {
  const size_t m = x.size();
  if (m == 0 || sizes.size() != m) throw StructuralError("the dual needs one size per constraint vector");
  std::vector<std::vector<double>> K(m, std::vector<double>(m));
  double trace = 0;
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) K[i][j] = dot(x[i], x[j]);
    trace += K[i][i];
  }
  const double step = trace > 0 ? 1 / trace : 1;
  DualResult res;
  res.alpha.assign(m, 0);
  if (budget <= 0) return res;
  auto grad = [&](const std::vector<double>& a) {
    std::vector<double> g(sizes);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j) g[i] -= K[i][j] * a[j];
    return g;
  };
  const int max_iters = 1000000;
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    std::vector<double> g = grad(res.alpha);
    std::vector<double> probe(res.alpha);
    axpy(probe, 1, g);
    probe = project_capped(probe, budget);
    double resid = 0;
    for (size_t i = 0; i < m; ++i) resid = std::max(resid, std::abs(probe[i] - res.alpha[i]));
    if (resid < 1e-8) break;
    std::vector<double> next(res.alpha);
    axpy(next, step, g);
    res.alpha = project_capped(next, budget);
  }
  std::vector<double> w(x[0].size(), 0);
  for (size_t i = 0; i < m; ++i) axpy(w, res.alpha[i], x[i]);
  res.objective = -0.5 * dot(w, w) + dot(sizes, res.alpha);
  return res;
}

CuttingPlaneResult cutting_plane_train(const Database& db, const FeatureQuery& fq, const TrainConfig& cfg) {
  if (cfg.C <= 0) throw StructuralError("C must be positive");
  if (cfg.eps <= 0) throw StructuralError("the cutting-plane tolerance must be positive");
  FeatureEngine fe(db, fq);
  check_labels(fe, {1, -1}, "binary");
  const size_t d = fq.dim();
  CuttingPlaneResult res;
  res.beta.assign(d, 0);
  res.train_size = fe.aggregate({}, {});
  const double G = res.train_size;
  if (G == 0) {
    res.queries = fe.queries();
    return res;
  }
  std::vector<std::vector<double>> xs;
  std::vector<double> sizes;
  for (res.iterations = 0; res.iterations < cfg.max_iters; ++res.iterations) {
    // T = {y <beta, x> < 1}; x_T = sum over T of y x.
    std::vector<double> neg = scaled(res.beta, -1);
    Moments pos = moments(fe, {fe.linear_ligament(res.beta, 0, -1, true)}, {{fq.label, UnaryExpr::eq(1)}}, false);
    Moments negs = moments(fe, {fe.linear_ligament(neg, 0, -1, true)}, {{fq.label, UnaryExpr::eq(-1)}}, false);
    std::vector<double> xt(pos.z);
    axpy(xt, -1, negs.z);
    double t_size = pos.n + negs.n;
    double violation = (t_size - dot(res.beta, xt)) / G;
    res.max_violation = violation - res.xi;
    if (violation <= res.xi + cfg.eps) break;
    xs.push_back(xt);
    sizes.push_back(t_size);
    DualResult dual = wolfe_dual_solve(xs, sizes, cfg.C / G);
    res.beta.assign(d, 0);
    for (size_t i = 0; i < xs.size(); ++i) axpy(res.beta, dual.alpha[i], xs[i]);
    res.xi = 0;
    for (size_t i = 0; i < xs.size(); ++i) res.xi = std::max(res.xi, (sizes[i] - dot(res.beta, xs[i])) / G);
  }
  res.queries = fe.queries();
  return res;
}

namespace {

// Cluster i's ligaments: c_ij(x) < 0 for j < i and c_ij(x) <= 0 for j > i, with
// c_ij(x) = sum_l -2 (mu_il - mu_jl) x_l + sum_l (mu_il^2 - mu_jl^2).
std::vector<Ligament> cluster_ligaments(const FeatureEngine& fe, const std::vector<std::vector<double>>& mu, size_t i) {
  std::vector<Ligament> out;
  for (size_t j = 0; j < mu.size(); ++j) {
    if (j == i) continue;
    std::vector<double> coefs(mu[i].size());
    double c = 0;
    for (size_t l = 0; l < coefs.size(); ++l) {
      coefs[l] = -2 * (mu[i][l] - mu[j][l]);
      c += mu[i][l] * mu[i][l] - mu[j][l] * mu[j][l];
    }
    out.push_back(fe.linear_ligament(coefs, 0, c, j < i));
  }
  return out;
}

double cij(const std::vector<double>& x, const std::vector<double>& mi, const std::vector<double>& mj) {
  double s = 0, c = 0;
  for (size_t l = 0; l < x.size(); ++l) {
    s += -2 * (mi[l] - mj[l]) * x[l];
    c += mi[l] * mi[l] - mj[l] * mj[l];
  }
  return s + c;
}

double max_move(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t l = 0; l < a[i].size(); ++l) m = std::max(m, std::abs(a[i][l] - b[i][l]));
  return m;
}

}  // namespace

KMeansResult kmeans_fit(const Database& db, const FeatureQuery& fq, int k, const TrainConfig& cfg,
                        const std::optional<std::vector<std::vector<double>>>& init) {
  if (k < 1) throw StructuralError("k must be at least 1");
  if (fq.intercept) throw StructuralError("k-means uses the features only; drop the intercept");
  if (fq.features.empty()) throw StructuralError("k-means needs at least one feature");
  FeatureEngine fe(db, fq);
  const size_t n = fq.features.size();
  KMeansResult res;
  if (init) {
    if (init->size() != static_cast<size_t>(k)) throw StructuralError("initial means must list k vectors");
    for (const auto& m : *init)
      if (m.size() != n) throw StructuralError("initial mean has the wrong dimension");
    res.initial = *init;
  } else {
    // Reservoir sample of k distinct points from the engine's grouped enumeration.
    FaqAiQuery q = fq.join;
    q.free = fq.features;
    Relation pts = evaluate(db, q);
    if (pts.size() < static_cast<size_t>(k)) {
      throw DataError("k = " + std::to_string(k) + " exceeds the " + std::to_string(pts.size()) + " distinct points");
    }
    std::mt19937_64 rng(cfg.seed);
    std::vector<size_t> pick;
    for (size_t r = 0; r < pts.size(); ++r) {
      if (pick.size() < static_cast<size_t>(k)) {
        pick.push_back(r);
      } else {
        std::uniform_int_distribution<size_t> u(0, r);
        size_t s = u(rng);
        if (s < pick.size()) pick[s] = r;
      }
    }
    for (size_t r : pick) {
      std::vector<double> m;
      for (const auto& f : fq.features) m.push_back(numeric_value(pts.tuple(r)[pts.column(f)]));
      res.initial.push_back(m);
    }
  }
  auto mu = res.initial;
  for (int it = 0; it < cfg.max_iters; ++it) {
    KMeansIteration step;
    step.means = mu;
    for (int i = 0; i < k; ++i) {
      auto ligs = cluster_ligaments(fe, mu, i);
      double count = fe.aggregate({}, ligs);
      step.sizes.push_back(count);
      if (count == 0) continue;
      for (size_t l = 0; l < n; ++l) step.means[i][l] = fe.aggregate({*fe.feature_term(l)}, ligs) / count;
    }
    double move = max_move(mu, step.means);
    mu = step.means;
    res.trace.push_back(std::move(step));
    if (move < 1e-9) {
      res.converged = true;
      break;
    }
  }
  res.means = mu;
  res.queries = fe.queries();
  return res;
}

KMeansResult reference_lloyd(const std::vector<MaterializedRow>& rows, std::vector<std::vector<double>> init,
                             int max_iters) {
  KMeansResult res;
  res.initial = init;
  auto mu = std::move(init);
  const size_t k = mu.size();
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> count(k, 0);
    std::vector<std::vector<double>> sum(k, std::vector<double>(mu[0].size(), 0));
    for (const auto& r : rows) {
      for (size_t i = 0; i < k; ++i) {
        bool mine = true;
        for (size_t j = 0; j < k && mine; ++j) {
          if (j == i) continue;
          double c = cij(r.z, mu[i], mu[j]);
          mine = j < i ? c < 0 : c <= 0;
        }
        if (!mine) continue;
        count[i] += r.weight;
        axpy(sum[i], r.weight, r.z);
        break;
      }
    }
    KMeansIteration step;
    step.means = mu;
    step.sizes = count;
    for (size_t i = 0; i < k; ++i)
      if (count[i] != 0) step.means[i] = scaled(sum[i], 1 / count[i]);
    double move = max_move(mu, step.means);
    mu = step.means;
    res.trace.push_back(std::move(step));
    if (move < 1e-9) {
      res.converged = true;
      break;
    }
  }
  res.means = mu;
  return res;
}

double kmeans_objective(const std::vector<MaterializedRow>& rows, const std::vector<std::vector<double>>& means) {
  double total = 0;
  for (const auto& r : rows) {
    double best = INFINITY;
    for (const auto& m : means) {
      double d2 = 0;
      for (size_t l = 0; l < m.size(); ++l) d2 += (r.z[l] - m[l]) * (r.z[l] - m[l]);
      best = std::min(best, d2);
    }
    total += r.weight * best;
  }
  return total;
}

}  // namespace faqai
