#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "faqai/dominance.hpp"
#include "faqai/engine.hpp"
#include "faqai/errors.hpp"
#include "faqai/heavylight.hpp"
#include "faqai/ml.hpp"
#include "faqai/oracle.hpp"
#include "faqai/probiq.hpp"
#include "faqai/widths.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace faqai;

namespace {

py::object to_py(const Value& v) {
  if (auto i = std::get_if<int64_t>(&v)) return py::int_(*i);
  if (auto d = std::get_if<double>(&v)) return py::float_(*d);
  return py::str(std::get<std::string>(v));
}

py::object to_py(const SVal& v) {
  if (auto b = std::get_if<bool>(&v)) return py::bool_(*b);
  if (auto d = std::get_if<double>(&v)) return py::float_(*d);
  std::string s = std::get<mpz_class>(v).get_str();
  return py::reinterpret_steal<py::object>(PyLong_FromString(s.c_str(), nullptr, 10));
}

Value from_py(const py::handle& h) {
  if (py::isinstance<py::bool_>(h)) return static_cast<int64_t>(h.cast<bool>());
  if (py::isinstance<py::int_>(h)) return h.cast<int64_t>();
  if (py::isinstance<py::float_>(h)) return h.cast<double>();
  return h.cast<std::string>();
}

SVal weight_from_py(const Semiring& s, const py::handle& h) {
  if (py::isinstance<py::bool_>(h)) return h.cast<bool>() ? s.one() : s.zero();
  return s.parse_value(py::str(h).cast<std::string>());
}

py::dict relation_to_py(const Relation& r) {
  py::list rows, weights;
  for (size_t i = 0; i < r.size(); ++i) {
    py::list t;
    for (const auto& v : r.tuple(i)) t.append(to_py(v));
    rows.append(py::tuple(t));
    weights.append(to_py(r.weight(i)));
  }
  return py::dict("schema"_a = r.schema(), "rows"_a = rows, "weights"_a = weights);
}

// data: a directory of CSV files, or {name: {"schema": [...], "rows": [...], "weights": [...]}}.
Database database(const py::object& data, const Semiring& s) {
  if (py::isinstance<py::str>(data)) return load_database(data.cast<std::string>(), s);
  Database db(s);
  for (auto [name, spec] : data.cast<py::dict>()) {
    py::dict d = spec.cast<py::dict>();
    auto schema = d["schema"].cast<Schema>();
    py::list rows = d["rows"].cast<py::list>();
    py::list weights = d.contains("weights") ? d["weights"].cast<py::list>() : py::list();
    if (!weights.empty() && weights.size() != rows.size())
      throw DataError("relation '" + name.cast<std::string>() + "': rows and weights differ in length");
    std::vector<std::pair<Tuple, SVal>> out;
    for (size_t i = 0; i < rows.size(); ++i) {
      Tuple t;
      for (auto v : rows[i]) t.push_back(from_py(v));
      out.emplace_back(std::move(t), weights.empty() ? s.one() : weight_from_py(s, weights[i]));
    }
    db.put(name.cast<std::string>(), Relation::from_rows(s, schema, std::move(out)));
  }
  return db;
}

py::dict result(const FaqAiQuery& q, const Relation& r) {
  py::dict out("semiring"_a = q.semiring.name(), "free"_a = q.free);
  if (q.free.empty()) out["value"] = to_py(r.total());
  else out["rows"] = relation_to_py(r);
  return out;
}

py::dict counters(const Counters& c) {
  return py::dict("trie_probes"_a = c.trie_probes, "dominance_queries"_a = c.dominance_queries,
                  "tuples_materialized"_a = c.tuples_materialized);
}

TrainConfig config(double lambda, double C, double eps, int max_iters, int levels, uint64_t seed) {
  TrainConfig cfg;
  cfg.lambda = lambda;
  cfg.C = C;
  cfg.eps = eps;
  cfg.max_iters = max_iters;
  cfg.ordinal_levels = levels;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_faqai, m) {
  m.doc() = "Functional aggregate queries with additive inequalities";

  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<PlanningError>(m, "PlanningError", PyExc_RuntimeError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("width", [](const std::string& query, const std::string& kind) {
    FaqAiQuery q = parse_query(query);
    WidthReport rep = compute_width(q.hypergraph(), q.free_set(), parse_kind(kind));
    py::dict out("kind"_a = kind, "value"_a = fraction_string(rep.value), "family_size"_a = rep.family_size);
    if (rep.witness_td) {
      Hypergraph h = q.hypergraph();
      py::list bags;
      for (VSet b : rep.witness_td->bags) bags.append(h.names_of(b));
      out["witness_bags"] = bags;
    }
    return out;
  }, "query"_a, "kind"_a = "faqw_l");

  m.def("plan", [](const std::string& query) {
    FaqAiQuery q = parse_query(query);
    return describe_plan(q, plan(q));
  }, "query"_a);

  m.def("evaluate", [](const std::string& query, const py::object& data) {
    FaqAiQuery q = parse_query(query);
    Database db = database(data, q.semiring);
    Counters c;
    Relation r = evaluate(db, q, &c);
    py::dict out = result(q, r);
    out["counters"] = counters(c);
    return out;
  }, "query"_a, "data"_a);

  m.def("oracle", [](const std::string& query, const py::object& data) {
    FaqAiQuery q = parse_query(query);
    return result(q, oracle_eval(database(data, q.semiring), q));
  }, "query"_a, "data"_a);

  m.def("probability", [](const std::string& query, const py::object& data) {
    return iq_probability(database(data, Semiring::real()), parse_iq(query));
  }, "query"_a, "data"_a);

  m.def("world_probability", [](const std::string& query, const py::object& data) {
    return oracle_worlds(database(data, Semiring::real()), parse_iq(query));
  }, "query"_a, "data"_a);

  m.def("train", [](const std::string& query, const py::object& data, const std::string& loss, double lambda,
                    int max_iters, int levels, uint64_t seed) {
    FeatureQuery fq = parse_feature_query(query);
    TrainResult r = bgd_train(database(data, Semiring::real()), fq, parse_loss(loss),
                              config(lambda, 1, 1e-3, max_iters, levels, seed));
    return py::dict("beta"_a = r.beta, "objectives"_a = r.objectives, "converged"_a = r.converged);
  }, "query"_a, "data"_a, "loss"_a, "lam"_a = 0.0, "max_iters"_a = 100, "levels"_a = 2, "seed"_a = 0);

  m.def("train_svm", [](const std::string& query, const py::object& data, double C, double eps, int max_iters) {
    FeatureQuery fq = parse_feature_query(query);
    CuttingPlaneResult r = cutting_plane_train(database(data, Semiring::real()), fq, config(0, C, eps, max_iters, 2, 0));
    return py::dict("beta"_a = r.beta, "xi"_a = r.xi, "max_violation"_a = r.max_violation, "iterations"_a = r.iterations);
  }, "query"_a, "data"_a, "C"_a = 1.0, "eps"_a = 1e-3, "max_iters"_a = 1000);

  m.def("kmeans", [](const std::string& query, const py::object& data, int k, int max_iters, uint64_t seed) {
    FeatureQuery fq = parse_feature_query(query);
    KMeansResult r = kmeans_fit(database(data, Semiring::real()), fq, k, config(0, 1, 1e-3, max_iters, 2, seed));
    return py::dict("means"_a = r.means, "initial"_a = r.initial, "iterations"_a = r.trace.size(),
                    "converged"_a = r.converged);
  }, "query"_a, "data"_a, "k"_a, "max_iters"_a = 100, "seed"_a = 0);

  m.def("count_4cycle", [](const py::object& data) {
    Database db = database(data, Semiring::count());
    return to_py(count_4cycle(db.get("R12"), db.get("R23"), db.get("R34"), db.get("R41")));
  }, "data"_a);

  m.def("count_path_ineq", [](const py::object& data) {
    Database db = database(data, Semiring::count());
    PathIneqResult r = count_path_ineq(db, "R", "S", "T", a_le_d_ligament());
    return py::dict("value"_a = to_py(r.value), "u_size"_a = r.u_size, "w_size"_a = r.w_size,
                    "counters"_a = counters(r.counters));
  }, "data"_a);

  m.def("dominance_sums", [](const std::vector<std::vector<double>>& points, const std::vector<double>& weights,
                             const std::vector<std::vector<double>>& queries, bool strict) {
    if (points.empty()) throw StructuralError("no points");
    int k = static_cast<int>(points[0].size());
    std::vector<double> coords;
    for (const auto& p : points) {
      if (static_cast<int>(p.size()) != k) throw StructuralError("points differ in dimension");
      coords.insert(coords.end(), p.begin(), p.end());
    }
    Semiring s = Semiring::real();
    std::vector<SVal> w(weights.begin(), weights.end());
    auto idx = DominanceIndex::build(s, k, coords, w, std::vector<Cmp>(k, strict ? Cmp::Lt : Cmp::Le));
    std::vector<double> out;
    for (const auto& q : queries) out.push_back(std::get<double>(idx.query(q)));
    return out;
  }, "points"_a, "weights"_a, "queries"_a, "strict"_a = false);
}
