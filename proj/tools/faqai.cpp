#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "faqai/engine.hpp"
#include "faqai/errors.hpp"
#include "faqai/heavylight.hpp"
#include "faqai/ml.hpp"
#include "faqai/oracle.hpp"
#include "faqai/probiq.hpp"
#include "faqai/widths.hpp"
#include "json.hpp"

using namespace faqai;
using nlohmann::json;

namespace {

json value_json(const SVal& v) {
  if (auto b = std::get_if<bool>(&v)) return *b;
  if (auto z = std::get_if<mpz_class>(&v)) return z->get_str();
  return std::get<double>(v);
}

json cell_json(const Value& v) {
  if (auto i = std::get_if<int64_t>(&v)) return *i;
  if (auto d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

json relation_json(const Relation& r) {
  json rows = json::array();
  for (size_t i = 0; i < r.size(); ++i) {
    json t = json::array();
    for (const auto& c : r.tuple(i)) t.push_back(cell_json(c));
    rows.push_back({{"tuple", t}, {"value", value_json(r.weight(i))}});
  }
  return rows;
}

json counters_json(const Counters& c) {
  return {{"trie_probes", c.trie_probes},
          {"dominance_queries", c.dominance_queries},
          {"tuples_materialized", c.tuples_materialized},
          {"total", c.total()}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json eval_result(const FaqAiQuery& q, const Relation& r) {
  json out = {{"semiring", q.semiring.name()}, {"free", q.free}};
  if (q.free.empty()) out["value"] = value_json(r.total());
  else out["rows"] = relation_json(r);
  return out;
}

int threads_from_env() {
  const char* s = std::getenv("FAQAI_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  long t = std::strtol(s, &end, 10);
  if (*end || t < 1) throw CLI::ValidationError("FAQAI_THREADS", "must be a positive integer");
  return static_cast<int>(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional aggregate queries with additive inequalities"};
  app.require_subcommand(1);

  std::string qpath, dpath;
  bool plan_only = false, counters = false;
  auto* eval = app.add_subcommand("eval", "evaluate a query");
  eval->add_option("-q,--query", qpath, "query JSON")->required();
  eval->add_option("-d,--data", dpath, "directory of CSV relations");
  eval->add_flag("--plan-only", plan_only, "print the plan without evaluating");
  eval->add_flag("--counters", counters, "emit operation counters as a second JSON line");

  std::string kind = "faqw";
  auto* width = app.add_subcommand("width", "compute a width of the query hypergraph");
  width->add_option("-q,--query", qpath, "query JSON")->required();
  width->add_option("--kind", kind, "width kind")
      ->check(CLI::IsMember({"rho_star", "faqw", "faqw_l", "smfw", "smfw_l", "sharp_smfw", "sharp_smfw_l", "fhtw", "subw",
                             "sharp_subw"}));

  std::string loss_s, method = "bgd";
  TrainConfig cfg;
  int iters = 100;
  auto* train = app.add_subcommand("train", "train a linear model over the feature join");
  train->add_option("--loss", loss_s, "huber|hinge|eps|ordinal|scalene")->required();
  train->add_option("-q,--query", qpath, "feature query JSON")->required();
  train->add_option("-d,--data", dpath, "directory of CSV relations")->required();
  train->add_option("--lambda", cfg.lambda, "l2 regularization")->check(CLI::NonNegativeNumber);
  train->add_option("--c", cfg.C, "SVM regularization")->check(CLI::PositiveNumber);
  train->add_option("--eps", cfg.eps, "cutting-plane tolerance")->check(CLI::PositiveNumber);
  train->add_option("--eps-insensitive", cfg.eps_insensitive, "width of the insensitive band")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--levels", cfg.ordinal_levels, "ordinal label count")->check(CLI::PositiveNumber);
  train->add_option("--alpha", cfg.scalene_alpha, "scalene asymmetry")->check(CLI::Range(0.0, 1.0));
  train->add_option("--iters", iters, "iteration cap")->check(CLI::PositiveNumber);
  train->add_option("--seed", cfg.seed, "random seed");
  train->add_option("--method", method, "bgd|cutting-plane (hinge only)")
      ->check(CLI::IsMember({"bgd", "cutting-plane"}));

  int k = 2;
  auto* kmeans = app.add_subcommand("kmeans", "k-means clustering over the feature join");
  kmeans->add_option("-k", k, "number of clusters")->required()->check(CLI::PositiveNumber);
  kmeans->add_option("-q,--query", qpath, "feature query JSON")->required();
  kmeans->add_option("-d,--data", dpath, "directory of CSV relations")->required();
  kmeans->add_option("--iters", iters, "iteration cap")->check(CLI::PositiveNumber);
  kmeans->add_option("--seed", cfg.seed, "random seed");

  auto* prob = app.add_subcommand("prob", "probability of an inequality query");
  prob->add_option("-q,--query", qpath, "IQ JSON")->required();
  prob->add_option("-d,--data", dpath, "directory of probabilistic CSV relations")->required();

  auto* oracle = app.add_subcommand("oracle", "brute-force evaluation of an eval or prob query");
  oracle->add_option("-q,--query", qpath, "query JSON")->required();
  oracle->add_option("-d,--data", dpath, "directory of CSV relations");

  std::string shape;
  size_t n = 1024;
  uint64_t seed = 0;
  bool adversarial = false;
  auto* bench = app.add_subcommand("bench", "heavy/light plans on generated instances");
  bench->add_option("--shape", shape, "cycle4|path4-ineq")->required()->check(CLI::IsMember({"cycle4", "path4-ineq"}));
  bench->add_option("--n", n, "relation size")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "random seed");
  bench->add_flag("--adversarial", adversarial, "high-degree instance");

  try {
    app.parse(argc, argv);
    threads_from_env();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }
  cfg.max_iters = iters;

  try {
    if (eval->parsed()) {
      FaqAiQuery q = load_query(qpath);
      if (plan_only) {
        std::cout << describe_plan(q, plan(q)) << "\n";
        return 0;
      }
      if (dpath.empty()) throw CLI::RequiredError("--data");
      Database db = load_database(dpath, q.semiring);
      Counters c;
      Relation r = evaluate(db, q, &c);
      std::cout << eval_result(q, r).dump() << "\n";
      if (counters) std::cout << json{{"counters", counters_json(c)}}.dump() << "\n";
    } else if (width->parsed()) {
      FaqAiQuery q = load_query(qpath);
      WidthReport rep = compute_width(q.hypergraph(), q.free_set(), parse_kind(kind));
      json out = {{"kind", kind}, {"value", fraction_string(rep.value)}, {"family_size", rep.family_size},
                  {"note", rep.search_family_note}};
      if (rep.witness_td) {
        Hypergraph h = q.hypergraph();
        json bags = json::array();
        for (VSet b : rep.witness_td->bags) bags.push_back(h.names_of(b));
        out["witness_bags"] = bags;
      }
      std::cout << out.dump() << "\n";
    } else if (train->parsed()) {
      Loss loss = parse_loss(loss_s);
      FeatureQuery fq = load_feature_query(qpath);
      Database db = load_database(dpath, Semiring::real());
      json out = {{"loss", loss_name(loss)}, {"method", method}};
      if (method == "cutting-plane") {
        if (loss != Loss::Hinge) throw CLI::ValidationError("--method", "cutting-plane trains the hinge loss only");
        CuttingPlaneResult r = cutting_plane_train(db, fq, cfg);
        out["beta"] = r.beta;
        out["xi"] = r.xi;
        out["max_violation"] = r.max_violation;
        out["iterations"] = r.iterations;
        out["queries"] = r.queries;
      } else {
        TrainResult r = bgd_train(db, fq, loss, cfg);
        out["beta"] = r.beta;
        out["objective"] = r.objectives.back();
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["queries"] = r.queries;
      }
      std::cout << out.dump() << "\n";
    } else if (kmeans->parsed()) {
      FeatureQuery fq = load_feature_query(qpath);
      Database db = load_database(dpath, Semiring::real());
      KMeansResult r = kmeans_fit(db, fq, k, cfg);
      std::cout << json{{"means", r.means},
                        {"initial", r.initial},
                        {"iterations", r.trace.size()},
                        {"converged", r.converged},
                        {"queries", r.queries}}
                       .dump()
                << "\n";
    } else if (prob->parsed()) {
      IqQuery q = load_iq(qpath);
      Database db = load_database(dpath, Semiring::real());
      std::cout << json{{"probability", iq_probability(db, q)}}.dump() << "\n";
    } else if (oracle->parsed()) {
      if (dpath.empty()) throw CLI::RequiredError("--data");
      json j = json::parse(read_file(qpath), nullptr, false);
      if (j.is_object() && j.contains("inequalities")) {
        IqQuery q = parse_iq(j.dump());
        Database db = load_database(dpath, Semiring::real());
        std::cout << json{{"probability", oracle_worlds(db, q)}}.dump() << "\n";
      } else {
        FaqAiQuery q = load_query(qpath);
        Database db = load_database(dpath, q.semiring);
        std::cout << eval_result(q, oracle_eval(db, q)).dump() << "\n";
      }
    } else if (bench->parsed()) {
      json out = {{"shape", shape}, {"n", n}, {"seed", seed}, {"adversarial", adversarial}};
      if (shape == "cycle4") {
        Database db = random_cycle_db(n, adversarial ? sqrt_threshold(n) : n, seed);
        Counters c;
        SVal v = count_4cycle(db.get("R12"), db.get("R23"), db.get("R34"), db.get("R41"), &c);
        out["count"] = value_json(v);
        out["counters"] = counters_json(c);
      } else {
        Database db = adversarial ? adversarial_path_db(n) : random_path_db(n, n, seed);
        PathIneqResult r = count_path_ineq(db, "R", "S", "T", a_le_d_ligament());
        out["N"] = db.max_size();
        out["count"] = value_json(r.value);
        out["u_size"] = r.u_size;
        out["w_size"] = r.w_size;
        out["threshold"] = r.threshold;
        out["counters"] = counters_json(r.counters);
        Counters single;
        SVal baseline = evaluate(db, path_query(db.semiring(), a_le_d_ligament()), &single).total();
        out["single_td_counters"] = counters_json(single);
        out["single_td_agrees"] = db.semiring().equal(baseline, r.value);
      }
      std::cout << out.dump() << "\n";
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
