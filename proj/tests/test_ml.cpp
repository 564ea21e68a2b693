#include <cmath>
#include <random>

#include "doctest.h"
#include "faqai/errors.hpp"
#include "faqai/ml.hpp"
#include "support.hpp"

using namespace faqai;
using testing::LabelKind;
using testing::blobs;
using testing::dot;
using testing::kLosses;
using testing::kink_distance;
using testing::labels_for;
using testing::lloyd;

namespace {

// One-row training sets for the hand examples.
testing::FeatureInstance single_row(double x, double y) {
  testing::FeatureInstance inst;
  Semiring r = Semiring::real();
  inst.fq.join.semiring = r;
  inst.fq.join.variables = {"x", "y"};
  inst.fq.join.factors = {{{"x", "y"}, "D", true, {}}};
  inst.fq.features = {"x"};
  inst.fq.label = "y";
  inst.db.put("D", Relation::from_rows(r, {"x", "y"}, {{{x, y}, 1.0}}));
  return inst;
}

}  // namespace

TEST_CASE("loss names") {
  CHECK(parse_loss("huber") == Loss::Huber);
  CHECK(parse_loss("eps") == Loss::EpsInsensitive);
  CHECK(parse_loss("ordinal_hinge") == Loss::Ordinal);
  CHECK(loss_name(Loss::Scalene) == "scalene");
  CHECK_THROWS_AS(parse_loss("logistic"), StructuralError);
}

TEST_CASE("hand-evaluated losses") {
  TrainConfig cfg;
  auto hinge = single_row(1, 1);
  LossEval h = loss_eval(hinge.db, hinge.fq, {0}, Loss::Hinge, cfg);
  CHECK(h.objective == doctest::Approx(1).epsilon(1e-12));
  CHECK(h.gradient[0] == doctest::Approx(-1).epsilon(1e-12));
  auto hub = single_row(1, 0.5);
  LossEval u = loss_eval(hub.db, hub.fq, {0}, Loss::Huber, cfg);
  CHECK(u.objective == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(u.gradient[0] == doctest::Approx(-0.5).epsilon(1e-12));
  // beta = 5 puts y*s far above 1: nothing active, only the regularizer.
  cfg.lambda = 0.5;
  LossEval quiet = loss_eval(hinge.db, hinge.fq, {5}, Loss::Hinge, cfg);
  CHECK(quiet.objective == doctest::Approx(0.25 * 25).epsilon(1e-12));
  CHECK(quiet.gradient[0] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("label domains are checked") {
  TrainConfig cfg;
  auto bad = single_row(1, 0.5);
  CHECK_THROWS_AS(loss_eval(bad.db, bad.fq, {0}, Loss::Hinge, cfg), DataError);
  CHECK_THROWS_AS(loss_eval(bad.db, bad.fq, {0}, Loss::Ordinal, cfg), DataError);
  CHECK_THROWS_AS(cutting_plane_train(bad.db, bad.fq, cfg), DataError);
  CHECK_THROWS_AS(loss_eval(bad.db, bad.fq, {0, 1}, Loss::Huber, cfg), StructuralError);
}

TEST_CASE("objective equals the materialized loss") {
  std::mt19937_64 rng(51);
  TrainConfig cfg;
  cfg.lambda = 0.1;
  cfg.ordinal_levels = 3;
  for (Loss loss : kLosses) {
    for (int iter = 0; iter < 12; ++iter) {
      bool icpt = iter % 2 == 1;
      auto inst = testing::random_feature_instance(rng, labels_for(loss), cfg.ordinal_levels, icpt);
      std::vector<double> beta(inst.fq.dim());
      for (auto& b : beta) b = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
      LossEval got = loss_eval(inst.db, inst.fq, beta, loss, cfg);
      LossEval want = reference_loss(materialize(inst.db, inst.fq), beta, loss, cfg);
      CHECK(std::abs(got.objective - want.objective) <= 1e-9 * std::max(1.0, std::abs(want.objective)));
      for (size_t j = 0; j < beta.size(); ++j)
        CHECK(std::abs(got.gradient[j] - want.gradient[j]) <= 1e-9 * std::max(1.0, std::abs(want.gradient[j])));
    }
  }
}

TEST_CASE("gradients match central differences away from kinks") {
  std::mt19937_64 rng(52);
  TrainConfig cfg;
  cfg.lambda = 0.05;
  for (Loss loss : kLosses) {
    int done = 0;
    for (int iter = 0; iter < 400 && done < 20; ++iter) {
      auto inst = testing::random_feature_instance(rng, labels_for(loss), cfg.ordinal_levels, iter % 2 == 0);
      auto rows = materialize(inst.db, inst.fq);
      std::vector<double> beta(inst.fq.dim());
      for (auto& b : beta) b = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
      bool clear = true;
      for (const auto& r : rows) clear = clear && kink_distance(loss, dot(beta, r.z), r.y, cfg) > 1e-4;
      if (!clear) continue;
      LossEval g = loss_eval(inst.db, inst.fq, beta, loss, cfg);
      const double h = 1e-7;
      for (size_t j = 0; j < beta.size(); ++j) {
        auto up = beta, dn = beta;
        up[j] += h;
        dn[j] -= h;
        double fd = (loss_eval(inst.db, inst.fq, up, loss, cfg).objective -
                     loss_eval(inst.db, inst.fq, dn, loss, cfg).objective) / (2 * h);
        CHECK(std::abs(fd - g.gradient[j]) <= 1e-5 * std::max(1.0, std::abs(g.gradient[j])));
      }
      ++done;
    }
    CHECK(done == 20);
  }
}

TEST_CASE("hinge subgradient certificate") {
  std::mt19937_64 rng(53);
  TrainConfig cfg;
  cfg.lambda = 0.2;
  for (int iter = 0; iter < 50; ++iter) {
    auto inst = testing::random_feature_instance(rng, LabelKind::Binary, 3, iter % 2 == 0);
    std::vector<double> b(inst.fq.dim()), b2(inst.fq.dim());
    for (auto& v : b) v = std::uniform_real_distribution<double>(-2, 2)(rng);
    for (auto& v : b2) v = std::uniform_real_distribution<double>(-2, 2)(rng);
    LossEval at = loss_eval(inst.db, inst.fq, b, Loss::Hinge, cfg);
    double lhs = loss_eval(inst.db, inst.fq, b2, Loss::Hinge, cfg).objective;
    double rhs = at.objective;
    for (size_t j = 0; j < b.size(); ++j) rhs += at.gradient[j] * (b2[j] - b[j]);
    CHECK(lhs >= rhs - 1e-9);
  }
}

TEST_CASE("batch gradient descent") {
  std::mt19937_64 rng(54);
  for (Loss loss : kLosses) {
    for (int iter = 0; iter < 4; ++iter) {
      auto inst = testing::random_feature_instance(rng, labels_for(loss), 3, true);
      TrainConfig cfg;
      cfg.lambda = 1e-3;
      cfg.max_iters = 40;
      cfg.ordinal_levels = 3;
      cfg.seed = iter;
      TrainResult r = bgd_train(inst.db, inst.fq, loss, cfg);
      for (size_t t = 1; t < r.objectives.size(); ++t) CHECK(r.objectives[t] < r.objectives[t - 1]);
      LossEval ref = reference_loss(materialize(inst.db, inst.fq), r.beta, loss, cfg);
      CHECK(std::abs(ref.objective - r.objectives.back()) <= 1e-6 * std::max(1.0, std::abs(ref.objective)));
      TrainResult again = bgd_train(inst.db, inst.fq, loss, cfg);
      CHECK(again.beta == r.beta);
    }
  }
}

TEST_CASE("batch gradient descent on an empty join") {
  Semiring r = Semiring::real();
  auto inst = single_row(1, 1);
  inst.db.put("D", Relation(r, {"x", "y"}));
  TrainConfig cfg;
  cfg.lambda = 0.5;
  cfg.max_iters = 200;
  cfg.init = std::vector<double>{1.0};
  TrainResult res = bgd_train(inst.db, inst.fq, Loss::Huber, cfg);
  // Only the regularizer acts; the 1/(lambda t) schedule shrinks beta roughly like 1/t.
  CHECK(std::abs(res.beta[0]) < 1e-2);
  for (size_t t = 1; t < res.objectives.size(); ++t) CHECK(res.objectives[t] < res.objectives[t - 1]);
}

TEST_CASE("wolfe dual") {
  DualResult one = wolfe_dual_solve({{1.0}}, {1.0}, 10);
  CHECK(one.alpha[0] == doctest::Approx(1).epsilon(1e-7));
  CHECK(one.objective == doctest::Approx(0.5).epsilon(1e-9));
  DualResult zero = wolfe_dual_solve({{1.0}}, {1.0}, 0);
  CHECK(zero.alpha[0] == 0);
  DualResult dup = wolfe_dual_solve({{1.0}, {1.0}}, {1.0, 1.0}, 10);
  CHECK(dup.objective == doctest::Approx(0.5).epsilon(1e-9));
  DualResult capped = wolfe_dual_solve({{1.0}}, {1.0}, 0.25);
  CHECK(capped.alpha[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK_THROWS_AS(wolfe_dual_solve({}, {}, 1), StructuralError);
}

TEST_CASE("cutting plane on separable data") {
  std::mt19937_64 rng(55);
  auto inst = blobs(rng, 20);
  TrainConfig cfg;
  cfg.C = 10;
  cfg.eps = 1e-3;
  cfg.max_iters = 500;
  CuttingPlaneResult res = cutting_plane_train(inst.db, inst.fq, cfg);
  CHECK(res.iterations < cfg.max_iters);
  CHECK(res.max_violation <= cfg.eps);
  CHECK(res.train_size == 20);
  for (const auto& row : materialize(inst.db, inst.fq)) CHECK(row.y * dot(res.beta, row.z) > 0);
}

TEST_CASE("cutting plane with one class") {
  std::mt19937_64 rng(56);
  auto inst = blobs(rng, 10, true);
  TrainConfig cfg;
  cfg.max_iters = 500;
  CuttingPlaneResult res = cutting_plane_train(inst.db, inst.fq, cfg);
  CHECK(res.iterations < cfg.max_iters);
  for (const auto& row : materialize(inst.db, inst.fq)) CHECK(dot(res.beta, row.z) > 0);
}

TEST_CASE("cutting plane primal is no worse than batch descent") {
  // Primal: 1/2 |beta|^2 + C/|G| sum hinge. The hinge objective with lambda = |G|/C is |G|/C times it.
  std::mt19937_64 rng(57);
  for (int iter = 0; iter < 4; ++iter) {
    auto inst = testing::random_feature_instance(rng, LabelKind::Binary, 3, false, 8);
    auto rows = materialize(inst.db, inst.fq);
    if (rows.empty()) continue;
    TrainConfig cfg;
    cfg.C = 2;
    cfg.eps = 1e-4;
    cfg.max_iters = 2000;
    CuttingPlaneResult cp = cutting_plane_train(inst.db, inst.fq, cfg);
    const double G = cp.train_size;
    TrainConfig hcfg;
    hcfg.lambda = G / cfg.C;
    auto primal = [&](const std::vector<double>& b) {
      TrainConfig none;
      return 0.5 * dot(b, b) + cfg.C / G * reference_loss(rows, b, Loss::Hinge, none).objective;
    };
    hcfg.max_iters = 300;
    TrainResult bgd = bgd_train(inst.db, inst.fq, Loss::Hinge, hcfg);
    CHECK(std::abs(cfg.C / G * bgd.objectives.back() - primal(bgd.beta)) <= 1e-9 * std::max(1.0, primal(bgd.beta)));
    CHECK(primal(cp.beta) <= primal(bgd.beta) + cfg.eps * cfg.C + 1e-9);
  }
}

TEST_CASE("k-means examples") {
  Semiring r = Semiring::real();
  FeatureQuery fq;
  fq.join.semiring = r;
  fq.join.variables = {"x"};
  fq.join.factors = {{{"x"}, "P", true, {}}};
  fq.features = {"x"};
  Database db(r);
  db.put("P", Relation::from_rows(r, {"v"}, {{{0.0}, 1.0}, {{10.0}, 1.0}}));
  TrainConfig cfg;
  KMeansResult fix = kmeans_fit(db, fq, 2, cfg, std::vector<std::vector<double>>{{0}, {10}});
  CHECK(fix.converged);
  CHECK(fix.trace.size() == 1);
  CHECK(fix.means == std::vector<std::vector<double>>{{0}, {10}});
  KMeansResult one = kmeans_fit(db, fq, 1, cfg);
  CHECK(one.means[0][0] == doctest::Approx(5).epsilon(1e-12));
  CHECK_THROWS_AS(kmeans_fit(db, fq, 3, cfg), DataError);
  FeatureQuery icpt = fq;
  icpt.intercept = true;
  CHECK_THROWS_AS(kmeans_fit(db, icpt, 1, cfg), StructuralError);
}

TEST_CASE("k-means follows Lloyd on the materialized join") {
  std::mt19937_64 rng(58);
  for (int iter = 0; iter < 30; ++iter) {
    auto inst = testing::random_feature_instance(rng, LabelKind::None, 3, false, 8);
    auto rows = materialize(inst.db, inst.fq);
    int k = 1 + iter % 3;
    TrainConfig cfg;
    cfg.seed = iter;
    cfg.max_iters = 25;
    KMeansResult res;
    try {
      res = kmeans_fit(inst.db, inst.fq, k, cfg);
    } catch (const DataError&) {
      continue;  // fewer distinct points than clusters
    }
    auto want = lloyd(rows, res.initial, res.trace.size());
    REQUIRE(want.size() == res.trace.size());
    double prev = INFINITY;
    for (size_t t = 0; t < want.size(); ++t) {
      for (int i = 0; i < k; ++i)
        for (size_t l = 0; l < want[t][i].size(); ++l) CHECK(std::abs(res.trace[t].means[i][l] - want[t][i][l]) <= 1e-9);
      double obj = kmeans_objective(rows, res.trace[t].means);
      CHECK(obj <= prev + 1e-9);
      prev = obj;
    }
    KMeansResult ref = reference_lloyd(rows, res.initial, cfg.max_iters);
    CHECK(ref.trace.size() == res.trace.size());
    KMeansResult again = kmeans_fit(inst.db, inst.fq, k, cfg);
    CHECK(again.initial == res.initial);
  }
}

TEST_CASE("feature query json") {
  FeatureQuery fq = parse_feature_query(R"({"variables": ["a", "x", "y"],
      "factors": [{"vars": ["a", "x"], "relation": "R"}, {"vars": ["a", "y"], "relation": "S"}],
      "features": ["x"], "label": "y", "intercept": true})");
  CHECK(fq.join.semiring.id() == SemiringId::RealSumProd);
  CHECK(fq.dim() == 2);
  CHECK_THROWS_AS(parse_feature_query(R"({"variables": ["a"], "factors": []})"), StructuralError);
  Database db(Semiring::real());
  db.put("R", Relation(Semiring::real(), {"k", "v"}));
  db.put("S", Relation(Semiring::real(), {"k", "v"}));
  CHECK_NOTHROW(fq.validate(db));
  FeatureQuery wrong = fq;
  wrong.features = {"nope"};
  CHECK_THROWS_AS(wrong.validate(db), StructuralError);
}
