#include <cmath>
#include <random>

#include "doctest.h"
#include "faqai/engine.hpp"
#include "faqai/errors.hpp"
#include "faqai/heavylight.hpp"
#include "faqai/widths.hpp"
#include "support.hpp"

using namespace faqai;

namespace {

Relation pairs(const Semiring& s, const std::vector<std::pair<int64_t, int64_t>>& ps, Schema schema = {"x", "y"}) {
  std::vector<std::pair<Tuple, SVal>> rows;
  for (auto [a, b] : ps) rows.emplace_back(Tuple{a, b}, s.one());
  return Relation::from_rows(s, std::move(schema), std::move(rows));
}

Database random_cycle(std::mt19937_64& rng, size_t max_n) {
  Semiring c = Semiring::count();
  Database db(c);
  int domain = std::uniform_int_distribution<int>(2, 6)(rng);
  for (const char* name : {"R12", "R23", "R34", "R41"}) {
    size_t n = std::uniform_int_distribution<size_t>(0, max_n)(rng);
    db.put(name, testing::random_relation(c, {"x", "y"}, n, domain, rng));
  }
  return db;
}

Database random_path(std::mt19937_64& rng, size_t max_n) {
  Semiring c = Semiring::count();
  Database db(c);
  int domain = std::uniform_int_distribution<int>(2, 7)(rng);
  for (const char* name : {"R", "S", "T"}) {
    size_t n = std::uniform_int_distribution<size_t>(0, max_n)(rng);
    db.put(name, testing::random_relation(c, {"x", "y"}, n, domain, rng));
  }
  return db;
}

bool has(const Relation& r, const Tuple& t) { return r.lookup(t).has_value(); }

}  // namespace

TEST_CASE("degree split") {
  Semiring c = Semiring::count();
  Relation r = pairs(c, {{1, 1}, {1, 2}, {2, 1}}, {"a", "b"});
  DegreeSplit d = degree_split(r, {"a"}, 1);
  CHECK(testing::same_relation(d.light, pairs(c, {{2, 1}}, {"a", "b"})));
  CHECK(testing::same_relation(d.heavy, pairs(c, {{1, 1}, {1, 2}}, {"a", "b"})));
  DegreeSplit all_light = degree_split(r, {"a"}, 3);
  CHECK(testing::same_relation(all_light.light, r));
  CHECK(all_light.heavy.empty());
  DegreeSplit all_heavy = degree_split(r, {"a"}, 0);
  CHECK(testing::same_relation(all_heavy.heavy, r));
  CHECK(all_heavy.light.empty());
  CHECK_THROWS_AS(degree_split(r, {"z"}, 1), StructuralError);
  CHECK(sqrt_threshold(16) == 4);
  CHECK(sqrt_threshold(17) == 5);
  CHECK(sqrt_threshold(1) == 1);
}

TEST_CASE("degree split partitions on random relations") {
  std::mt19937_64 rng(12);
  Semiring c = Semiring::count();
  for (int iter = 0; iter < 40; ++iter) {
    Relation r = testing::random_relation(c, {"a", "b", "c"}, 30, 4, rng);
    size_t t = std::uniform_int_distribution<size_t>(0, 6)(rng);
    DegreeSplit d = degree_split(r, {"a", "c"}, t);
    CHECK(d.light.size() + d.heavy.size() == r.size());
    std::map<std::pair<Value, Value>, size_t> deg;
    for (const auto& tu : r.tuples()) ++deg[{tu[0], tu[2]}];
    for (const auto& tu : d.light.tuples()) CHECK(deg[{tu[0], tu[2]}] <= t);
    for (const auto& tu : d.heavy.tuples()) CHECK(deg[{tu[0], tu[2]}] > t);
    for (size_t i = 0; i < d.light.size(); ++i) CHECK(c.equal(*r.lookup(d.light.tuple(i)), d.light.weight(i)));
  }
}

TEST_CASE("four-cycle examples") {
  Semiring c = Semiring::count();
  Relation one = pairs(c, {{0, 0}});
  CHECK(c.equal(count_4cycle(one, one, one, one), mpz_class(1)));
  Relation none(c, {"x", "y"});
  CHECK(c.is_zero(count_4cycle(one, none, one, one)));
  CHECK_THROWS_AS(count_4cycle(Relation(c, {"x"}), one, one, one), StructuralError);
}

TEST_CASE("four-cycle count equals nested loops") {
  std::mt19937_64 rng(13);
  for (int iter = 0; iter < 100; ++iter) {
    Database db = random_cycle(rng, 30);
    SVal got = count_4cycle(db.get("R12"), db.get("R23"), db.get("R34"), db.get("R41"));
    CHECK(std::get<mpz_class>(got) == testing::nested_cycle_count(db));
  }
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Database db = random_cycle_db(200, 15, seed);
    SVal got = count_4cycle(db.get("R12"), db.get("R23"), db.get("R34"), db.get("R41"));
    CHECK(std::get<mpz_class>(got) == testing::nested_cycle_count(db));
  }
}

TEST_CASE("four-cycle branches are disjoint tuple by tuple") {
  std::mt19937_64 rng(14);
  for (int iter = 0; iter < 20; ++iter) {
    Database db = random_cycle(rng, 30);
    CycleParts p = four_cycle_parts(db.get("R12"), db.get("R23"), db.get("R34"), db.get("R41"));
    const Relation &a = db.get("R12"), &b = db.get("R23"), &c = db.get("R34"), &d = db.get("R41");
    for (const auto& ta : a.tuples())
      for (const auto& tb : b.tuples()) {
        if (ta[1] != tb[0]) continue;
        for (const auto& tc : c.tuples()) {
          if (tb[1] != tc[0]) continue;
          for (const auto& td : d.tuples()) {
            if (tc[1] != td[0] || td[1] != ta[0]) continue;
            const Value &x1 = ta[0], &x2 = ta[1], &x3 = tb[1], &x4 = tc[1];
            bool one = has(p.s123, {x1, x2, x3}) && has(p.s341, {x3, x4, x1});
            bool two = has(p.s234, {x2, x3, x4}) && has(p.s412, {x4, x1, x2});
            CHECK(one != two);
          }
        }
      }
  }
}

TEST_CASE("path with inequality equals nested loops") {
  std::mt19937_64 rng(15);
  for (int iter = 0; iter < 100; ++iter) {
    Database db = random_path(rng, 30);
    PathIneqResult r = count_path_ineq(db, "R", "S", "T", a_le_d_ligament());
    mpz_class want = testing::nested_path_count(db, [](double a, double, double, double d) { return a <= d; });
    CHECK(std::get<mpz_class>(r.value) == want);
    double n = static_cast<double>(std::max<size_t>(db.max_size(), 1));
    CHECK(static_cast<double>(r.u_size) <= std::pow(n, 1.5) + 1e-9);
    CHECK(static_cast<double>(r.w_size) <= std::pow(n, 1.5) + 1e-9);
  }
}

TEST_CASE("path with inequality examples") {
  std::mt19937_64 rng(16);
  Semiring c = Semiring::count();
  Ligament always{{{"a", UnaryExpr::affine(0)}, {"d", UnaryExpr::affine(0)}}, false};
  for (int iter = 0; iter < 10; ++iter) {
    Database db = random_path(rng, 20);
    PathIneqResult r = count_path_ineq(db, "R", "S", "T", always);
    CHECK(std::get<mpz_class>(r.value) ==
          testing::nested_path_count(db, [](double, double, double, double) { return true; }));
  }
  Database db = random_path(rng, 20);
  db.put("S", Relation(c, {"x", "y"}));
  CHECK(c.is_zero(count_path_ineq(db, "R", "S", "T", a_le_d_ligament()).value));
  Ligament bad{{{"z", UnaryExpr::affine(1)}}, false};
  CHECK_THROWS_AS(count_path_ineq(random_path(rng, 5), "R", "S", "T", bad), StructuralError);
}

TEST_CASE("adversarial path instance favours the split plan") {
  // Counters of the split plan grow roughly like N^1.5; the single-TD plan like N^2.
  std::vector<double> ns, split, single;
  for (size_t m : {64, 128, 256, 512}) {
    Database db = adversarial_path_db(m);
    PathIneqResult r = count_path_ineq(db, "R", "S", "T", a_le_d_ligament());
    Counters c;
    SVal v = evaluate(db, path_query(db.semiring(), a_le_d_ligament()), &c).total();
    CHECK(db.semiring().equal(v, r.value));
    double n = static_cast<double>(db.max_size());
    CHECK(static_cast<double>(r.u_size) <= std::pow(n, 1.5));
    CHECK(static_cast<double>(r.w_size) <= std::pow(n, 1.5));
    ns.push_back(n);
    split.push_back(static_cast<double>(r.counters.total()));
    single.push_back(static_cast<double>(c.total()));
  }
  double es = testing::growth_exponent(ns, split), e1 = testing::growth_exponent(ns, single);
  MESSAGE("split exponent " << es << ", single-TD exponent " << e1);
  CHECK(es <= 1.6);
  CHECK(e1 >= 1.9);
}

TEST_CASE("non-relaxed plan is quadratic on the star instance") {
  Semiring c = Semiring::count();
  FaqAiQuery q = three_ineq_query(c);
  // Every non-relaxed decomposition puts a, b and c in one bag; R join S is quadratic there.
  WidthReport w = faqw(q.hypergraph(), 0, false);
  REQUIRE(w.witness_td);
  CHECK(w.value == 2);
  TreeDecomposition td = *w.witness_td;
  std::vector<double> ns, relaxed_c, strict_c;
  for (size_t m : {64, 128, 256, 512}) {
    Database db = adversarial_star_db(m);
    Counters cr, cs;
    SVal a = evaluate(db, q, &cr).total();
    SVal b = evaluate_with_plan(db, q, plan_for_td(q, td), &cs).total();
    CHECK(c.equal(a, b));
    ns.push_back(static_cast<double>(db.max_size()));
    relaxed_c.push_back(static_cast<double>(cr.total()));
    strict_c.push_back(static_cast<double>(cs.total()));
  }
  double er = testing::growth_exponent(ns, relaxed_c), es = testing::growth_exponent(ns, strict_c);
  MESSAGE("relaxed exponent " << er << ", non-relaxed exponent " << es);
  CHECK(er <= 1.2);
  CHECK(es >= 1.8);
}
