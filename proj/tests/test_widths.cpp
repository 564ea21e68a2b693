#include <random>

#include "doctest.h"
#include "faqai/errors.hpp"
#include "faqai/lp.hpp"
#include "faqai/widths.hpp"
#include "support.hpp"

using namespace faqai;
using testing::make_hypergraph;

namespace {

VSet bits(const Hypergraph& h, const std::string& s) {
  VSet out = 0;
  for (char c : s) out |= VSet(1) << h.index_of(std::string(1, c));
  return out;
}

mpq_class q(long n, long d = 1) {
  mpq_class r(n, d);
  r.canonicalize();
  return r;
}

}  // namespace

TEST_CASE("exact simplex") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6 -> (8/5, 6/5), value 14/5.
  LinearProgram lp;
  int x = lp.add_var(1), y = lp.add_var(1);
  lp.add_row({{x, 1}, {y, 2}}, RowSense::Le, 4);
  lp.add_row({{x, 3}, {y, 1}}, RowSense::Le, 6);
  LpSolution s = solve_lp(lp);
  CHECK(s.value == q(14, 5));
  CHECK(s.x[x] == q(8, 5));
  CHECK(solve_lp_bignum(lp).value == s.value);

  LinearProgram inf;
  int a = inf.add_var(1);
  inf.add_row({{a, 1}}, RowSense::Ge, 2);
  inf.add_row({{a, 1}}, RowSense::Le, 1);
  CHECK_THROWS_AS(solve_lp(inf), InfeasibleError);

  LinearProgram unb;
  int u = unb.add_var(1);
  unb.add_row({{u, 1}}, RowSense::Ge, 0);
  CHECK_THROWS_AS(solve_lp(unb), StructuralError);

  LinearProgram mn;
  mn.maximize = false;
  int m1 = mn.add_var(2), m2 = mn.add_var(3);
  mn.add_row({{m1, 1}, {m2, 1}}, RowSense::Ge, 1);
  mn.add_row({{m1, 1}, {m2, -1}}, RowSense::Eq, 0);
  CHECK(solve_lp(mn).value == q(5, 2));
}

TEST_CASE("simplex int64 and bignum paths agree on random LPs") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> c(-5, 9);
  for (int iter = 0; iter < 60; ++iter) {
    LinearProgram lp;
    int n = std::uniform_int_distribution<int>(2, 5)(rng);
    for (int i = 0; i < n; ++i) lp.add_var(c(rng));
    for (int r = 0; r < n + 1; ++r) {
      std::vector<std::pair<int, mpq_class>> row;
      for (int i = 0; i < n; ++i) row.emplace_back(i, std::abs(c(rng)) + 1);
      lp.add_row(row, RowSense::Le, std::abs(c(rng)) + 1);
    }
    CHECK(solve_lp(lp).value == solve_lp_bignum(lp).value);
  }
}

TEST_CASE("rho_star examples") {
  Hypergraph tri = make_hypergraph("abc", {"ab", "bc", "ac"});
  CHECK(rho_star(tri, bits(tri, "abc")) == q(3, 2));
  CHECK(rho_star(tri, bits(tri, "ab")) == 1);
  CHECK(rho_star(tri, 0) == 0);
  Hypergraph inf = make_hypergraph("ab", {"a"}, {}, {"ab"});
  CHECK_THROWS_AS(rho_star(inf, bits(inf, "b")), InfeasibleError);
}

TEST_CASE("max_h_over_bag examples") {
  Hypergraph one = make_hypergraph("abc", {"abc"});
  CHECK(max_h_over_bag(one, one.all(), HSpace::Polymatroid) == 1);
  CHECK(max_h_over_bag(one, 0, HSpace::Polymatroid) == 0);
  Hypergraph tri = make_hypergraph("abc", {"ab", "bc", "ac"});
  CHECK(max_h_over_bag(tri, tri.all(), HSpace::Polymatroid) == q(3, 2));
  Hypergraph big = make_hypergraph("abcdefg", {"abcdefg"});
  CHECK_THROWS_AS(max_h_over_bag(big, big.all(), HSpace::Polymatroid), CapacityError);
}

TEST_CASE("width pins") {
  Hypergraph path3 = make_hypergraph("abcd", {"ab", "bc", "cd"}, {"ac", "bc", "bd"});
  CHECK(faqw(path3, 0, false).value == 2);
  CHECK(faqw(path3, 0, true).value == 1);

  for (const char* lig : {"ad", "abcd"}) {
    Hypergraph path = make_hypergraph("abcd", {"ab", "bc", "cd"}, {lig});
    CHECK(faqw(path, 0, false).value == 2);
    CHECK(faqw(path, 0, true).value == 2);
    CHECK(smfw(path, 0, true, false).value == q(3, 2));
  }

  Hypergraph cycle = make_hypergraph("abcd", {"ab", "bc", "cd", "da"});
  CHECK(compute_width(cycle, 0, parse_kind("fhtw")).value == 2);
  CHECK(compute_width(cycle, 0, parse_kind("sharp_subw")).value == q(3, 2));
  CHECK(compute_width(cycle, 0, parse_kind("subw")).value == q(3, 2));

  Hypergraph ksum = make_hypergraph("abcd", {"a", "b", "c", "d"}, {"abcd"});
  CHECK(faqw(ksum, 0, true).value == 2);
  CHECK(faqw(ksum, 0, false).value == 4);

  Hypergraph single = make_hypergraph("abc", {"abc"});
  for (auto k : {WidthKind::Faqw, WidthKind::FaqwL, WidthKind::Smfw, WidthKind::SmfwL, WidthKind::SharpSmfw,
                 WidthKind::SharpSmfwL})
    CHECK(compute_width(single, 0, k).value == 1);
}

TEST_CASE("width reports") {
  Hypergraph path3 = make_hypergraph("abcd", {"ab", "bc", "cd"}, {"ac", "bc", "bd"});
  WidthReport r = faqw(path3, 0, true);
  REQUIRE(r.witness_td);
  CHECK(validate_relaxed(*r.witness_td, path3, 0, true).valid);
  CHECK(r.family_size > 0);
  CHECK_FALSE(r.search_family_note.empty());
  CHECK(fraction_string(q(3, 2)) == "3/2");
  CHECK(fraction_string(q(4, 2)) == "2");
  CHECK_THROWS_AS(parse_kind("treewidth"), StructuralError);
  WidthReport s = smfw(make_hypergraph("abcd", {"ab", "bc", "cd", "da"}), 0, false, true);
  REQUIRE(s.witness_h);
  CHECK(s.witness_h->size() == 16);
  CHECK((*s.witness_h)[0] == 0);
}

TEST_CASE("set-function spaces nest and polymatroid optimum equals rho_star") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 25; ++iter) {
    Hypergraph h = testing::random_hypergraph(rng, 5, 4);
    for (VSet bag = 1; bag <= h.all(); bag += 1 + static_cast<VSet>(rng() % 5)) {
      mpq_class mod = max_h_over_bag(h, bag, HSpace::Modular);
      mpq_class poly = max_h_over_bag(h, bag, HSpace::Polymatroid);
      mpq_class epoly = max_h_over_bag(h, bag, HSpace::EPolymatroid);
      CHECK(poly == rho_star(h, bag));
      CHECK(mod <= poly);
      CHECK(poly <= epoly);
    }
  }
}

TEST_CASE("width order on random hypergraphs") {
  std::mt19937_64 rng(29);
  int done = 0;
  for (int iter = 0; iter < 80 && done < 30; ++iter) {
    Hypergraph h = testing::random_hypergraph(rng, 4, 4);
    try {
      mpq_class fhtw = faqw(h, 0, false).value, fl = faqw(h, 0, true).value;
      mpq_class subw = smfw(h, 0, false, false).value, ssubw = smfw(h, 0, false, true).value;
      mpq_class sl = smfw(h, 0, true, false).value;
      CHECK(subw <= ssubw);
      CHECK(ssubw <= fhtw);
      CHECK(sl <= fl);
      CHECK(fl <= fhtw);
      CHECK(2 * fl >= fhtw);
      CHECK(fhtw >= 1);
      ++done;
    } catch (const CapacityError&) {
    }
  }
  CHECK(done >= 20);
}
