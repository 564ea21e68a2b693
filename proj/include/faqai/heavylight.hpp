#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faqai/query.hpp"
#include "faqai/relation.hpp"

namespace faqai {

struct DegreeSplit {
  Relation light;  // groups of size <= threshold
  Relation heavy;
  std::vector<std::string> split_vars;
  size_t threshold = 0;
};

size_t sqrt_threshold(size_t n);  // ceil(sqrt(n))

DegreeSplit degree_split(const Relation& r, const std::vector<std::string>& x_vars, size_t threshold);

// The four 3-ary parts of the cycle plan, over (x_i, x_j, x_k), each already restricted by
// its branch filter. Branch one is S123 and S341, branch two S234 and S412.
struct CycleParts {
  Relation s123, s341, s234, s412;
  size_t threshold = 0;
};

// Relations are bound positionally to (x1,x2), (x2,x3), (x3,x4), (x4,x1).
CycleParts four_cycle_parts(const Relation& r12, const Relation& r23, const Relation& r34, const Relation& r41,
                            Counters* counters = nullptr);
SVal count_4cycle(const Relation& r12, const Relation& r23, const Relation& r34, const Relation& r41,
                  Counters* counters = nullptr);

struct PathIneqResult {
  SVal value;
  size_t u_size = 0;  // |R ⋈ S^light| over (a,b,c)
  size_t w_size = 0;  // |S^heavy ⋈ T| over (b,c,d)
  size_t threshold = 0;
  Counters counters;
};

// R, S, T are bound positionally to (a,b), (b,c), (c,d); the ligament refers to a, b, c, d.
PathIneqResult count_path_ineq(const Database& db, const std::string& r, const std::string& s, const std::string& t,
                               const Ligament& ligament);

// Path query R(a,b) S(b,c) T(c,d) with one ligament, as an engine query.
FaqAiQuery path_query(const Semiring& sr, const Ligament& ligament);
// Count query of the three-inequality path example: a <= c, c <= b, d <= b.
FaqAiQuery three_ineq_query(const Semiring& sr);
// a <= d written over all four variables with zero coefficients on b and c.
Ligament a_le_d_ligament();

// Instance generators (count-int, relations named R, S, T or R12..R41).
Database random_path_db(size_t n, size_t domain, uint64_t seed);
// High-degree instance on which both width-2 single-TD plans materialize m^2 tuples.
Database adversarial_path_db(size_t m);
// Star instance on which the non-relaxed plan's middle bag is quadratic.
Database adversarial_star_db(size_t m);
Database random_cycle_db(size_t n, size_t domain, uint64_t seed);

}  // namespace faqai
