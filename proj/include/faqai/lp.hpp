#pragma once

#include <gmpxx.h>

#include <utility>
#include <vector>

namespace faqai {

enum class RowSense { Le, Ge, Eq };

struct LpRow {
  std::vector<std::pair<int, mpq_class>> coeffs;
  RowSense sense = RowSense::Le;
  mpq_class rhs = 0;
};

// Variables are implicitly non-negative.
struct LinearProgram {
  int num_vars = 0;
  bool maximize = true;
  std::vector<mpq_class> objective;
  std::vector<LpRow> rows;

  int add_var(const mpq_class& obj = 0) {
    objective.push_back(obj);
    return num_vars++;
  }
  void add_row(std::vector<std::pair<int, mpq_class>> coeffs, RowSense sense, mpq_class rhs) {
    rows.push_back({std::move(coeffs), sense, std::move(rhs)});
  }
};

struct LpSolution {
  mpq_class value;
  std::vector<mpq_class> x;
  int pivots = 0;
  bool used_bignum = false;
};

// Exact two-phase simplex. Tries int64 rationals first and falls back to GMP on overflow.
// Throws InfeasibleError when infeasible and StructuralError when unbounded.
LpSolution solve_lp(const LinearProgram& lp);

// Same, forcing GMP arithmetic throughout (used to cross-check the fast path).
LpSolution solve_lp_bignum(const LinearProgram& lp);

}  // namespace faqai
