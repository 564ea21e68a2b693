#include "faqai/lp.hpp"

#include <string>

#include "faqai/errors.hpp"
#include "faqai/rational.hpp"

namespace faqai {

namespace {

template <class T>
T convert(const mpq_class& q);
template <>
Rat64 convert<Rat64>(const mpq_class& q) { return Rat64::from_mpq(q); }
template <>
mpq_class convert<mpq_class>(const mpq_class& q) { return q; }

mpq_class back(const Rat64& r) { return r.to_mpq(); }
mpq_class back(const mpq_class& q) { return q; }

bool is_zero(const Rat64& r) { return r.num() == 0; }
bool is_zero(const mpq_class& q) { return ::sgn(q) == 0; }

constexpr int kDegenerateStreak = 25;

// Dense tableau; column `cols` holds the right-hand side.
template <class T>
class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), a_(rows, std::vector<T>(cols + 1)), z_(cols + 1), basis_(rows, -1) {}

  T& at(int r, int c) { return a_[r][c]; }
  T& rhs(int r) { return a_[r][n_]; }
  std::vector<T>& z() { return z_; }
  std::vector<int>& basis() { return basis_; }
  int pivots() const { return pivots_; }

  void pivot(int r, int c) {
    ++pivots_;
    std::vector<T>& pr = a_[r];
    T p = pr[c];
    for (int j = 0; j <= n_; ++j)
      if (!is_zero(pr[j])) pr[j] /= p;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      eliminate(a_[i], pr, c);
    }
    eliminate(z_, pr, c);
    basis_[r] = c;
  }

  // Sets the objective row for maximizing sum c_j x_j over the current basis.
  void set_objective(const std::vector<T>& c) {
    for (int j = 0; j <= n_; ++j) z_[j] = T(0);
    for (int j = 0; j < n_; ++j) z_[j] = -c[j];
    for (int r = 0; r < m_; ++r) {
      const T& cb = c[basis_[r]];
      if (is_zero(cb)) continue;
      for (int j = 0; j <= n_; ++j)
        if (!is_zero(a_[r][j])) z_[j] += cb * a_[r][j];
    }
  }

  // Returns false when unbounded.
  bool optimize(const std::vector<bool>& allowed) {
    int streak = 0;
    for (;;) {
      bool bland = streak >= kDegenerateStreak;
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (!allowed[j] || sgn(z_[j]) >= 0) continue;
        if (enter < 0 || (!bland && z_[j] < z_[enter])) enter = j;
        if (bland) break;
      }
      if (enter < 0) return true;
      int leave = -1;
      T best;
      for (int r = 0; r < m_; ++r) {
        if (sgn(a_[r][enter]) <= 0) continue;
        T ratio = a_[r][n_] / a_[r][enter];
        if (leave < 0 || ratio < best || (ratio == best && basis_[r] < basis_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      streak = is_zero(best) ? streak + 1 : 0;
      pivot(leave, enter);
    }
  }

 private:
  void eliminate(std::vector<T>& row, const std::vector<T>& pr, int c) {
    if (is_zero(row[c])) return;
    T f = row[c];
    for (int j = 0; j <= n_; ++j)
      if (!is_zero(pr[j])) row[j] -= f * pr[j];
  }

  int m_, n_;
  std::vector<std::vector<T>> a_;
  std::vector<T> z_;
  std::vector<int> basis_;
  int pivots_ = 0;
};

template <class T>
LpSolution solve_with(const LinearProgram& lp) {
  const int nv = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());

  // Normalize every row to a non-negative right-hand side.
  struct Row {
    std::vector<std::pair<int, T>> coeffs;
    RowSense sense;
    T rhs;
  };
  std::vector<Row> rows;
  rows.reserve(m);
  int slacks = 0, artificials = 0;
  for (const auto& r : lp.rows) {
    Row row;
    bool flip = ::sgn(r.rhs) < 0;
    for (const auto& [v, c] : r.coeffs) {
      if (v < 0 || v >= nv) throw StructuralError("LP coefficient references unknown variable");
      if (::sgn(c) != 0) row.coeffs.emplace_back(v, convert<T>(flip ? mpq_class(-c) : c));
    }
    row.rhs = convert<T>(flip ? mpq_class(-r.rhs) : r.rhs);
    row.sense = r.sense;
    if (flip && r.sense == RowSense::Le) row.sense = RowSense::Ge;
    else if (flip && r.sense == RowSense::Ge) row.sense = RowSense::Le;
    if (row.sense != RowSense::Eq) ++slacks;
    if (row.sense != RowSense::Le) ++artificials;
    rows.push_back(std::move(row));
  }

  const int cols = nv + slacks + artificials;
  Tableau<T> t(m, cols);
  std::vector<bool> is_art(cols, false);
  int next_slack = nv, next_art = nv + slacks;
  for (int i = 0; i < m; ++i) {
    for (const auto& [v, c] : rows[i].coeffs) t.at(i, v) += c;
    t.rhs(i) = rows[i].rhs;
    switch (rows[i].sense) {
      case RowSense::Le:
        t.at(i, next_slack) = T(1);
        t.basis()[i] = next_slack++;
        break;
      case RowSense::Ge:
        t.at(i, next_slack++) = T(-1);
        is_art[next_art] = true;
        t.at(i, next_art) = T(1);
        t.basis()[i] = next_art++;
        break;
      case RowSense::Eq:
        is_art[next_art] = true;
        t.at(i, next_art) = T(1);
        t.basis()[i] = next_art++;
        break;
    }
  }

  std::vector<bool> allowed(cols, true);
  if (artificials > 0) {
    std::vector<T> c1(cols, T(0));
    for (int j = 0; j < cols; ++j)
      if (is_art[j]) c1[j] = T(-1);
    t.set_objective(c1);
    t.optimize(allowed);
    if (sgn(t.z()[cols]) != 0) throw InfeasibleError("linear program is infeasible");
    // Drive zero-level artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (!is_art[t.basis()[r]]) continue;
      for (int j = 0; j < cols; ++j) {
        if (!is_art[j] && !is_zero(t.at(r, j))) {
          t.pivot(r, j);
          break;
        }
      }
    }
    for (int j = 0; j < cols; ++j)
      if (is_art[j]) allowed[j] = false;
  }

  std::vector<T> c2(cols, T(0));
  for (int j = 0; j < nv; ++j) {
    mpq_class c = lp.maximize ? lp.objective[j] : mpq_class(-lp.objective[j]);
    c2[j] = convert<T>(c);
  }
  t.set_objective(c2);
  if (!t.optimize(allowed)) throw StructuralError("linear program is unbounded");

  LpSolution sol;
  sol.x.assign(nv, 0);
  for (int r = 0; r < m; ++r)
    if (t.basis()[r] < nv) sol.x[t.basis()[r]] = back(t.rhs(r));
  sol.value = back(t.z()[cols]);
  if (!lp.maximize) sol.value = -sol.value;
  sol.pivots = t.pivots();
  return sol;
}

void check_shape(const LinearProgram& lp) {
  if (static_cast<int>(lp.objective.size()) != lp.num_vars) {
    throw StructuralError("LP objective has " + std::to_string(lp.objective.size()) + " entries for " +
                          std::to_string(lp.num_vars) + " variables");
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  check_shape(lp);
  try {
    return solve_with<Rat64>(lp);
  } catch (const RationalOverflow&) {
    LpSolution s = solve_with<mpq_class>(lp);
    s.used_bignum = true;
    return s;
  }
}

LpSolution solve_lp_bignum(const LinearProgram& lp) {
  check_shape(lp);
  LpSolution s = solve_with<mpq_class>(lp);
  s.used_bignum = true;
  return s;
}

}  // namespace faqai
