#pragma once

#include <memory>
#include <vector>

#include "faqai/semiring.hpp"

namespace faqai {

enum class Cmp { Le, Lt };

// Layered range tree answering the ⊕ of weights over points p with q_i ≤ p_i (or q_i < p_i)
// in every coordinate. Only the additive monoid of the semiring is used.
class DominanceIndex {
 public:
  DominanceIndex(Semiring s, int k, std::vector<Cmp> strictness);
  DominanceIndex(DominanceIndex&&) noexcept;
  DominanceIndex& operator=(DominanceIndex&&) noexcept;
  ~DominanceIndex();

  // coords holds k values per point, row-major.
  static DominanceIndex build(const Semiring& s, int k, std::vector<double> coords, std::vector<SVal> weights,
                              std::vector<Cmp> strictness);

  SVal query(const std::vector<double>& q) const;
  SVal query(const double* q) const;
  size_t size() const;
  int dimension() const;
  const SVal& total() const;

 private:
  struct Data;
  struct Level;

  std::unique_ptr<Data> data_;
  std::unique_ptr<Level> root_;
};

}  // namespace faqai
