#pragma once

#include <gmpxx.h>

#include <string>
#include <variant>
#include <vector>

namespace faqai {

enum class SemiringId { Boolean, CountInt, RealSumProd };

// Tag order matches SemiringId.
using SVal = std::variant<bool, mpz_class, double>;

constexpr double kRealTolerance = 1e-9;

class Semiring {
 public:
  Semiring() = default;
  explicit Semiring(SemiringId id) : id_(id) {}

  static Semiring parse(const std::string& name);
  static Semiring boolean() { return Semiring(SemiringId::Boolean); }
  static Semiring count() { return Semiring(SemiringId::CountInt); }
  static Semiring real() { return Semiring(SemiringId::RealSumProd); }

  SemiringId id() const { return id_; }
  std::string name() const;

  SVal zero() const;
  SVal one() const;
  SVal add(const SVal& a, const SVal& b) const;
  SVal mul(const SVal& a, const SVal& b) const;
  void add_into(SVal& acc, const SVal& b) const;
  void mul_into(SVal& acc, const SVal& b) const;

  // Exact test for the additive identity; zero rows are dropped with this.
  bool is_zero(const SVal& a) const;
  // Exact for boolean and count-int; absolute tolerance for reals.
  bool equal(const SVal& a, const SVal& b, double tol = kRealTolerance) const;

  void check(const SVal& a) const;
  SVal parse_value(const std::string& text) const;
  // Converts a double into the semiring's carrier (truthiness, integer, itself).
  SVal from_double(double v) const;
  double to_double(const SVal& a) const;

  bool operator==(const Semiring& o) const { return id_ == o.id_; }
  bool operator!=(const Semiring& o) const { return id_ != o.id_; }

 private:
  SemiringId id_ = SemiringId::CountInt;
};

SVal fold_add(const Semiring& s, const std::vector<SVal>& values);
SVal fold_mul(const Semiring& s, const std::vector<SVal>& values);

std::string to_string(const SVal& v);

}  // namespace faqai
