#include "faqai/semiring.hpp"

#include <cmath>
#include <sstream>

#include "faqai/errors.hpp"

namespace faqai {

Semiring Semiring::parse(const std::string& name) {
  if (name == "boolean" || name == "bool") return boolean();
  if (name == "count-int" || name == "count") return count();
  if (name == "real-sum-prod" || name == "real") return real();
  throw StructuralError("unknown semiring '" + name + "'");
}

std::string Semiring::name() const {
  switch (id_) {
    case SemiringId::Boolean: return "boolean";
    case SemiringId::CountInt: return "count-int";
    case SemiringId::RealSumProd: return "real-sum-prod";
  }
  return "?";
}

SVal Semiring::zero() const {
  switch (id_) {
    case SemiringId::Boolean: return false;
    case SemiringId::CountInt: return mpz_class(0);
    case SemiringId::RealSumProd: return 0.0;
  }
  return false;
}

SVal Semiring::one() const {
  switch (id_) {
    case SemiringId::Boolean: return true;
    case SemiringId::CountInt: return mpz_class(1);
    case SemiringId::RealSumProd: return 1.0;
  }
  return true;
}

void Semiring::check(const SVal& a) const {
  if (a.index() != static_cast<size_t>(id_)) {
    throw StructuralError("semiring value tag does not match " + name());
  }
}

void Semiring::add_into(SVal& acc, const SVal& b) const {
  check(acc);
  check(b);
  switch (id_) {
    case SemiringId::Boolean: std::get<0>(acc) = std::get<0>(acc) || std::get<0>(b); break;
    case SemiringId::CountInt: std::get<1>(acc) += std::get<1>(b); break;
    case SemiringId::RealSumProd: std::get<2>(acc) += std::get<2>(b); break;
  }
}

void Semiring::mul_into(SVal& acc, const SVal& b) const {
  check(acc);
  check(b);
  switch (id_) {
    case SemiringId::Boolean: std::get<0>(acc) = std::get<0>(acc) && std::get<0>(b); break;
    case SemiringId::CountInt: std::get<1>(acc) *= std::get<1>(b); break;
    case SemiringId::RealSumProd: std::get<2>(acc) *= std::get<2>(b); break;
  }
}

SVal Semiring::add(const SVal& a, const SVal& b) const {
  SVal r = a;
  add_into(r, b);
  return r;
}

SVal Semiring::mul(const SVal& a, const SVal& b) const {
  SVal r = a;
  mul_into(r, b);
  return r;
}

bool Semiring::is_zero(const SVal& a) const {
  check(a);
  switch (id_) {
    case SemiringId::Boolean: return !std::get<0>(a);
    case SemiringId::CountInt: return std::get<1>(a) == 0;
    case SemiringId::RealSumProd: return std::get<2>(a) == 0.0;
  }
  return false;
}

bool Semiring::equal(const SVal& a, const SVal& b, double tol) const {
  check(a);
  check(b);
  switch (id_) {
    case SemiringId::Boolean: return std::get<0>(a) == std::get<0>(b);
    case SemiringId::CountInt: return std::get<1>(a) == std::get<1>(b);
    case SemiringId::RealSumProd: return std::fabs(std::get<2>(a) - std::get<2>(b)) <= tol;
  }
  return false;
}

SVal Semiring::parse_value(const std::string& text) const {
  try {
    switch (id_) {
      case SemiringId::Boolean: {
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      }
      case SemiringId::CountInt: return mpz_class(text, 10);
      case SemiringId::RealSumProd: {
        size_t used = 0;
        double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
        break;
      }
    }
  } catch (const std::exception&) {
  }
  throw StructuralError("cannot parse annotation '" + text + "' for " + name());
}

SVal Semiring::from_double(double v) const {
  switch (id_) {
    case SemiringId::Boolean: return v != 0.0;
    case SemiringId::CountInt: {
      if (v != std::floor(v)) throw StructuralError("non-integral value for count-int");
      return mpz_class(v);
    }
    case SemiringId::RealSumProd: return v;
  }
  return v;
}

double Semiring::to_double(const SVal& a) const {
  check(a);
  switch (id_) {
    case SemiringId::Boolean: return std::get<0>(a) ? 1.0 : 0.0;
    case SemiringId::CountInt: return std::get<1>(a).get_d();
    case SemiringId::RealSumProd: return std::get<2>(a);
  }
  return 0.0;
}

SVal fold_add(const Semiring& s, const std::vector<SVal>& values) {
  SVal acc = s.zero();
  for (const auto& v : values) s.add_into(acc, v);
  return acc;
}

SVal fold_mul(const Semiring& s, const std::vector<SVal>& values) {
  SVal acc = s.one();
  for (const auto& v : values) s.mul_into(acc, v);
  return acc;
}

std::string to_string(const SVal& v) {
  switch (v.index()) {
    case 0: return std::get<0>(v) ? "true" : "false";
    case 1: return std::get<1>(v).get_str();
    default: {
      std::ostringstream os;
      os.precision(17);
      os << std::get<2>(v);
      return os.str();
    }
  }
}

}  // namespace faqai
