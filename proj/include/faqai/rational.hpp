#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>

namespace faqai {

struct RationalOverflow : std::overflow_error {
  RationalOverflow() : std::overflow_error("int64 rational overflow") {}
};

// Rational with int64 numerator/denominator; intermediate products in __int128.
// Any result that does not fit throws RationalOverflow so callers can retry with mpq_class.
class Rat64 {
 public:
  Rat64() = default;
  Rat64(int64_t n) : n_(n) {}  // NOLINT(google-explicit-constructor)

  static Rat64 from_mpq(const mpq_class& q) {
    if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p()) throw RationalOverflow();
    Rat64 r;
    r.n_ = q.get_num().get_si();
    r.d_ = q.get_den().get_si();
    return r;
  }

  mpq_class to_mpq() const {
    mpq_class q{mpz_class(static_cast<long>(n_)), mpz_class(static_cast<long>(d_))};
    q.canonicalize();
    return q;
  }

  int64_t num() const { return n_; }
  int64_t den() const { return d_; }
  int sign() const { return (n_ > 0) - (n_ < 0); }

  friend Rat64 operator+(const Rat64& a, const Rat64& b) {
    if (a.d_ == 1 && b.d_ == 1) return make(__int128(a.n_) + b.n_, 1);
    return make(__int128(a.n_) * b.d_ + __int128(b.n_) * a.d_, __int128(a.d_) * b.d_);
  }
  friend Rat64 operator-(const Rat64& a, const Rat64& b) {
    if (a.d_ == 1 && b.d_ == 1) return make(__int128(a.n_) - b.n_, 1);
    return make(__int128(a.n_) * b.d_ - __int128(b.n_) * a.d_, __int128(a.d_) * b.d_);
  }
  friend Rat64 operator*(const Rat64& a, const Rat64& b) {
    return make(__int128(a.n_) * b.n_, __int128(a.d_) * b.d_);
  }
  friend Rat64 operator/(const Rat64& a, const Rat64& b) {
    if (b.n_ == 0) throw std::domain_error("division by zero");
    return make(__int128(a.n_) * b.d_, __int128(a.d_) * b.n_);
  }
  Rat64 operator-() const { return make(-__int128(n_), d_); }
  Rat64& operator+=(const Rat64& o) { return *this = *this + o; }
  Rat64& operator-=(const Rat64& o) { return *this = *this - o; }
  Rat64& operator*=(const Rat64& o) { return *this = *this * o; }
  Rat64& operator/=(const Rat64& o) { return *this = *this / o; }

  friend bool operator==(const Rat64& a, const Rat64& b) { return a.n_ == b.n_ && a.d_ == b.d_; }
  friend bool operator!=(const Rat64& a, const Rat64& b) { return !(a == b); }
  friend bool operator<(const Rat64& a, const Rat64& b) {
    return __int128(a.n_) * b.d_ < __int128(b.n_) * a.d_;
  }
  friend bool operator>(const Rat64& a, const Rat64& b) { return b < a; }
  friend bool operator<=(const Rat64& a, const Rat64& b) { return !(b < a); }
  friend bool operator>=(const Rat64& a, const Rat64& b) { return !(a < b); }

 private:
  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static int64_t narrow(__int128 v) {
    if (v > INT64_MAX || v < -INT64_MAX) throw RationalOverflow();
    return static_cast<int64_t>(v);
  }

  static Rat64 make(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (n == 0) return Rat64();
    if (d != 1) {
      __int128 g = gcd(n, d);
      n /= g;
      d /= g;
    }
    Rat64 r;
    r.n_ = narrow(n);
    r.d_ = narrow(d);
    return r;
  }

  int64_t n_ = 0;
  int64_t d_ = 1;
};

inline int sgn(const Rat64& r) { return r.sign(); }
inline int sgn(const mpq_class& q) { return ::sgn(q); }

}  // namespace faqai
