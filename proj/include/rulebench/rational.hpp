#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

// Exact rational arithmetic on int64 numerator/denominator with __int128
// intermediates. Overflow raises instead of wrapping; the contribution sums
// this backs stay far below the limit.

namespace rulebench {

class Rational {
 public:
  Rational() = default;
  Rational(long long num) : n_(num), d_(1) {}
  Rational(long long num, long long den) : n_(num), d_(den) { normalize(); }

  long long num() const { return n_; }
  long long den() const { return d_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = i128(a.n_) * b.d_ + i128(b.n_) * a.d_;
    __int128 d = i128(a.d_) * b.d_;
    return make(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = i128(a.n_) * b.d_ - i128(b.n_) * a.d_;
    __int128 d = i128(a.d_) * b.d_;
    return make(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.n_) * b.n_, i128(a.d_) * b.d_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.n_ == 0) throw std::domain_error("rational division by zero");
    return make(i128(a.n_) * b.d_, i128(a.d_) * b.n_);
  }
  Rational operator-() const { return Rational(-n_, d_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.n_ == b.n_ && a.d_ == b.d_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.n_) * b.d_ < i128(b.n_) * a.d_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(n_) / static_cast<double>(d_); }

  std::string str() const {
    if (d_ == 1) return std::to_string(n_);
    return std::to_string(n_) + "/" + std::to_string(d_);
  }

  // Accepts "p", "p/q" and exact decimals like "0.5" or "-3.25".
  static Rational parse(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    size_t slash = s.find('/');
    if (slash != std::string_view::npos) {
      long long n = parse_int(s.substr(0, slash));
      long long d = parse_int(s.substr(slash + 1));
      return Rational(n, d);
    }
    size_t dot = s.find('.');
    if (dot == std::string_view::npos) return Rational(parse_int(s));
    bool neg = s[0] == '-';
    std::string_view ip = s.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
    std::string_view fp = s.substr(dot + 1);
    if (fp.empty()) throw std::invalid_argument("malformed decimal literal");
    long long whole = ip.empty() ? 0 : parse_int(ip);
    long long frac = parse_int(fp);
    __int128 den = 1;
    for (size_t i = 0; i < fp.size(); ++i) {
      den *= 10;
      if (den > INT64_MAX) throw std::overflow_error("decimal literal too precise");
    }
    __int128 num = i128(whole) * den + frac;
    if (neg) num = -num;
    return make(num, den);
  }

 private:
  long long n_ = 0, d_ = 1;

  static __int128 i128(long long v) { return static_cast<__int128>(v); }

  static Rational make(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::overflow_error("rational overflow");
    Rational r;
    r.n_ = static_cast<long long>(n);
    r.d_ = static_cast<long long>(d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  static long long parse_int(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("malformed rational literal");
    bool neg = s[0] == '-';
    size_t i = neg ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("malformed rational literal");
    __int128 v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("malformed rational literal");
      v = v * 10 + (s[i] - '0');
      if (v > INT64_MAX) throw std::overflow_error("rational literal overflow");
    }
    return static_cast<long long>(neg ? -v : v);
  }

  void normalize() {
    if (d_ == 0) throw std::domain_error("zero denominator");
    if (d_ < 0) {
      if (n_ == INT64_MIN || d_ == INT64_MIN) throw std::overflow_error("rational overflow");
      n_ = -n_;
      d_ = -d_;
    }
    long long g = std::gcd(n_ < 0 ? -n_ : n_, d_);
    if (g > 1) {
      n_ /= g;
      d_ /= g;
    }
  }
};

}  // namespace rulebench
