#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "evmanifold/errors.hpp"

namespace evmanifold {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kE = 2.71828182845904523536028747135266250;
constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
constexpr double kSqrt2Pi = 2.50662827463100050241576528481104525;

inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

inline double log_norm_pdf(double z) { return -0.5 * z * z - std::log(kSqrt2Pi); }

// log Phi(z), stable into the deep left tail where erfc underflows (z < -38).
// There the standard Mills-ratio expansion takes over:
//   Phi(z) ~ phi(z)/|z| * (1 - 1/z^2 + 3/z^4 - 15/z^6).
inline double log_norm_cdf(double z) {
  if (z > -37.0) {
    const double c = norm_cdf(z);
    if (c > 0.0) return std::log(c);
  }
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return log_norm_pdf(z) - std::log(-z) + std::log(series);
}

inline double log_norm_sf(double z) { return log_norm_cdf(-z); }

inline double logit(double w) { return std::log(w) - std::log1p(-w); }

// Overflow-safe inverse logit.
inline double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(e^a + e^b) without overflow; tolerates -inf arguments.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Digamma by upward recurrence into the asymptotic region (x >= 8) and the
// standard Bernoulli-number tail.
inline double digamma(double x) {
  if (!(x > 0.0)) throw numeric_error("digamma requires x > 0");
  double result = 0.0;
  while (x < 8.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

// Trigamma, same recurrence/asymptotic split.
inline double trigamma(double x) {
  if (!(x > 0.0)) throw numeric_error("trigamma requires x > 0");
  double result = 0.0;
  while (x < 8.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
  return result;
}

inline double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method),
// valid for x < (a+1)/(a+b+2).
inline double beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 400; ++m) {
    const double m2 = 2.0 * m;
    // even step
    double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    f *= d * c;
    // odd step
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::fabs(delta - 1.0) < eps) return f;
  }
  throw numeric_error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a,b); relative accuracy ~1e-13.
inline double beta_inc(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw numeric_error("beta_inc requires a,b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - lbeta(a, b)) *
                   detail::beta_cf(1.0 - x, b, a) / b;
}

// Beta density at x in (0,1).
inline double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta(a, b));
}

}  // namespace evmanifold
