/** @file jet.hpp
 *  Truncated Taylor series arithmetic for exact derivatives of smooth bumps.
 *  A Jet stores f(x0 + t) = sum_k c[k] t^k up to a fixed order.
 */
#pragma once

#include <cmath>
#include <vector>

namespace ttlab {

class Jet {
 public:
  Jet(int order, double value) : c_(order + 1, 0.0) { c_[0] = value; }
  /// The identity variable at x0.
  static Jet variable(int order, double x0) {
    Jet j(order, x0);
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double coeff(int k) const { return c_.at(k); }
  double& coeff(int k) { return c_.at(k); }
  double value() const { return c_[0]; }
  /// k-th derivative at x0.
  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c_.at(k) * f;
  }

  Jet operator+(const Jet& o) const {
    Jet r = *this;
    for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += o.c_[k];
    return r;
  }
  Jet operator-(const Jet& o) const {
    Jet r = *this;
    for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= o.c_[k];
    return r;
  }
  Jet operator-() const {
    Jet r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  Jet operator*(const Jet& o) const {
    Jet r(order(), 0.0);
    for (std::size_t a = 0; a < c_.size(); ++a)
      for (std::size_t b = 0; a + b < c_.size(); ++b) r.c_[a + b] += c_[a] * o.c_[b];
    return r;
  }
  Jet operator/(const Jet& o) const {
    Jet r(order(), 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) {
      double s = c_[k];
      for (std::size_t i = 1; i <= k; ++i) s -= o.c_[i] * r.c_[k - i];
      r.c_[k] = s / o.c_[0];
    }
    return r;
  }
  Jet operator+(double s) const {
    Jet r = *this;
    r.c_[0] += s;
    return r;
  }
  Jet operator-(double s) const { return *this + (-s); }
  Jet operator*(double s) const {
    Jet r = *this;
    for (auto& x : r.c_) x *= s;
    return r;
  }
  friend Jet operator*(double s, const Jet& j) { return j * s; }
  friend Jet operator+(double s, const Jet& j) { return j + s; }
  friend Jet operator-(double s, const Jet& j) { return (-j) + s; }
  friend Jet operator/(double s, const Jet& j) { return Jet(j.order(), s) / j; }

  friend Jet exp(const Jet& a) {
    Jet r(a.order(), std::exp(a.c_[0]));
    // r' = a' r
    for (std::size_t k = 1; k < a.c_.size(); ++k) {
      double s = 0;
      for (std::size_t i = 1; i <= k; ++i) s += static_cast<double>(i) * a.c_[i] * r.c_[k - i];
      r.c_[k] = s / static_cast<double>(k);
    }
    return r;
  }

 private:
  std::vector<double> c_;
};

}  // namespace ttlab
