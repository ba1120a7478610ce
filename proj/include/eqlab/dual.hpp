#pragma once

#include <cmath>

#include <Eigen/Core>

namespace eqlab {

/// Forward-mode dual number carrying value, gradient and Hessian with respect
/// to N independent variables. Arithmetic propagates all three exactly, so a
/// function written generically over the scalar type yields its second-order
/// Taylor jet in a single evaluation.
///
/// Only the operations needed by the field models are provided: ring
/// operations, reciprocal, square root and integer powers.
template <int N>
class Dual2 {
 public:
  using Gradient = Eigen::Matrix<double, N, 1>;
  using Hessian = Eigen::Matrix<double, N, N>;

  Dual2() : value_(0.0), grad_(Gradient::Zero()), hess_(Hessian::Zero()) {}
  Dual2(double v)  // NOLINT(google-explicit-constructor): constants mix freely
      : value_(v), grad_(Gradient::Zero()), hess_(Hessian::Zero()) {}
  Dual2(double v, const Gradient& g, const Hessian& h)
      : value_(v), grad_(g), hess_(h) {}

  /// The i-th independent variable evaluated at v.
  static Dual2 variable(int i, double v) {
    Dual2 d(v);
    d.grad_(i) = 1.0;
    return d;
  }

  double value() const { return value_; }
  const Gradient& gradient() const { return grad_; }
  const Hessian& hessian() const { return hess_; }

  /// Chain rule for a scalar function f with f(value), f', f'' supplied.
  Dual2 compose(double f, double df, double d2f) const {
    return Dual2(f, df * grad_, df * hess_ + d2f * (grad_ * grad_.transpose()));
  }

  Dual2& operator+=(const Dual2& o) {
    value_ += o.value_;
    grad_ += o.grad_;
    hess_ += o.hess_;
    return *this;
  }
  Dual2& operator-=(const Dual2& o) {
    value_ -= o.value_;
    grad_ -= o.grad_;
    hess_ -= o.hess_;
    return *this;
  }
  Dual2& operator*=(const Dual2& o) {
    hess_ = hess_ * o.value_ + o.hess_ * value_ + grad_ * o.grad_.transpose() +
            o.grad_ * grad_.transpose();
    grad_ = grad_ * o.value_ + o.grad_ * value_;
    value_ *= o.value_;
    return *this;
  }
  Dual2& operator*=(double s) {
    value_ *= s;
    grad_ *= s;
    hess_ *= s;
    return *this;
  }
  Dual2& operator/=(const Dual2& o) { return *this *= reciprocal(o); }

  Dual2 operator-() const { return Dual2(-value_, -grad_, -hess_); }

  friend Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
  friend Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
  friend Dual2 operator*(Dual2 a, const Dual2& b) { return a *= b; }
  friend Dual2 operator*(Dual2 a, double s) { return a *= s; }
  friend Dual2 operator*(double s, Dual2 a) { return a *= s; }
  friend Dual2 operator/(Dual2 a, const Dual2& b) { return a /= b; }

  friend Dual2 reciprocal(const Dual2& a) {
    const double inv = 1.0 / a.value_;
    return a.compose(inv, -inv * inv, 2.0 * inv * inv * inv);
  }
  friend Dual2 sqrt(const Dual2& a) {
    const double s = std::sqrt(a.value_);
    return a.compose(s, 0.5 / s, -0.25 / (s * a.value_));
  }
  friend Dual2 pow(const Dual2& a, int n) {
    if (n == 0) return Dual2(1.0);
    const double pm2 = n >= 2 ? std::pow(a.value_, n - 2) : std::pow(a.value_, double(n - 2));
    const double pm1 = pm2 * a.value_;
    return a.compose(pm1 * a.value_, n * pm1, double(n) * (n - 1) * pm2);
  }

 private:
  double value_;
  Gradient grad_;
  Hessian hess_;
};

}  // namespace eqlab
