#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace billnet {

struct RealRoot {
  double value;
  int multiplicity;
};

/// Dense real polynomial, coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) {
    if (c_.empty()) c_.push_back(0.0);
  }

  static Polynomial constant(double c) { return Polynomial({c}); }
  /// a - x
  static Polynomial shifted_negation(double a) { return Polynomial({a, -1.0}); }

  const std::vector<double>& coefficients() const { return c_; }

  int degree() const {
    const double scale = max_abs_coefficient();
    for (int k = static_cast<int>(c_.size()) - 1; k > 0; --k) {
      if (std::abs(c_[k]) > 1e-14 * scale) return k;
    }
    return 0;
  }

  double max_abs_coefficient() const {
    double s = 0.0;
    for (double c : c_) s = std::max(s, std::abs(c));
    return s;
  }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  Polynomial operator+(const Polynomial& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (std::size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
    return Polynomial(std::move(r));
  }

  Polynomial operator*(double s) const {
    std::vector<double> r = c_;
    for (double& x : r) x *= s;
    return Polynomial(std::move(r));
  }

  Polynomial operator*(const Polynomial& o) const {
    std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    }
    return Polynomial(std::move(r));
  }

  /// Real roots with multiplicities, ascending. Closed form up to degree 3,
  /// companion-matrix eigenvalues above; every root is Newton-polished.
  std::vector<RealRoot> real_roots(double merge_tol = 1e-7) const;

 private:
  std::vector<double> c_;
};

namespace detail {

inline double polish_root(const Polynomial& p, const Polynomial& dp, double x) {
  for (int it = 0; it < 4; ++it) {
    const double f = p(x);
    const double df = dp(x);
    if (df == 0.0 || !std::isfinite(df)) break;
    const double step = f / df;
    const double nx = x - step;
    if (std::abs(p(nx)) >= std::abs(f)) break;
    x = nx;
  }
  return x;
}

inline std::vector<double> quadratic_roots(double a, double b, double c, bool& repeated) {
  repeated = false;
  const double disc = b * b - 4.0 * a * c;
  const double scale = b * b + 4.0 * std::abs(a * c);
  if (std::abs(disc) <= 1e-12 * scale) {
    repeated = true;
    return {-b / (2.0 * a)};
  }
  if (disc < 0.0) return {};
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q == 0.0) return {0.0, 0.0};
  return {q / a, c / q};
}

/// Roots of x^3 + a x^2 + b x + c; repeated roots are listed repeatedly.
inline std::vector<double> monic_cubic_roots(double a, double b, double c) {
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double half_q = q / 2.0;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  const double scale = half_q * half_q + std::abs(third_p * third_p * third_p);
  std::vector<double> t;
  if (scale == 0.0) {
    t = {0.0, 0.0, 0.0};
  } else if (std::abs(disc) <= 1e-12 * scale) {
    if (std::abs(p) < 1e-300) {
      t = {0.0, 0.0, 0.0};
    } else {
      t = {3.0 * q / p, -1.5 * q / p, -1.5 * q / p};
    }
  } else if (disc < 0.0) {
    const double r = 2.0 * std::sqrt(-third_p);
    const double arg = std::clamp(half_q / (third_p * std::sqrt(-third_p)), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) t.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0));
  } else {
    const double s = std::sqrt(disc);
    t = {std::cbrt(-half_q + s) + std::cbrt(-half_q - s)};
  }
  for (double& x : t) x -= shift;
  return t;
}

}  // namespace detail

inline std::vector<RealRoot> Polynomial::real_roots(double merge_tol) const {
  const int deg = degree();
  std::vector<double> raw;
  bool repeated = false;
  if (deg == 1) {
    raw = {-c_[0] / c_[1]};
  } else if (deg == 2) {
    raw = detail::quadratic_roots(c_[2], c_[1], c_[0], repeated);
    if (repeated) raw.push_back(raw.front());
  } else if (deg == 3) {
    raw = detail::monic_cubic_roots(c_[2] / c_[3], c_[1] / c_[3], c_[0] / c_[3]);
  } else if (deg > 3) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c_[i] / c_[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (int i = 0; i < deg; ++i) {
      const auto z = es.eigenvalues()[i];
      if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z.real()))) raw.push_back(z.real());
    }
  }
  const Polynomial dp = derivative();
  for (double& x : raw) x = detail::polish_root(*this, dp, x);
  std::sort(raw.begin(), raw.end());

  std::vector<RealRoot> out;
  for (double x : raw) {
    if (!out.empty() && std::abs(x - out.back().value) <= merge_tol * std::max(1.0, std::abs(x))) {
      auto& last = out.back();
      last.value = (last.value * last.multiplicity + x) / (last.multiplicity + 1);
      ++last.multiplicity;
    } else {
      out.push_back({x, 1});
    }
  }
  return out;
}

}  // namespace billnet
