#pragma once

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <ostream>

namespace liouville {

// Forward-mode dual number carrying a full gradient vector. An empty
// derivative vector means "constant" (zero gradient of any length), which is
// what Eigen's value-initialized temporaries produce.
class Dual {
 public:
  double a = 0.0;
  Eigen::VectorXd v;

  Dual() = default;
  Dual(double value) : a(value) {}  // NOLINT: implicit by design
  Dual(double value, Eigen::VectorXd grad) : a(value), v(std::move(grad)) {}

  static Dual seeded(double value, int n, int slot) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    g[slot] = 1.0;
    return Dual(value, std::move(g));
  }

  double value() const { return a; }
  const Eigen::VectorXd& grad() const { return v; }

  Dual& operator+=(const Dual& r) {
    a += r.a;
    add_scaled(r.v, 1.0);
    return *this;
  }
  Dual& operator-=(const Dual& r) {
    a -= r.a;
    add_scaled(r.v, -1.0);
    return *this;
  }
  Dual& operator*=(const Dual& r) {
    // product rule; scale own gradient first, then fold in r's
    if (v.size() > 0) v *= r.a;
    add_scaled(r.v, a);
    a *= r.a;
    return *this;
  }
  Dual& operator/=(const Dual& r) {
    const double inv = 1.0 / r.a;
    a *= inv;
    if (v.size() > 0) v *= inv;
    add_scaled(r.v, -a * inv);
    return *this;
  }

  Dual& operator+=(double r) {
    a += r;
    return *this;
  }
  Dual& operator-=(double r) {
    a -= r;
    return *this;
  }
  Dual& operator*=(double r) {
    a *= r;
    if (v.size() > 0) v *= r;
    return *this;
  }
  Dual& operator/=(double r) { return *this *= 1.0 / r; }

 private:
  void add_scaled(const Eigen::VectorXd& g, double s) {
    if (g.size() == 0) return;
    if (v.size() == 0) {
      v = s * g;
      return;
    }
    assert(v.size() == g.size());
    v += s * g;
  }
};

inline Dual operator+(Dual l, const Dual& r) { return l += r; }
inline Dual operator-(Dual l, const Dual& r) { return l -= r; }
inline Dual operator*(Dual l, const Dual& r) { return l *= r; }
inline Dual operator/(Dual l, const Dual& r) { return l /= r; }

inline Dual operator+(Dual l, double r) { return l += r; }
inline Dual operator-(Dual l, double r) { return l -= r; }
inline Dual operator*(Dual l, double r) { return l *= r; }
inline Dual operator/(Dual l, double r) { return l /= r; }
inline Dual operator+(double l, Dual r) { return r += l; }
inline Dual operator*(double l, Dual r) { return r *= l; }
inline Dual operator-(double l, const Dual& r) {
  Dual out(l - r.a);
  if (r.v.size() > 0) out.v = -r.v;
  return out;
}
inline Dual operator/(double l, const Dual& r) { return Dual(l) / r; }

inline Dual operator-(const Dual& x) {
  Dual out(-x.a);
  if (x.v.size() > 0) out.v = -x.v;
  return out;
}
inline Dual operator+(const Dual& x) { return x; }

inline bool operator==(const Dual& l, const Dual& r) { return l.a == r.a; }
inline bool operator!=(const Dual& l, const Dual& r) { return l.a != r.a; }
inline bool operator<(const Dual& l, const Dual& r) { return l.a < r.a; }
inline bool operator>(const Dual& l, const Dual& r) { return l.a > r.a; }
inline bool operator<=(const Dual& l, const Dual& r) { return l.a <= r.a; }
inline bool operator>=(const Dual& l, const Dual& r) { return l.a >= r.a; }

namespace detail {
inline Dual chain(double f, double df, const Dual& x) {
  Dual out(f);
  if (x.v.size() > 0) out.v = df * x.v;
  return out;
}
}  // namespace detail

inline Dual sin(const Dual& x) {
  return detail::chain(std::sin(x.a), std::cos(x.a), x);
}
inline Dual cos(const Dual& x) {
  return detail::chain(std::cos(x.a), -std::sin(x.a), x);
}
inline Dual exp(const Dual& x) {
  const double e = std::exp(x.a);
  return detail::chain(e, e, x);
}
inline Dual log(const Dual& x) {
  return detail::chain(std::log(x.a), 1.0 / x.a, x);
}
inline Dual sqrt(const Dual& x) {
  const double r = std::sqrt(x.a);
  return detail::chain(r, 0.5 / r, x);
}
inline Dual pow(const Dual& x, double e) {
  return detail::chain(std::pow(x.a, e), e * std::pow(x.a, e - 1.0), x);
}
inline Dual pow(const Dual& x, int e) { return pow(x, double(e)); }
inline Dual abs(const Dual& x) {
  return detail::chain(std::abs(x.a), x.a >= 0.0 ? 1.0 : -1.0, x);
}

inline bool isfinite(const Dual& x) {
  if (!std::isfinite(x.a)) return false;
  for (Eigen::Index i = 0; i < x.v.size(); ++i)
    if (!std::isfinite(x.v[i])) return false;
  return true;
}

inline std::ostream& operator<<(std::ostream& os, const Dual& x) {
  os << x.a << "+eps*[";
  for (Eigen::Index i = 0; i < x.v.size(); ++i)
    os << (i ? "," : "") << x.v[i];
  return os << "]";
}

}  // namespace liouville

namespace Eigen {

template <>
struct NumTraits<liouville::Dual> : NumTraits<double> {
  using Real = liouville::Dual;
  using NonInteger = liouville::Dual;
  using Nested = liouville::Dual;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 4,
    MulCost = 8,
  };
};

}  // namespace Eigen
