#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "liouville/dual.hpp"
#include "liouville/errors.hpp"
#include "liouville/phase.hpp"

namespace liouville {

// First partials of a scalar field. dp0 is identically zero for vertical
// fields (functions on V*Q).
struct Gradient {
  double dt = 0.0;
  VectorXd dq;
  VectorXd dp;
  double dp0 = 0.0;
};

enum class Arity { vertical, extended };

// A smooth real function on V*Q or T*Q, evaluable together with exact first
// partials. Derivatives are analytic closures or forward-mode dual numbers,
// never internal finite differences: bracket residuals must distinguish
// structural zeros from discretization noise.
class ScalarField {
 public:
  using EvalFn = std::function<double(const ExtendedPoint&)>;
  using GradFn = std::function<Gradient(const ExtendedPoint&)>;

  ScalarField() = default;

  static ScalarField vertical(int m, EvalFn eval, GradFn grad) {
    return ScalarField(Arity::vertical, m, std::move(eval), std::move(grad));
  }
  static ScalarField extended(int m, EvalFn eval, GradFn grad) {
    return ScalarField(Arity::extended, m, std::move(eval), std::move(grad));
  }

  Arity arity() const { return arity_; }
  int dim() const { return m_; }
  bool valid() const { return static_cast<bool>(eval_); }

  double operator()(const PhasePoint& x) const {
    check_point(x.dim(), "ScalarField::eval");
    if (arity_ == Arity::extended)
      throw DimensionError("ScalarField: extended field needs p0");
    return eval_(extend(x, 0.0));
  }
  // Vertical fields evaluated on T*Q act as their zeta-pullback.
  double operator()(const ExtendedPoint& x) const {
    check_point(x.dim(), "ScalarField::eval");
    return eval_(x);
  }

  Gradient gradient(const PhasePoint& x) const {
    check_point(x.dim(), "ScalarField::gradient");
    if (arity_ == Arity::extended)
      throw DimensionError("ScalarField: extended field needs p0");
    return grad_(extend(x, 0.0));
  }
  Gradient gradient(const ExtendedPoint& x) const {
    check_point(x.dim(), "ScalarField::gradient");
    return grad_(x);
  }

 private:
  ScalarField(Arity a, int m, EvalFn e, GradFn g)
      : arity_(a), m_(m), eval_(std::move(e)), grad_(std::move(g)) {}

  void check_point(int n, const char* where) const {
    if (!eval_) throw Error(std::string(where) + ": empty field");
    if (n != m_)
      throw DimensionError(std::string(where) + ": point dimension " +
                           std::to_string(n) + " != field dimension " +
                           std::to_string(m_));
  }

  Arity arity_ = Arity::vertical;
  int m_ = 0;
  EvalFn eval_;
  GradFn grad_;
};

// zeta^* f: view a vertical field as a field on T*Q. Shares the underlying
// closures, so bracket compatibility holds on the same arithmetic path.
inline ScalarField pullback(const ScalarField& f) {
  if (f.arity() == Arity::extended) return f;
  return ScalarField::extended(
      f.dim(), [f](const ExtendedPoint& x) { return f(x); },
      [f](const ExtendedPoint& x) { return f.gradient(x); });
}

inline ScalarField constant_field(int m, double c, Arity a = Arity::vertical) {
  auto eval = [c](const ExtendedPoint&) { return c; };
  auto grad = [m](const ExtendedPoint&) {
    return Gradient{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
  };
  return a == Arity::vertical ? ScalarField::vertical(m, eval, grad)
                              : ScalarField::extended(m, eval, grad);
}

inline ScalarField coord_t(int m, Arity a = Arity::vertical) {
  auto eval = [](const ExtendedPoint& x) { return x.t; };
  auto grad = [m](const ExtendedPoint&) {
    return Gradient{1.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
  };
  return a == Arity::vertical ? ScalarField::vertical(m, eval, grad)
                              : ScalarField::extended(m, eval, grad);
}

inline ScalarField coord_q(int m, int k, Arity a = Arity::vertical) {
  auto eval = [k](const ExtendedPoint& x) { return x.q[k]; };
  auto grad = [m, k](const ExtendedPoint&) {
    Gradient g{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
    g.dq[k] = 1.0;
    return g;
  };
  return a == Arity::vertical ? ScalarField::vertical(m, eval, grad)
                              : ScalarField::extended(m, eval, grad);
}

inline ScalarField coord_p(int m, int k, Arity a = Arity::vertical) {
  auto eval = [k](const ExtendedPoint& x) { return x.p[k]; };
  auto grad = [m, k](const ExtendedPoint&) {
    Gradient g{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
    g.dp[k] = 1.0;
    return g;
  };
  return a == Arity::vertical ? ScalarField::vertical(m, eval, grad)
                              : ScalarField::extended(m, eval, grad);
}

inline ScalarField coord_p0(int m) {
  auto eval = [](const ExtendedPoint& x) { return x.p0; };
  auto grad = [m](const ExtendedPoint&) {
    return Gradient{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 1.0};
  };
  return ScalarField::extended(m, eval, grad);
}

namespace detail {

inline void check_compatible(const ScalarField& f, const ScalarField& g,
                             const char* op) {
  if (!f.valid() || !g.valid())
    throw Error(std::string("field ") + op + ": empty operand");
  if (f.dim() != g.dim())
    throw DimensionError(std::string("field ") + op + ": dimension mismatch");
  if (f.arity() != g.arity())
    throw DimensionError(std::string("field ") + op + ": arity mismatch");
}

inline ScalarField make_like(const ScalarField& f, ScalarField::EvalFn e,
                             ScalarField::GradFn g) {
  return f.arity() == Arity::vertical
             ? ScalarField::vertical(f.dim(), std::move(e), std::move(g))
             : ScalarField::extended(f.dim(), std::move(e), std::move(g));
}

}  // namespace detail

// Pointwise field algebra with exact gradient propagation.

inline ScalarField operator+(const ScalarField& f, const ScalarField& g) {
  detail::check_compatible(f, g, "+");
  return detail::make_like(
      f, [f, g](const ExtendedPoint& x) { return f(x) + g(x); },
      [f, g](const ExtendedPoint& x) {
        Gradient a = f.gradient(x), b = g.gradient(x);
        return Gradient{a.dt + b.dt, a.dq + b.dq, a.dp + b.dp, a.dp0 + b.dp0};
      });
}

inline ScalarField operator-(const ScalarField& f, const ScalarField& g) {
  detail::check_compatible(f, g, "-");
  return detail::make_like(
      f, [f, g](const ExtendedPoint& x) { return f(x) - g(x); },
      [f, g](const ExtendedPoint& x) {
        Gradient a = f.gradient(x), b = g.gradient(x);
        return Gradient{a.dt - b.dt, a.dq - b.dq, a.dp - b.dp, a.dp0 - b.dp0};
      });
}

inline ScalarField operator*(const ScalarField& f, const ScalarField& g) {
  detail::check_compatible(f, g, "*");
  return detail::make_like(
      f, [f, g](const ExtendedPoint& x) { return f(x) * g(x); },
      [f, g](const ExtendedPoint& x) {
        const double fv = f(x), gv = g(x);
        Gradient a = f.gradient(x), b = g.gradient(x);
        return Gradient{a.dt * gv + b.dt * fv, a.dq * gv + b.dq * fv,
                        a.dp * gv + b.dp * fv, a.dp0 * gv + b.dp0 * fv};
      });
}

inline ScalarField operator*(double c, const ScalarField& f) {
  return detail::make_like(
      f, [f, c](const ExtendedPoint& x) { return c * f(x); },
      [f, c](const ExtendedPoint& x) {
        Gradient a = f.gradient(x);
        return Gradient{c * a.dt, c * a.dq, c * a.dp, c * a.dp0};
      });
}

inline ScalarField operator*(const ScalarField& f, double c) { return c * f; }

inline ScalarField operator+(const ScalarField& f, double c) {
  return detail::make_like(
      f, [f, c](const ExtendedPoint& x) { return f(x) + c; },
      [f](const ExtendedPoint& x) { return f.gradient(x); });
}

inline ScalarField operator+(double c, const ScalarField& f) { return f + c; }
inline ScalarField operator-(const ScalarField& f, double c) {
  return f + (-c);
}

// Generic construction from a scalar-templated functor. F must be callable as
// F(S t, const VectorX<S>& q, const VectorX<S>& p) -> S with S = double and
// S = Dual; the dual instantiation yields exact partials in one pass.
template <typename F>
ScalarField make_vertical_field(int m, F f) {
  auto eval = [f](const ExtendedPoint& x) -> double {
    return f(x.t, x.q, x.p);
  };
  auto grad = [f, m](const ExtendedPoint& x) -> Gradient {
    const int n = 2 * m + 1;
    Dual t = Dual::seeded(x.t, n, 0);
    VectorX<Dual> q(m), p(m);
    for (int k = 0; k < m; ++k) {
      q[k] = Dual::seeded(x.q[k], n, 1 + k);
      p[k] = Dual::seeded(x.p[k], n, 1 + m + k);
    }
    Dual r = f(t, q, p);
    Gradient g{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
    if (r.v.size() == 0) return g;
    g.dt = r.v[0];
    g.dq = r.v.segment(1, m);
    g.dp = r.v.segment(1 + m, m);
    return g;
  };
  return ScalarField::vertical(m, std::move(eval), std::move(grad));
}

// Extended variant: F(S t, const VectorX<S>& q, S p0, const VectorX<S>& p).
template <typename F>
ScalarField make_extended_field(int m, F f) {
  auto eval = [f](const ExtendedPoint& x) -> double {
    return f(x.t, x.q, x.p0, x.p);
  };
  auto grad = [f, m](const ExtendedPoint& x) -> Gradient {
    const int n = 2 * m + 2;
    Dual t = Dual::seeded(x.t, n, 0);
    Dual p0 = Dual::seeded(x.p0, n, 1 + 2 * m);
    VectorX<Dual> q(m), p(m);
    for (int k = 0; k < m; ++k) {
      q[k] = Dual::seeded(x.q[k], n, 1 + k);
      p[k] = Dual::seeded(x.p[k], n, 1 + m + k);
    }
    Dual r = f(t, q, p0, p);
    Gradient g{0.0, VectorXd::Zero(m), VectorXd::Zero(m), 0.0};
    if (r.v.size() == 0) return g;
    g.dt = r.v[0];
    g.dq = r.v.segment(1, m);
    g.dp = r.v.segment(1 + m, m);
    g.dp0 = r.v[1 + 2 * m];
    return g;
  };
  return ScalarField::extended(m, std::move(eval), std::move(grad));
}

}  // namespace liouville
