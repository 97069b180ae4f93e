#pragma once

#include "liouville/field.hpp"
#include "liouville/phase.hpp"

namespace liouville {

// Sign convention, fixed once for the whole library:
//
//   {f, f'}_V = d^k f d_k f' - d_k f d^k f',   d^k = d/dp_k, d_k = d/dq^k
//
// so {p_1, q^1}_V = +1. Many texts use the opposite sign; every bracket,
// angle orientation and canonicity check here follows this one.

namespace detail {
inline double vertical_part(const Gradient& a, const Gradient& b) {
  return a.dp.dot(b.dq) - a.dq.dot(b.dp);
}
}  // namespace detail

// Canonical Poisson bracket on the momentum phase space V*Q.
inline double poisson_v(const ScalarField& f, const ScalarField& g,
                        const PhasePoint& x) {
  if (f.arity() != Arity::vertical || g.arity() != Arity::vertical)
    throw DimensionError("poisson_v: both fields must be vertical");
  if (f.dim() != x.dim() || g.dim() != x.dim())
    throw DimensionError("poisson_v: dimension mismatch");
  require_finite(x, "poisson_v");
  const Gradient a = f.gradient(x);
  const Gradient b = g.gradient(x);
  const double r = detail::vertical_part(a, b);
  if (!std::isfinite(r)) throw NumericError("poisson_v: non-finite gradient");
  return r;
}

// Symplectic Poisson bracket on T*Q; the lambda = 0 pair is (t, p0).
// For p0-independent fields this reduces to poisson_v of the projections on
// the identical arithmetic path, so the compatibility identity is exact.
inline double poisson_t(const ScalarField& f, const ScalarField& g,
                        const ExtendedPoint& x) {
  if (f.arity() != Arity::extended || g.arity() != Arity::extended)
    throw DimensionError("poisson_t: both fields must be extended");
  if (f.dim() != x.dim() || g.dim() != x.dim())
    throw DimensionError("poisson_t: dimension mismatch");
  require_finite(x, "poisson_t");
  const Gradient a = f.gradient(x);
  const Gradient b = g.gradient(x);
  const double r =
      detail::vertical_part(a, b) + (a.dp0 * b.dt - a.dt * b.dp0);
  if (!std::isfinite(r)) throw NumericError("poisson_t: non-finite gradient");
  return r;
}

}  // namespace liouville
