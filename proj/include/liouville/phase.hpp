#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "liouville/errors.hpp"

namespace liouville {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::VectorXd;

// Point of the momentum phase space: (t, q^1..q^m, p_1..p_m).
// Values are immutable by convention; operations never mutate their inputs.
struct PhasePoint {
  double t = 0.0;
  VectorXd q;
  VectorXd p;

  PhasePoint() = default;
  PhasePoint(double t_, VectorXd q_, VectorXd p_)
      : t(t_), q(std::move(q_)), p(std::move(p_)) {}
  // 1-DOF convenience.
  PhasePoint(double t_, double q_, double p_)
      : t(t_), q(VectorXd::Constant(1, q_)), p(VectorXd::Constant(1, p_)) {}

  int dim() const { return static_cast<int>(q.size()); }
};

// Point of the homogeneous phase space: (t, q, p0, p), p0 conjugate to time.
struct ExtendedPoint {
  double t = 0.0;
  VectorXd q;
  double p0 = 0.0;
  VectorXd p;

  ExtendedPoint() = default;
  ExtendedPoint(double t_, VectorXd q_, double p0_, VectorXd p_)
      : t(t_), q(std::move(q_)), p0(p0_), p(std::move(p_)) {}
  ExtendedPoint(double t_, double q_, double p0_, double p_)
      : t(t_),
        q(VectorXd::Constant(1, q_)),
        p0(p0_),
        p(VectorXd::Constant(1, p_)) {}

  int dim() const { return static_cast<int>(q.size()); }
};

// Bundle projection zeta: T*Q -> V*Q (drop p0).
inline PhasePoint project(const ExtendedPoint& x) {
  return PhasePoint(x.t, x.q, x.p);
}

inline ExtendedPoint extend(const PhasePoint& x, double p0) {
  return ExtendedPoint(x.t, x.q, p0, x.p);
}

// Evolution direction on V*Q; dt == 1 for evolution fields.
struct TangentVector {
  double dt = 1.0;
  VectorXd dq;
  VectorXd dp;
};

// Evolution direction on T*Q; adds the p0 component.
struct ExtendedTangent {
  double dt = 1.0;
  VectorXd dq;
  VectorXd dp;
  double dp0 = 0.0;
};

inline bool all_finite(const VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

inline bool is_finite(const PhasePoint& x) {
  return std::isfinite(x.t) && all_finite(x.q) && all_finite(x.p);
}

inline bool is_finite(const ExtendedPoint& x) {
  return std::isfinite(x.t) && std::isfinite(x.p0) && all_finite(x.q) &&
         all_finite(x.p);
}

inline void require_finite(const PhasePoint& x, const char* where) {
  if (x.dim() < 1) throw DimensionError(std::string(where) + ": empty point");
  if (x.q.size() != x.p.size())
    throw DimensionError(std::string(where) + ": q/p length mismatch");
  if (!is_finite(x))
    throw NumericError(std::string(where) + ": non-finite point");
}

inline void require_finite(const ExtendedPoint& x, const char* where) {
  if (x.dim() < 1) throw DimensionError(std::string(where) + ": empty point");
  if (x.q.size() != x.p.size())
    throw DimensionError(std::string(where) + ": q/p length mismatch");
  if (!is_finite(x))
    throw NumericError(std::string(where) + ": non-finite point");
}

inline constexpr double two_pi() { return 6.283185307179586476925286766559; }

// Wrap to [0, 2*pi).
inline double wrap_angle(double a) {
  double w = a - two_pi() * std::floor(a / two_pi());
  if (w >= two_pi()) w -= two_pi();
  if (w < 0.0) w += two_pi();
  return w;
}

// Signed circular difference in (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = wrap_angle(a - b);
  if (d > two_pi() / 2.0) d -= two_pi();
  return d;
}

}  // namespace liouville
