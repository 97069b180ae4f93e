#pragma once

#include "liouville/flow.hpp"
#include "liouville/report.hpp"
#include "liouville/sampling.hpp"
#include "liouville/system.hpp"

namespace liouville {

// Sampling-based certification that a system is a time-dependent completely
// integrable system and that its autonomous lift behaves as expected. Every
// check is deterministic given (system, region, tolerance).

// max |{F_j, F_k}_V| over samples and pairs j < k.
VerifyReport check_involution(const TDSystem& sys, const SampleRegion& region,
                              double tol);

// max |d_t F_k + {H, F_k}_V| over samples and k.
VerifyReport check_first_integrals(const TDSystem& sys,
                                   const SampleRegion& region, double tol);

// Smallest singular value of the m x (2m+1) Jacobian of (F_1..F_m) in
// (t, q, p) must stay >= tol. Encoded so that the report invariant
// pass <=> max_residual <= tolerance still holds: max_residual is the
// deficit tol - sigma_min and the report tolerance is 0. The observed
// minimum and the near-critical sample fraction ride along as extras.
VerifyReport check_independence(const TDSystem& sys,
                                const SampleRegion& region, double tol);

// Componentwise |(dt,dq,dp) of gamma_t at h_r(x) - gamma_h at x|; expected
// zero to machine precision for any r.
VerifyReport check_projection(const TDSystem& sys, const SampleRegion& region,
                              double tol, double section_r = 0.0);

// max |F(x_i) - F(x_0)| along a trajectory.
VerifyReport check_conservation(const Trajectory& traj, const ScalarField& F,
                                double tol);

// Involution of the lifted system on T*Q: |{zeta*F_j, zeta*F_k}_T| over
// pairs plus |{H*, zeta*F_k}_T|, evaluated on the canonical section image.
VerifyReport check_lifted_involution(const TDSystem& sys,
                                     const SampleRegion& region, double tol);

// Smallest singular value of the integral Jacobian at one point.
double independence_sigma_min(const TDSystem& sys, const PhasePoint& x);

}  // namespace liouville
