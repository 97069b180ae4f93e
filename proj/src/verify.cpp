#include "liouville/verify.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "liouville/bracket.hpp"

namespace liouville {

namespace {

struct MaxTracker {
  double value = -1.0;
  PhasePoint at;

  // Strict > keeps the lowest sample index on ties.
  void update(double r, const PhasePoint& x) {
    if (r > value) {
      value = r;
      at = x;
    }
  }
};

VerifyReport finish(std::string name, const SampleRegion& region,
                    const MaxTracker& worst, double tol) {
  VerifyReport rep;
  rep.check_name = std::move(name);
  rep.max_residual = worst.value < 0.0 ? 0.0 : worst.value;
  rep.worst_point = worst.at;
  rep.tolerance = tol;
  rep.samples = region.count;
  rep.seed = region.seed;
  rep.pass = rep.max_residual <= tol;
  return rep;
}

}  // namespace

VerifyReport check_involution(const TDSystem& sys, const SampleRegion& region,
                              double tol) {
  require_system(sys, "check_involution");
  RegionSampler sampler(region);
  MaxTracker worst;
  for (int i = 0; i < region.count; ++i) {
    const PhasePoint x = sampler.next();
    double r = 0.0;
    for (int j = 0; j < sys.m; ++j)
      for (int k = j + 1; k < sys.m; ++k)
        r = std::max(r,
                     std::abs(poisson_v(sys.integrals[j], sys.integrals[k], x)));
    worst.update(r, x);
  }
  return finish("involution", region, worst, tol);
}

VerifyReport check_first_integrals(const TDSystem& sys,
                                   const SampleRegion& region, double tol) {
  require_system(sys, "check_first_integrals");
  RegionSampler sampler(region);
  MaxTracker worst;
  for (int i = 0; i < region.count; ++i) {
    const PhasePoint x = sampler.next();
    double r = 0.0;
    for (int k = 0; k < sys.m; ++k) {
      const double dt = sys.integrals[k].gradient(x).dt;
      r = std::max(r,
                   std::abs(dt + poisson_v(sys.hamiltonian, sys.integrals[k], x)));
    }
    worst.update(r, x);
  }
  return finish("first_integrals", region, worst, tol);
}

double independence_sigma_min(const TDSystem& sys, const PhasePoint& x) {
  const int m = sys.m;
  Eigen::MatrixXd jac(m, 2 * m + 1);
  for (int k = 0; k < m; ++k) {
    const Gradient g = sys.integrals[k].gradient(x);
    jac(k, 0) = g.dt;
    jac.row(k).segment(1, m) = g.dq.transpose();
    jac.row(k).segment(1 + m, m) = g.dp.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  return svd.singularValues().minCoeff();
}

VerifyReport check_independence(const TDSystem& sys,
                                const SampleRegion& region, double tol) {
  require_system(sys, "check_independence");
  RegionSampler sampler(region);
  MaxTracker worst;
  double sigma_min = std::numeric_limits<double>::infinity();
  int near_critical = 0;
  for (int i = 0; i < region.count; ++i) {
    const PhasePoint x = sampler.next();
    const double sigma = independence_sigma_min(sys, x);
    sigma_min = std::min(sigma_min, sigma);
    if (sigma < tol) ++near_critical;
    worst.update(tol - sigma, x);
  }
  VerifyReport rep = finish("independence", region, worst, 0.0);
  rep.extra.emplace_back("min_singular_value", sigma_min);
  rep.extra.emplace_back("required_min", tol);
  rep.extra.emplace_back("near_critical_fraction",
                         double(near_critical) / double(region.count));
  return rep;
}

VerifyReport check_projection(const TDSystem& sys, const SampleRegion& region,
                              double tol, double section_r) {
  require_system(sys, "check_projection");
  RegionSampler sampler(region);
  MaxTracker worst;
  for (int i = 0; i < region.count; ++i) {
    const PhasePoint x = sampler.next();
    const TangentVector v = gamma_h(sys, x);
    const ExtendedTangent w = gamma_t(sys, section_h_r(sys, section_r, x));
    double r = std::abs(v.dt - w.dt);
    r = std::max(r, (v.dq - w.dq).cwiseAbs().maxCoeff());
    r = std::max(r, (v.dp - w.dp).cwiseAbs().maxCoeff());
    worst.update(r, x);
  }
  return finish("projection", region, worst, tol);
}

VerifyReport check_conservation(const Trajectory& traj, const ScalarField& F,
                                double tol) {
  if (traj.points.empty())
    throw DimensionError("check_conservation: empty trajectory");
  const double f0 = F(traj.points.front());
  MaxTracker worst;
  for (const PhasePoint& x : traj.points)
    worst.update(std::abs(F(x) - f0), x);
  VerifyReport rep;
  rep.check_name = "conservation";
  rep.max_residual = worst.value;
  rep.worst_point = worst.at;
  rep.tolerance = tol;
  rep.samples = static_cast<int>(traj.points.size());
  rep.pass = rep.max_residual <= tol;
  rep.extra.emplace_back("reference_value", f0);
  return rep;
}

VerifyReport check_lifted_involution(const TDSystem& sys,
                                     const SampleRegion& region, double tol) {
  require_system(sys, "check_lifted_involution");
  const ScalarField h_star = lift_hamiltonian(sys);
  std::vector<ScalarField> lifted;
  lifted.reserve(sys.m);
  for (const ScalarField& f : sys.integrals) lifted.push_back(pullback(f));

  RegionSampler sampler(region);
  MaxTracker worst;
  for (int i = 0; i < region.count; ++i) {
    const PhasePoint x = sampler.next();
    const ExtendedPoint X = section_h_r(sys, 0.0, x);
    double r = 0.0;
    for (int j = 0; j < sys.m; ++j) {
      for (int k = j + 1; k < sys.m; ++k)
        r = std::max(r, std::abs(poisson_t(lifted[j], lifted[k], X)));
      r = std::max(r, std::abs(poisson_t(h_star, lifted[j], X)));
    }
    worst.update(r, x);
  }
  return finish("lifted_involution", region, worst, tol);
}

}  // namespace liouville
