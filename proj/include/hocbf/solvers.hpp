#ifndef HOCBF_SOLVERS_HPP
#define HOCBF_SOLVERS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hocbf/classk.hpp"
#include "hocbf/errors.hpp"
#include "hocbf/qp_types.hpp"
#include "hocbf/tissf.hpp"

namespace hocbf {

// =========================================================================
// Closed-form pointwise controllers.
//
// All of them are exact KKT solutions of tiny QPs, written out branch by
// branch.  The min-norm controller walks the active sets in the fixed
// order {}, {hard}, {soft}, {soft,hard} and returns the first candidate
// that is primal and dual feasible; for a strictly convex QP that is the
// unique optimum, and on degenerate boundaries (a multiplier crossing
// zero) it yields the smaller active set, matching the enumeration
// oracle's tie-break.
// =========================================================================

namespace solver_detail {

// Feasibility gates use the same tolerances as the enumeration oracle,
// scaled by the data magnitude so that robustified rows with huge margins
// do not trip pure-rounding rejections.
constexpr double kPrimalTol = 1e-10;
constexpr double kDualTol = 1e-12;

inline double scale_of(const ConstraintRow& clf, const ConstraintRow& cbf) {
  return std::max({1.0, std::fabs(clf.gamma), std::fabs(cbf.gamma)});
}

}  // namespace solver_detail

// Minimum-norm stabilizing controller with a hard safety row:
//   min 1/2||u||^2 + 1/2 rho sigma^2
//   s.t. gamma_v + a_v.u + sigma >= 0   (soft)
//        gamma_b + a_b.u         >= 0   (hard)
inline ControllerOutput minnorm_clf_cbf(const ConstraintRow& clf,
                                        const ConstraintRow& cbf, double rho) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (clf.kind != ConstraintKind::ClfSoft || cbf.kind != ConstraintKind::CbfHard)
    throw ContractError("minnorm_clf_cbf expects one soft and one hard row");
  if (clf.a.size() != cbf.a.size()) throw ContractError("row dimension mismatch");

  const int m = static_cast<int>(clf.a.size());
  const double gv = clf.gamma, gb = cbf.gamma;
  const double w1 = cbf.a.squaredNorm();
  const double w2 = clf.a.squaredNorm();
  const double w3 = clf.a.dot(cbf.a);
  const double s = solver_detail::scale_of(clf, cbf);
  const double ptol = solver_detail::kPrimalTol * s;
  const double dtol = solver_detail::kDualTol * s;

  ControllerOutput out;
  out.u = Eigen::VectorXd::Zero(m);
  out.region = classify_region(clf, cbf, rho).primary;

  // {}: both rows already hold at u = 0.
  if (gv >= -ptol && gb >= -ptol) return out;

  // {hard}
  if (w1 > 0.0) {
    const double mu2 = -gb / w1;
    if (mu2 >= -dtol && gv + w3 * mu2 >= -ptol) {
      out.u = mu2 * cbf.a;
      out.mu_cbf = mu2;
      out.cbf_active = true;
      return out;
    }
  }

  // {soft}
  {
    const double mu1 = -gv / (1.0 / rho + w2);
    if (mu1 >= -dtol && gb + w3 * mu1 >= -ptol) {
      out.u = mu1 * clf.a;
      out.sigma = mu1 / rho;
      out.mu_clf = mu1;
      out.clf_active = true;
      return out;
    }
  }

  // {soft,hard}
  if (w1 <= 0.0)
    throw InfeasibleError(
        "hard row has zero control authority and negative margin");
  const double det = (1.0 / rho + w2) * w1 - w3 * w3;  // > 0 by Cauchy-Schwarz
  const double mu1 = (-gv * w1 + gb * w3) / det;
  const double mu2 = (-gb * (1.0 / rho + w2) + gv * w3) / det;
  if (mu1 < -dtol || mu2 < -dtol)
    throw ContractError("active-set enumeration exhausted; inconsistent QP data");
  out.u = mu1 * clf.a + mu2 * cbf.a;
  out.sigma = mu1 / rho;
  out.mu_clf = mu1;
  out.mu_cbf = mu2;
  out.clf_active = true;
  out.cbf_active = true;
  return out;
}

// Minimum-deviation safety filter around a nominal command:
//   min 1/2||u - nominal||^2  s.t.  gamma_b + a_b.u >= 0.
// The inactive branch returns the nominal bit for bit.
inline ControllerOutput safety_filter(const Eigen::VectorXd& nominal,
                                      const ConstraintRow& cbf) {
  if (cbf.kind != ConstraintKind::CbfHard)
    throw ContractError("safety_filter expects a hard row");
  if (nominal.size() != cbf.a.size()) throw ContractError("dimension mismatch");

  ControllerOutput out;
  out.u = nominal;
  const double w1 = cbf.a.squaredNorm();
  const double margin = cbf.gamma + cbf.a.dot(nominal);
  if (margin >= 0.0 || w1 == 0.0) {
    out.region = "filter_inactive";
    if (margin < 0.0) {
      // Zero-authority row that is already violated: nothing any input can
      // do, so pass the nominal through and flag it.
      out.enforceable = false;
      out.region = "filter_unenforceable";
    }
    return out;
  }
  const double xi = -margin / w1;
  out.u = nominal + xi * cbf.a;
  out.mu_cbf = xi;
  out.cbf_active = true;
  out.region = "filter_active";
  return out;
}

// Robustified variants: the hard row's margin is tightened by
// ||lg2||^2 / epsilon(phi_top) before handing off to the closed forms.
// gamma_d = gamma_b + varrho is attached purely as a diagnostic (it is the
// margin of the inflated set, not the enforced quantity).

inline ControllerOutput tissf_minnorm(const ConstraintRow& clf,
                                      const ConstraintRow& cbf_raw,
                                      const Eigen::VectorXd& lg2, double phi_top,
                                      const TissfParams& params,
                                      const ClassKSpec& beta_r, double rho) {
  ConstraintRow eff = cbf_raw;
  eff.gamma = cbf_raw.gamma - issf_rhs(params, lg2, phi_top);
  ControllerOutput out = minnorm_clf_cbf(clf, eff, rho);
  out.gamma_d = cbf_raw.gamma + varrho_of(params, beta_r, phi_top);
  out.region = classify_region_disturbed(clf, cbf_raw, out.gamma_d, rho).primary;
  return out;
}

inline ControllerOutput tissf_filter(const Eigen::VectorXd& nominal,
                                     const ConstraintRow& cbf_raw,
                                     const Eigen::VectorXd& lg2, double phi_top,
                                     const TissfParams& params) {
  ConstraintRow eff = cbf_raw;
  eff.gamma = cbf_raw.gamma - issf_rhs(params, lg2, phi_top);
  return safety_filter(nominal, eff);
}

}  // namespace hocbf

#endif  // HOCBF_SOLVERS_HPP
