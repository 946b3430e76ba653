#ifndef HOCBF_QP_TYPES_HPP
#define HOCBF_QP_TYPES_HPP

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "hocbf/errors.hpp"

namespace hocbf {

// One affine row gamma + a^T u >= 0.  Soft rows (the stabilization side)
// may be relaxed by the scalar slack; hard rows (the safety side) may not.
enum class ConstraintKind { ClfSoft, CbfHard };

struct ConstraintRow {
  double gamma = 0.0;
  Eigen::VectorXd a;
  ConstraintKind kind = ConstraintKind::CbfHard;
};

inline ConstraintRow clf_row(double gamma, Eigen::VectorXd a) {
  return {gamma, std::move(a), ConstraintKind::ClfSoft};
}
inline ConstraintRow cbf_row(double gamma, Eigen::VectorXd a) {
  return {gamma, std::move(a), ConstraintKind::CbfHard};
}

// Common result record for every pointwise controller in the toolkit.
struct ControllerOutput {
  Eigen::VectorXd u;
  double sigma = 0.0;          // slack actually used by the soft row
  double mu_clf = 0.0;         // multiplier of the soft row
  double mu_cbf = 0.0;         // multiplier of the hard row
  bool clf_active = false;
  bool cbf_active = false;
  std::string region;          // diagnostic label, never used for control
  double gamma_d = std::numeric_limits<double>::quiet_NaN();  // inflated margin diagnostic
  // Cleared when a zero-authority hard row with negative margin forced the
  // filter to pass the nominal through unmodified.
  bool enforceable = true;
};

// ---------------------------------------------------------------------------
// Diagnostic partition labels for the closed-form solution branches, exactly
// as published.  The printed sets neither cover the plane nor stay disjoint
// (two of them look like typographical swaps), so classification reports
// every matching label and falls back to "ambiguous" when there is not a
// unique one.  Nothing downstream branches on these.
// ---------------------------------------------------------------------------

struct RegionReport {
  std::string primary;                  // single label or "ambiguous"
  std::vector<std::string> satisfied;   // every label whose set contains the point
};

namespace detail {
inline bool is_zero_vec(const Eigen::VectorXd& v) {
  return v.size() == 0 || v.lpNorm<Eigen::Infinity>() == 0.0;
}
}  // namespace detail

// Undisturbed partition over (gamma_v, gamma_b, a_v, a_b, rho).
inline RegionReport classify_region(const ConstraintRow& clf,
                                    const ConstraintRow& cbf, double rho) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  const double gv = clf.gamma, gb = cbf.gamma;
  const double w1 = cbf.a.squaredNorm();
  const double w2 = clf.a.squaredNorm();
  const double w3 = clf.a.dot(cbf.a);
  const bool ab_zero = detail::is_zero_vec(cbf.a);

  RegionReport report;
  if (gv > 0.0 && gb > 0.0) report.satisfied.push_back("Omega1");
  if (gv > 0.0 && gb == 0.0 && ab_zero) report.satisfied.push_back("Omega2");
  if (gb <= 0.0 && gv * w1 - gb * w3 > 0.0) report.satisfied.push_back("Omega3");
  if (gv <= 0.0 && gv * w3 - gb * (1.0 / rho + w1) < 0.0)
    report.satisfied.push_back("Omega4");
  if (gv <= 0.0 && gb == 0.0 && ab_zero) report.satisfied.push_back("Omega5");
  if (!ab_zero && gv * w3 - gb * (1.0 / rho + w2) >= 0.0)
    report.satisfied.push_back("Omega6");
  report.primary =
      report.satisfied.size() == 1 ? report.satisfied.front() : "ambiguous";
  return report;
}

// Disturbed partition: same shapes with the inflated margin gamma_d standing
// in for gamma_b where the publication substitutes it (it keeps the raw
// gamma_b inside the third set).
inline RegionReport classify_region_disturbed(const ConstraintRow& clf,
                                              const ConstraintRow& cbf,
                                              double gamma_d, double rho) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  const double gv = clf.gamma, gb = cbf.gamma;
  const double w1 = cbf.a.squaredNorm();
  const double w2 = clf.a.squaredNorm();
  const double w3 = clf.a.dot(cbf.a);
  const bool ab_zero = detail::is_zero_vec(cbf.a);

  RegionReport report;
  if (gv > 0.0 && gamma_d > 0.0) report.satisfied.push_back("Omega_d1");
  if (gv > 0.0 && gamma_d == 0.0 && ab_zero) report.satisfied.push_back("Omega_d2");
  if (gamma_d <= 0.0 && gv * w1 - gb * w3 > 0.0)
    report.satisfied.push_back("Omega_d3");
  if (gv >= 0.0 && gv * w1 - gamma_d * (1.0 / rho + w1) < 0.0)
    report.satisfied.push_back("Omega_d4");
  if (gv <= 0.0 && gamma_d == 0.0 && ab_zero) report.satisfied.push_back("Omega_d5");
  if (!ab_zero && gv * w3 - gamma_d * (1.0 / rho + w2) >= 0.0)
    report.satisfied.push_back("Omega_d6");
  report.primary =
      report.satisfied.size() == 1 ? report.satisfied.front() : "ambiguous";
  return report;
}

}  // namespace hocbf

#endif  // HOCBF_QP_TYPES_HPP
