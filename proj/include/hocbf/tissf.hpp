#ifndef HOCBF_TISSF_HPP
#define HOCBF_TISSF_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "hocbf/classk.hpp"
#include "hocbf/errors.hpp"

namespace hocbf {

// State-dependent robustification gain epsilon(phi) = 1 / (eps0 + e^arg).
// The literal published form uses arg = slope * phi, which SHRINKS the
// robustifying term near the unsafe boundary and blows it up deep inside
// the safe set; the negated form arg = -slope * phi does the opposite and
// is the one that actually satisfies the tunability condition for steep
// slopes.  Both are selectable per scenario; the literal form stays the
// default.
enum class TunableForm { PaperReciprocal, ReciprocalNegated };

inline TunableForm tunable_form_from_string(const std::string& name) {
  if (name == "paper_reciprocal") return TunableForm::PaperReciprocal;
  if (name == "reciprocal_negated") return TunableForm::ReciprocalNegated;
  throw ConfigError("unknown tunable form: " + name);
}

inline std::string to_string(TunableForm form) {
  return form == TunableForm::PaperReciprocal ? "paper_reciprocal"
                                              : "reciprocal_negated";
}

struct TissfParams {
  double epsilon0 = 0.06;
  double varsigma = 200.0;  // slope of the exponent
  double gamma = 0.0;       // sup-norm bound on the disturbance
  TunableForm form = TunableForm::PaperReciprocal;
};

inline void validate(const TissfParams& tp) {
  if (!(tp.epsilon0 > 0.0)) throw ConfigError("epsilon0 must be positive");
  if (!(tp.varsigma >= 0.0)) throw ConfigError("varsigma must be nonnegative");
  if (!(tp.gamma >= 0.0)) throw ConfigError("gamma must be nonnegative");
}

// Exponent clamp keeps epsilon finite and positive for any slope * margin
// product; +-500 is far outside the representable range of e^x effects on
// the sum with epsilon0 anyway.
inline double epsilon_of(const TissfParams& tp, double phi) {
  validate(tp);
  double arg = tp.varsigma * phi;
  if (tp.form == TunableForm::ReciprocalNegated) arg = -arg;
  arg = std::clamp(arg, -500.0, 500.0);
  return 1.0 / (tp.epsilon0 + std::exp(arg));
}

// Safe-set inflation radius: varrho = -beta_r^{-1}(-epsilon(phi) gamma^2 / 4).
// Nonnegative because beta_r is odd-symmetric increasing through zero.
inline double varrho_of(const TissfParams& tp, const ClassKSpec& beta_r,
                        double phi) {
  const double eps = epsilon_of(tp, phi);
  return -classk_inverse(beta_r, -eps * tp.gamma * tp.gamma / 4.0);
}

// Right-hand side of the robustified top-level constraint:
// ||L_{g2} phi_{r-1}||^2 / epsilon(phi_{r-1}).
inline double issf_rhs(const TissfParams& tp, const Eigen::VectorXd& lg2,
                       double phi) {
  return lg2.squaredNorm() / epsilon_of(tp, phi);
}

// The inflated sets are nested safely only when 1 + d(varrho)/d(phi) > 0
// everywhere on the operating range.  Scenarios record the outcome rather
// than assert it: the literal published form fails this for the published
// slope, and that mismatch is part of what the toolkit surfaces.
struct TunabilityReport {
  double min_margin = 0.0;
  double arg_min = 0.0;
  bool passes = false;
};

inline TunabilityReport check_tunable_condition(const TissfParams& tp,
                                                const ClassKSpec& beta_r,
                                                std::span<const double> phi_grid) {
  if (phi_grid.empty()) throw ConfigError("tunability check needs a nonempty grid");
  const double h = 1e-6;
  TunabilityReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (double phi : phi_grid) {
    const double slope = (varrho_of(tp, beta_r, phi + h) -
                          varrho_of(tp, beta_r, phi - h)) /
                         (2.0 * h);
    const double margin = 1.0 + slope;
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.arg_min = phi;
    }
  }
  report.passes = report.min_margin > 0.0;
  return report;
}

}  // namespace hocbf

#endif  // HOCBF_TISSF_HPP
