#ifndef HOCBF_SIM_HPP
#define HOCBF_SIM_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hocbf/barrier_chain.hpp"
#include "hocbf/classk.hpp"
#include "hocbf/clf_chain.hpp"
#include "hocbf/errors.hpp"
#include "hocbf/plant.hpp"
#include "hocbf/solvers.hpp"
#include "hocbf/tissf.hpp"

namespace hocbf {

// =========================================================================
// Scenario description, disturbance profiles, nominal controller, fixed-step
// integration, and the top-level closed-loop runner for the two-pendulum
// benchmark.
// =========================================================================

enum class ControllerKind {
  NominalOnly,      // backstepping tracker, no safety layer
  MinNorm,          // soft stabilization row + hard safety row
  Filter,           // nominal tracker + hard safety row
  TissfMinNorm,     // MinNorm with the robustified safety margin
  TissfFilter,      // Filter with the robustified safety margin
  RobustWorstCase,  // constant worst-case buffer ||lg2|| * gamma
};

inline ControllerKind controller_from_string(const std::string& name) {
  if (name == "nominal_only") return ControllerKind::NominalOnly;
  if (name == "minnorm") return ControllerKind::MinNorm;
  if (name == "filter") return ControllerKind::Filter;
  if (name == "tissf_minnorm") return ControllerKind::TissfMinNorm;
  if (name == "tissf_filter") return ControllerKind::TissfFilter;
  if (name == "robust_worstcase") return ControllerKind::RobustWorstCase;
  throw ConfigError("unknown controller kind: " + name);
}

inline std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::NominalOnly: return "nominal_only";
    case ControllerKind::MinNorm: return "minnorm";
    case ControllerKind::Filter: return "filter";
    case ControllerKind::TissfMinNorm: return "tissf_minnorm";
    case ControllerKind::TissfFilter: return "tissf_filter";
    case ControllerKind::RobustWorstCase: return "robust_worstcase";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Disturbance profiles.  Deterministic functions of time; the declared bound
// gamma must dominate the profile's sup norm, which validation enforces.
// ---------------------------------------------------------------------------

struct DisturbanceProfile {
  enum class Kind { Zero, Constant, Sinusoid };
  Kind kind = Kind::Zero;
  Eigen::VectorXd value;   // constant level, or sinusoid amplitude per channel
  double frequency = 1.0;  // rad/s
  double phase = 0.0;

  double sup_norm() const {
    return kind == Kind::Zero || value.size() == 0
               ? 0.0
               : value.lpNorm<Eigen::Infinity>();
  }
};

inline Eigen::VectorXd disturbance_signal(const DisturbanceProfile& profile,
                                          double t, int p) {
  switch (profile.kind) {
    case DisturbanceProfile::Kind::Zero:
      return Eigen::VectorXd::Zero(p);
    case DisturbanceProfile::Kind::Constant:
      if (profile.value.size() != p)
        throw ConfigError("constant disturbance has wrong channel count");
      return profile.value;
    case DisturbanceProfile::Kind::Sinusoid:
      if (profile.value.size() != p)
        throw ConfigError("sinusoid disturbance has wrong channel count");
      return profile.value * std::sin(profile.frequency * t + profile.phase);
  }
  throw ContractError("unknown disturbance kind");
}

// ---------------------------------------------------------------------------
// Scenario: everything needed to reproduce one closed-loop run.
// ---------------------------------------------------------------------------

struct Scenario {
  std::string name = "scenario";
  PendulumParams plant;
  DisturbanceChannel channel = DisturbanceChannel::Matched;
  ControllerKind controller = ControllerKind::MinNorm;

  bool has_barrier = true;
  std::array<double, 2> theta_lower{-0.3, -0.3};  // angle lower bounds
  ClassKSpec beta1 = ClassKSpec::linear(1.0);
  ClassKSpec beta2 = ClassKSpec::linear(1.0);

  bool has_clf = true;  // stabilization rows for the min-norm family
  ClassKSpec eta = ClassKSpec::linear(1.0);
  ClassKSpec alpha1 = ClassKSpec::linear(1.0);
  double rho = 100.0;

  bool has_nominal = false;  // backstepping tracker for the filter family
  double k1 = 10.0;
  double k2 = 10.0;

  TissfParams tissf;
  DisturbanceProfile disturbance;
  std::string reference_name = "paper_sine";

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  double dt = 1e-3;
  double horizon = 20.0;
  std::uint64_t seed = 1;
};

inline bool controller_needs_clf(ControllerKind kind) {
  return kind == ControllerKind::MinNorm || kind == ControllerKind::TissfMinNorm;
}
inline bool controller_needs_nominal(ControllerKind kind) {
  return kind == ControllerKind::NominalOnly || kind == ControllerKind::Filter ||
         kind == ControllerKind::TissfFilter;
}

inline void validate(const Scenario& sc) {
  validate(sc.plant);
  validate(sc.tissf);
  if (!(sc.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(sc.horizon >= sc.dt)) throw ConfigError("horizon must cover one step");
  if (sc.x0.size() != 4 || !sc.x0.allFinite())
    throw ConfigError("initial state must be a finite 4-vector");
  if (sc.has_barrier) {
    validate(sc.beta1);
    validate(sc.beta2);
  }
  if (sc.has_clf) {
    validate(sc.eta);
    validate(sc.alpha1);
    if (!(sc.rho > 0.0)) throw ConfigError("rho must be positive");
  }
  if (sc.has_nominal && (!(sc.k1 > 0.0) || !(sc.k2 > 0.0)))
    throw ConfigError("backstepping gains must be positive");

  const ControllerKind kind = sc.controller;
  if (kind != ControllerKind::NominalOnly && !sc.has_barrier)
    throw ConfigError("controller needs a barrier block");
  if (controller_needs_clf(kind) && !sc.has_clf)
    throw ConfigError("controller needs a clf block");
  if (controller_needs_nominal(kind) && !sc.has_nominal)
    throw ConfigError("controller needs a nominal block");
  if (kind == ControllerKind::RobustWorstCase && sc.has_clf == sc.has_nominal)
    throw ConfigError(
        "robust_worstcase needs exactly one of clf / nominal blocks");

  if (sc.disturbance.sup_norm() > sc.tissf.gamma)
    throw ConfigError("disturbance amplitude exceeds the declared gamma bound");
  reference_from_name(sc.reference_name);  // must resolve
}

// ---------------------------------------------------------------------------
// Backstepping tracker for the pendulum benchmark.  The drift cancellation
// is scaled through the input gain so the error dynamics close to
//   zdot_1 = -k1 z_1 + z_2,  zdot_2 = z_1 - k2 z_2.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd backstepping_nominal(const PendulumParams& pp,
                                            const ReferenceSignal& ref,
                                            double k1, double k2,
                                            const Eigen::VectorXd& x, double t) {
  if (x.size() != 4) throw ContractError("backstepping expects the 4-state");
  const double wl2 = pp.omega() * pp.length * pp.length;
  Eigen::VectorXd u(2);
  for (int i = 0; i < 2; ++i) {
    const double z1 = x(2 * i) - ref.pos(i, t);
    const double v1 = -k1 * z1 + ref.vel(i, t);
    const double z2 = x(2 * i + 1) - v1;
    const double v1dot = -k1 * (x(2 * i + 1) - ref.vel(i, t)) + ref.acc(i, t);
    const double drift = pendulum_drift(pp, x(2 * i), x(2 * (1 - i)));
    u(i) = wl2 * (-drift - k2 * z2 + z1 + v1dot);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Closed-loop stepping.  The controller is re-evaluated at every integration
// stage, so the integrated vector field is the true closed loop rather than
// a zero-order hold.
// ---------------------------------------------------------------------------

using ControlLaw =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

inline Eigen::VectorXd rk4_step(const PlantModel& plant, const ControlLaw& law,
                                const DisturbanceProfile& dist,
                                const Eigen::VectorXd& x, double t, double dt) {
  const auto xdot = [&](const Eigen::VectorXd& xs, double ts) {
    return eval_dynamics(plant, xs, law(xs, ts),
                         disturbance_signal(dist, ts, plant.p));
  };
  const Eigen::VectorXd k1 = xdot(x, t);
  const Eigen::VectorXd k2 = xdot(x + 0.5 * dt * k1, t + 0.5 * dt);
  const Eigen::VectorXd k3 = xdot(x + 0.5 * dt * k2, t + 0.5 * dt);
  const Eigen::VectorXd k4 = xdot(x + dt * k3, t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ---------------------------------------------------------------------------
// Per-step diagnostics and the assembled trajectory.
// ---------------------------------------------------------------------------

struct PendulumDiag {
  double phi0 = std::numeric_limits<double>::quiet_NaN();
  double phi1 = std::numeric_limits<double>::quiet_NaN();
  double clf_phi0 = std::numeric_limits<double>::quiet_NaN();
  double sigma = 0.0;
  double varrho = std::numeric_limits<double>::quiet_NaN();
  std::string region = "none";
  bool nominal_feasible = true;  // filter kinds: enforced row held at nominal
  double filter_dev = 0.0;       // |u - u_nominal| for filter kinds
};

struct TrajectoryRow {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  std::array<PendulumDiag, 2> diag;
};

struct Metrics {
  std::array<double, 2> min_phi0{};
  std::array<double, 2> min_phi1{};
  std::array<double, 2> min_phi_issf{};   // min over t of phi0 + varrho
  std::array<double, 2> tracking_rmse{};
  std::array<double, 2> reference_infeasible_fraction{};
  std::array<double, 2> filter_inactive_fraction{};
  double min_phi0_overall = 0.0;
  double min_phi_issf_overall = 0.0;
  double tracking_rmse_all = 0.0;
  double max_u_inf = 0.0;
  double filter_feasible_max_dev = 0.0;  // over steps with a feasible nominal
  std::size_t steps = 0;
  bool has_margin_metrics = false;
  bool has_filter_metrics = false;
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;
  Metrics metrics;
  bool diverged = false;
  double diverged_at = std::numeric_limits<double>::quiet_NaN();
};

// One controller evaluation: the joint input plus per-pendulum diagnostics.
struct StepEval {
  Eigen::VectorXd u;
  std::array<PendulumDiag, 2> diag;
};

namespace sim_detail {

inline void require_finite_state(const Eigen::VectorXd& x) {
  if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e100)
    throw DivergenceError("state left the representable range");
}

}  // namespace sim_detail

// Bound controller for a scenario: owns the chain specs and produces the
// joint input at a (state, time) query.  Build once, call per stage.
class ScenarioController {
 public:
  explicit ScenarioController(const Scenario& sc)
      : sc_(sc),
        plant_(pendulum_spring_cart(sc.plant, sc.channel)),
        ref_(reference_from_name(sc.reference_name)) {
    validate(sc);
    for (int i = 0; i < 2; ++i) {
      if (sc_.has_barrier) barrier_[i] = make_angle_barrier(i);
      if (sc_.has_clf)
        clf_[i] = make_tracking_clf(4, 2 * i, ref_, i, sc_.eta, sc_.alpha1);
    }
  }

  const PlantModel& plant() const { return plant_; }
  const ReferenceSignal& reference() const { return ref_; }

  StepEval evaluate(const Eigen::VectorXd& x, double t) const {
    sim_detail::require_finite_state(x);
    StepEval ev;
    ev.u = Eigen::VectorXd::Zero(2);

    Eigen::VectorXd u_nom;
    if (sc_.has_nominal)
      u_nom = backstepping_nominal(sc_.plant, ref_, sc_.k1, sc_.k2, x, t);

    for (int i = 0; i < 2; ++i) {
      PendulumDiag& diag = ev.diag[i];

      ChainEval chain;
      ConstraintRow cbf;
      if (sc_.has_barrier) {
        chain = eval_chain(barrier_[i], plant_, x);
        diag.phi0 = chain.phi.front();
        diag.phi1 = chain.phi.back();
        if (classk_invertible(sc_.beta2))
          diag.varrho = varrho_of(sc_.tissf, sc_.beta2, diag.phi0);
        cbf = cbf_row(chain.gamma_b, scalar_vec(chain.lg1(i)));
        if (!std::isfinite(cbf.gamma))
          throw DivergenceError("safety margin is not finite");
      }

      ConstraintRow clf;
      if (sc_.has_clf) {
        const ClfEval ce = eval_clf_chain(clf_[i], plant_, x, t);
        diag.clf_phi0 = ce.phi.front();
        clf = clf_row(ce.gamma_v, scalar_vec(ce.a_v(i)));
        if (!std::isfinite(clf.gamma))
          throw DivergenceError("stabilization margin is not finite");
      }

      switch (sc_.controller) {
        case ControllerKind::NominalOnly:
          ev.u(i) = u_nom(i);
          break;
        case ControllerKind::MinNorm: {
          const ControllerOutput out = minnorm_clf_cbf(clf, cbf, sc_.rho);
          apply_minnorm(out, ev.u(i), diag);
          break;
        }
        case ControllerKind::TissfMinNorm: {
          const ControllerOutput out =
              tissf_minnorm(clf, cbf, chain.lg2, chain.phi.back(), sc_.tissf,
                            sc_.beta2, sc_.rho);
          apply_minnorm(out, ev.u(i), diag);
          break;
        }
        case ControllerKind::Filter: {
          const ControllerOutput out = safety_filter(scalar_vec(u_nom(i)), cbf);
          apply_filter(out, u_nom(i), ev.u(i), diag);
          break;
        }
        case ControllerKind::TissfFilter: {
          const ControllerOutput out =
              tissf_filter(scalar_vec(u_nom(i)), cbf, chain.lg2,
                           chain.phi.back(), sc_.tissf);
          apply_filter(out, u_nom(i), ev.u(i), diag);
          break;
        }
        case ControllerKind::RobustWorstCase: {
          ConstraintRow eff = cbf;
          eff.gamma -= chain.lg2.norm() * sc_.tissf.gamma;
          if (sc_.has_nominal) {
            const ControllerOutput out = safety_filter(scalar_vec(u_nom(i)), eff);
            apply_filter(out, u_nom(i), ev.u(i), diag);
          } else {
            const ControllerOutput out = minnorm_clf_cbf(clf, eff, sc_.rho);
            apply_minnorm(out, ev.u(i), diag);
          }
          break;
        }
      }
    }
    return ev;
  }

 private:
  static Eigen::VectorXd scalar_vec(double v) {
    Eigen::VectorXd out(1);
    out(0) = v;
    return out;
  }

  static void apply_minnorm(const ControllerOutput& out, double& u_i,
                            PendulumDiag& diag) {
    u_i = out.u(0);
    diag.sigma = out.sigma;
    diag.region = out.region;
  }

  static void apply_filter(const ControllerOutput& out, double u_nom,
                           double& u_i, PendulumDiag& diag) {
    u_i = out.u(0);
    diag.region = out.region;
    diag.nominal_feasible = !out.cbf_active && out.enforceable;
    diag.filter_dev = std::fabs(out.u(0) - u_nom);
  }

  BarrierSpec make_angle_barrier(int i) const {
    const int sel = 2 * i;
    const double bound = sc_.theta_lower[i];
    BarrierSpec spec;
    spec.rel_degree = 2;
    spec.betas = {sc_.beta1, sc_.beta2};
    spec.value = [sel, bound](const VectorXd& x) { return x(sel) - bound; };
    spec.gradient = [sel](const VectorXd& x) {
      VectorXd g = VectorXd::Zero(x.size());
      g(sel) = 1.0;
      return g;
    };
    spec.hessian = [](const VectorXd& x) {
      return MatrixXd::Zero(x.size(), x.size()).eval();
    };
    return spec;
  }

  Scenario sc_;
  PlantModel plant_;
  ReferenceSignal ref_;
  std::array<BarrierSpec, 2> barrier_;
  std::array<LyapunovSpec, 2> clf_;
};

// ---------------------------------------------------------------------------
// Full closed-loop run.  Rows are recorded at step boundaries (the controller
// output in a row is the one applied at that instant); a divergence marks the
// record instead of discarding it, so callers can inspect the last finite
// steps.
// ---------------------------------------------------------------------------

inline TrajectoryRecord run_scenario(const Scenario& sc) {
  const ScenarioController controller(sc);
  const PlantModel& plant = controller.plant();
  const ReferenceSignal& ref = controller.reference();
  const ControlLaw law = [&controller](const Eigen::VectorXd& x, double t) {
    return controller.evaluate(x, t).u;
  };
  const std::size_t n_steps =
      static_cast<std::size_t>(std::llround(sc.horizon / sc.dt));

  TrajectoryRecord record;
  record.rows.reserve(n_steps + 1);
  Eigen::VectorXd x = sc.x0;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    try {
      sim_detail::require_finite_state(x);
      TrajectoryRow row;
      row.t = t;
      row.x = x;
      StepEval ev = controller.evaluate(x, t);
      row.u = ev.u;
      row.diag = std::move(ev.diag);
      record.rows.push_back(std::move(row));
      if (k < n_steps) x = rk4_step(plant, law, sc.disturbance, x, t, sc.dt);
    } catch (const DivergenceError&) {
      record.diverged = true;
      record.diverged_at = t;
      break;
    }
  }

  // ---- summary metrics ----
  Metrics& m = record.metrics;
  m.steps = record.rows.empty() ? 0 : record.rows.size() - 1;
  m.has_margin_metrics = sc.has_barrier && !record.rows.empty();
  m.has_filter_metrics =
      (sc.controller == ControllerKind::Filter ||
       sc.controller == ControllerKind::TissfFilter ||
       (sc.controller == ControllerKind::RobustWorstCase && sc.has_nominal)) &&
      !record.rows.empty();
  const double inf = std::numeric_limits<double>::infinity();
  m.min_phi0 = {inf, inf};
  m.min_phi1 = {inf, inf};
  m.min_phi_issf = {inf, inf};
  std::array<double, 2> sq_err{0.0, 0.0};
  std::array<std::size_t, 2> ref_infeasible{0, 0};
  std::array<std::size_t, 2> filter_inactive{0, 0};
  for (const TrajectoryRow& row : record.rows) {
    m.max_u_inf = std::max(m.max_u_inf, row.u.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < 2; ++i) {
      const PendulumDiag& diag = row.diag[i];
      if (sc.has_barrier) {
        m.min_phi0[i] = std::min(m.min_phi0[i], diag.phi0);
        m.min_phi1[i] = std::min(m.min_phi1[i], diag.phi1);
        const double inflated =
            std::isnan(diag.varrho) ? diag.phi0 : diag.phi0 + diag.varrho;
        m.min_phi_issf[i] = std::min(m.min_phi_issf[i], inflated);
        if (ref.pos(i, row.t) < sc.theta_lower[i]) ++ref_infeasible[i];
      }
      const double z = row.x(2 * i) - ref.pos(i, row.t);
      sq_err[i] += z * z;
      if (m.has_filter_metrics) {
        if (diag.nominal_feasible) {
          ++filter_inactive[i];
          m.filter_feasible_max_dev =
              std::max(m.filter_feasible_max_dev, diag.filter_dev);
        }
      }
    }
  }
  const double nrows = static_cast<double>(std::max<std::size_t>(1, record.rows.size()));
  for (int i = 0; i < 2; ++i) {
    m.tracking_rmse[i] = std::sqrt(sq_err[i] / nrows);
    m.reference_infeasible_fraction[i] =
        static_cast<double>(ref_infeasible[i]) / nrows;
    m.filter_inactive_fraction[i] =
        static_cast<double>(filter_inactive[i]) / nrows;
  }
  m.tracking_rmse_all = std::sqrt((sq_err[0] + sq_err[1]) / (2.0 * nrows));
  m.min_phi0_overall = std::min(m.min_phi0[0], m.min_phi0[1]);
  m.min_phi_issf_overall = std::min(m.min_phi_issf[0], m.min_phi_issf[1]);
  return record;
}

}  // namespace hocbf

#endif  // HOCBF_SIM_HPP
