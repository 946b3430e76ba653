#ifndef HOCBF_PLANT_HPP
#define HOCBF_PLANT_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "hocbf/errors.hpp"

namespace hocbf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Control-affine plant with separate control and disturbance channels,
//   xdot = f(x) + g1(x) u + g2(x) d.
// jac_f is used by the order-2 constraint chains; it must match f.
struct PlantModel {
  int n = 0;  // states
  int m = 0;  // controls
  int p = 0;  // disturbances
  std::function<VectorXd(const VectorXd&)> f;
  std::function<MatrixXd(const VectorXd&)> g1;
  std::function<MatrixXd(const VectorXd&)> g2;
  std::function<MatrixXd(const VectorXd&)> jac_f;
};

inline void validate(const PlantModel& plant) {
  if (plant.n <= 0 || plant.m <= 0 || plant.p < 0)
    throw ContractError("plant dimensions must be positive");
  if (!plant.f || !plant.g1 || !plant.g2)
    throw ContractError("plant callbacks f, g1, g2 must all be set");
}

inline VectorXd eval_dynamics(const PlantModel& plant, const VectorXd& x,
                              const VectorXd& u, const VectorXd& d) {
  validate(plant);
  if (x.size() != plant.n) throw ContractError("state dimension mismatch");
  if (u.size() != plant.m) throw ContractError("control dimension mismatch");
  if (d.size() != plant.p) throw ContractError("disturbance dimension mismatch");
  return plant.f(x) + plant.g1(x) * u + plant.g2(x) * d;
}

// ---------------------------------------------------------------------------
// Two pendulums on sprung carts, coupled through the spring.  State order is
// (angle_1, rate_1, angle_2, rate_2); one torque input per pendulum.
// ---------------------------------------------------------------------------

struct PendulumParams {
  double gravity = 9.8;
  double length = 1.0;        // pendulum length l
  double spring = 1.0;        // spring constant
  double cart_mass = 15.0;
  double pend_mass = 5.0;
  double pivot = 0.75;        // spring attachment height r1
  double spacing = 2.0;       // cart separation r2

  // mass ratio omega = m / (M + m)
  double omega() const { return pend_mass / (cart_mass + pend_mass); }
  double input_gain() const { return 1.0 / (omega() * length * length); }
};

inline void validate(const PendulumParams& pp) {
  if (!(pp.gravity > 0) || !(pp.length > 0) || !(pp.spring > 0) ||
      !(pp.cart_mass > 0) || !(pp.pend_mass > 0) || !(pp.pivot > 0) ||
      !(pp.spacing > 0))
    throw ConfigError("pendulum parameters must be positive");
}

// Where the disturbance enters: through the torque channel (g2 = g1) or
// directly on the angle rates (g2 independent of the input gain).
enum class DisturbanceChannel { Matched, Unmatched };

inline DisturbanceChannel channel_from_string(const std::string& name) {
  if (name == "matched") return DisturbanceChannel::Matched;
  if (name == "unmatched") return DisturbanceChannel::Unmatched;
  throw ConfigError("unknown disturbance channel: " + name);
}

// Angular-acceleration drift of one pendulum given both angles.  Shared by
// the dynamics, the Jacobian, and the backstepping controller.
inline double pendulum_drift(const PendulumParams& pp, double own_angle,
                             double other_angle) {
  const double wl = pp.omega() * pp.length;
  const double c_lin = pp.gravity / wl;
  const double c_ratio = pp.pend_mass / pp.cart_mass;
  const double c_spring = pp.pivot * pp.spring * (pp.pivot - wl) / (wl * pp.length);
  const double c_const = pp.spacing * pp.spring * (pp.pivot - wl) / (wl * pp.length);
  return c_lin * own_angle - c_ratio * std::sin(own_angle) -
         c_spring * (own_angle - other_angle) + c_const;
}

inline PlantModel pendulum_spring_cart(const PendulumParams& pp,
                                       DisturbanceChannel channel) {
  validate(pp);
  PlantModel plant;
  plant.n = 4;
  plant.m = 2;
  plant.p = 2;
  plant.f = [pp](const VectorXd& x) {
    VectorXd dx(4);
    dx << x(1), pendulum_drift(pp, x(0), x(2)),
          x(3), pendulum_drift(pp, x(2), x(0));
    return dx;
  };
  plant.jac_f = [pp](const VectorXd& x) {
    const double wl = pp.omega() * pp.length;
    const double c_lin = pp.gravity / wl;
    const double c_ratio = pp.pend_mass / pp.cart_mass;
    const double c_spring =
        pp.pivot * pp.spring * (pp.pivot - wl) / (wl * pp.length);
    MatrixXd J = MatrixXd::Zero(4, 4);
    J(0, 1) = 1.0;
    J(1, 0) = c_lin - c_ratio * std::cos(x(0)) - c_spring;
    J(1, 2) = c_spring;
    J(2, 3) = 1.0;
    J(3, 2) = c_lin - c_ratio * std::cos(x(2)) - c_spring;
    J(3, 0) = c_spring;
    return J;
  };
  const double b = pp.input_gain();
  plant.g1 = [b](const VectorXd&) {
    MatrixXd G = MatrixXd::Zero(4, 2);
    G(1, 0) = b;
    G(3, 1) = b;
    return G;
  };
  if (channel == DisturbanceChannel::Matched) {
    plant.g2 = plant.g1;
  } else {
    plant.g2 = [](const VectorXd&) {
      MatrixXd G = MatrixXd::Zero(4, 2);
      G(0, 0) = 1.0;
      G(2, 1) = 1.0;
      return G;
    };
  }
  return plant;
}

// ---------------------------------------------------------------------------
// Tracking references.  Each pendulum angle tracks a_i * sin(t + phase_i);
// velocity and acceleration come from the same expressions, so downstream
// consumers never difference the position numerically.
// ---------------------------------------------------------------------------

struct ReferenceSignal {
  std::array<double, 2> amplitude{1.0, -1.0};
  std::array<double, 2> phase{0.0, M_PI / 4.0};

  double pos(int i, double t) const { return amplitude[i] * std::sin(t + phase[i]); }
  double vel(int i, double t) const { return amplitude[i] * std::cos(t + phase[i]); }
  double acc(int i, double t) const { return -amplitude[i] * std::sin(t + phase[i]); }
};

inline ReferenceSignal reference_from_name(const std::string& name) {
  if (name == "paper_sine") return ReferenceSignal{};  // sin t and -sin(t + pi/4)
  if (name == "zero") return ReferenceSignal{{0.0, 0.0}, {0.0, 0.0}};
  throw ConfigError("unknown reference signal: " + name);
}

}  // namespace hocbf

#endif  // HOCBF_PLANT_HPP
