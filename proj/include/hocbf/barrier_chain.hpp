#ifndef HOCBF_BARRIER_CHAIN_HPP
#define HOCBF_BARRIER_CHAIN_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hocbf/classk.hpp"
#include "hocbf/errors.hpp"
#include "hocbf/plant.hpp"

namespace hocbf {

// Recursive barrier cascade for a constraint of relative degree r:
//   phi_0 = B(x),  phi_i = d/dt phi_{i-1} + beta_i(phi_{i-1}),
// with the derivatives taken along the drift (the control only appears at
// level r, the disturbance never enters the cascade definition).  The safe
// region is the intersection of {phi_i >= 0} over i = 0..r-1.
//
// The analytic path covers r <= 2 and needs B's gradient (and Hessian for
// r = 2) plus the plant Jacobian.  For higher r supply the top level
// directly through `custom`.
struct BarrierSpec {
  int rel_degree = 1;
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  std::function<MatrixXd(const VectorXd&)> hessian;  // r = 2 only
  std::vector<ClassKSpec> betas;                     // one per level

  // Optional user-supplied top level for r > 2: all cascade values
  // phi_0..phi_{r-1} and the gradient of phi_{r-1}.
  struct CustomTop {
    std::function<std::vector<double>(const VectorXd&)> phis;
    std::function<VectorXd(const VectorXd&)> grad_top;
  };
  CustomTop custom;
};

inline void validate(const BarrierSpec& spec) {
  if (spec.rel_degree < 1) throw ConfigError("barrier relative degree must be >= 1");
  if (static_cast<int>(spec.betas.size()) != spec.rel_degree)
    throw ConfigError("barrier cascade needs exactly one class-K per level");
  for (const auto& beta : spec.betas) validate(beta);
  if (spec.custom.phis || spec.custom.grad_top) {
    if (!spec.custom.phis || !spec.custom.grad_top)
      throw ConfigError("custom barrier top needs both phis and grad_top");
    return;
  }
  if (!spec.value || !spec.gradient)
    throw ContractError("barrier needs value and gradient callbacks");
  if (spec.rel_degree == 2 && !spec.hessian)
    throw ContractError("order-2 barrier cascade needs the Hessian");
  if (spec.rel_degree > 2)
    throw UnsupportedError(
        "analytic barrier cascade stops at r = 2; supply the top level");
}

// Everything the constraint row builders need at one state.
struct ChainEval {
  std::vector<double> phi;  // phi_0 .. phi_{r-1}
  VectorXd grad_top;        // gradient of phi_{r-1}
  double lf = 0.0;          // L_f phi_{r-1}
  VectorXd lg1;             // (L_{g1} phi_{r-1})^T
  VectorXd lg2;             // (L_{g2} phi_{r-1})^T
  double gamma_b = 0.0;     // lf + beta_r(phi_{r-1})
};

inline ChainEval eval_chain(const BarrierSpec& spec, const PlantModel& plant,
                            const VectorXd& x) {
  validate(spec);
  validate(plant);
  if (x.size() != plant.n) throw ContractError("state dimension mismatch");

  ChainEval out;
  const VectorXd f = plant.f(x);
  if (spec.custom.phis) {
    out.phi = spec.custom.phis(x);
    if (static_cast<int>(out.phi.size()) != spec.rel_degree)
      throw ContractError("custom barrier top returned wrong cascade length");
    out.grad_top = spec.custom.grad_top(x);
  } else if (spec.rel_degree == 1) {
    out.phi = {spec.value(x)};
    out.grad_top = spec.gradient(x);
  } else {
    const double b = spec.value(x);
    const VectorXd grad_b = spec.gradient(x);
    const double phi1 = grad_b.dot(f) + classk_eval(spec.betas[0], b);
    out.phi = {b, phi1};
    if (!plant.jac_f) throw ContractError("order-2 cascade needs the plant Jacobian");
    out.grad_top = spec.hessian(x) * f + plant.jac_f(x).transpose() * grad_b +
                   classk_deriv(spec.betas[0], b) * grad_b;
  }

  out.lf = out.grad_top.dot(f);
  out.lg1 = plant.g1(x).transpose() * out.grad_top;
  out.lg2 = plant.g2(x).transpose() * out.grad_top;
  out.gamma_b = out.lf + classk_eval(spec.betas.back(), out.phi.back());
  return out;
}

// Cascade values only; cheap helper for logging set membership.
inline std::vector<double> chain_set_margins(const BarrierSpec& spec,
                                             const PlantModel& plant,
                                             const VectorXd& x) {
  return eval_chain(spec, plant, x).phi;
}

}  // namespace hocbf

#endif  // HOCBF_BARRIER_CHAIN_HPP
