#ifndef HOCBF_CLF_CHAIN_HPP
#define HOCBF_CLF_CHAIN_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hocbf/classk.hpp"
#include "hocbf/errors.hpp"
#include "hocbf/plant.hpp"

namespace hocbf {

// Stabilization cascade built from a (possibly time-varying) Lyapunov
// candidate.  Level zero encodes the decrease condition itself,
//   varphi_0 = -dV/dt - eta(V),
// and higher levels follow the same recursion as the barrier cascade,
//   varphi_i = d/dt varphi_{i-1} + alpha_i(varphi_{i-1}),
// again along the drift.  Time dependence is explicit because tracking
// references move; every consumer therefore gets the time partial of the
// top level alongside its state gradient.
//
// The analytic path covers r_v = 1, which needs second-order data of V
// (state Hessian, d(dV/dx)/dt, d2V/dt2).  A generic analytic level two
// would need third-order data of V; supply the top level through `custom`
// instead for r_v >= 2.
struct LyapunovSpec {
  int rel_degree = 1;  // r_v
  std::function<double(const VectorXd&, double)> value;
  std::function<VectorXd(const VectorXd&, double)> gradient;
  std::function<MatrixXd(const VectorXd&, double)> hessian;
  std::function<double(const VectorXd&, double)> vt;       // dV/dt
  std::function<VectorXd(const VectorXd&, double)> grad_t; // d(dV/dx)/dt
  std::function<double(const VectorXd&, double)> vtt;      // d2V/dt2
  ClassKSpec eta;
  std::vector<ClassKSpec> alphas;  // one per level

  struct CustomTop {
    std::function<std::vector<double>(const VectorXd&, double)> phis;
    std::function<VectorXd(const VectorXd&, double)> grad_top;
    std::function<double(const VectorXd&, double)> dt_top;
  };
  CustomTop custom;
};

inline void validate(const LyapunovSpec& spec) {
  if (spec.rel_degree < 1) throw ConfigError("clf relative degree must be >= 1");
  if (static_cast<int>(spec.alphas.size()) != spec.rel_degree)
    throw ConfigError("clf cascade needs exactly one class-K per level");
  validate(spec.eta);
  for (const auto& alpha : spec.alphas) validate(alpha);
  if (spec.custom.phis || spec.custom.grad_top || spec.custom.dt_top) {
    if (!spec.custom.phis || !spec.custom.grad_top || !spec.custom.dt_top)
      throw ConfigError("custom clf top needs phis, grad_top and dt_top");
    return;
  }
  if (!spec.value || !spec.gradient)
    throw ContractError("clf needs value and gradient callbacks");
  if (!spec.vt || !spec.grad_t || !spec.vtt)
    throw ConfigError("clf cascade needs reference time derivatives");
  if (spec.rel_degree == 1 && !spec.hessian)
    throw ContractError("clf cascade needs the state Hessian of V");
  if (spec.rel_degree > 1)
    throw UnsupportedError(
        "analytic clf cascade stops at r_v = 1; supply the top level");
}

struct ClfEval {
  std::vector<double> phi;  // varphi_0 .. varphi_{r_v-1}
  VectorXd grad_top;        // state gradient of the top level
  double dt_top = 0.0;      // explicit time partial of the top level
  double lf = 0.0;          // L_f varphi_{r_v-1}
  VectorXd a_v;             // (L_{g1} varphi_{r_v-1})^T
  double gamma_v = 0.0;     // lf + dt_top + alpha_{r_v}(varphi_{r_v-1})
};

inline ClfEval eval_clf_chain(const LyapunovSpec& spec, const PlantModel& plant,
                              const VectorXd& x, double t) {
  validate(spec);
  validate(plant);
  if (x.size() != plant.n) throw ContractError("state dimension mismatch");

  ClfEval out;
  const VectorXd f = plant.f(x);
  if (spec.custom.phis) {
    out.phi = spec.custom.phis(x, t);
    if (static_cast<int>(out.phi.size()) != spec.rel_degree)
      throw ContractError("custom clf top returned wrong cascade length");
    out.grad_top = spec.custom.grad_top(x, t);
    out.dt_top = spec.custom.dt_top(x, t);
  } else {
    const double v = spec.value(x, t);
    const VectorXd grad_v = spec.gradient(x, t);
    const double eta_slope = classk_deriv(spec.eta, v);
    out.phi = {-(spec.vt(x, t) + grad_v.dot(f)) - classk_eval(spec.eta, v)};
    if (!plant.jac_f) throw ContractError("clf cascade needs the plant Jacobian");
    out.grad_top = -(spec.grad_t(x, t) + spec.hessian(x, t) * f +
                     plant.jac_f(x).transpose() * grad_v) -
                   eta_slope * grad_v;
    out.dt_top = -(spec.vtt(x, t) + spec.grad_t(x, t).dot(f)) -
                 eta_slope * spec.vt(x, t);
  }

  out.lf = out.grad_top.dot(f);
  out.a_v = plant.g1(x).transpose() * out.grad_top;
  out.gamma_v = out.lf + out.dt_top + classk_eval(spec.alphas.back(), out.phi.back());
  return out;
}

inline std::vector<double> clf_set_margins(const LyapunovSpec& spec,
                                           const PlantModel& plant,
                                           const VectorXd& x, double t) {
  return eval_clf_chain(spec, plant, x, t).phi;
}

// Quadratic tracking candidate V = 1/2 (x_sel - ref)^2 for one scalar state
// component against one reference channel.  This is the workhorse CLF for
// the pendulum benchmark (sel = angle of pendulum i, channel = i).
inline LyapunovSpec make_tracking_clf(int n, int sel, const ReferenceSignal& ref,
                                      int channel, ClassKSpec eta,
                                      ClassKSpec alpha1) {
  if (sel < 0 || sel >= n) throw ContractError("tracking state index out of range");
  LyapunovSpec spec;
  spec.rel_degree = 1;
  spec.eta = eta;
  spec.alphas = {alpha1};
  spec.value = [sel, ref, channel](const VectorXd& x, double t) {
    const double z = x(sel) - ref.pos(channel, t);
    return 0.5 * z * z;
  };
  spec.gradient = [n, sel, ref, channel](const VectorXd& x, double t) {
    VectorXd g = VectorXd::Zero(n);
    g(sel) = x(sel) - ref.pos(channel, t);
    return g;
  };
  spec.hessian = [n, sel](const VectorXd&, double) {
    MatrixXd h = MatrixXd::Zero(n, n);
    h(sel, sel) = 1.0;
    return h;
  };
  spec.vt = [sel, ref, channel](const VectorXd& x, double t) {
    return -(x(sel) - ref.pos(channel, t)) * ref.vel(channel, t);
  };
  spec.grad_t = [n, sel, ref, channel](const VectorXd&, double t) {
    VectorXd g = VectorXd::Zero(n);
    g(sel) = -ref.vel(channel, t);
    return g;
  };
  spec.vtt = [sel, ref, channel](const VectorXd& x, double t) {
    const double vel = ref.vel(channel, t);
    return vel * vel - (x(sel) - ref.pos(channel, t)) * ref.acc(channel, t);
  };
  return spec;
}

}  // namespace hocbf

#endif  // HOCBF_CLF_CHAIN_HPP
