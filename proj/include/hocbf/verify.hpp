#ifndef HOCBF_VERIFY_HPP
#define HOCBF_VERIFY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hocbf/qp_oracle.hpp"
#include "hocbf/solvers.hpp"

namespace hocbf {

// =========================================================================
// Random cross-check of every closed-form controller against the
// enumeration oracle.  Instances cycle through the four controller shapes
// and input dimensions 1..3; each closed-form answer must match the oracle
// to tight absolute tolerance and carry a clean KKT certificate.
// =========================================================================

struct VerifyOptions {
  std::size_t samples = 10000;  // total across all families
  std::uint64_t seed = 7;
  // Test hook: added to the first closed-form input component before
  // comparison, so the failure path itself can be exercised.
  double perturb = 0.0;
  double dev_tol = 1e-8;
  double kkt_tol = 1e-9;
};

struct VerifyMismatch {
  std::string family;
  std::size_t index = 0;
  double u_dev = 0.0;
  double sigma_dev = 0.0;
  double kkt = 0.0;
};

struct VerifyOutcome {
  std::size_t samples = 0;
  double max_u_dev = 0.0;
  double max_sigma_dev = 0.0;
  double max_kkt = 0.0;
  double elapsed_seconds = 0.0;
  std::vector<VerifyMismatch> mismatches;
  bool pass() const { return mismatches.empty(); }
};

namespace verify_detail {

inline Eigen::VectorXd draw_vec(std::mt19937_64& rng, int m, double lo,
                                double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = dist(rng);
  return v;
}

// Constraint rows get a conditioning floor: a near-null row makes both the
// closed form and the LU factorization divide by ~0, and agreement at 1e-8
// absolute is only meaningful on well-posed instances.
inline Eigen::VectorXd draw_row(std::mt19937_64& rng, int m) {
  for (;;) {
    Eigen::VectorXd v = draw_vec(rng, m, -2.0, 2.0);
    if (v.lpNorm<Eigen::Infinity>() >= 0.05) return v;
  }
}

}  // namespace verify_detail

inline VerifyOutcome verify_closed_forms(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> gamma_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> rho_dist(0.1, 10.0);
  std::uniform_real_distribution<double> eps0_dist(0.1, 5.0);
  std::uniform_real_distribution<double> slope_dist(0.0, 3.0);
  std::uniform_real_distribution<double> bound_dist(0.0, 3.0);
  std::uniform_real_distribution<double> phi_dist(-1.0, 1.0);

  static const char* kFamilies[] = {"minnorm", "filter", "tissf_minnorm",
                                    "tissf_filter"};

  VerifyOutcome outcome;
  const auto t_start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < opt.samples; ++k) {
    const char* family = kFamilies[k % 4];
    const int m = 1 + static_cast<int>((k / 4) % 3);

    ConstraintRow cbf =
        cbf_row(gamma_dist(rng), verify_detail::draw_row(rng, m));
    ControllerOutput closed;
    TinyQP qp;

    if (family == std::string("minnorm") ||
        family == std::string("tissf_minnorm")) {
      ConstraintRow clf =
          clf_row(gamma_dist(rng), verify_detail::draw_row(rng, m));
      const double rho = rho_dist(rng);
      if (family == std::string("tissf_minnorm")) {
        TissfParams tp;
        tp.epsilon0 = eps0_dist(rng);
        tp.varsigma = slope_dist(rng);
        tp.gamma = bound_dist(rng);
        const Eigen::VectorXd lg2 = verify_detail::draw_vec(rng, 2, -2.0, 2.0);
        const double phi_top = phi_dist(rng);
        const ClassKSpec beta_r = ClassKSpec::linear(1.0);
        closed = tissf_minnorm(clf, cbf, lg2, phi_top, tp, beta_r, rho);
        cbf.gamma -= issf_rhs(tp, lg2, phi_top);  // oracle sees the enforced row
      } else {
        closed = minnorm_clf_cbf(clf, cbf, rho);
      }
      qp.center = Eigen::VectorXd::Zero(m);
      qp.rows = {clf, cbf};
      qp.rho = rho;
      qp.has_slack = true;
    } else {
      const Eigen::VectorXd nominal = verify_detail::draw_vec(rng, m, -3.0, 3.0);
      if (family == std::string("tissf_filter")) {
        TissfParams tp;
        tp.epsilon0 = eps0_dist(rng);
        tp.varsigma = slope_dist(rng);
        tp.gamma = bound_dist(rng);
        const Eigen::VectorXd lg2 = verify_detail::draw_vec(rng, 2, -2.0, 2.0);
        const double phi_top = phi_dist(rng);
        closed = tissf_filter(nominal, cbf, lg2, phi_top, tp);
        cbf.gamma -= issf_rhs(tp, lg2, phi_top);
      } else {
        closed = safety_filter(nominal, cbf);
      }
      qp.center = nominal;
      qp.rows = {cbf};
      qp.has_slack = false;
    }

    Eigen::VectorXd u_closed = closed.u;
    if (opt.perturb != 0.0) u_closed(0) += opt.perturb;

    const OracleSolution oracle = solve_enumerate(qp);
    const double u_dev = (u_closed - oracle.u).lpNorm<Eigen::Infinity>();
    const double sigma_dev =
        qp.has_slack ? std::fabs(closed.sigma - oracle.sigma) : 0.0;

    Eigen::VectorXd mu(qp.rows.size());
    if (qp.rows.size() == 2)
      mu << closed.mu_clf, closed.mu_cbf;
    else
      mu << closed.mu_cbf;
    const KktReport kkt = verify_kkt(qp, u_closed, closed.sigma, mu, opt.kkt_tol);
    const double kkt_worst =
        std::max({kkt.stationarity, kkt.primal, kkt.dual, kkt.complementarity});

    outcome.max_u_dev = std::max(outcome.max_u_dev, u_dev);
    outcome.max_sigma_dev = std::max(outcome.max_sigma_dev, sigma_dev);
    outcome.max_kkt = std::max(outcome.max_kkt, kkt_worst);
    ++outcome.samples;
    if (u_dev > opt.dev_tol || sigma_dev > opt.dev_tol || !kkt.pass)
      outcome.mismatches.push_back({family, k, u_dev, sigma_dev, kkt_worst});
  }
  outcome.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return outcome;
}

}  // namespace hocbf

#endif  // HOCBF_VERIFY_HPP
