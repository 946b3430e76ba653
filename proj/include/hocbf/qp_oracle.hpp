#ifndef HOCBF_QP_ORACLE_HPP
#define HOCBF_QP_ORACLE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "hocbf/errors.hpp"
#include "hocbf/qp_types.hpp"

namespace hocbf {

// Reference solver used to certify the closed-form controllers.  It knows
// nothing about the branch formulas: it enumerates every active subset of
// the (at most two) rows, solves the equality-constrained KKT system of
// each by dense LU, and keeps the feasible candidate with the smallest
// objective.  Deliberately brute force; only ever run on tiny problems.
//
// Objective: 1/2 ||u - center||^2 (+ 1/2 rho sigma^2 when has_slack).
// Soft rows read gamma + a^T u + sigma >= 0; hard rows have no slack.
struct TinyQP {
  Eigen::VectorXd center;
  std::vector<ConstraintRow> rows;
  double rho = 1.0;
  bool has_slack = false;
};

struct OracleSolution {
  Eigen::VectorXd u;
  double sigma = 0.0;
  Eigen::VectorXd mu;       // one multiplier per row, zero when inactive
  std::vector<int> active;  // row indices of the winning active set
  double objective = 0.0;
};

namespace oracle_detail {

constexpr double kPrimalTol = 1e-10;
constexpr double kDualTol = 1e-12;

inline double row_value(const ConstraintRow& row, const Eigen::VectorXd& u,
                        double sigma, bool has_slack) {
  double v = row.gamma + row.a.dot(u);
  if (has_slack && row.kind == ConstraintKind::ClfSoft) v += sigma;
  return v;
}

}  // namespace oracle_detail

inline void validate(const TinyQP& qp) {
  if (qp.center.size() == 0) throw ContractError("oracle needs a center point");
  if (qp.has_slack && !(qp.rho > 0.0))
    throw ConfigError("slack weight rho must be positive");
  int soft = 0;
  for (const auto& row : qp.rows) {
    if (row.a.size() != qp.center.size())
      throw ContractError("row dimension does not match the decision variable");
    if (row.kind == ConstraintKind::ClfSoft) ++soft;
  }
  if (soft > 1) throw ContractError("at most one soft row is supported");
}

inline OracleSolution solve_enumerate(const TinyQP& qp) {
  validate(qp);
  const int m = static_cast<int>(qp.center.size());
  const int k = static_cast<int>(qp.rows.size());
  const int ns = qp.has_slack ? 1 : 0;

  // Subsets ordered by size then index, so equal-objective ties resolve to
  // the smaller active set.
  std::vector<std::vector<int>> subsets{{}};
  for (int i = 0; i < k; ++i) subsets.push_back({i});
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) subsets.push_back({i, j});

  bool found = false;
  OracleSolution best;
  for (const auto& active : subsets) {
    const int na = static_cast<int>(active.size());
    const int dim = m + ns + na;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    kkt.topLeftCorner(m, m).setIdentity();
    rhs.head(m) = qp.center;
    if (ns) kkt(m, m) = qp.rho;
    for (int a = 0; a < na; ++a) {
      const ConstraintRow& row = qp.rows[active[a]];
      const int c = m + ns + a;
      kkt.block(0, c, m, 1) = -row.a;
      kkt.block(c, 0, 1, m) = row.a.transpose();
      if (ns && row.kind == ConstraintKind::ClfSoft) {
        kkt(m, c) = -1.0;
        kkt(c, m) = 1.0;
      }
      rhs(c) = -row.gamma;
    }

    const Eigen::VectorXd z = kkt.partialPivLu().solve(rhs);
    // A singular system (dependent active rows) produces garbage; the
    // residual check screens that out instead of a rank query.
    const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    if (!z.allFinite() ||
        (kkt * z - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * scale)
      continue;

    OracleSolution cand;
    cand.u = z.head(m);
    cand.sigma = ns ? z(m) : 0.0;
    cand.mu = Eigen::VectorXd::Zero(k);
    bool dual_ok = true;
    for (int a = 0; a < na; ++a) {
      cand.mu(active[a]) = z(m + ns + a);
      if (z(m + ns + a) < -oracle_detail::kDualTol * scale) dual_ok = false;
    }
    if (!dual_ok) continue;
    bool primal_ok = true;
    for (const auto& row : qp.rows)
      if (oracle_detail::row_value(row, cand.u, cand.sigma, qp.has_slack) <
          -oracle_detail::kPrimalTol * scale)
        primal_ok = false;
    if (!primal_ok) continue;

    cand.active = active;
    cand.objective = 0.5 * (cand.u - qp.center).squaredNorm() +
                     (ns ? 0.5 * qp.rho * cand.sigma * cand.sigma : 0.0);
    if (!found || cand.objective < best.objective - 1e-12) {
      best = cand;
      found = true;
    }
  }

  if (!found) {
    int worst = -1;
    double worst_v = 0.0;
    for (int i = 0; i < k; ++i) {
      const double v = oracle_detail::row_value(qp.rows[i], qp.center, 0.0,
                                                qp.has_slack);
      if (worst < 0 || v < worst_v) {
        worst = i;
        worst_v = v;
      }
    }
    throw InfeasibleError("no feasible active set; most violated row " +
                          std::to_string(worst) + " with value " +
                          std::to_string(worst_v));
  }
  return best;
}

// First-order optimality residuals of a candidate point for a TinyQP.
struct KktReport {
  double stationarity = 0.0;    // gradient of the Lagrangian, inf norm
  double primal = 0.0;          // worst constraint violation (>= 0)
  double dual = 0.0;            // worst multiplier negativity (>= 0)
  // Worst min(|mu_i|, |row_i|): the natural residual, so a large multiplier
  // on a row that is tight to rounding does not register as a violation.
  double complementarity = 0.0;
  bool pass = false;
};

inline KktReport verify_kkt(const TinyQP& qp, const Eigen::VectorXd& u,
                            double sigma, const Eigen::VectorXd& mu,
                            double tol = 1e-9) {
  validate(qp);
  if (mu.size() != static_cast<Eigen::Index>(qp.rows.size()))
    throw ContractError("multiplier count does not match row count");

  KktReport report;
  Eigen::VectorXd grad_u = u - qp.center;
  double grad_sigma = qp.has_slack ? qp.rho * sigma : 0.0;
  for (size_t i = 0; i < qp.rows.size(); ++i) {
    const ConstraintRow& row = qp.rows[i];
    grad_u -= mu(i) * row.a;
    if (qp.has_slack && row.kind == ConstraintKind::ClfSoft) grad_sigma -= mu(i);
    const double v = oracle_detail::row_value(row, u, sigma, qp.has_slack);
    report.primal = std::max(report.primal, -v);
    report.dual = std::max(report.dual, -mu(i));
    report.complementarity = std::max(
        report.complementarity, std::min(std::fabs(mu(i)), std::fabs(v)));
  }
  report.stationarity =
      std::max(grad_u.lpNorm<Eigen::Infinity>(), std::fabs(grad_sigma));
  report.pass = report.stationarity <= tol && report.primal <= tol &&
                report.dual <= tol && report.complementarity <= tol;
  return report;
}

}  // namespace hocbf

#endif  // HOCBF_QP_ORACLE_HPP
