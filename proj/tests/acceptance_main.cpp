// Acceptance gate for the toolkit: nine end-to-end checks, one line each.
// Exits nonzero if any check fails, so CI can gate on this binary alone.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "hocbf/barrier_chain.hpp"
#include "hocbf/clf_chain.hpp"
#include "hocbf/config_io.hpp"
#include "hocbf/csv_io.hpp"
#include "hocbf/solvers.hpp"
#include "hocbf/verify.hpp"

#ifndef HOCBF_CONFIG_DIR
#error "HOCBF_CONFIG_DIR must point at the bundled configs directory"
#endif

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", idx,
              detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

std::string config_path(const char* name) {
  return std::string(HOCBF_CONFIG_DIR) + "/" + name;
}

Eigen::VectorXd draw_vec(std::mt19937_64& rng, int m, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = dist(rng);
  return v;
}

hocbf::BarrierSpec angle_barrier(int sel, double bound) {
  hocbf::BarrierSpec spec;
  spec.rel_degree = 2;
  spec.betas = {hocbf::ClassKSpec::linear(1.0), hocbf::ClassKSpec::linear(1.0)};
  spec.value = [sel, bound](const Eigen::VectorXd& x) { return x(sel) - bound; };
  spec.gradient = [sel](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    g(sel) = 1.0;
    return g;
  };
  spec.hessian = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(x.size(), x.size());
  };
  return spec;
}

// 1. Every closed-form controller agrees with the enumeration oracle on
//    1e4 random instances per family, with clean KKT certificates, fast.
void criterion_closed_forms() {
  hocbf::VerifyOptions opt;
  opt.samples = 40000;  // four families cycled round-robin
  opt.seed = 7;
  const hocbf::VerifyOutcome out = hocbf::verify_closed_forms(opt);
  const bool ok = out.pass() && out.max_u_dev <= 1e-8 &&
                  out.max_sigma_dev <= 1e-8 && out.max_kkt <= 1e-9 &&
                  out.elapsed_seconds < 10.0;
  report(1, ok,
         fmt("closed forms vs oracle on %zu instances: max u dev %.2g, "
             "max sigma dev %.2g, max KKT %.2g, %.2f s",
             out.samples, out.max_u_dev, out.max_sigma_dev, out.max_kkt,
             out.elapsed_seconds));
}

// 2. The safety filter returns the nominal input bit-for-bit whenever the
//    nominal already satisfies the constraint row.
void criterion_filter_exactness() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  const std::size_t total = 1000;
  std::size_t exact = 0;
  for (std::size_t k = 0; k < total; ++k) {
    const int m = 1 + static_cast<int>(k % 3);
    const Eigen::VectorXd u_nom = draw_vec(rng, m, -3.0, 3.0);
    Eigen::VectorXd a = draw_vec(rng, m, -2.0, 2.0);
    while (a.lpNorm<Eigen::Infinity>() < 0.05) a = draw_vec(rng, m, -2.0, 2.0);
    double gb = unif(rng);
    const double margin = gb + a.dot(u_nom);
    if (margin < 0.0) gb -= 2.0 * margin;  // reflect into feasibility
    const hocbf::ControllerOutput out =
        hocbf::safety_filter(u_nom, hocbf::cbf_row(gb, a));
    if ((out.u.array() == u_nom.array()).all()) ++exact;
  }
  report(2, exact == total,
         fmt("safety filter exact on %zu of %zu feasible nominals", exact,
             total));
}

// 3. The bundled tunable scenario keeps its inflated margins nonnegative
//    under the full-strength matched disturbance, and rides the boundary
//    strictly tighter than the non-tunable min-norm comparator.
void criterion_case1() {
  const hocbf::Scenario case1 =
      hocbf::load_scenario_file(config_path("case1.json"));
  const hocbf::TrajectoryRecord tissf = hocbf::run_scenario(case1);

  hocbf::Scenario cmp = case1;
  cmp.name = "case1_comparator";
  cmp.controller = hocbf::ControllerKind::MinNorm;
  const hocbf::TrajectoryRecord plain = hocbf::run_scenario(cmp);

  const hocbf::Metrics& mt = tissf.metrics;
  const hocbf::Metrics& mp = plain.metrics;
  const bool ok = !tissf.diverged && mt.min_phi_issf[0] >= -1e-6 &&
                  mt.min_phi_issf[1] >= -1e-6 &&
                  mp.min_phi0_overall < mt.min_phi0_overall;
  report(3, ok,
         fmt("case 1: min inflated margin (%.3g, %.3g) >= -1e-6; "
             "comparator min phi0 %.3g < tunable min phi0 %.3g",
             mt.min_phi_issf[0], mt.min_phi_issf[1], mp.min_phi0_overall,
             mt.min_phi0_overall));
}

// 4. The bundled filtered scenario keeps its inflated margins nonnegative
//    and never modifies a feasible nominal input.
void criterion_case2() {
  const hocbf::Scenario case2 =
      hocbf::load_scenario_file(config_path("case2.json"));
  const hocbf::TrajectoryRecord rec = hocbf::run_scenario(case2);
  const hocbf::Metrics& m = rec.metrics;
  const bool ok = !rec.diverged && m.min_phi_issf[0] >= -1e-6 &&
                  m.min_phi_issf[1] >= -1e-6 && m.has_filter_metrics &&
                  m.filter_feasible_max_dev == 0.0;
  report(4, ok,
         fmt("case 2: min inflated margin (%.3g, %.3g) >= -1e-6; "
             "max deviation on feasible steps %.3g",
             m.min_phi_issf[0], m.min_phi_issf[1], m.filter_feasible_max_dev));
}

// 5. The completing-the-square bound behind the tightening term holds on
//    random (q, epsilon, gamma) triples.
void criterion_completing_square() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> q_dist(0.0, 10.0);
  std::uniform_real_distribution<double> eps_dist(1e-6, 10.0);
  std::uniform_real_distribution<double> g_dist(0.0, 10.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    const double q = q_dist(rng), eps = eps_dist(rng), g = g_dist(rng);
    worst = std::min(worst, q * q / eps - q * g + eps * g * g / 4.0);
  }
  report(5, worst >= -1e-12,
         fmt("completing-the-square residual >= %.3g on 10000 triples", worst));
}

// 6. The robustness gain stays strictly inside (0, 1/epsilon0) at the
//    published slope.  phi is sampled above the threshold where the offset
//    exponential is still representable next to epsilon0 in doubles.
void criterion_epsilon_range() {
  hocbf::TissfParams tp;
  tp.epsilon0 = 0.06;
  tp.varsigma = 200.0;
  tp.gamma = 10.0;
  tp.form = hocbf::TunableForm::PaperReciprocal;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> phi_dist(-0.15, 1.5);
  const double cap = 1.0 / tp.epsilon0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool ok = true;
  for (int k = 0; k < 10000; ++k) {
    const double e = hocbf::epsilon_of(tp, phi_dist(rng));
    ok = ok && e > 0.0 && e < cap;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  report(6, ok,
         fmt("epsilon in [%.3g, %.3g] on 10000 draws, open bound %.4g", lo, hi,
             cap));
}

// 7. Analytic chain gradients match central finite differences.
void criterion_gradients() {
  const hocbf::PendulumParams pp;
  const hocbf::PlantModel plant =
      hocbf::pendulum_spring_cart(pp, hocbf::DisturbanceChannel::Matched);
  const hocbf::ReferenceSignal ref = hocbf::reference_from_name("paper_sine");
  const hocbf::ClassKSpec lin = hocbf::ClassKSpec::linear(1.0);

  std::array<hocbf::BarrierSpec, 2> barrier{angle_barrier(0, -0.3),
                                            angle_barrier(2, -0.3)};
  std::array<hocbf::LyapunovSpec, 2> clf{
      hocbf::make_tracking_clf(4, 0, ref, 0, lin, lin),
      hocbf::make_tracking_clf(4, 2, ref, 1, lin, lin)};

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> x_dist(-0.5, 0.5);
  std::uniform_real_distribution<double> t_dist(0.0, 6.0);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x(j) = x_dist(rng);
    const double t = t_dist(rng);
    for (int i = 0; i < 2; ++i) {
      const hocbf::ChainEval ce = hocbf::eval_chain(barrier[i], plant, x);
      const hocbf::ClfEval le = hocbf::eval_clf_chain(clf[i], plant, x, t);
      for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const double fd_b = (hocbf::eval_chain(barrier[i], plant, xp).phi.back() -
                             hocbf::eval_chain(barrier[i], plant, xm).phi.back()) /
                            (2.0 * h);
        worst = std::max(worst, std::fabs(fd_b - ce.grad_top(j)) /
                                    std::max(1.0, std::fabs(ce.grad_top(j))));
        const double fd_v =
            (hocbf::eval_clf_chain(clf[i], plant, xp, t).phi.back() -
             hocbf::eval_clf_chain(clf[i], plant, xm, t).phi.back()) /
            (2.0 * h);
        worst = std::max(worst, std::fabs(fd_v - le.grad_top(j)) /
                                    std::max(1.0, std::fabs(le.grad_top(j))));
      }
      const double fd_t =
          (hocbf::eval_clf_chain(clf[i], plant, x, t + h).phi.back() -
           hocbf::eval_clf_chain(clf[i], plant, x, t - h).phi.back()) /
          (2.0 * h);
      worst = std::max(worst, std::fabs(fd_t - le.dt_top) /
                                  std::max(1.0, std::fabs(le.dt_top)));
    }
  }
  report(7, worst <= 1e-5,
         fmt("chain gradients vs central differences: worst relative error "
             "%.3g at 200 states",
             worst));
}

// 8. Without disturbance, the min-norm controller keeps every barrier chain
//    level nonnegative over the full horizon when started inside the set.
void criterion_invariance() {
  hocbf::Scenario sc = hocbf::load_scenario_file(config_path("case1.json"));
  sc.name = "case1_undisturbed";
  sc.controller = hocbf::ControllerKind::MinNorm;
  sc.disturbance = hocbf::DisturbanceProfile{};
  const hocbf::TrajectoryRecord rec = hocbf::run_scenario(sc);
  const hocbf::Metrics& m = rec.metrics;
  const bool ok = !rec.diverged && rec.rows.size() == 20001 &&
                  m.min_phi0[0] >= -1e-6 && m.min_phi0[1] >= -1e-6 &&
                  m.min_phi1[0] >= -1e-6 && m.min_phi1[1] >= -1e-6;
  report(8, ok,
         fmt("undisturbed min-norm run: min phi0 (%.3g, %.3g), "
             "min phi1 (%.3g, %.3g), all >= -1e-6",
             m.min_phi0[0], m.min_phi0[1], m.min_phi1[0], m.min_phi1[1]));
}

// 9. Identical configs reproduce byte-identical trajectories.
void criterion_determinism() {
  const hocbf::Scenario case1 =
      hocbf::load_scenario_file(config_path("case1.json"));
  const std::string a = hocbf::format_trajectory_csv(hocbf::run_scenario(case1));
  const std::string b = hocbf::format_trajectory_csv(hocbf::run_scenario(case1));
  report(9, !a.empty() && a == b,
         fmt("repeated case 1 runs: %zu CSV bytes, byte-identical %s",
             a.size(), a == b ? "yes" : "no"));
}

}  // namespace

int main() {
  using Criterion = void (*)();
  const Criterion checks[] = {
      criterion_closed_forms, criterion_filter_exactness, criterion_case1,
      criterion_case2,        criterion_completing_square, criterion_epsilon_range,
      criterion_gradients,    criterion_invariance,        criterion_determinism};
  int idx = 0;
  for (const Criterion check : checks) {
    ++idx;
    try {
      check();
    } catch (const std::exception& e) {
      report(idx, false, fmt("threw: %s", e.what()));
    }
  }
  if (g_failures == 0)
    std::printf("all 9 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
