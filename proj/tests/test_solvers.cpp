#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hocbf/qp_oracle.hpp"
#include "hocbf/solvers.hpp"
#include "hocbf/verify.hpp"

using namespace hocbf;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> entries) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v(i++) = e;
  return v;
}

// Constant gain so issf_rhs is hand-computable: eps = 1/(eps0 + 1).
TissfParams flat_gain(double eps0) {
  TissfParams tp;
  tp.epsilon0 = eps0;
  tp.varsigma = 0.0;
  tp.gamma = 0.0;
  return tp;
}

}  // namespace

TEST_CASE("both rows slack at zero input") {
  const auto out = minnorm_clf_cbf(clf_row(1.0, vec({1.0})),
                                   cbf_row(1.0, vec({1.0})), 1.0);
  CHECK(out.u(0) == 0.0);
  CHECK(out.sigma == 0.0);
  CHECK_FALSE(out.clf_active);
  CHECK_FALSE(out.cbf_active);
  CHECK(out.region == "Omega1");
  CHECK(std::isnan(out.gamma_d));
}

TEST_CASE("soft row active alone") {
  const auto out = minnorm_clf_cbf(clf_row(-1.0, vec({1.0})),
                                   cbf_row(1.0, vec({1.0})), 1.0);
  // mu1 = 1/(1/rho + 1) and every quantity here is dyadic, so exact compares
  CHECK(out.u(0) == 0.5);
  CHECK(out.sigma == 0.5);
  CHECK(out.mu_clf == 0.5);
  CHECK(out.mu_cbf == 0.0);
  CHECK(out.clf_active);
  CHECK_FALSE(out.cbf_active);
  CHECK(out.region == "Omega4");
}

TEST_CASE("hard row active alone") {
  const auto out = minnorm_clf_cbf(clf_row(1.0, vec({1.0})),
                                   cbf_row(-2.0, vec({1.0})), 1.0);
  CHECK(out.u(0) == 2.0);
  CHECK(out.sigma == 0.0);
  CHECK(out.mu_cbf == 2.0);
  CHECK(out.cbf_active);
  CHECK_FALSE(out.clf_active);
}

TEST_CASE("degenerate boundary keeps the smaller active set") {
  // Both rows are tight at the optimum (u = 1 makes each margin exactly
  // zero) but the hard multiplier is 0 there, so the soft-only branch wins.
  const auto out = minnorm_clf_cbf(clf_row(-2.0, vec({1.0})),
                                   cbf_row(-1.0, vec({1.0})), 1.0);
  CHECK(out.u(0) == 1.0);
  CHECK(out.sigma == 1.0);
  CHECK(out.mu_clf == 1.0);
  CHECK(out.mu_cbf == 0.0);
  CHECK(out.clf_active);
  CHECK_FALSE(out.cbf_active);
  CHECK(-1.0 + out.u(0) == 0.0);  // hard row tight despite zero multiplier

  TinyQP qp;
  qp.center = Eigen::VectorXd::Zero(1);
  qp.rows = {clf_row(-2.0, vec({1.0})), cbf_row(-1.0, vec({1.0}))};
  qp.rho = 1.0;
  qp.has_slack = true;
  const auto ref = solve_enumerate(qp);
  CHECK(ref.u(0) == out.u(0));
  CHECK(ref.sigma == out.sigma);
}

TEST_CASE("both multipliers strictly positive") {
  const auto clf = clf_row(-1.0, vec({-1.0}));
  const auto cbf = cbf_row(-1.0, vec({1.0}));
  const auto out = minnorm_clf_cbf(clf, cbf, 1.0);
  CHECK(out.u(0) == 1.0);
  CHECK(out.sigma == 2.0);
  CHECK(out.mu_clf == 2.0);
  CHECK(out.mu_cbf == 3.0);
  CHECK(out.clf_active);
  CHECK(out.cbf_active);

  TinyQP qp;
  qp.center = Eigen::VectorXd::Zero(1);
  qp.rows = {clf, cbf};
  qp.rho = 1.0;
  qp.has_slack = true;
  const auto ref = solve_enumerate(qp);
  CHECK(std::fabs(ref.u(0) - out.u(0)) <= 1e-12);
  CHECK(std::fabs(ref.sigma - out.sigma) <= 1e-12);
}

TEST_CASE("unsatisfiable hard row") {
  CHECK_THROWS_AS(minnorm_clf_cbf(clf_row(-1.0, vec({1.0})),
                                  cbf_row(-1.0, vec({0.0})), 1.0),
                  InfeasibleError);
}

TEST_CASE("minnorm input validation") {
  CHECK_THROWS_AS(minnorm_clf_cbf(clf_row(0.0, vec({1.0})),
                                  cbf_row(0.0, vec({1.0})), 0.0),
                  ConfigError);
  CHECK_THROWS_AS(minnorm_clf_cbf(cbf_row(0.0, vec({1.0})),
                                  cbf_row(0.0, vec({1.0})), 1.0),
                  ContractError);
  CHECK_THROWS_AS(minnorm_clf_cbf(clf_row(0.0, vec({1.0, 2.0})),
                                  cbf_row(0.0, vec({1.0})), 1.0),
                  ContractError);
}

TEST_CASE("filter passes a feasible nominal through untouched") {
  const Eigen::VectorXd nominal = vec({0.3, -0.7});
  const auto out = safety_filter(nominal, cbf_row(0.5, vec({0.2, 0.1})));
  CHECK(out.u(0) == nominal(0));
  CHECK(out.u(1) == nominal(1));
  CHECK_FALSE(out.cbf_active);
  CHECK(out.enforceable);
  CHECK(out.region == "filter_inactive");
}

TEST_CASE("filter with no input authority") {
  const Eigen::VectorXd nominal = vec({0.7});
  const auto ok = safety_filter(nominal, cbf_row(1.0, vec({0.0})));
  CHECK(ok.u(0) == 0.7);
  CHECK(ok.enforceable);

  const auto bad = safety_filter(nominal, cbf_row(-2.0, vec({0.0})));
  CHECK(bad.u(0) == 0.7);
  CHECK_FALSE(bad.enforceable);
  CHECK(bad.region == "filter_unenforceable");
}

TEST_CASE("filter projects onto the violated row") {
  const auto out = safety_filter(vec({0.0}), cbf_row(-2.0, vec({1.0})));
  CHECK(out.u(0) == 2.0);
  CHECK(out.mu_cbf == 2.0);
  CHECK(out.cbf_active);
  CHECK(out.region == "filter_active");
  CHECK(-2.0 + out.u(0) == 0.0);
}

TEST_CASE("filter idempotence on feasible instances") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::uniform_real_distribution<double> slackd(0.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const int m = 1 + k % 3;
    Eigen::VectorXd a(m), nominal(m);
    for (int i = 0; i < m; ++i) {
      a(i) = entry(rng);
      nominal(i) = entry(rng);
    }
    // margin made nonnegative by construction
    const auto cbf = cbf_row(-a.dot(nominal) + slackd(rng), a);
    const auto out = safety_filter(nominal, cbf);
    for (int i = 0; i < m; ++i) REQUIRE(out.u(i) == nominal(i));
  }
}

TEST_CASE("filter deviation is minimal among feasible points") {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const int m = 2 + k % 2;
    Eigen::VectorXd a(m), nominal(m);
    do {
      for (int i = 0; i < m; ++i) a(i) = entry(rng);
    } while (a.lpNorm<Eigen::Infinity>() < 0.5);
    for (int i = 0; i < m; ++i) nominal(i) = entry(rng);
    const auto cbf = cbf_row(-a.dot(nominal) - 1.0, a);  // violated at nominal
    const auto out = safety_filter(nominal, cbf);
    REQUIRE(out.cbf_active);
    const double dev = (out.u - nominal).norm();
    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd cand(m);
      for (int i = 0; i < m; ++i) cand(i) = out.u(i) + entry(rng);
      if (cbf.gamma + a.dot(cand) < 0.0) continue;
      REQUIRE((cand - nominal).norm() >= dev - 1e-9);
    }
  }
}

TEST_CASE("zero disturbance row reduces the robust controller to the plain one") {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::uniform_real_distribution<double> marg(-2.0, 2.0);
  TissfParams tp;
  tp.gamma = 3.0;
  const ClassKSpec beta_r = ClassKSpec::linear(1.0);
  for (int k = 0; k < 200; ++k) {
    const int m = 1 + k % 3;
    Eigen::VectorXd av(m), ab(m);
    do {
      for (int i = 0; i < m; ++i) {
        av(i) = entry(rng);
        ab(i) = entry(rng);
      }
    } while (ab.lpNorm<Eigen::Infinity>() < 0.5);
    const auto clf = clf_row(marg(rng), av);
    const auto cbf = cbf_row(marg(rng), ab);
    const auto plain = minnorm_clf_cbf(clf, cbf, 2.0);
    const auto robust = tissf_minnorm(clf, cbf, Eigen::VectorXd::Zero(2), 0.1,
                                      tp, beta_r, 2.0);
    for (int i = 0; i < m; ++i) REQUIRE(robust.u(i) == plain.u(i));
    REQUIRE(robust.sigma == plain.sigma);
    REQUIRE(robust.clf_active == plain.clf_active);
    REQUIRE(robust.cbf_active == plain.cbf_active);
    REQUIRE(std::isfinite(robust.gamma_d));  // diagnostic attached
  }
}

TEST_CASE("robust min-norm tightens the hard row") {
  // eps = 1/(1 + 1) = 0.5, so a unit disturbance row costs 2 of margin.
  const auto out = tissf_minnorm(clf_row(1.0, vec({1.0})),
                                 cbf_row(1.0, vec({1.0})), vec({1.0}), 0.2,
                                 flat_gain(1.0), ClassKSpec::linear(1.0), 1.0);
  CHECK(out.u(0) == 1.0);
  CHECK(out.cbf_active);
  CHECK(out.mu_cbf == 1.0);
  CHECK(out.gamma_d == 1.0);  // gamma = 0 adds no inflation
}

TEST_CASE("inflated margin diagnostic") {
  TissfParams tp;
  tp.epsilon0 = 0.06;
  tp.varsigma = 200.0;
  tp.gamma = 10.0;
  const auto out =
      tissf_minnorm(clf_row(1.0, vec({1.0})), cbf_row(2.0, vec({1.0})),
                    vec({0.0}), 0.0, tp, ClassKSpec::linear(1.0), 1.0);
  CHECK(out.gamma_d == Catch::Approx(2.0 + 25.0 / 1.06));
}

TEST_CASE("robust filter tightens and projects") {
  // eps = 1/(3 + 1) = 0.25: unit disturbance row costs 4 of margin.
  const auto out = tissf_filter(vec({0.0}), cbf_row(1.0, vec({1.0})),
                                vec({1.0}), 0.0, flat_gain(3.0));
  CHECK(out.u(0) == 3.0);
  CHECK(out.cbf_active);
  CHECK(out.region == "filter_active");

  const Eigen::VectorXd nominal = vec({0.4});
  const auto idle = tissf_filter(nominal, cbf_row(1.0, vec({1.0})),
                                 Eigen::VectorXd::Zero(1), 0.0, flat_gain(3.0));
  CHECK(idle.u(0) == nominal(0));
  CHECK(idle.region == "filter_inactive");
}

TEST_CASE("stronger robustification never shrinks the filter correction") {
  const Eigen::VectorXd nominal = vec({0.0});
  const auto cbf = cbf_row(1.0, vec({1.0}));
  const Eigen::VectorXd lg2 = vec({1.0});
  double prev_dev = std::numeric_limits<double>::infinity();
  // eps0 descending -> eps ascending -> weaker tightening
  for (double eps0 : {9.0, 3.0, 1.0, 0.5, 0.1}) {
    const auto out = tissf_filter(nominal, cbf, lg2, 0.0, flat_gain(eps0));
    const double dev = (out.u - nominal).lpNorm<Eigen::Infinity>();
    REQUIRE(dev <= prev_dev + 1e-12);
    prev_dev = dev;
  }
}

TEST_CASE("region labels on pinned points") {
  const auto r1 = classify_region(clf_row(1.0, vec({1.0})),
                                  cbf_row(1.0, vec({1.0})), 1.0);
  CHECK(r1.primary == "Omega1");

  const auto r2 = classify_region(clf_row(1.0, vec({1.0})),
                                  cbf_row(0.0, vec({0.0})), 1.0);
  CHECK(r2.primary == "Omega2");

  // Point where both constraints end up tight at the optimum
  const auto clf = clf_row(-1.0, vec({1.0}));
  const auto cbf = cbf_row(-1.0, vec({1.0}));
  const auto r6 = classify_region(clf, cbf, 1.0);
  CHECK(r6.primary == "Omega6");
  TinyQP qp;
  qp.center = Eigen::VectorXd::Zero(1);
  qp.rows = {clf, cbf};
  qp.rho = 1.0;
  qp.has_slack = true;
  const auto sol = solve_enumerate(qp);
  CHECK(std::fabs(clf.gamma + clf.a.dot(sol.u) + sol.sigma) <= 1e-12);
  CHECK(std::fabs(cbf.gamma + cbf.a.dot(sol.u)) <= 1e-12);

  // The published sets overlap; overlapping points report every label.
  const auto amb = classify_region(clf_row(3.0, vec({2.0})),
                                   cbf_row(0.1, vec({1.0})), 1.0);
  CHECK(amb.primary == "ambiguous");
  CHECK(amb.satisfied.size() == 2);

  CHECK_THROWS_AS(classify_region(clf, cbf, 0.0), ConfigError);
}

TEST_CASE("disturbed region labels") {
  // Third set keeps the raw hard margin, not the inflated one
  const auto d3 = classify_region_disturbed(clf_row(-2.0, vec({1.0})),
                                            cbf_row(-3.0, vec({1.0})), -0.5, 1.0);
  CHECK(d3.primary == "Omega_d3");

  // Fourth set admits gamma_v = 0 (its sign convention differs from the
  // undisturbed fourth set; kept as printed)
  const auto d4 = classify_region_disturbed(clf_row(0.0, vec({1.0})),
                                            cbf_row(-1.0, vec({1.0})), 0.5, 1.0);
  CHECK(d4.primary == "Omega_d4");
}

TEST_CASE("controller is continuous across branch boundaries") {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> entry(-1.5, 1.5);
  std::uniform_real_distribution<double> marg(-2.0, 2.0);
  std::uniform_real_distribution<double> rho_dist(0.5, 3.0);

  auto draw_dir = [&](int m) {
    Eigen::VectorXd v(m);
    do {
      for (int i = 0; i < m; ++i) v(i) = entry(rng);
    } while (v.lpNorm<Eigen::Infinity>() < 0.7);
    return v;
  };

  int boundaries = 0;
  for (int seg = 0; seg < 100; ++seg) {
    const int m = 1 + seg % 3;
    const Eigen::VectorXd av = draw_dir(m), ab = draw_dir(m);
    const double gv0 = marg(rng), gv1 = marg(rng);
    const double gb0 = marg(rng), gb1 = marg(rng);
    const double rho = rho_dist(rng);

    auto solve_at = [&](double t) {
      return minnorm_clf_cbf(clf_row(gv0 + t * (gv1 - gv0), av),
                             cbf_row(gb0 + t * (gb1 - gb0), ab), rho);
    };
    auto branch_of = [](const ControllerOutput& o) {
      return (o.clf_active ? 2 : 0) + (o.cbf_active ? 1 : 0);
    };

    const int coarse = 50;
    auto prev = solve_at(0.0);
    for (int k = 1; k <= coarse; ++k) {
      const double t = static_cast<double>(k) / coarse;
      auto cur = solve_at(t);
      if (branch_of(cur) != branch_of(prev)) {
        // bisect to the activation boundary, then step 1e-8 across it
        double lo = static_cast<double>(k - 1) / coarse, hi = t;
        const int blo = branch_of(prev);
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (branch_of(solve_at(mid)) == blo ? lo : hi) = mid;
        }
        const auto before = solve_at(lo - 5e-9);
        const auto after = solve_at(lo + 5e-9);
        REQUIRE((before.u - after.u).lpNorm<Eigen::Infinity>() <= 1e-6);
        REQUIRE(std::fabs(before.sigma - after.sigma) <= 1e-6);
        ++boundaries;
      }
      prev = std::move(cur);
    }
  }
  // the sweep must actually have crossed activation boundaries to mean anything
  CHECK(boundaries > 50);
}

TEST_CASE("robust controller continuity with a frozen gain") {
  TissfParams tp = flat_gain(1.0);
  const ClassKSpec beta_r = ClassKSpec::linear(1.0);
  const Eigen::VectorXd av = vec({1.0}), ab = vec({1.0}), lg2 = vec({0.7});

  auto solve_at = [&](double t) {
    return tissf_minnorm(clf_row(-2.0 + 3.0 * t, av), cbf_row(1.5 - 2.0 * t, ab),
                         lg2, t, tp, beta_r, 1.0);
  };
  auto prev = solve_at(0.0);
  double max_step = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    auto cur = solve_at(k / 2000.0);
    max_step = std::max(max_step,
                        (cur.u - prev.u).lpNorm<Eigen::Infinity>());
    prev = std::move(cur);
  }
  // bounded increments along the whole line: no branch jump anywhere
  CHECK(max_step <= 5e-3);
}

TEST_CASE("closed forms match the enumeration oracle on a random batch") {
  VerifyOptions opt;
  opt.samples = 800;
  opt.seed = 11;
  const auto outcome = verify_closed_forms(opt);
  CHECK(outcome.pass());
  CHECK(outcome.max_u_dev <= 1e-8);
  CHECK(outcome.max_sigma_dev <= 1e-8);
  CHECK(outcome.max_kkt <= 1e-9);
}
