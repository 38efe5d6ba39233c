#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qtomo/montecarlo.hpp"

using namespace qtomo;

namespace {

ProbeConfig fig1_probe() {
  ProbeConfig p;
  p.detuning = 1000;
  p.gamma_e = 1000;
  p.gamma_g = 0.05;
  p.larmor = 1.0;
  p.rabi = 1.0;
  return p;
}

std::vector<double> beta_samples(double a, double b, int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double x = ga(rng), y = gb(rng);
    out[i] = x / (x + y);
  }
  return out;
}

}  // namespace

TEST_CASE("beta fitting recovers known parameters") {
  const BetaFit f = fit_beta(beta_samples(50.0, 2.0, 1000, 31u));
  CHECK(f.a == doctest::Approx(50.0).epsilon(0.15));
  CHECK(f.b == doctest::Approx(2.0).epsilon(0.15));
  CHECK(f.mean == doctest::Approx(50.0 / 52.0).epsilon(0.01));

  const BetaFit u = fit_beta(beta_samples(1.0, 1.0, 2000, 77u));
  CHECK(u.a == doctest::Approx(1.0).epsilon(0.15));
  CHECK(u.b == doctest::Approx(1.0).epsilon(0.15));

  // near-degenerate sample set
  std::vector<double> same(100, 0.999);
  const BetaFit d = fit_beta(same);
  CHECK(d.degenerate);
  CHECK(d.mean == doctest::Approx(0.999));
  CHECK(d.variance == doctest::Approx(0.0));

  CHECK_THROWS_AS(fit_beta(std::vector<double>(10, 0.5)), std::invalid_argument);
}

TEST_CASE("beta moment identities") {
  const BetaFit f = fit_beta(beta_samples(8.0, 3.0, 800, 5u));
  CHECK(f.mean == doctest::Approx(f.a / (f.a + f.b)).epsilon(1e-12));
  CHECK(f.variance ==
        doctest::Approx(f.a * f.b /
                        ((f.a + f.b) * (f.a + f.b) * (f.a + f.b + 1.0)))
            .epsilon(1e-12));
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
  SweepConfig cfg;
  cfg.axis = SweepAxis::snr;
  cfg.grid = {25.0};
  cfg.states = {StateClass::pure};
  cfg.n_states = 5;
  cfg.n_repeats = 6;
  cfg.seed = 99;
  cfg.minimize.restarts = 2;
  const TransitionSpec spec = reference_qutrit();
  const ProbeConfig probe = fig1_probe();

  cfg.threads = 1;
  const auto rows1 = run_sweep(cfg, spec, probe);
  cfg.threads = 2;
  const auto rows2 = run_sweep(cfg, spec, probe);
  const auto rows3 = run_sweep(cfg, spec, probe);

  REQUIRE(rows1.size() == 1);
  CHECK(rows1[0].mean_fidelity == rows2[0].mean_fidelity);
  CHECK(rows2[0].mean_fidelity == rows3[0].mean_fidelity);
  CHECK(rows1[0].var_fidelity == rows2[0].var_fidelity);
  CHECK(rows1[0].beta.a == rows2[0].beta.a);
  CHECK(rows1[0].n_failures == 0);
  CHECK(rows1[0].n_samples == 30);

  // the reference SNR = 25 operating point
  CHECK(rows1[0].mean_fidelity > 0.99);
  CHECK(std::abs(rows1[0].beta.mean - rows1[0].mean_fidelity) <
        2.0 / std::sqrt(30.0));
}

TEST_CASE("fidelity samples live in [0, 1] and config is validated") {
  SweepConfig cfg;
  cfg.grid = {1.0, 5.0};
  cfg.states = {StateClass::thermal};
  cfg.n_states = 3;
  cfg.n_repeats = 10;
  cfg.seed = 7;
  cfg.minimize.restarts = 2;
  const auto rows = run_sweep(cfg, reference_qutrit(), fig1_probe());
  for (const auto& r : rows) {
    CHECK(r.mean_fidelity >= 0.0);
    CHECK(r.mean_fidelity <= 1.0);
    CHECK(r.n_samples + r.n_failures == 30);
  }

  SweepConfig bad = cfg;
  bad.grid = {};
  CHECK_THROWS_AS(run_sweep(bad, reference_qutrit(), fig1_probe()),
                  std::invalid_argument);
  bad = cfg;
  bad.grid = {5.0, 1.0};
  CHECK_THROWS_AS(run_sweep(bad, reference_qutrit(), fig1_probe()),
                  std::invalid_argument);
  bad = cfg;
  bad.n_states = 2;
  bad.n_repeats = 2;
  CHECK_THROWS_AS(run_sweep(bad, reference_qutrit(), fig1_probe()),
                  std::invalid_argument);
}

TEST_CASE("kappa2 sweep smoke: integrator path agrees with analytic at tiny kappa2") {
  SweepConfig cfg;
  cfg.grid = {1e-6};
  cfg.states = {StateClass::pure};
  cfg.n_states = 5;
  cfg.n_repeats = 6;
  cfg.seed = 123;
  cfg.minimize.restarts = 2;
  const TransitionSpec spec = reference_qutrit();
  const ProbeConfig probe = fig1_probe();

  const auto integ = kappa2_sweep(cfg, spec, probe);
  REQUIRE(integ.size() == 1);
  CHECK(integ[0].n_failures == 0);

  // same protocol through the analytic pipeline at the nominal SNR
  SweepConfig ana = cfg;
  ana.axis = SweepAxis::snr;
  ana.grid = {cfg.snr};
  const auto plain = run_sweep(ana, spec, probe);
  CHECK(std::abs(integ[0].mean_fidelity - plain[0].mean_fidelity) < 0.02);
}

TEST_CASE("thread resolution respects the environment cap") {
  setenv("QTOMO_THREADS", "1", 1);
  CHECK(resolve_thread_count(8) == 1);
  unsetenv("QTOMO_THREADS");
  CHECK(resolve_thread_count(3) == 3);
}
