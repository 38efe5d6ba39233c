#include "qtomo/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "qtomo/liouville.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

std::string to_string(StateClass c) {
  switch (c) {
    case StateClass::pure: return "pure";
    case StateClass::mixed: return "mixed";
    case StateClass::thermal: return "thermal";
  }
  return "?";
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::snr: return "snr";
    case SweepAxis::angle_sigma: return "angle_sigma";
    case SweepAxis::n_measurements: return "n_measurements";
    case SweepAxis::kappa2: return "kappa2";
  }
  return "?";
}

int resolve_thread_count(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("QTOMO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

namespace {

double digamma(double x) {
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  return r + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 / 252));
}

double trigamma(double x) {
  double r = 0.0;
  while (x < 6.0) {
    r += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  return r + inv * (1.0 + 0.5 * inv + inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 / 42)));
}

}  // namespace

BetaFit fit_beta(std::vector<double> samples) {
  if (samples.size() < 30)
    throw std::invalid_argument("fit_beta: need at least 30 samples");
  for (double& s : samples) s = std::clamp(s, 1e-9, 1.0 - 1e-9);

  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= samples.size();
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= samples.size();

  BetaFit fit;
  if (var < 1e-18) {
    fit.degenerate = true;
    fit.mean = mean;
    fit.variance = 0.0;
    fit.a = fit.b = 0.0;
    return fit;
  }

  // Method of moments.
  const double common = mean * (1.0 - mean) / var - 1.0;
  double a = std::max(mean * common, 1e-3);
  double b = std::max((1.0 - mean) * common, 1e-3);

  // Newton refinement of the log-likelihood.
  double mlog = 0.0, mlog1 = 0.0;
  for (double s : samples) {
    mlog += std::log(s);
    mlog1 += std::log1p(-s);
  }
  mlog /= samples.size();
  mlog1 /= samples.size();
  for (int it = 0; it < 60; ++it) {
    const double psi_ab = digamma(a + b);
    const double ga = psi_ab - digamma(a) + mlog;
    const double gb = psi_ab - digamma(b) + mlog1;
    const double tab = trigamma(a + b);
    const double haa = tab - trigamma(a);
    const double hbb = tab - trigamma(b);
    const double hab = tab;
    const double det = haa * hbb - hab * hab;
    if (std::abs(det) < 1e-300) break;
    const double da = (hbb * ga - hab * gb) / det;
    const double db = (haa * gb - hab * ga) / det;
    const double anew = std::max(a - da, 1e-6);
    const double bnew = std::max(b - db, 1e-6);
    const bool done = std::abs(anew - a) < 1e-10 * (1 + a) &&
                      std::abs(bnew - b) < 1e-10 * (1 + b);
    a = anew;
    b = bnew;
    if (done) break;
  }

  fit.a = a;
  fit.b = b;
  fit.mean = a / (a + b);
  fit.variance = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  return fit;
}

namespace {

struct Task {
  size_t point;
  size_t cls;
  int state_idx;
  int repeat;
};

DensityMatrix make_state(StateClass cls, double mixed_purity,
                         std::uint64_t seed) {
  switch (cls) {
    case StateClass::pure: return random_pure(3, seed);
    case StateClass::mixed: return random_mixed(3, seed, mixed_purity);
    case StateClass::thermal: return DensityMatrix::maximally_mixed(3);
  }
  throw std::logic_error("make_state: bad class");
}

std::vector<PulseAngles> make_pulses(const SweepConfig& cfg, int count,
                                     std::uint64_t seed) {
  if (!cfg.random_pulses) {
    std::vector<PulseAngles> p = cfg.fixed_pulses;
    p.resize(std::min<size_t>(p.size(), count));
    return p;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, std::numbers::pi);
  std::vector<PulseAngles> p;
  p.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double phi = uni(rng);
    const double theta = uni(rng);
    p.emplace_back(phi, theta);
  }
  return p;
}

// Fidelity of one reconstruction task, or NaN on failure.
double run_task(const SweepConfig& cfg, const TransitionSpec& spec,
                const ProbeConfig& probe, SweepAxis axis, double axis_value,
                StateClass cls, std::uint64_t state_seed,
                std::uint64_t repeat_seed, bool use_integrator,
                double ref_amp) {
  ProbeConfig pb = probe;
  double snr = cfg.snr;
  double angle_sigma = cfg.angle_sigma;
  int n_pulses = cfg.n_pulses;
  switch (axis) {
    case SweepAxis::snr: snr = axis_value; break;
    case SweepAxis::angle_sigma: angle_sigma = axis_value; break;
    case SweepAxis::n_measurements: n_pulses = static_cast<int>(axis_value); break;
    case SweepAxis::kappa2:
      pb.rabi = std::sqrt(axis_value * pb.gamma_e * pb.gamma_g);
      break;
  }

  const DensityMatrix truth = make_state(cls, cfg.mixed_purity, state_seed);
  const std::vector<PulseAngles> pulses =
      make_pulses(cfg, n_pulses, derive_seed(repeat_seed, 11));

  try {
    if (!use_integrator) {
      PipelineOptions opt;
      opt.snr = snr;
      opt.angle_sigma = angle_sigma;
      opt.seed = repeat_seed;
      opt.minimize = cfg.minimize;
      const ReconstructionResult r = reconstruct(truth, pulses, spec, pb, opt);
      return r.fidelity_vs_truth;
    }

    // Integrator-backed path: simulate each pulse with back-action, discard
    // the optical transient window, fit and invert with the analytic model.
    const std::vector<double> grid = default_time_grid(pb);
    const double t_skip = 10.0 / pb.gamma_e;
    std::mt19937_64 rng(repeat_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<PartialMeasurement> meas;
    for (const PulseAngles& nominal : pulses) {
      PulseAngles executed = nominal;
      if (angle_sigma > 0.0)
        executed = PulseAngles(nominal.phi + angle_sigma * gauss(rng),
                               nominal.theta + angle_sigma * gauss(rng));
      const DensityMatrix rot = rotate_state(truth, executed);
      const LiouvilleGenerator gen =
          build_generator(spec, pb, ProbePolarization::y);
      const IntegrationResult run =
          integrate(gen, embed_ground(rot), grid, {1e-7, 1e-12, 0.0});
      SignalTrace tr = signal_from_integrator(run, spec, pb);
      tr.meta.pulse = nominal;
      // Drop the transient window before fitting.
      SignalTrace cut;
      cut.meta = tr.meta;
      for (size_t k = 0; k < tr.times.size(); ++k) {
        if (tr.times[k] < t_skip) continue;
        cut.times.push_back(tr.times[k]);
        cut.delta_alpha.push_back(tr.delta_alpha[k]);
      }
      if (snr > 0.0 && !std::isinf(snr)) {
        NoiseSpec ns{snr, rng(), ref_amp};
        cut = add_noise(cut, ns);
      }
      const FitResult fit = fit_envelope(cut, pb.larmor, pb.gamma_g);
      meas.push_back(invert_fit(fit, nominal, spec, pb));
    }
    MinimizeOptions mopts = cfg.minimize;
    mopts.seed = repeat_seed ^ 0x9e3779b97f4a7c15ull;
    ReconstructionResult r = minimize(meas, mopts);
    return fidelity(r.rho, truth);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<SweepRow> sweep_impl(const SweepConfig& cfg,
                                 const TransitionSpec& spec,
                                 const ProbeConfig& probe,
                                 bool use_integrator) {
  if (cfg.grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end()))
    throw std::invalid_argument("run_sweep: grid must be sorted");
  if (cfg.n_states * cfg.n_repeats < 30)
    throw std::invalid_argument("run_sweep: n_states * n_repeats must be >= 30");

  std::vector<Task> tasks;
  for (size_t p = 0; p < cfg.grid.size(); ++p)
    for (size_t c = 0; c < cfg.states.size(); ++c)
      for (int s = 0; s < cfg.n_states; ++s)
        for (int r = 0; r < cfg.n_repeats; ++r) tasks.push_back({p, c, s, r});

  // The reference amplitude is a property of (spec, probe) alone; compute it
  // once so integrator tasks need not rebuild it.
  const double ref_amp = reference_amplitude(spec, probe);

  std::vector<double> fidelities(tasks.size());
  std::atomic<size_t> cursor{0};
  const int n_threads = resolve_thread_count(cfg.threads);
  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const StateClass cls = cfg.states[t.cls];
      // thermal is a single fixed state; keep its seed stream shared so the
      // class statistics reflect noise, not state variety
      const std::uint64_t state_seed =
          derive_seed(cfg.seed, 1000 + t.cls, t.state_idx);
      const std::uint64_t repeat_seed =
          derive_seed(cfg.seed, 2000 + t.point, t.cls,
                      static_cast<std::uint64_t>(t.state_idx) * 10000 + t.repeat);
      fidelities[i] = run_task(cfg, spec, probe, cfg.axis, cfg.grid[t.point],
                               cls, state_seed, repeat_seed, use_integrator,
                               ref_amp);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads - 1; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<SweepRow> rows;
  for (size_t p = 0; p < cfg.grid.size(); ++p) {
    for (size_t c = 0; c < cfg.states.size(); ++c) {
      std::vector<double> samples;
      int failures = 0;
      for (size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].point != p || tasks[i].cls != c) continue;
        const double f = fidelities[i];
        if (std::isnan(f)) ++failures;
        else samples.push_back(f);
      }
      SweepRow row;
      row.axis_value = cfg.grid[p];
      row.state_class = cfg.states[c];
      row.n_samples = static_cast<int>(samples.size());
      row.n_failures = failures;
      if (static_cast<int>(samples.size()) >= 30) {
        row.beta = fit_beta(samples);
        double m = 0.0;
        for (double s : samples) m += s;
        m /= samples.size();
        double v = 0.0;
        for (double s : samples) v += (s - m) * (s - m);
        v /= samples.size();
        row.mean_fidelity = m;
        row.var_fidelity = v;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg,
                                const TransitionSpec& spec,
                                const ProbeConfig& probe) {
  return sweep_impl(cfg, spec, probe, cfg.axis == SweepAxis::kappa2);
}

std::vector<SweepRow> kappa2_sweep(const SweepConfig& cfg,
                                   const TransitionSpec& spec,
                                   const ProbeConfig& probe) {
  SweepConfig c = cfg;
  c.axis = SweepAxis::kappa2;
  return sweep_impl(c, spec, probe, true);
}

}  // namespace qtomo
