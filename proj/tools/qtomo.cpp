// qtomo: simulate polarization-rotation signals of an atomic qutrit,
// reconstruct density matrices from traces, and run the statistical studies.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "qtomo/liouville.hpp"
#include "qtomo/montecarlo.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/serialize.hpp"

namespace fs = std::filesystem;
using namespace qtomo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitValidity = 3;
constexpr int kExitNoConvergence = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const Json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(path + "/" + key + ": unknown key");
  }
}

double require_positive(const Json& j, const std::string& path) {
  const double v = j.get<double>();
  if (!(v > 0.0)) throw ConfigError(path + ": must be positive");
  return v;
}

HalfInt halfint_at(const Json& j, const std::string& path) {
  const double v = j.get<double>();
  const int twice = static_cast<int>(std::lround(2.0 * v));
  if (std::abs(2.0 * v - twice) > 1e-9)
    throw ConfigError(path + ": not a half-integer");
  return HalfInt::from_twice(twice);
}

TransitionSpec parse_transition(const Json& j, const std::string& path) {
  reject_unknown_keys(j, path,
                      {"f", "F", "j", "J", "I", "reduced_dipole",
                       "number_density", "cell_length", "omega"});
  TransitionSpec s = reference_qutrit();
  if (j.contains("f")) s.f = halfint_at(j["f"], path + "/f");
  if (j.contains("F")) s.F = halfint_at(j["F"], path + "/F");
  if (j.contains("j")) s.j = halfint_at(j["j"], path + "/j");
  if (j.contains("J")) s.J = halfint_at(j["J"], path + "/J");
  if (j.contains("I")) s.I = halfint_at(j["I"], path + "/I");
  if (j.contains("reduced_dipole"))
    s.reduced_dipole = require_positive(j["reduced_dipole"], path + "/reduced_dipole");
  if (j.contains("number_density"))
    s.number_density = require_positive(j["number_density"], path + "/number_density");
  if (j.contains("cell_length"))
    s.cell_length = require_positive(j["cell_length"], path + "/cell_length");
  if (j.contains("omega")) s.omega = require_positive(j["omega"], path + "/omega");
  return s;
}

ProbeConfig parse_probe(const Json& j, const std::string& path) {
  reject_unknown_keys(j, path,
                      {"detuning", "rabi", "gamma_e", "gamma_g", "larmor",
                       "doppler", "beta_ratio"});
  ProbeConfig p;
  p.detuning = 1000;
  p.rabi = 1;
  p.gamma_e = 1000;
  p.gamma_g = 0.05;
  p.larmor = 1;
  if (j.contains("detuning")) p.detuning = j["detuning"].get<double>();
  if (j.contains("rabi")) p.rabi = j["rabi"].get<double>();
  if (j.contains("gamma_e")) p.gamma_e = require_positive(j["gamma_e"], path + "/gamma_e");
  if (j.contains("gamma_g")) {
    p.gamma_g = j["gamma_g"].get<double>();
    if (p.gamma_g < 0) throw ConfigError(path + "/gamma_g: must be >= 0");
  }
  if (j.contains("larmor")) p.larmor = require_positive(j["larmor"], path + "/larmor");
  if (j.contains("doppler")) {
    p.doppler = j["doppler"].get<double>();
    if (p.doppler < 0) throw ConfigError(path + "/doppler: must be >= 0");
  }
  if (j.contains("beta_ratio")) p.beta_ratio = j["beta_ratio"].get<double>();
  return p;
}

DensityMatrix parse_state(const Json& j, const std::string& path,
                          std::uint64_t seed) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "pure_random") return random_pure(3, seed);
    if (name == "mixed_random") return random_mixed(3, seed, 0.6);
    try {
      return reference_state(name);  // thermal / aligned_y / stretched
    } catch (const std::invalid_argument&) {
      throw ConfigError(path + ": unknown state '" + name + "'");
    }
  }
  if (j.is_object() && j.contains("file")) {
    reject_unknown_keys(j, path, {"file"});
    const std::string file = j["file"].get<std::string>();
    if (!fs::exists(file)) throw ConfigError(path + "/file: no such file " + file);
    return density_from_json(Json::parse(read_file(file)));
  }
  if (j.is_object()) {
    reject_unknown_keys(j, path, {"dim", "re", "im"});
    return density_from_json(j);
  }
  throw ConfigError(path + ": expected a state name, {file}, or inline matrix");
}

std::vector<PulseAngles> parse_pulses(const Json& j, const std::string& path,
                                      std::uint64_t seed) {
  std::vector<PulseAngles> out;
  if (j.is_object()) {
    reject_unknown_keys(j, path, {"random"});
    const int n = j.at("random").get<int>();
    if (n < 1) throw ConfigError(path + "/random: must be >= 1");
    std::mt19937_64 rng(derive_seed(seed, 0xABCDu));
    std::uniform_real_distribution<double> uni(0.0, std::numbers::pi);
    for (int k = 0; k < n; ++k) {
      const double phi = uni(rng);
      const double theta = uni(rng);
      out.emplace_back(phi, theta);
    }
    return out;
  }
  if (!j.is_array() || j.empty())
    throw ConfigError(path + ": expected [[phi,theta],...] or {random: n}");
  for (size_t k = 0; k < j.size(); ++k) {
    const Json& p = j[k];
    if (!p.is_array() || p.size() != 2)
      throw ConfigError(path + "/" + std::to_string(k) + ": expected [phi,theta]");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

StateClass parse_state_class(const std::string& s, const std::string& path) {
  if (s == "pure") return StateClass::pure;
  if (s == "mixed") return StateClass::mixed;
  if (s == "thermal") return StateClass::thermal;
  throw ConfigError(path + ": unknown state class '" + s + "'");
}

SweepAxis parse_axis(const std::string& s, const std::string& path) {
  if (s == "snr") return SweepAxis::snr;
  if (s == "angle_sigma") return SweepAxis::angle_sigma;
  if (s == "n_measurements") return SweepAxis::n_measurements;
  if (s == "kappa2") return SweepAxis::kappa2;
  throw ConfigError(path + ": unknown axis '" + s + "'");
}

struct CommonConfig {
  Json root;
  TransitionSpec spec;
  ProbeConfig probe;
  std::uint64_t seed = 1;
  fs::path output_dir = ".";
};

CommonConfig load_config(const std::string& file,
                         std::initializer_list<const char*> allowed_top,
                         const std::optional<std::uint64_t>& seed_override,
                         const std::string& output_override) {
  CommonConfig c;
  if (!fs::exists(file)) throw ConfigError("/: config file not found: " + file);
  c.root = Json::parse(read_file(file));
  reject_unknown_keys(c.root, "", allowed_top);
  c.spec = c.root.contains("transition")
               ? parse_transition(c.root["transition"], "/transition")
               : reference_qutrit();
  c.probe = c.root.contains("probe") ? parse_probe(c.root["probe"], "/probe")
                                     : parse_probe(Json::object(), "/probe");
  if (c.root.contains("seed")) c.seed = c.root["seed"].get<std::uint64_t>();
  if (seed_override) c.seed = *seed_override;
  if (c.root.contains("output_dir"))
    c.output_dir = c.root["output_dir"].get<std::string>();
  if (!output_override.empty()) c.output_dir = output_override;
  return c;
}

void check_model_validity(const ProbeConfig& probe, bool force) {
  const ModelValidity v = check_validity(probe);
  if (v.hard_violation() && !force) {
    std::cerr << "model validity violated:";
    if (v.larmor_exceeds_detuning) std::cerr << " larmor >= |detuning|";
    if (v.gamma_exceeds_excited) std::cerr << " gamma_g >= gamma_e";
    std::cerr << " (use --force to proceed)\n";
    std::exit(kExitValidity);
  }
}

std::string trace_base(const fs::path& dir, size_t idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trace_%02zu", idx);
  return (dir / buf).string();
}

void write_trace(const std::string& base, const SignalTrace& trace) {
  write_file(base + ".csv", trace_to_csv(trace));
  write_file(base + ".meta.json", trace_meta_to_json(trace.meta).dump(2) + "\n");
}

SignalTrace read_trace(const std::string& csv_path) {
  SignalTrace tr = trace_from_csv(read_file(csv_path));
  fs::path meta = csv_path;
  meta.replace_extension("");
  meta += ".meta.json";
  if (!fs::exists(meta))
    throw ConfigError("/traces: missing meta sidecar " + meta.string());
  tr.meta = trace_meta_from_json(Json::parse(read_file(meta.string())));
  return tr;
}

int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed,
                 const std::string& output, bool force, bool svg) {
  const CommonConfig c =
      load_config(config,
                  {"transition", "probe", "state", "pulses", "noise",
                   "channels", "output_dir", "seed"},
                  seed, output);
  check_model_validity(c.probe, force);

  const DensityMatrix rho = parse_state(
      c.root.contains("state") ? c.root["state"] : Json("thermal"), "/state",
      derive_seed(c.seed, 1));
  const std::vector<PulseAngles> pulses = parse_pulses(
      c.root.contains("pulses") ? c.root["pulses"]
                                : Json::parse("[[0,0],[0,1.5707963267948966],"
                                              "[1.5707963267948966,0],"
                                              "[1.5707963267948966,1.5707963267948966]]"),
      "/pulses", c.seed);

  double snr = 0.0;
  if (c.root.contains("noise")) {
    reject_unknown_keys(c.root["noise"], "/noise", {"snr"});
    snr = require_positive(c.root["noise"].at("snr"), "/noise/snr");
  }
  SignalChannels channels;
  if (c.root.contains("channels")) {
    for (const auto& ch : c.root["channels"]) {
      const std::string name = ch.get<std::string>();
      if (name == "ellipticity") channels.ellipticity = true;
      else if (name == "absorption") channels.absorption = true;
      else if (name == "phase") channels.phase = true;
      else if (name != "rotation")
        throw ConfigError("/channels: unknown channel '" + name + "'");
    }
  }

  fs::create_directories(c.output_dir);
  const auto grid = default_time_grid(c.probe);
  const double ref = snr > 0 ? reference_amplitude(c.spec, c.probe) : 0.0;
  std::vector<SignalTrace> traces;
  for (size_t k = 0; k < pulses.size(); ++k) {
    SignalTrace tr = signal(rho, pulses[k], c.spec, c.probe, grid, channels);
    if (snr > 0)
      tr = add_noise(tr, {snr, derive_seed(c.seed, 100, k), ref});
    write_trace(trace_base(c.output_dir, k), tr);
    traces.push_back(std::move(tr));
  }
  write_file((c.output_dir / "state_true.json").string(),
             density_to_json(rho).dump(2) + "\n");
  if (svg)
    write_file((c.output_dir / "traces.svg").string(), traces_to_svg(traces));
  std::cout << "wrote " << pulses.size() << " traces to "
            << c.output_dir.string() << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& config,
                    const std::vector<std::string>& trace_files,
                    const std::string& truth_file,
                    std::optional<std::uint64_t> seed, const std::string& output) {
  TransitionSpec spec = reference_qutrit();
  ProbeConfig probe = parse_probe(Json::object(), "/probe");
  fs::path outdir = output.empty() ? fs::path(".") : fs::path(output);
  std::uint64_t rseed = seed.value_or(1);

  std::vector<SignalTrace> traces;
  bool context_from_meta = true;
  if (!config.empty()) {
    const CommonConfig c = load_config(
        config, {"transition", "probe", "traces", "output_dir", "seed"}, seed,
        output);
    spec = c.spec;
    probe = c.probe;
    outdir = c.output_dir;
    rseed = c.seed;
    context_from_meta = !(c.root.contains("transition") || c.root.contains("probe"));
    if (c.root.contains("traces"))
      for (const auto& t : c.root["traces"])
        traces.push_back(read_trace(t.get<std::string>()));
  }
  for (const std::string& t : trace_files) traces.push_back(read_trace(t));
  if (traces.empty()) {
    std::cerr << "no traces given\n";
    return kExitConfig;
  }
  if (context_from_meta) {
    spec = traces.front().meta.spec;
    probe = traces.front().meta.probe;
  }

  MinimizeOptions opts;
  opts.seed = rseed;
  ReconstructionResult result = reconstruct_from_traces(traces, spec, probe, opts);
  if (result.rank_deficient)
    std::cerr << "warning: rank-deficient pulse set, reconstruction is partial\n";

  if (!truth_file.empty()) {
    const DensityMatrix truth =
        density_from_json(Json::parse(read_file(truth_file)));
    result.fidelity_vs_truth = fidelity(result.rho, truth);
    std::cout << "fidelity = " << result.fidelity_vs_truth << "\n";
  }
  fs::create_directories(outdir);
  write_file((outdir / "reconstruction.json").string(),
             reconstruction_to_json(result).dump(2) + "\n");
  std::cout << "distance = " << result.distance << "\n";
  return result.converged ? 0 : kExitNoConvergence;
}

SweepConfig parse_sweep(const Json& j, std::uint64_t seed) {
  reject_unknown_keys(j, "/sweep",
                      {"axis", "grid", "states", "n_states", "n_repeats",
                       "snr", "angle_sigma", "n_pulses", "restarts"});
  SweepConfig cfg;
  cfg.seed = seed;
  if (!j.contains("axis")) throw ConfigError("/sweep/axis: required");
  cfg.axis = parse_axis(j["axis"].get<std::string>(), "/sweep/axis");
  if (!j.contains("grid")) throw ConfigError("/sweep/grid: required");
  cfg.grid = j["grid"].get<std::vector<double>>();
  if (j.contains("states")) {
    cfg.states.clear();
    for (const auto& s : j["states"])
      cfg.states.push_back(parse_state_class(s.get<std::string>(), "/sweep/states"));
  }
  if (j.contains("n_states")) cfg.n_states = j["n_states"].get<int>();
  if (j.contains("n_repeats")) cfg.n_repeats = j["n_repeats"].get<int>();
  if (j.contains("snr")) cfg.snr = j["snr"].get<double>();
  if (j.contains("angle_sigma")) cfg.angle_sigma = j["angle_sigma"].get<double>();
  if (j.contains("n_pulses")) cfg.n_pulses = j["n_pulses"].get<int>();
  if (j.contains("restarts")) cfg.minimize.restarts = j["restarts"].get<int>();
  return cfg;
}

int cmd_sweep(const std::string& config, std::optional<std::uint64_t> seed,
              const std::string& output, bool integrator, bool svg, bool force) {
  const CommonConfig c = load_config(
      config, {"transition", "probe", "sweep", "output_dir", "seed"}, seed,
      output);
  check_model_validity(c.probe, force);
  if (!c.root.contains("sweep")) throw ConfigError("/sweep: required");
  SweepConfig cfg = parse_sweep(c.root["sweep"], c.seed);
  if (cfg.axis == SweepAxis::kappa2 && !integrator) {
    std::cerr << "kappa2 sweeps need the master-equation backend; pass --integrator\n";
    return kExitConfig;
  }

  std::cerr << "sweep: " << to_string(cfg.axis) << " over " << cfg.grid.size()
            << " points, " << cfg.states.size() << " state classes, "
            << cfg.n_states * cfg.n_repeats << " samples each\n";
  const std::vector<SweepRow> rows = run_sweep(cfg, c.spec, c.probe);
  fs::create_directories(c.output_dir);
  write_file((c.output_dir / "sweep.csv").string(), sweep_to_csv(rows));
  if (svg)
    write_file((c.output_dir / "sweep.svg").string(), sweep_to_svg(rows));
  int failures = 0;
  for (const auto& r : rows) failures += r.n_failures;
  std::cout << "wrote " << rows.size() << " rows (" << failures
            << " failed samples) to " << c.output_dir.string() << "\n";
  return 0;
}

// ----- paper figure regeneration -------------------------------------------

int figure_samples() {
  if (const char* env = std::getenv("QTOMO_FIGURE_SAMPLES")) {
    const int v = std::atoi(env);
    if (v >= 30) return v;
  }
  return 200;  // desk scale
}

ProbeConfig figure_probe() {
  ProbeConfig p;
  p.detuning = 1000;
  p.rabi = 1;
  p.gamma_e = 1000;
  p.gamma_g = 0.05;
  p.larmor = 1;
  return p;
}

void showcase_state(const fs::path& dir, const DensityMatrix& rho,
                    const std::vector<PulseAngles>& pulses, double snr,
                    std::uint64_t seed, const TransitionSpec& spec,
                    const ProbeConfig& probe) {
  fs::create_directories(dir);
  const auto grid = default_time_grid(probe);
  const double ref = reference_amplitude(spec, probe);
  std::vector<SignalTrace> noisy;
  for (size_t k = 0; k < pulses.size(); ++k) {
    SignalTrace tr = signal(rho, pulses[k], spec, probe, grid);
    tr = add_noise(tr, {snr, derive_seed(seed, 7, k), ref});
    write_trace(trace_base(dir, k), tr);
    noisy.push_back(std::move(tr));
  }
  write_file((dir / "state_true.json").string(),
             density_to_json(rho).dump(2) + "\n");
  MinimizeOptions opts;
  opts.seed = derive_seed(seed, 8);
  ReconstructionResult res = reconstruct_from_traces(noisy, spec, probe, opts);
  res.fidelity_vs_truth = fidelity(res.rho, rho);
  write_file((dir / "reconstruction.json").string(),
             reconstruction_to_json(res).dump(2) + "\n");
  write_file((dir / "traces.svg").string(), traces_to_svg(noisy));
}

void fidelity_batch(const fs::path& csv, StateClass cls, double snr,
                    const std::vector<PulseAngles>& pulses, int runs,
                    std::uint64_t seed, const TransitionSpec& spec,
                    const ProbeConfig& probe) {
  std::ostringstream out;
  out << "run,fidelity\n";
  for (int r = 0; r < runs; ++r) {
    const std::uint64_t s = derive_seed(seed, 21, r);
    const DensityMatrix truth = cls == StateClass::pure
                                    ? random_pure(3, s)
                                    : random_mixed(3, s, 0.6);
    PipelineOptions opt;
    opt.snr = snr;
    opt.seed = derive_seed(seed, 22, r);
    const ReconstructionResult res = reconstruct(truth, pulses, spec, probe, opt);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", res.fidelity_vs_truth);
    out << r << "," << buf << "\n";
  }
  write_file(csv.string(), out.str());
}

int cmd_paper_figures(const std::string& output, std::optional<std::uint64_t> seed) {
  const fs::path root = output.empty() ? fs::path("paper_figures") : fs::path(output);
  const TransitionSpec spec = reference_qutrit();
  const ProbeConfig probe = figure_probe();
  const std::uint64_t s0 = seed.value_or(20220901);
  const int samples = figure_samples();
  const int n_states = 10;
  const int n_repeats = std::max(samples / n_states, 3);
  const double hp = std::numbers::pi / 2;
  const double qp = std::numbers::pi / 4;
  const std::vector<PulseAngles> grid_pulses = {
      PulseAngles(0, 0), PulseAngles(0, hp), PulseAngles(hp, 0),
      PulseAngles(hp, hp)};
  const std::vector<PulseAngles> quarter_pulses = {
      PulseAngles(0, 0), PulseAngles(0, qp), PulseAngles(qp, 0),
      PulseAngles(qp, qp)};

  // Fig. 1: one pure showcase state plus the 100-run fidelity batch.
  std::cerr << "fig1: pure-state showcase and fidelity batch\n";
  showcase_state(root / "fig1", random_pure(3, derive_seed(s0, 1)), grid_pulses,
                 25.0, derive_seed(s0, 2), spec, probe);
  fidelity_batch(root / "fig1" / "fidelity_batch.csv", StateClass::pure, 25.0,
                 grid_pulses, 100, derive_seed(s0, 3), spec, probe);

  // Fig. 2: partially mixed states.
  std::cerr << "fig2: mixed-state showcase and fidelity batch\n";
  showcase_state(root / "fig2", random_mixed(3, derive_seed(s0, 4), 0.6),
                 quarter_pulses, 25.0, derive_seed(s0, 5), spec, probe);
  fidelity_batch(root / "fig2" / "fidelity_batch.csv", StateClass::mixed, 25.0,
                 grid_pulses, 100, derive_seed(s0, 6), spec, probe);

  SweepConfig base;
  base.n_states = n_states;
  base.n_repeats = n_repeats;
  base.snr = 25.0;
  base.seed = derive_seed(s0, 10);

  // Fig. 3a: fidelity vs SNR.
  std::cerr << "fig3a: fidelity vs SNR\n";
  fs::create_directories(root / "fig3");
  SweepConfig snr_cfg = base;
  snr_cfg.axis = SweepAxis::snr;
  snr_cfg.grid = {1, 3, 10, 30};
  write_file((root / "fig3" / "fig3a.csv").string(),
             sweep_to_csv(run_sweep(snr_cfg, spec, probe)));

  // Fig. 3b: fidelity vs pulse-angle uncertainty (radians).
  std::cerr << "fig3b: fidelity vs pulse-angle uncertainty\n";
  SweepConfig ang_cfg = base;
  ang_cfg.axis = SweepAxis::angle_sigma;
  ang_cfg.grid = {0.0, 0.01, 0.03, 0.1, 0.3};
  ang_cfg.seed = derive_seed(s0, 11);
  write_file((root / "fig3" / "fig3b.csv").string(),
             sweep_to_csv(run_sweep(ang_cfg, spec, probe)));

  // Fig. 4a: fidelity vs number of measurements.
  std::cerr << "fig4a: fidelity vs measurement count\n";
  fs::create_directories(root / "fig4");
  SweepConfig n_cfg = base;
  n_cfg.axis = SweepAxis::n_measurements;
  n_cfg.grid = {1, 2, 3, 4, 5, 6};
  n_cfg.seed = derive_seed(s0, 12);
  write_file((root / "fig4" / "fig4a.csv").string(),
             sweep_to_csv(run_sweep(n_cfg, spec, probe)));

  // Fig. 4b: fidelity vs probe saturation, integrator-backed.
  std::cerr << "fig4b: fidelity vs kappa2 (master-equation traces)\n";
  SweepConfig k_cfg = base;
  k_cfg.axis = SweepAxis::kappa2;
  k_cfg.grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  k_cfg.n_repeats = std::max(std::min(samples, 60) / n_states, 3);
  k_cfg.seed = derive_seed(s0, 13);
  write_file((root / "fig4" / "fig4b.csv").string(),
             sweep_to_csv(kappa2_sweep(k_cfg, spec, probe)));

  // Reference-state gallery: thermal, aligned, stretched.
  std::cerr << "appendixB: reference-state gallery\n";
  int idx = 0;
  for (const char* name : {"thermal", "aligned_y", "stretched"}) {
    showcase_state(root / "appendixB" / name, reference_state(name),
                   quarter_pulses, 25.0, derive_seed(s0, 30 + idx), spec, probe);
    ++idx;
  }
  std::cout << "paper figure data written to " << root.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical tomography of an atomic qutrit: forward signal "
               "simulation, density-matrix reconstruction, and fidelity studies"};
  app.require_subcommand(1);

  std::string config, output, truth;
  std::vector<std::string> trace_files;
  std::optional<std::uint64_t> seed;
  bool force = false, integrator = false, svg = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* copt = sub->add_option("--config", config, "JSON configuration file");
    if (needs_config) copt->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--output", output, "output directory");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate rotation traces");
  add_common(sim, true);
  sim->add_flag("--force", force, "proceed despite model-validity violations");
  sim->add_flag("--svg", svg, "also emit an SVG plot");

  CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct a state from traces");
  add_common(rec, false);
  rec->add_option("traces", trace_files, "trace CSV files (with .meta.json sidecars)");
  rec->add_option("--truth", truth, "true state JSON for fidelity reporting");

  CLI::App* swp = app.add_subcommand("sweep", "run a Monte-Carlo fidelity sweep");
  add_common(swp, true);
  swp->add_flag("--integrator", integrator, "allow integrator-backed (kappa2) sweeps");
  swp->add_flag("--svg", svg, "also emit an SVG plot");
  swp->add_flag("--force", force, "proceed despite model-validity violations");

  CLI::App* fig = app.add_subcommand("paper-figures",
                                     "regenerate the full figure data set");
  fig->add_option("--seed", seed, "master seed");
  fig->add_option("--output", output, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config, seed, output, force, svg);
    if (rec->parsed())
      return cmd_reconstruct(config, trace_files, truth, seed, output);
    if (swp->parsed())
      return cmd_sweep(config, seed, output, integrator, svg, force);
    if (fig->parsed()) return cmd_paper_figures(output, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
