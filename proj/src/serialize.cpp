#include "qtomo/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qtomo {

namespace {

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::vector<double> json_to_vec(const Json& j) {
  return j.get<std::vector<double>>();
}

HalfInt halfint_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash != std::string::npos)
      return HalfInt::from_twice(std::stoi(s.substr(0, slash)));
    return HalfInt(std::stoi(s));
  }
  const double v = j.get<double>();
  const int twice = static_cast<int>(std::lround(2.0 * v));
  if (std::abs(2.0 * v - twice) > 1e-9)
    throw std::invalid_argument("half-integer expected, got " + j.dump());
  return HalfInt::from_twice(twice);
}

Json halfint_to_json(HalfInt h) { return h.value(); }

}  // namespace

Json density_to_json(const DensityMatrix& rho) {
  const int d = rho.dim();
  std::vector<double> re, im;
  re.reserve(d * d);
  im.reserve(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      re.push_back(rho.mat(i, j).real());
      im.push_back(rho.mat(i, j).imag());
    }
  return Json{{"dim", d}, {"re", re}, {"im", im}};
}

DensityMatrix density_from_json(const Json& j) {
  const int d = j.at("dim").get<int>();
  const auto re = json_to_vec(j.at("re"));
  const auto im = json_to_vec(j.at("im"));
  if (static_cast<int>(re.size()) != d * d || static_cast<int>(im.size()) != d * d)
    throw std::invalid_argument("density_from_json: array size mismatch");
  Eigen::MatrixXcd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      m(i, k) = Cplx(re[i * d + k], im[i * d + k]);
  return DensityMatrix(m);
}

Json fit_to_json(const FitResult& fit) {
  std::vector<double> cov;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov.push_back(fit.covariance(i, j));
  return Json{{"A", fit.A},
              {"B", fit.B},
              {"C", fit.C},
              {"cov", cov},
              {"residual_rms", fit.residual_rms}};
}

FitResult fit_from_json(const Json& j) {
  FitResult f;
  f.A = j.at("A").get<double>();
  f.B = j.at("B").get<double>();
  f.C = j.at("C").get<double>();
  const auto cov = json_to_vec(j.at("cov"));
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) f.covariance(i, k) = cov.at(i * 3 + k);
  f.residual_rms = j.at("residual_rms").get<double>();
  return f;
}

Json reconstruction_to_json(const ReconstructionResult& r) {
  Json j{{"rho", density_to_json(r.rho)},
         {"distance", r.distance},
         {"converged", r.converged},
         {"iterations", r.iterations},
         {"rank_deficient", r.rank_deficient}};
  if (r.fidelity_vs_truth >= 0.0) j["fidelity_vs_truth"] = r.fidelity_vs_truth;
  return j;
}

Json trace_meta_to_json(const TraceMeta& meta) {
  return Json{
      {"transition",
       {{"f", halfint_to_json(meta.spec.f)},
        {"F", halfint_to_json(meta.spec.F)},
        {"j", halfint_to_json(meta.spec.j)},
        {"J", halfint_to_json(meta.spec.J)},
        {"I", halfint_to_json(meta.spec.I)},
        {"reduced_dipole", meta.spec.reduced_dipole},
        {"number_density", meta.spec.number_density},
        {"cell_length", meta.spec.cell_length},
        {"omega", meta.spec.omega}}},
      {"probe",
       {{"detuning", meta.probe.detuning},
        {"rabi", meta.probe.rabi},
        {"gamma_e", meta.probe.gamma_e},
        {"gamma_g", meta.probe.gamma_g},
        {"larmor", meta.probe.larmor},
        {"doppler", meta.probe.doppler},
        {"beta_ratio", meta.probe.beta_ratio}}},
      {"pulse", {{"phi", meta.pulse.phi}, {"theta", meta.pulse.theta}}},
      {"seed", meta.seed},
      {"snr", meta.snr}};
}

TraceMeta trace_meta_from_json(const Json& j) {
  TraceMeta m;
  const Json& t = j.at("transition");
  m.spec.f = halfint_from_json(t.at("f"));
  m.spec.F = halfint_from_json(t.at("F"));
  m.spec.j = halfint_from_json(t.at("j"));
  m.spec.J = halfint_from_json(t.at("J"));
  m.spec.I = halfint_from_json(t.at("I"));
  m.spec.reduced_dipole = t.at("reduced_dipole").get<double>();
  m.spec.number_density = t.at("number_density").get<double>();
  m.spec.cell_length = t.at("cell_length").get<double>();
  m.spec.omega = t.at("omega").get<double>();
  const Json& p = j.at("probe");
  m.probe.detuning = p.at("detuning").get<double>();
  m.probe.rabi = p.at("rabi").get<double>();
  m.probe.gamma_e = p.at("gamma_e").get<double>();
  m.probe.gamma_g = p.at("gamma_g").get<double>();
  m.probe.larmor = p.at("larmor").get<double>();
  m.probe.doppler = p.at("doppler").get<double>();
  m.probe.beta_ratio = p.at("beta_ratio").get<double>();
  m.pulse = PulseAngles(j.at("pulse").at("phi").get<double>(),
                        j.at("pulse").at("theta").get<double>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.snr = j.at("snr").get<double>();
  return m;
}

std::string trace_to_csv(const SignalTrace& trace) {
  std::ostringstream out;
  out << "t,delta_alpha";
  const bool eps = !trace.delta_epsilon.empty();
  const bool abs_ = !trace.delta_absorption.empty();
  const bool ph = !trace.delta_phase.empty();
  if (eps) out << ",delta_epsilon";
  if (abs_) out << ",delta_abs";
  if (ph) out << ",delta_phase";
  out << "\n";
  for (size_t k = 0; k < trace.times.size(); ++k) {
    out << full_precision(trace.times[k]) << ","
        << full_precision(trace.delta_alpha[k]);
    if (eps) out << "," << full_precision(trace.delta_epsilon[k]);
    if (abs_) out << "," << full_precision(trace.delta_absorption[k]);
    if (ph) out << "," << full_precision(trace.delta_phase[k]);
    out << "\n";
  }
  return out.str();
}

SignalTrace trace_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("trace_from_csv: empty input");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 2 || cols[0] != "t" || cols[1] != "delta_alpha")
    throw std::invalid_argument("trace_from_csv: bad header");
  SignalTrace tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != cols.size())
      throw std::invalid_argument("trace_from_csv: ragged row");
    size_t c = 0;
    tr.times.push_back(row[c++]);
    tr.delta_alpha.push_back(row[c++]);
    for (size_t ci = 2; ci < cols.size(); ++ci, ++c) {
      if (cols[ci] == "delta_epsilon") tr.delta_epsilon.push_back(row[c]);
      else if (cols[ci] == "delta_abs") tr.delta_absorption.push_back(row[c]);
      else if (cols[ci] == "delta_phase") tr.delta_phase.push_back(row[c]);
      else throw std::invalid_argument("trace_from_csv: unknown column " + cols[ci]);
    }
  }
  return tr;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "axis_value,state_class,mean_fidelity,var_fidelity,beta_a,beta_b,"
         "n_samples,n_failures\n";
  for (const SweepRow& r : rows) {
    out << full_precision(r.axis_value) << "," << to_string(r.state_class)
        << "," << full_precision(r.mean_fidelity) << ","
        << full_precision(r.var_fidelity) << "," << full_precision(r.beta.a)
        << "," << full_precision(r.beta.b) << "," << r.n_samples << ","
        << r.n_failures << "\n";
  }
  return out.str();
}

namespace {

struct SvgCanvas {
  static constexpr int W = 640, H = 400, PAD = 48;
  std::ostringstream body;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  double px(double x) const {
    return PAD + (x - xmin) / (xmax - xmin + 1e-300) * (W - 2 * PAD);
  }
  double py(double y) const {
    return H - PAD - (y - ymin) / (ymax - ymin + 1e-300) * (H - 2 * PAD);
  }
  std::string finish() {
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
        << "' height='" << H << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<rect x='" << PAD << "' y='" << PAD << "' width='" << W - 2 * PAD
        << "' height='" << H - 2 * PAD
        << "' fill='none' stroke='black'/>\n"
        << body.str() << "</svg>\n";
    return out.str();
  }
};

const char* kSeriesColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                               "#9467bd", "#8c564b"};

}  // namespace

std::string traces_to_svg(const std::vector<SignalTrace>& traces) {
  SvgCanvas cv;
  cv.xmin = 1e300, cv.xmax = -1e300, cv.ymin = 1e300, cv.ymax = -1e300;
  for (const auto& tr : traces)
    for (size_t k = 0; k < tr.times.size(); ++k) {
      cv.xmin = std::min(cv.xmin, tr.times[k]);
      cv.xmax = std::max(cv.xmax, tr.times[k]);
      cv.ymin = std::min(cv.ymin, tr.delta_alpha[k]);
      cv.ymax = std::max(cv.ymax, tr.delta_alpha[k]);
    }
  if (cv.ymin == cv.ymax) {
    cv.ymin -= 1;
    cv.ymax += 1;
  }
  for (size_t s = 0; s < traces.size(); ++s) {
    cv.body << "<polyline fill='none' stroke='"
            << kSeriesColors[s % 6] << "' points='";
    for (size_t k = 0; k < traces[s].times.size(); ++k)
      cv.body << cv.px(traces[s].times[k]) << ","
              << cv.py(traces[s].delta_alpha[k]) << " ";
    cv.body << "'/>\n";
  }
  return cv.finish();
}

std::string sweep_to_svg(const std::vector<SweepRow>& rows) {
  SvgCanvas cv;
  cv.xmin = 1e300, cv.xmax = -1e300;
  cv.ymin = 0.0, cv.ymax = 1.02;
  for (const auto& r : rows) {
    cv.xmin = std::min(cv.xmin, r.axis_value);
    cv.xmax = std::max(cv.xmax, r.axis_value);
  }
  int series = 0;
  for (StateClass cls :
       {StateClass::pure, StateClass::mixed, StateClass::thermal}) {
    bool any = false;
    std::ostringstream pts;
    for (const auto& r : rows) {
      if (r.state_class != cls) continue;
      any = true;
      cv.body << "<circle cx='" << cv.px(r.axis_value) << "' cy='"
              << cv.py(r.mean_fidelity) << "' r='4' fill='"
              << kSeriesColors[series % 6] << "'/>\n";
      pts << cv.px(r.axis_value) << "," << cv.py(r.mean_fidelity) << " ";
    }
    if (any)
      cv.body << "<polyline fill='none' stroke='" << kSeriesColors[series % 6]
              << "' points='" << pts.str() << "'/>\n";
    ++series;
  }
  return cv.finish();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qtomo
