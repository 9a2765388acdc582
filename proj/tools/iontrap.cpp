// iontrap: curves, synthetic data and fits for single-pulse spin-dependent kicks.
//
// Units on the command line: energies nJ, temperatures mK, lengths um/nm,
// times us/ps, frequencies Hz (ordinary, converted to rad/s here).
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "iontrap/constants.hpp"
#include "iontrap/dataset_io.hpp"
#include "iontrap/error.hpp"
#include "iontrap/estimation.hpp"
#include "iontrap/phys_core.hpp"
#include "iontrap/pulse_physics.hpp"
#include "iontrap/random.hpp"
#include "iontrap/spin_motion.hpp"
#include "iontrap/synth_data.hpp"
#include "iontrap/thermal_beam.hpp"
#include "iontrap/tls_ode.hpp"

using json = nlohmann::ordered_json;
using namespace iontrap;
using constants::pi;
using constants::two_pi;

namespace {

constexpr int schema_version = 1;
constexpr double nj = 1e-9, mk = 1e-3, um = 1e-6, us = 1e-6, nm = 1e-9, ps = 1e-12;

struct Common {
  std::string out = "-";
  std::string format = "csv";
  std::uint64_t seed = 1;
  double mc = 0.0;
  std::string species = "Ba138+";
  std::string species_file;
};

void add_common(CLI::App* app, Common& c, bool with_mc = false) {
  app->add_option("--out,-o", c.out, "Output file, '-' for stdout");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c.seed, "Random seed [integer]");
  if (with_mc)
    app->add_option("--mc", c.mc, "Monte-Carlo samples per point, 0 = analytic only [count]")
        ->check(CLI::NonNegativeNumber);
  app->add_option("--species", c.species, "Ion species (Ba138+, Ca40+, Sr88+ or from --species-file)");
  app->add_option("--species-file", c.species_file, "Species table file")->check(CLI::ExistingFile);
}

IonSpecies resolve_species(const Common& c) {
  if (!c.species_file.empty()) {
    const auto table = load_species_table(c.species_file);
    if (auto it = table.find(c.species); it != table.end()) return it->second;
  }
  return make_species(c.species);
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12)
    throw ValidationError(std::string(what) + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 1) throw ValidationError("need at least one grid point");
  if (!(hi >= lo)) throw ValidationError("grid maximum is below its minimum");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return v;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t i) { return KeyedRng(seed, i).next_u64(); }

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(r);
  return {{"columns", t.columns}, {"rows", rows}};
}

// Curves and datasets: the table as CSV, or everything as one JSON object.
void emit(const Common& c, const std::string& command, const json& params, const Table& t,
          const json& summary) {
  Sink sink(c.out);
  if (c.format == "json") {
    json j{{"schema_version", schema_version}, {"command", command}, {"parameters", params}};
    if (!summary.empty()) j["summary"] = summary;
    j.update(table_json(t));
    sink.os() << j.dump(2) << '\n';
  } else {
    write_csv(sink.os(), t);
    for (const auto& [k, v] : summary.items()) std::cerr << "# " << k << " = " << v.dump() << '\n';
  }
}

// Scalar reports: one CSV row, or a flat JSON object.
void emit_report(const Common& c, const std::string& command, const json& values,
                 const std::string& note = {}) {
  Sink sink(c.out);
  if (c.format == "json") {
    json j{{"schema_version", schema_version}, {"command", command}};
    j.update(values);
    if (!note.empty()) j["note"] = note;
    sink.os() << j.dump(2) << '\n';
    return;
  }
  bool first = true;
  for (const auto& [k, v] : values.items()) sink.os() << (first ? "" : ",") << k, first = false;
  sink.os() << '\n';
  first = true;
  for (const auto& [k, v] : values.items())
    sink.os() << (first ? "" : ",") << (v.is_string() ? v.get<std::string>() : v.dump()), first = false;
  sink.os() << '\n';
  if (!note.empty()) std::cerr << "note: " << note << '\n';
}

// ---------------------------------------------------------------- physics flags

struct Trap {
  double trap_freq = 32.4e3;       // Hz
  double wavelength = 532.0;       // nm
  std::optional<double> eta;

  void add(CLI::App* app) {
    app->add_option("--trap-freq", trap_freq, "Secular trap frequency [Hz]")->check(CLI::PositiveNumber);
    app->add_option("--wavelength", wavelength, "Raman laser wavelength, sets eta via two orthogonal beams [nm]")
        ->check(CLI::PositiveNumber);
    app->add_option("--eta", eta, "Lamb-Dicke parameter, overrides --wavelength [dimensionless]")
        ->check(CLI::NonNegativeNumber);
  }
  double omega() const { return two_pi * trap_freq; }
  double lamb_dicke_for(const IonSpecies& s) const {
    return eta ? *eta : lamb_dicke(orthogonal_beam_k_eff(wavelength * nm), s.mass(), omega());
  }
};

// ---------------------------------------------------------------- rabi-curve

struct RabiCurveArgs {
  Common c;
  Trap trap;
  double e_min = 0.0, e_max = 129.0, e_step = 1.0;
  double pi_energy = 38.0, temperature = 0.5, waist = 8.5, spam = 1.0;
};

int cmd_rabi_curve(const RabiCurveArgs& a) {
  const auto sp = resolve_species(a.c);
  if (!(a.e_step > 0.0)) throw ValidationError("--energy-step must be positive");
  if (!(a.pi_energy > 0.0)) throw ValidationError("--pi-energy must be positive");
  if (!(a.temperature >= 0.0)) throw ValidationError("--temperature must be non-negative");
  SpamModel spam{a.spam, {}, {}};
  spam.validate();
  const std::size_t mc = as_count(a.c.mc, "--mc");
  const auto n = static_cast<std::size_t>(std::floor((a.e_max - a.e_min) / a.e_step + 1e-9)) + 1;
  const auto energies = linspace(a.e_min, a.e_min + a.e_step * (n - 1), n);
  const RabiGeometry geo{a.waist * um, sp.mass(), a.trap.omega()};
  const auto cfg = BeamThermalConfig::thermal(geo.waist, a.temperature * mk, geo.mass, geo.trap_omega);

  Table t;
  t.columns = {"energy_nj", "p_down_analytic"};
  if (mc) t.columns.insert(t.columns.end(), {"p_down_mc", "p_down_mc_stderr"});
  double worst_z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double area = pi * energies[i] / a.pi_energy;
    const double p = spam.apply(thermal_rabi_pdown(0.5 * area, cfg));
    std::vector<double> row{energies[i], p};
    if (mc) {
      const auto m = mc_thermal_rabi(area, cfg, mc, point_seed(a.c.seed, i));
      const double q = spam.apply(m.mean), se = spam.visibility * m.std_error;
      row.insert(row.end(), {q, se});
      worst_z = std::max(worst_z, std::abs(q - p) / std::max(se, 1e-12));
    }
    t.rows.push_back(std::move(row));
  }
  double first_max = std::numeric_limits<double>::quiet_NaN();
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, t.rows[i][1]);
    hi = std::max(hi, t.rows[i][1]);
    if (std::isnan(first_max) && i > 0 && i + 1 < n && t.rows[i][1] >= t.rows[i - 1][1] &&
        t.rows[i][1] > t.rows[i + 1][1])
      first_max = energies[i];
  }
  json params{{"species", sp.name()},       {"pi_energy_nj", a.pi_energy}, {"temperature_mk", a.temperature},
              {"waist_um", a.waist},        {"trap_freq_hz", a.trap.trap_freq},
              {"beam_thermal_g", cfg.g()}, {"spam_visibility", a.spam}, {"mc_samples", mc}, {"seed", a.c.seed}};
  json summary{{"first_max_energy_nj", first_max}, {"visibility", hi - lo}};
  if (mc) summary["mc_max_abs_z"] = worst_z;
  emit(a.c, "rabi-curve", params, t, summary);
  return 0;
}

// ---------------------------------------------------------------- revival

struct RevivalArgs {
  Common c;
  Trap trap;
  std::optional<double> tau_min, tau_max;
  double points = 1001;
  double nbar = 1059.0, offset = 0.0, scale = 1.0, qubit_freq = 150e6;
};

int cmd_revival(const RevivalArgs& a) {
  const auto sp = resolve_species(a.c);
  const double eta = a.trap.lamb_dicke_for(sp);
  const double t_rev = revival_time(a.trap.omega());
  const double lo = a.tau_min ? *a.tau_min * us : t_rev - 0.5 * us;
  const double hi = a.tau_max ? *a.tau_max * us : t_rev + 0.5 * us;
  if (!(lo >= 0.0)) throw ValidationError("--tau-min must be non-negative");
  const std::size_t mc = as_count(a.c.mc, "--mc");
  const auto taus = linspace(lo, hi, as_count(a.points, "--points"));

  Table t;
  t.columns = {"tau_us", "visibility"};
  if (mc) t.columns.insert(t.columns.end(), {"visibility_mc", "visibility_mc_stderr"});
  double best = -1.0, best_tau = 0.0, worst = 2.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    RamseyConfig cfg{eta, a.trap.omega(), two_pi * a.qubit_freq, taus[i], a.nbar};
    const double v = visibility_model(cfg, a.offset, a.scale);
    std::vector<double> row{taus[i] / us, v};
    if (mc) {
      // Park the detuning on a bright fringe (gamma = 2 pi m) so V = 1 - 2 P_up.
      if (taus[i] > 0.0) {
        const double m = std::round(cfg.qubit_delta * taus[i] / two_pi);
        cfg.qubit_delta = (two_pi * m - eta * eta * std::sin(cfg.trap_omega * taus[i])) / taus[i];
      }
      const auto p = ramsey_pup_mc(cfg, mc, point_seed(a.c.seed, i));
      row.insert(row.end(), {a.offset + a.scale * (1.0 - 2.0 * p.mean), 2.0 * std::abs(a.scale) * p.std_error});
    }
    if (v > best) best = v, best_tau = taus[i];
    worst = std::min(worst, v);
    t.rows.push_back(std::move(row));
  }
  const double hw = revival_half_width(eta, a.nbar, a.trap.omega());
  json params{{"species", sp.name()}, {"eta", eta},          {"nbar", a.nbar},
              {"trap_freq_hz", a.trap.trap_freq}, {"offset", a.offset}, {"scale", a.scale},
              {"mc_samples", mc},     {"seed", a.c.seed}};
  json summary{{"max_tau_us", best_tau / us},
               {"max_visibility", best},
               {"min_visibility", worst},
               {"tau_rev_us", t_rev / us},
               {"fwhm_us", std::isfinite(hw) ? json(2.0 * hw / us) : json(nullptr)}};
  emit(a.c, "revival", params, t, summary);
  return 0;
}

// ---------------------------------------------------------------- ramsey-scan

struct RamseyArgs {
  Common c;
  Trap trap;
  std::vector<double> taus{30.864};
  double d_min = 150e6 - 64.8e3, d_max = 150e6 + 64.8e3, points = 201;
  double nbar = 1059.0, spam = 1.0;
};

int cmd_ramsey_scan(const RamseyArgs& a) {
  const auto sp = resolve_species(a.c);
  const double eta = a.trap.lamb_dicke_for(sp);
  SpamModel spam{a.spam, {}, {}};
  spam.validate();
  const std::size_t mc = as_count(a.c.mc, "--mc");
  const auto dets = linspace(a.d_min, a.d_max, as_count(a.points, "--points"));
  Table t;
  t.columns = {"tau_us", "detuning_hz", "p_up_analytic"};
  if (mc) t.columns.insert(t.columns.end(), {"p_up_mc", "p_up_mc_stderr"});
  std::size_t idx = 0;
  for (double tau : a.taus) {
    if (!(tau >= 0.0)) throw ValidationError("--tau must be non-negative");
    for (double d : dets) {
      const RamseyConfig cfg{eta, a.trap.omega(), two_pi * d, tau * us, a.nbar};
      std::vector<double> row{tau, d, spam.apply(ramsey_pup_analytic(cfg))};
      if (mc) {
        const auto m = ramsey_pup_mc(cfg, mc, point_seed(a.c.seed, idx));
        row.insert(row.end(), {spam.apply(m.mean), a.spam * m.std_error});
      }
      ++idx;
      t.rows.push_back(std::move(row));
    }
  }
  json params{{"species", sp.name()}, {"eta", eta}, {"nbar", a.nbar}, {"trap_freq_hz", a.trap.trap_freq},
              {"spam_visibility", a.spam}, {"mc_samples", mc}, {"seed", a.c.seed}};
  emit(a.c, "ramsey-scan", params, t, json::object());
  return 0;
}

// ---------------------------------------------------------------- synth

double default_contrast() { return visibility_budget(1.0, 0.97, 0.95, 30.864e-6, 100e-6); }

struct SynthArgs {
  Common c;
  Trap trap;
  std::string mode = "revival";
  double reps = 1000, spam = 0.70;
  std::optional<double> e_bright, e_dark;
  bool analytic = false;
  // rabi
  double e_min = 0.0, e_max = 380.0, e_points = 80, pi_energy = 38.0, temperature = 0.5, waist = 8.5;
  // revival / ramsey
  double tau_min = 30.3, tau_max = 31.4, tau_points = 41, fringe_points = 16;
  std::vector<double> taus{30.864};
  double d_min = 150e6 - 64.8e3, d_max = 150e6 + 64.8e3, d_points = 16;
  double nbar = 1059.0, qubit_freq = 150e6, contrast = default_contrast();
};

int cmd_synth(const SynthArgs& a) {
  const auto sp = resolve_species(a.c);
  ExperimentPlan plan;
  plan.repetitions = as_count(a.reps, "--reps");
  plan.spam = {a.spam, a.e_bright, a.e_dark};
  plan.seed = a.c.seed;
  plan.analytic = a.analytic;
  json params{{"mode", a.mode}, {"species", sp.name()}, {"repetitions", plan.repetitions},
              {"spam_visibility", a.spam}, {"seed", a.c.seed}, {"analytic", a.analytic}};
  if (a.e_bright) params["e_bright"] = *a.e_bright, params["e_dark"] = a.e_dark.value_or(0.0);
  Table t;
  if (a.mode == "rabi") {
    plan.mode = PlanMode::rabi_curve;
    for (double e : linspace(a.e_min, a.e_max, as_count(a.e_points, "--energy-points")))
      plan.energies.push_back(e * nj);
    plan.pi_energy = a.pi_energy * nj;
    plan.temperature = a.temperature * mk;
    plan.geometry = {a.waist * um, sp.mass(), a.trap.omega()};
    params.update({{"pi_energy_nj", a.pi_energy}, {"temperature_mk", a.temperature},
                   {"waist_um", a.waist}, {"trap_freq_hz", a.trap.trap_freq}});
    t = to_table(simulate_rabi(plan));
  } else {
    const double eta = a.trap.lamb_dicke_for(sp);
    plan.ramsey = {eta, a.trap.omega(), two_pi * a.qubit_freq, 0.0, a.nbar};
    plan.contrast = a.contrast;
    params.update({{"eta", eta}, {"nbar", a.nbar}, {"trap_freq_hz", a.trap.trap_freq},
                   {"qubit_freq_hz", a.qubit_freq}, {"contrast", a.contrast}});
    if (a.mode == "revival") {
      plan.mode = PlanMode::revival_scan;
      for (double tau : linspace(a.tau_min, a.tau_max, as_count(a.tau_points, "--tau-points")))
        plan.wait_times.push_back(tau * us);
      plan.fringe_points = as_count(a.fringe_points, "--fringe-points");
    } else {
      plan.mode = PlanMode::ramsey_scan;
      for (double tau : a.taus) plan.wait_times.push_back(tau * us);
      for (double d : linspace(a.d_min, a.d_max, as_count(a.d_points, "--detuning-points")))
        plan.detunings.push_back(two_pi * d);
    }
    t = to_table(simulate_fringes(plan));
  }
  emit(a.c, "synth", params, t, json::object());
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  Common c;
  Trap trap;
  std::string model;
  std::string input;
  double waist = 8.5;
  std::optional<double> nbar_start;
};

struct Unit {
  std::string name;
  double factor;  // display = value / factor
};

json fit_json(const FitResult& r, const std::vector<Unit>& units) {
  json params = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i)
    params.push_back({{"name", units[i].name},
                      {"value", r.values[i] / units[i].factor},
                      {"sigma", std::isfinite(r.sigmas[i]) ? json(r.sigmas[i] / units[i].factor) : json(nullptr)}});
  json cov = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < r.names.size(); ++j) {
      const double v = r.covariance[i][j] / (units[i].factor * units[j].factor);
      row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    }
    cov.push_back(row);
  }
  return {{"parameters", params}, {"covariance", cov},      {"chi2", r.chi2},
          {"dof", r.dof},         {"converged", r.converged}, {"degenerate", r.degenerate},
          {"iterations", r.iterations}, {"warnings", r.warnings}};
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  return read_csv(in);
}

void write_fit(const Common& c, const json& report) {
  Sink sink(c.out);
  if (c.format == "json") {
    sink.os() << report.dump(2) << '\n';
    return;
  }
  sink.os() << "parameter,value,sigma\n";
  auto cell = [](const json& v) { return v.is_null() ? std::string("inf") : v.dump(); };
  for (const auto& p : report["fit"]["parameters"])
    sink.os() << p["name"].get<std::string>() << ',' << cell(p["value"]) << ',' << cell(p["sigma"]) << '\n';
  for (const auto& [k, v] : report["derived"].items()) sink.os() << k << ',' << cell(v) << ",\n";
}

int cmd_fit(const FitArgs& a) {
  const auto sp = resolve_species(a.c);
  const Table t = read_table(a.input);
  json report{{"schema_version", schema_version}, {"command", "fit"}, {"model", a.model}, {"input", a.input}};
  bool converged = true;
  if (a.model == "rabi") {
    const RabiGeometry geo{a.waist * um, sp.mass(), a.trap.omega()};
    const auto r = fit_rabi_curve(rabi_from_table(t).points, geo);
    report["fit"] = fit_json(r, {{"pi_energy_nj", nj}, {"temperature_mk", mk}, {"scale", 1.0}});
    json derived = json::object();
    if (auto it = r.extras.find("temperature_upper_90"); it != r.extras.end())
      derived["temperature_upper_90_mk"] = it->second / mk;
    report["derived"] = derived;
    converged = r.converged;
  } else if (a.model == "fringe") {
    const auto ds = fringes_from_table(t);
    ds.validate();
    json fits = json::array();
    for (const auto& [tau, pts] : ds.by_wait_time()) {
      const auto r = fit_fringe(pts, tau);
      json f = fit_json(r, {{"amplitude", 1.0}, {"phase_rad", 1.0}, {"offset", 1.0}});
      f["tau_us"] = tau / us;
      fits.push_back(f);
      converged = converged && r.converged;
    }
    report["fits"] = fits;
    if (a.c.format == "csv") {
      Sink sink(a.c.out);
      Table out;
      out.columns = {"tau_us", "amplitude", "amplitude_sigma", "phase_rad", "phase_sigma_rad", "offset", "offset_sigma", "chi2"};
      for (const auto& f : fits) {
        std::vector<double> row{f["tau_us"].get<double>()};
        for (const auto& p : f["parameters"]) {
          row.push_back(p["value"].get<double>());
          row.push_back(p["sigma"].is_null() ? std::numeric_limits<double>::infinity() : p["sigma"].get<double>());
        }
        row.push_back(f["chi2"].get<double>());
        out.rows.push_back(row);
      }
      write_csv(sink.os(), out);
      return converged ? 0 : 1;
    }
  } else {
    const double eta = a.trap.lamb_dicke_for(sp);
    RevivalFitOptions opts;
    opts.omega_start = a.trap.omega();
    opts.nbar_start = a.nbar_start;
    FitResult r;
    const bool raw = std::find(t.columns.begin(), t.columns.end(), "detuning_hz") != t.columns.end();
    if (raw) {
      const auto an = analyze_revival(fringes_from_table(t), eta, opts);
      r = an.revival;
      report["visibilities"] = table_json(to_table(an.visibilities));
    } else {
      r = fit_revival(visibilities_from_table(t), eta, opts);
    }
    report["eta"] = eta;
    report["fit"] = fit_json(r, {{"trap_freq_hz", two_pi}, {"nbar", 1.0}, {"A", 1.0}, {"B", 1.0}});
    report["derived"] = {{"tau_rev_us", r.extras.at("tau_rev") / us},
                         {"tau_rev_sigma_us", std::isfinite(r.extras.at("tau_rev_sigma"))
                                                  ? json(r.extras.at("tau_rev_sigma") / us)
                                                  : json(nullptr)}};
    converged = r.converged;
  }
  write_fit(a.c, report);
  if (!converged) {
    std::cerr << "error: fit did not converge\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- lightshift / magic / species

struct LightshiftArgs {
  Common c;
  double pi_energy = 24.0, sigma_energy = 14.0, pi_waist = 8.5, sigma_waist = 20.0;
  double wavelength = 532.0, fwhm = 16.4, qubit_freq = 150e6, area = 1.0;
  bool zero_shift = false;
};

int cmd_lightshift(const LightshiftArgs& a) {
  const auto sp = resolve_species(a.c);
  PulseParams pulse{Envelope::sech, a.fwhm * ps, a.area * pi, two_pi * a.qubit_freq};
  LightShiftOptions opts;
  opts.laser_wavelength = a.wavelength * nm;
  opts.zero_shift = a.zero_shift;
  const auto r = lightshift_fidelity({a.pi_energy * nj, a.sigma_energy * nj},
                                     {a.pi_waist * um, a.sigma_waist * um}, sp, pulse, opts);
  json v{{"species", sp.name()},
         {"pi_energy_nj", a.pi_energy},
         {"sigma_energy_nj", a.sigma_energy},
         {"pi_waist_um", a.pi_waist},
         {"sigma_waist_um", a.sigma_waist},
         {"wavelength_nm", a.wavelength},
         {"fwhm_ps", a.fwhm},
         {"qubit_freq_hz", a.qubit_freq},
         {"area_pi", a.area},
         {"zero_shift", a.zero_shift ? 1 : 0},
         {"fidelity", r.fidelity},
         {"laser_detuning_hz", r.laser_detuning / two_pi},
         {"e_pi_v_per_m", r.e_pi},
         {"e_sigma_v_per_m", r.e_sigma_minus},
         {"rabi_peak_hz", r.rabi_peak / two_pi},
         {"shift_peak_hz", r.shift_peak / two_pi + 0.0},
         {"calibration_factor", std::isfinite(r.calibration_factor) ? json(r.calibration_factor) : json(nullptr)}};
  std::string note;
  if (!r.coupled)
    note = "a beam is dark (zero energy): there is no two-photon Raman coupling, so nothing transfers";
  emit_report(a.c, "lightshift", v, note);
  return 0;
}

int cmd_magic(const Common& c) {
  const auto sp = resolve_species(c);
  const auto m = magic_detuning(sp);
  emit_report(c, "magic",
              {{"species", sp.name()},
               {"laser_detuning_hz", m.laser_detuning / two_pi},
               {"fine_structure_hz", sp.fine_structure_omega() / two_pi},
               {"wavelength_nm", m.wavelength / nm}});
  return 0;
}

int cmd_species(const Common& c, bool all) {
  std::map<std::string, IonSpecies> table = builtin_species();
  if (!c.species_file.empty())
    for (auto& [k, v] : load_species_table(c.species_file)) table.insert_or_assign(k, v);
  std::vector<IonSpecies> list;
  if (all) {
    for (auto& [k, v] : table) list.push_back(v);
  } else {
    list.push_back(resolve_species(c));
  }
  Sink sink(c.out);
  auto row = [](const IonSpecies& s) {
    return json{{"species", s.name()},
                {"mass_amu", s.mass() / constants::atomic_mass_unit},
                {"resonance_wavelength_nm", omega_to_wavelength(s.resonance_omega0()) / nm},
                {"fine_structure_hz", s.fine_structure_omega() / two_pi},
                {"dipole_moment_ea0", s.dipole_moment() / constants::bohr_dipole},
                {"magic_wavelength_nm", magic_detuning(s).wavelength / nm}};
  };
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& s : list) arr.push_back(row(s));
    sink.os() << json{{"schema_version", schema_version}, {"command", "species"}, {"species", arr}}.dump(2) << '\n';
    return 0;
  }
  sink.os() << "species,mass_amu,resonance_wavelength_nm,fine_structure_hz,dipole_moment_ea0,magic_wavelength_nm\n";
  for (const auto& s : list) {
    const json r = row(s);
    bool first = true;
    for (const auto& [k, v] : r.items())
      sink.os() << (first ? "" : ",") << (v.is_string() ? v.get<std::string>() : v.dump()), first = false;
    sink.os() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-pulse spin-dependent kick toolkit: model curves, synthetic data, fits"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  RabiCurveArgs rc;
  auto* s_rabi = app.add_subcommand("rabi-curve", "Thermal Rabi flopping versus pulse energy");
  add_common(s_rabi, rc.c, true);
  rc.trap.add(s_rabi);
  s_rabi->add_option("--energy-min", rc.e_min, "First pulse energy [nJ]")->check(CLI::NonNegativeNumber);
  s_rabi->add_option("--energy-max", rc.e_max, "Last pulse energy [nJ]")->check(CLI::NonNegativeNumber);
  s_rabi->add_option("--energy-step", rc.e_step, "Energy step [nJ]");
  s_rabi->add_option("--pi-energy", rc.pi_energy, "Energy of a pi pulse at the beam centre [nJ]");
  s_rabi->add_option("--temperature", rc.temperature, "Ion temperature, 0 = no thermal spread [mK]");
  s_rabi->add_option("--waist", rc.waist, "Beam 1/e^2 intensity radius [um]")->check(CLI::PositiveNumber);
  s_rabi->add_option("--spam", rc.spam, "Readout visibility applied to the curve [dimensionless]");

  RevivalArgs rv;
  auto* s_rev = app.add_subcommand("revival", "Ramsey visibility versus wait time around a revival");
  add_common(s_rev, rv.c, true);
  rv.trap.add(s_rev);
  s_rev->add_option("--tau-min", rv.tau_min, "First wait time, default revival - 0.5 us [us]");
  s_rev->add_option("--tau-max", rv.tau_max, "Last wait time, default revival + 0.5 us [us]");
  s_rev->add_option("--points", rv.points, "Number of wait times [count]");
  s_rev->add_option("--nbar", rv.nbar, "Mean phonon number [dimensionless]")->check(CLI::NonNegativeNumber);
  s_rev->add_option("--offset", rv.offset, "Visibility offset A [dimensionless]");
  s_rev->add_option("--scale", rv.scale, "Visibility scale B [dimensionless]");
  s_rev->add_option("--qubit-freq", rv.qubit_freq, "Qubit splitting, used by --mc [Hz]");

  RamseyArgs rs;
  auto* s_ram = app.add_subcommand("ramsey-scan", "Ramsey fringes versus detuning");
  add_common(s_ram, rs.c, true);
  rs.trap.add(s_ram);
  s_ram->add_option("--tau", rs.taus, "Wait time(s) [us]");
  s_ram->add_option("--detuning-min", rs.d_min, "First qubit splitting [Hz]");
  s_ram->add_option("--detuning-max", rs.d_max, "Last qubit splitting [Hz]");
  s_ram->add_option("--points", rs.points, "Detunings per wait time [count]");
  s_ram->add_option("--nbar", rs.nbar, "Mean phonon number [dimensionless]")->check(CLI::NonNegativeNumber);
  s_ram->add_option("--spam", rs.spam, "Readout visibility [dimensionless]");

  SynthArgs sy;
  auto* s_syn = app.add_subcommand("synth", "Synthetic datasets with projection noise");
  add_common(s_syn, sy.c);
  sy.trap.add(s_syn);
  s_syn->add_option("--mode", sy.mode, "Dataset kind")->check(CLI::IsMember({"rabi", "revival", "ramsey"}));
  s_syn->add_option("--reps", sy.reps, "Repetitions per point [count]");
  s_syn->add_option("--spam", sy.spam, "Readout visibility V_SPAM [dimensionless]");
  s_syn->add_option("--e-bright", sy.e_bright, "P(read 0 | state 1), replaces --spam with --e-dark [dimensionless]");
  s_syn->add_option("--e-dark", sy.e_dark, "P(read 1 | state 0) [dimensionless]");
  s_syn->add_flag("--analytic", sy.analytic, "Record the model probabilities without sampling");
  s_syn->add_option("--energy-min", sy.e_min, "rabi: first pulse energy [nJ]");
  s_syn->add_option("--energy-max", sy.e_max, "rabi: last pulse energy [nJ]");
  s_syn->add_option("--energy-points", sy.e_points, "rabi: number of energies [count]");
  s_syn->add_option("--pi-energy", sy.pi_energy, "rabi: pi-pulse energy [nJ]");
  s_syn->add_option("--temperature", sy.temperature, "rabi: ion temperature [mK]");
  s_syn->add_option("--waist", sy.waist, "rabi: beam 1/e^2 intensity radius [um]");
  s_syn->add_option("--tau-min", sy.tau_min, "revival: first wait time [us]");
  s_syn->add_option("--tau-max", sy.tau_max, "revival: last wait time [us]");
  s_syn->add_option("--tau-points", sy.tau_points, "revival: number of wait times [count]");
  s_syn->add_option("--fringe-points", sy.fringe_points, "revival: detunings per fringe period [count]");
  s_syn->add_option("--tau", sy.taus, "ramsey: wait time(s) [us]");
  s_syn->add_option("--detuning-min", sy.d_min, "ramsey: first qubit splitting [Hz]");
  s_syn->add_option("--detuning-max", sy.d_max, "ramsey: last qubit splitting [Hz]");
  s_syn->add_option("--detuning-points", sy.d_points, "ramsey: detunings per wait time [count]");
  s_syn->add_option("--nbar", sy.nbar, "Mean phonon number [dimensionless]");
  s_syn->add_option("--qubit-freq", sy.qubit_freq, "revival: qubit splitting at the first fringe point [Hz]");
  s_syn->add_option("--contrast", sy.contrast,
                    "Fringe contrast before SPAM, default 0.97 x 0.95 x exp(-30.864 us / 100 us) [dimensionless]");

  FitArgs ft;
  ft.c.format = "json";
  auto* s_fit = app.add_subcommand("fit", "Fit a dataset written by synth (or lab data in the same columns)");
  add_common(s_fit, ft.c);
  ft.trap.add(s_fit);
  s_fit->add_option("--model", ft.model, "Model")->required()->check(CLI::IsMember({"rabi", "fringe", "revival"}));
  s_fit->add_option("--in,-i", ft.input, "Input CSV")->required();
  s_fit->add_option("--waist", ft.waist, "rabi: beam 1/e^2 intensity radius [um]");
  s_fit->add_option("--nbar-start", ft.nbar_start, "revival: starting mean phonon number [dimensionless]");

  LightshiftArgs ls;
  ls.c.format = "json";
  auto* s_ls = app.add_subcommand("lightshift", "Light-shift-limited single-pulse fidelity");
  add_common(s_ls, ls.c);
  s_ls->add_option("--pi-energy", ls.pi_energy, "Energy in the pi-polarized beam [nJ]")->check(CLI::NonNegativeNumber);
  s_ls->add_option("--sigma-energy", ls.sigma_energy, "Energy in the sigma- beam [nJ]")->check(CLI::NonNegativeNumber);
  s_ls->add_option("--pi-waist", ls.pi_waist, "Pi beam 1/e^2 intensity radius [um]");
  s_ls->add_option("--sigma-waist", ls.sigma_waist, "Sigma- beam 1/e^2 intensity radius [um]");
  s_ls->add_option("--wavelength", ls.wavelength, "Laser wavelength [nm]");
  s_ls->add_option("--fwhm", ls.fwhm, "Rabi-frequency FWHM of the sech pulse [ps]");
  s_ls->add_option("--qubit-freq", ls.qubit_freq, "Qubit splitting [Hz]");
  s_ls->add_option("--area", ls.area, "Pulse area [pi rad]");
  s_ls->add_flag("--zero-shift", ls.zero_shift, "Drop the light shift after calibration");

  Common mg;
  mg.format = "json";
  auto* s_mag = app.add_subcommand("magic", "Laser detuning where the differential light shift vanishes");
  add_common(s_mag, mg);

  Common spc;
  bool all = false;
  auto* s_sp = app.add_subcommand("species", "Print atomic data for one or all species");
  add_common(s_sp, spc);
  s_sp->add_flag("--all", all, "List every known species");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*s_rabi) return cmd_rabi_curve(rc);
    if (*s_rev) return cmd_revival(rv);
    if (*s_ram) return cmd_ramsey_scan(rs);
    if (*s_syn) return cmd_synth(sy);
    if (*s_fit) return cmd_fit(ft);
    if (*s_ls) return cmd_lightshift(ls);
    if (*s_mag) return cmd_magic(mg);
    if (*s_sp) return cmd_species(spc, all);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
