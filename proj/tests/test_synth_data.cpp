#include <omp.h>

#include <cmath>
#include <set>

#include "doctest.h"
#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/phys_core.hpp"
#include "iontrap/synth_data.hpp"

using namespace iontrap;
using constants::two_pi;

namespace {

ExperimentPlan rabi_plan() {
  ExperimentPlan p;
  p.mode = PlanMode::rabi_curve;
  for (int i = 0; i <= 40; ++i) p.energies.push_back(2e-9 * i);
  p.geometry = {8.5e-6, make_species("Ba138+").mass(), two_pi * 32.4e3};
  return p;
}

ExperimentPlan revival_plan() {
  ExperimentPlan p;
  p.mode = PlanMode::revival_scan;
  for (int i = 0; i < 11; ++i) p.wait_times.push_back(30.6e-6 + 0.05e-6 * i);
  p.ramsey = {0.56, two_pi * 32.4e3, two_pi * 150e6, 0.0, 1059};
  return p;
}

}  // namespace

TEST_CASE("analytic mode equals the compressed model") {
  auto p = rabi_plan();
  p.analytic = true;
  p.spam.visibility = 0.7;
  const auto d = simulate_rabi(p);
  REQUIRE(d.points.size() == p.energies.size());
  for (const auto& pt : d.points) {
    const double model = rabi_model(pt.energy, p.pi_energy, p.temperature, 1.0, p.geometry);
    CHECK(pt.p_down == doctest::Approx(0.5 + 0.7 * (model - 0.5)).epsilon(1e-15));
    CHECK(pt.repetitions == 1000);
  }

  auto r = revival_plan();
  r.analytic = true;
  r.contrast = 0.8;
  const auto f = simulate_fringes(r);
  REQUIRE(f.records.size() == 11 * 16);
  for (const auto& rec : f.records) {
    RamseyConfig cfg = r.ramsey;
    cfg.wait_time = rec.wait_time;
    cfg.qubit_delta = rec.detuning;
    CHECK(rec.p_up == doctest::Approx(0.5 + 0.8 * (ramsey_pup_analytic(cfg) - 0.5)).epsilon(1e-15));
  }
  // One fringe period per wait time, starting at the qubit splitting.
  const auto groups = f.by_wait_time();
  CHECK(groups.size() == 11);
  for (const auto& [tau, pts] : groups) {
    CHECK(pts.front().detuning == r.ramsey.qubit_delta);
    CHECK((pts.back().detuning - pts.front().detuning) * tau == doctest::Approx(two_pi * 15 / 16));
  }
}

TEST_CASE("single repetition gives binary outcomes") {
  auto p = rabi_plan();
  p.repetitions = 1;
  const auto d = simulate_rabi(p);
  std::set<double> seen;
  for (const auto& pt : d.points) seen.insert(pt.p_down);
  for (double v : seen) CHECK((v == 0.0 || v == 1.0));
  CHECK(d.points.front().p_down == 0.0);
}

TEST_CASE("seeded determinism and per-point independence") {
  auto p = rabi_plan();
  const auto a = simulate_rabi(p);
  const auto b = simulate_rabi(p);
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].p_down == b.points[i].p_down);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  const auto c = simulate_rabi(p);
  omp_set_num_threads(saved);
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].p_down == c.points[i].p_down);

  // Changing one grid point leaves the others' draws untouched.
  auto q = p;
  q.energies[7] = 55e-9;
  const auto e = simulate_rabi(q);
  for (std::size_t i = 0; i < a.points.size(); ++i)
    if (i != 7) CHECK(a.points[i].p_down == e.points[i].p_down);

  p.seed = 2;
  const auto s2 = simulate_rabi(p);
  int differ = 0;
  for (std::size_t i = 0; i < a.points.size(); ++i) differ += a.points[i].p_down != s2.points[i].p_down;
  CHECK(differ > 30);

  CHECK(sample_fraction(0.3, 500, 9, 4) == sample_fraction(0.3, 500, 9, 4));
  CHECK(sample_fraction(0.3, 500, 9, 4) != sample_fraction(0.3, 500, 9, 5));
}

TEST_CASE("empirical mean converges to the SPAM-compressed model") {
  auto p = rabi_plan();
  p.repetitions = 10000;
  p.spam.visibility = 0.7;
  const auto d = simulate_rabi(p);
  int outside = 0;
  for (const auto& pt : d.points) {
    const double q = 0.5 + 0.7 * (rabi_model(pt.energy, p.pi_energy, p.temperature, 1.0, p.geometry) - 0.5);
    const double se = std::sqrt(q * (1 - q) / 1e4);
    outside += std::abs(pt.p_down - q) > 4.0 * se;
  }
  CHECK(outside == 0);

  // Asymmetric readout errors.
  SpamModel s;
  s.e_bright = 0.1;
  s.e_dark = 0.05;
  CHECK(s.apply(1.0) == doctest::Approx(0.9));
  CHECK(s.apply(0.0) == doctest::Approx(0.05));
  CHECK(s.apply(0.4) == doctest::Approx(0.4 * 0.9 + 0.6 * 0.05));
  int bad = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const double f = sample_fraction(s.apply(0.4), 10000, 17, i);
    bad += std::abs(f - s.apply(0.4)) > 4 * std::sqrt(s.apply(0.4) * (1 - s.apply(0.4)) / 1e4);
  }
  CHECK(bad == 0);
}

TEST_CASE("plan validation") {
  auto p = rabi_plan();
  p.repetitions = 0;
  CHECK_THROWS_AS(simulate_rabi(p), ValidationError);
  p = rabi_plan();
  p.energies.clear();
  CHECK_THROWS_AS(simulate_rabi(p), ValidationError);
  p = rabi_plan();
  p.spam.visibility = 0.0;
  CHECK_THROWS_AS(simulate_rabi(p), ValidationError);
  p.spam.visibility = 1.2;
  CHECK_THROWS_AS(simulate_rabi(p), ValidationError);
  p = rabi_plan();
  p.spam.e_bright = 0.1;
  CHECK_THROWS_AS(simulate_rabi(p), ValidationError);
  p = rabi_plan();
  CHECK_THROWS_AS(simulate_fringes(p), ValidationError);

  auto r = revival_plan();
  r.wait_times.clear();
  CHECK_THROWS_AS(simulate_fringes(r), ValidationError);
  r = revival_plan();
  r.fringe_points = 3;
  CHECK_THROWS_AS(simulate_fringes(r), ValidationError);
  r = revival_plan();
  r.mode = PlanMode::ramsey_scan;
  CHECK_THROWS_AS(simulate_fringes(r), ValidationError);
  r.detunings = {0.0, 1e6};
  CHECK(simulate_fringes(r).records.size() == 22);
  CHECK(std::holds_alternative<FringeDataset>(simulate_experiment(r)));
  CHECK(std::holds_alternative<RabiDataset>(simulate_experiment(rabi_plan())));
}

TEST_CASE("revival scan fits back to the generating parameters") {
  auto r = revival_plan();
  r.wait_times.clear();
  for (int i = 0; i < 23; ++i) r.wait_times.push_back(30.3e-6 + 0.05e-6 * i);
  r.contrast = 0.47;
  const auto d = simulate_fringes(r);
  const auto a = analyze_revival(d, 0.56);
  CHECK(std::abs(a.revival.extras.at("tau_rev") - two_pi / r.ramsey.trap_omega) < 0.01e-6);
  CHECK(std::abs(a.revival.value("nbar") - 1059) < 160);
}
