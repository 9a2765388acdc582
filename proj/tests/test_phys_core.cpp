#include <cmath>

#include "doctest.h"
#include "iontrap/constants.hpp"
#include "iontrap/error.hpp"
#include "iontrap/phys_core.hpp"

using namespace iontrap;
using constants::two_pi;

TEST_CASE("Ba138+ species data") {
  const IonSpecies ba = make_species("Ba138+");
  CHECK(ba.mass() == doctest::Approx(2.2915e-25).epsilon(1e-4));
  CHECK(ba.mass() == doctest::Approx(138.0 * 1.66053906660e-27).epsilon(1e-12));
  // omega_FS from the two transition wavenumbers
  const double fs = two_pi * constants::c * (1.0 / 455.4e-9 - 1.0 / 493.4e-9);
  CHECK(ba.fine_structure_omega() == doctest::Approx(fs).epsilon(1e-12));
  CHECK(ba.fine_structure_omega() / two_pi == doctest::Approx(50.7e12).epsilon(2e-3));
  CHECK(ba.resonance_omega0() == doctest::Approx(two_pi * constants::c / 493.4e-9).epsilon(1e-12));
  // d^2 = 3 pi eps0 hbar c^3 Gamma / omega0^3, Gamma = 0.756 / 7.92 ns
  const double gamma = 0.756 / 7.92e-9;
  const double w0 = ba.resonance_omega0();
  const double d = std::sqrt(3.0 * constants::pi * constants::epsilon0 * constants::hbar *
                             std::pow(constants::c, 3) * gamma / std::pow(w0, 3));
  CHECK(ba.dipole_moment() == doctest::Approx(d).epsilon(1e-12));
  CHECK(ba.dipole_moment() / constants::bohr_dipole == doctest::Approx(2.38).epsilon(0.01));
}

TEST_CASE("unknown species names the identifier") {
  CHECK_THROWS_AS(make_species("Xx999+"), ValidationError);
  try {
    make_species("Xx999+");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("Xx999+") != std::string::npos);
  }
  CHECK(builtin_species().size() >= 3);
  for (const auto& [name, s] : builtin_species()) {
    const double amu = s.mass() / constants::atomic_mass_unit;
    CHECK(amu >= 1.0);
    CHECK(amu <= 300.0);
    CHECK(s.fine_structure_omega() > 0.0);
  }
}

TEST_CASE("species table parsing") {
  const auto t = parse_species_table(R"(
# test table
[Yb171+]
mass_amu = 171
resonance_wavelength_nm = 369.5
fine_structure_wavelength_nm = 328.9
p_half_lifetime_ns = 8.1
branching_to_ground = 0.995
)");
  REQUIRE(t.count("Yb171+") == 1);
  const auto& yb = t.at("Yb171+");
  CHECK(yb.mass() == doctest::Approx(171.0 * constants::atomic_mass_unit));
  CHECK(yb.resonance_omega0() == doctest::Approx(two_pi * constants::c / 369.5e-9));
  CHECK_THROWS_AS(parse_species_table("[X]\nmass_amu = 400\n"), ValidationError);
  CHECK_THROWS_AS(parse_species_table("mass_amu = 10\n"), ValidationError);
  CHECK_THROWS_AS(parse_species_table("[X]\nbogus = 1\n"), ValidationError);
}

TEST_CASE("Lamb-Dicke parameter at the operating point") {
  const double k = orthogonal_beam_k_eff(532e-9);
  CHECK(k == doctest::Approx(std::sqrt(2.0) * two_pi / 532e-9));
  const double m = make_species("Ba138+").mass();
  const double w = two_pi * 32.4e3;
  const double eta = lamb_dicke(k, m, w);
  CHECK(eta == doctest::Approx(0.56).epsilon(0.01 / 0.56));
  CHECK(eta == doctest::Approx(k * std::sqrt(constants::hbar / (2.0 * m * w))).epsilon(1e-14));
  CHECK(lamb_dicke(k, m, 4.0 * w) == doctest::Approx(eta / 2.0).epsilon(1e-14));
  CHECK(lamb_dicke(3.0 * k, m, w) == 3.0 * lamb_dicke(k, m, w));
  CHECK_THROWS_AS(lamb_dicke(0.0, m, w), DomainError);
  CHECK_THROWS_AS(lamb_dicke(k, -m, w), DomainError);
  CHECK_THROWS_AS(lamb_dicke(k, m, 0.0), DomainError);

  const TrapParams trap(w, k, m);
  CHECK(trap.lamb_dicke() == doctest::Approx(eta).epsilon(1e-12));
  CHECK(trap.period() == doctest::Approx(1.0 / 32.4e3));
  CHECK_THROWS_AS(TrapParams(0.0, k, m), DomainError);
}

TEST_CASE("thermal occupation") {
  const double w = two_pi * 32.4e3;
  CHECK(thermal_nbar(1.6e-3, w) == doctest::Approx(1059.0).epsilon(0.05));
  CHECK(thermal_nbar(0.0, w) == 0.0);
  CHECK(thermal_nbar(0.0, w, NbarConvention::bose_einstein) == 0.0);
  for (double t : {1e-6, 1e-4, 1.6e-3, 0.3}) {
    CHECK(nbar_to_temperature(thermal_nbar(t, w), w) == doctest::Approx(t).epsilon(1e-12));
    const double nb = thermal_nbar(t, w, NbarConvention::bose_einstein);
    CHECK(nbar_to_temperature(nb, w, NbarConvention::bose_einstein) ==
          doctest::Approx(t).epsilon(1e-10));
  }
  // Bose-Einstein approaches the classical value minus 1/2 at high n
  const double nc = thermal_nbar(1.6e-3, w);
  CHECK(thermal_nbar(1.6e-3, w, NbarConvention::bose_einstein) == doctest::Approx(nc - 0.5).epsilon(1e-6));
  CHECK_THROWS_AS(thermal_nbar(-1.0, w), DomainError);
}

TEST_CASE("wavelength conversions") {
  CHECK(omega_to_wavelength(wavelength_to_omega(532e-9)) == doctest::Approx(532e-9).epsilon(1e-15));
  CHECK(thermal_position_spread(0.0, 1e-25, 1e5) == 0.0);
  const double m = make_species("Ba138+").mass();
  CHECK(thermal_position_spread(0.5e-3, m, two_pi * 32.4e3) == doctest::Approx(0.853e-6).epsilon(2e-3));
}
