#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iontrap/constants.hpp"
#include "iontrap/dataset_io.hpp"
#include "iontrap/error.hpp"

using namespace iontrap;

namespace {

Table parse(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

std::string emit(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

}  // namespace

TEST_CASE("csv round trip keeps every bit") {
  Table t{{"a_us", "b"}, {{0.1, 1.0 / 3.0}, {6.02214076e23, -2.5e-300}, {0.0, 1e-7}}};
  const auto back = parse(emit(t));
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(back.rows[i][j] == t.rows[i][j]);
  CHECK(emit(t).rfind("a_us,b\n", 0) == 0);
}

TEST_CASE("csv reader tolerates comments, blanks and padding") {
  const auto t = parse("# made by hand\n\n x , y \r\n1, 2\n\n+3,4e0\n");
  CHECK(t.columns == std::vector<std::string>{"x", "y"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][0] == 3.0);
  CHECK(t.column("y") == 1);
  CHECK_THROWS_AS(t.column("z"), ValidationError);
}

TEST_CASE("csv reader rejects malformed input") {
  CHECK_THROWS_AS(parse(""), ValidationError);
  CHECK_THROWS_AS(parse("# nothing\n\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b\n1\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b\n1,2,3\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b\n1,x\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b\n1,\n"), ValidationError);
  CHECK_THROWS_AS(parse("a,b\n1,2abc\n"), ValidationError);
}

TEST_CASE("Rabi dataset converts through nanojoules") {
  RabiDataset d{{{0.0, 0.0, 1000}, {38e-9, 0.97, 1000}, {1e-7, 0.25, 10}}};
  const auto t = to_table(d);
  CHECK(t.columns == std::vector<std::string>{"energy_nj", "p_down", "repetitions"});
  CHECK(t.rows[1][0] == doctest::Approx(38.0));
  const auto back = rabi_from_table(parse(emit(t)));
  REQUIRE(back.points.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.points[i].energy == doctest::Approx(d.points[i].energy).epsilon(1e-15));
    CHECK(back.points[i].p_down == d.points[i].p_down);
    CHECK(back.points[i].repetitions == d.points[i].repetitions);
  }
  CHECK_THROWS_AS(rabi_from_table(parse("energy_nj,p_down,repetitions\n1,0.5,0\n")), ValidationError);
  CHECK_THROWS_AS(rabi_from_table(parse("energy_nj,p_down,repetitions\n1,0.5,2.5\n")), ValidationError);
  CHECK_THROWS_AS(rabi_from_table(parse("energy_nj,p_down,repetitions\n1,1.5,10\n")), ValidationError);
  CHECK_THROWS_AS(rabi_from_table(parse("energy_nj,p_up,repetitions\n1,0.5,10\n")), ValidationError);
}

TEST_CASE("fringe dataset converts Hz and microseconds at the boundary") {
  const double two_pi = constants::two_pi;
  FringeDataset d;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j)
      d.records.push_back({30.8e-6 + 0.1e-6 * i, two_pi * (150e6 + 1e4 * j), 0.1 * (j + 1), 1000});
  const auto t = to_table(d);
  CHECK(t.columns == std::vector<std::string>{"tau_us", "detuning_hz", "p_up", "repetitions"});
  CHECK(t.rows[1][1] == doctest::Approx(150.01e6));
  CHECK(t.rows[4][0] == doctest::Approx(30.9));
  const auto back = fringes_from_table(parse(emit(t)));
  REQUIRE(back.records.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(back.records[i].wait_time == doctest::Approx(d.records[i].wait_time).epsilon(1e-15));
    CHECK(back.records[i].detuning == doctest::Approx(d.records[i].detuning).epsilon(1e-15));
    CHECK(back.records[i].p_up == d.records[i].p_up);
  }
  CHECK(back.by_wait_time().size() == 2);
  CHECK_THROWS_AS(fringes_from_table(parse("tau_us,detuning_hz,p_up,repetitions\n30,1,0.5,10\n")),
                  ValidationError);
}

TEST_CASE("visibility table") {
  std::vector<VisibilityPoint> v{{30.8e-6, 0.4, 0.01}, {30.9e-6, 0.2, 0.02}};
  const auto t = to_table(v);
  CHECK(t.columns == std::vector<std::string>{"tau_us", "visibility", "visibility_sigma"});
  const auto back = visibilities_from_table(parse(emit(t)));
  REQUIRE(back.size() == 2);
  CHECK(back[1].wait_time == doctest::Approx(30.9e-6));
  CHECK(back[1].sigma == 0.02);
  CHECK_THROWS_AS(visibilities_from_table(parse("tau_us,visibility,visibility_sigma\n30,0.5,0\n")),
                  ValidationError);
}
