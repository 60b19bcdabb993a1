#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vacdec/scenario.hpp"

using namespace vacdec;

namespace {

RawScenario charge_adiabatic() {
  RawScenario r;
  r.particle = "charge";
  r.e2 = 1.0;
  r.trajectory = "adiabatic";
  r.R = 0.01;
  r.T = 1.0;
  r.plate = true;
  r.z0 = 0.5;
  r.j_hat = Vec3{1, 0, 0};
  return r;
}

bool has_violation(const ValidationError& e, ErrorKind kind, const std::string& field) {
  for (const auto& v : e.violations())
    if (v.kind == kind && v.field == field) return true;
  return false;
}

}  // namespace

TEST_CASE("orientation from j_hat") {
  RawScenario r = charge_adiabatic();
  CHECK(validate(r).geometry.orientation == Orientation::parallel);
  r.j_hat = Vec3{0, 0, 1};
  CHECK(validate(r).geometry.orientation == Orientation::perpendicular);
  r.j_hat = Vec3{0.6, 0, 0.8};
  CHECK(validate(r).geometry.orientation == Orientation::oblique);
}

TEST_CASE("negative distance rejected") {
  RawScenario r = charge_adiabatic();
  r.z0 = -1.0;
  try {
    validate(r);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_violation(e, ErrorKind::NegativeDistance, "geometry.z0"));
  }
}

TEST_CASE("all violations are reported together") {
  RawScenario r = charge_adiabatic();
  r.z0 = -1.0;
  r.j_hat = Vec3{2, 0, 0};
  r.T = -1.0;
  try {
    validate(r);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 3);
    CHECK(has_violation(e, ErrorKind::NonUnitDirection, "geometry.j_hat"));
    CHECK(has_violation(e, ErrorKind::InconsistentTrajectory, "trajectory.T"));
  }
}

TEST_CASE("coupling and trajectory completeness") {
  RawScenario r = charge_adiabatic();
  r.particle.reset();
  r.e2.reset();
  CHECK_THROWS_AS(validate(r), ValidationError);

  r = charge_adiabatic();
  r.trajectory = "trapezoid";
  r.R.reset();
  r.v = 0.01;
  r.tau = 0.3;  // > T/4
  try {
    validate(r);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(has_violation(e, ErrorKind::InconsistentTrajectory, "trajectory.tau"));
  }

  r = charge_adiabatic();
  r.particle = "dipole";
  r.e2.reset();
  CHECK_THROWS_AS(validate(r), ValidationError);
  r.p = Vec3{0, 0, 1};
  CHECK(std::holds_alternative<DipoleCoupling>(validate(r).coupling));
}

TEST_CASE("speed limits") {
  RawScenario r = charge_adiabatic();
  r.R = 0.2;  // v = 0.2: warned
  CHECK_FALSE(validate(r).warnings.empty());
  r.R = 0.5;
  CHECK_THROWS_AS(validate(r), ValidationError);
}

TEST_CASE("geometric reflection") {
  CHECK(reflect_geometric({1, 0, 0}) == Vec3{1, 0, 0});
  CHECK(reflect_geometric({0, 0, 1}) == Vec3{0, 0, -1});
  CHECK(reflect_geometric({3, 4, 5}) == Vec3{3, 4, -5});
}

TEST_CASE("electric dipole image") {
  CHECK(reflect_electric_dipole({1, 0, 0}) == Vec3{-1, 0, 0});
  CHECK(reflect_electric_dipole({0, 0, 1}) == Vec3{0, 0, 1});
  CHECK(reflect_electric_dipole({0, 0, 0}) == Vec3{0, 0, 0});
  // p'.p = p_z^2 - p_x^2 - p_y^2
  const Vec3 p{0.48, 0.6, 0.64};
  CHECK(dot(reflect_electric_dipole(p), p) ==
        doctest::Approx(p.z * p.z - p.x * p.x - p.y * p.y).epsilon(1e-15));
}

TEST_CASE("magnetic dipole image") {
  CHECK(reflect_magnetic_dipole({0, 0, 1}) == Vec3{0, 0, -1});
  CHECK(reflect_magnetic_dipole({1, 0, 0}) == Vec3{1, 0, 0});
  CHECK(reflect_magnetic_dipole({0, 1, 0}) == Vec3{0, 1, 0});
}

TEST_CASE("make_scenario rechecks edits") {
  Scenario s = validate(charge_adiabatic());
  s.geometry.z0 = -0.1;
  CHECK_THROWS_AS(make_scenario(s), ValidationError);
  s.geometry.z0 = 0.1;
  s.geometry.j_hat = {0, 0, 1};
  CHECK(make_scenario(s).geometry.orientation == Orientation::perpendicular);
}

TEST_CASE("dipole expansion parameter") {
  RawScenario r;
  r.particle = "dipole";
  r.p = Vec3{0, 0, 1};
  r.trajectory = "trapezoid";
  r.v = 0.01;
  r.T = 1.0;
  r.tau = 0.05;
  r.k_max = 2.0;
  Scenario s = validate(r);
  // reach 2 times excursion 0.01 * (0.5 - 0.05)
  CHECK(dipole_expansion_parameter(s) == doctest::Approx(2.0 * 0.0045));
  CHECK(s.warnings.empty());
  r.k_max = 200.0;
  s = validate(r);
  CHECK(dipole_expansion_parameter(s) == doctest::Approx(0.9));
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("dipole approximation") != std::string::npos);
  r.method = "full";
  CHECK(validate(r).warnings.empty());
}
