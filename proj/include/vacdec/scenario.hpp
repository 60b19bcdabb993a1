#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vacdec/error.hpp"
#include "vacdec/quadrature.hpp"
#include "vacdec/trajectories.hpp"
#include "vacdec/vec3.hpp"

namespace vacdec {

// Units: hbar = c = 1. Lengths and times share one unit, wavenumbers are
// inverse times, e^2 is the dimensionless coupling and every W is a pure
// number. The physical fine-structure value is
//   e^2 = 4 pi / 137.036
// but it is never applied implicitly.
inline constexpr double kPhysicalChargeSquared = 4.0 * 3.14159265358979323846 / 137.036;

struct ChargeCoupling {
  double e2 = 1.0;
};

/// Permanent electric (p) and magnetic (m) dipole moments, constant along the path.
struct DipoleCoupling {
  Vec3 p;
  Vec3 m;
};

using Coupling = std::variant<ChargeCoupling, DipoleCoupling>;

enum class Orientation { parallel, perpendicular, oblique };

std::string_view to_string(Orientation o);

/// Branches follow X_{1,2}(t) = z0 z_hat +/- x(t) j_hat; the plate, when
/// present, is the plane z = 0 with normal z_hat.
struct Geometry {
  bool plate = false;
  double z0 = 0.0;
  Vec3 j_hat{1.0, 0.0, 0.0};
  Orientation orientation = Orientation::parallel;
};

/// Classifies a unit direction relative to the plate normal.
Orientation classify_orientation(Vec3 j_hat);

enum class Method {
  dipole_approx,  // closed angular reductions, cos -> 1 and sin -> k_j x
  full,           // three-dimensional quadrature with exact source spectra
};

std::string_view to_string(Method m);

struct McConfig {
  std::uint64_t samples = 4'000'000;
  std::uint64_t seed = 1;
  /// Worker threads; 0 picks the machine parallelism. Results do not depend on it.
  int workers = 0;
};

struct Scenario {
  std::string id;
  Coupling coupling;
  TrajectorySpec trajectory;
  Geometry geometry;
  Method method = Method::dipole_approx;
  QuadratureConfig numerics;
  std::optional<McConfig> oracle_numerics;
  std::vector<std::string> warnings;
};

/// Parsed-but-unchecked scenario fields, as produced by the scenario file reader.
struct RawScenario {
  std::optional<std::string> id;
  // [particle]
  std::optional<std::string> particle;  // "charge" | "dipole"
  std::optional<double> e2;
  std::optional<Vec3> p;
  std::optional<Vec3> m;
  // [trajectory]
  std::optional<std::string> trajectory;  // "adiabatic" | "trapezoid" | "pulse_train"
  std::optional<double> R, T, v, tau, T_pulse, T_sep, Omega;
  std::optional<std::int64_t> N;
  // [geometry]
  std::optional<bool> plate;
  std::optional<double> z0;
  std::optional<Vec3> j_hat;
  // [numerics]
  std::optional<std::string> method;  // "dipole" | "full"
  std::optional<double> rel_tol, abs_tol, k_max;
  std::optional<std::int64_t> max_subdivisions;
  // [oracle]
  std::optional<std::int64_t> samples, seed, workers;
};

/// Checks every field, normalizes j_hat and classifies the orientation.
/// Throws ValidationError listing all violations.
Scenario validate(const RawScenario& raw);

/// Re-checks the invariants of an already assembled scenario (used after
/// programmatic edits such as sweeps). Throws ValidationError.
Scenario make_scenario(Scenario s);

/// Expansion parameter of the dipole approximation: the largest excursion
/// times the spectral reach k_c (k_max if set, else 1/tau on ramped paths,
/// else the inverse time scale plus any carrier).
double dipole_expansion_parameter(const Scenario& s);

/// Above this the dipole-approximation path draws a warning.
inline constexpr double kDipoleApproxWarn = 0.1;

/// Geometric mirror image through the plate: (x, y, -z).
Vec3 reflect_geometric(Vec3 v);

/// Image of an electric dipole in a perfect conductor: (-x, -y, z).
Vec3 reflect_electric_dipole(Vec3 p);

/// Image of a magnetic dipole in a perfect conductor: (x, y, -z).
Vec3 reflect_magnetic_dipole(Vec3 m);

/// Speeds above this draw a warning; at kMaxSpeed the scenario is rejected.
inline constexpr double kWarnSpeed = 0.1;
inline constexpr double kMaxSpeed = 0.3;

}  // namespace vacdec
