#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vacdec/error.hpp"
#include "vacdec/kernels.hpp"
#include "vacdec/scenario.hpp"

namespace vacdec {

/// Printed normalization of the dipole image term and the constant that
/// brings it onto the first-principles result. The product equals the
/// vacuum prefactor 1/(8 pi^3).
inline constexpr double kDipoleBoundaryPrefactor =
    1.0 / (32.0 * 3.14159265358979323846 * 3.14159265358979323846 * 3.14159265358979323846);
inline constexpr double kDipoleBoundaryCalibration = 4.0;
inline constexpr std::string_view kDipoleBoundaryCalibrationProvenance =
    "fixed by the Hadamard-contraction Monte Carlo oracle on an adiabatic electric dipole "
    "(p along the normal, z0 = 0); see the calibration test";

struct Regularization {
  enum class Kind {
    none,    // smooth profile, spectrum integrated to exhaustion
    ramp,    // kinked profile with finite ramps, closed by an analytic k^-3 tail
    cutoff,  // hard radial cutoff k_max
  };
  Kind kind = Kind::none;
  std::optional<double> tau;
  std::optional<double> k_max;
  std::string note;
};

std::string_view to_string(Regularization::Kind k);

struct Calibration {
  double factor = 1.0;
  std::string provenance;
};

struct DecoherenceResult {
  double w_vac = 0.0;
  double w_boundary = 0.0;
  double w_total = 0.0;
  double visibility = 1.0;           // exp(-W)
  double emission_prob_equiv = 0.0;  // 1 - exp(-W/2)
  double err_est = 0.0;
  Method method = Method::dipole_approx;
  /// Set when an oblique geometry was routed to the full path.
  bool experimental = false;
  Regularization regularization;
  std::optional<Calibration> calibration;
  std::vector<std::string> notes;
};

/// One decoherence contribution with its error budget.
struct WFragment {
  double value = 0.0;
  double err_est = 0.0;
  long evaluations = 0;
  std::string note;
};

/// Individual terms, honouring scenario.method. The boundary fragments
/// ignore geometry.plate and always evaluate the image term.
/// Throws UnsupportedCase (oblique, dipole method), CutoffRequired,
/// QuadratureFailure, or InvalidValue for a coupling of the wrong kind.
WFragment w_charge_vacuum(const Scenario& s);
WFragment w_charge_boundary(const Scenario& s);
WFragment w_dipole_vacuum(const Scenario& s);
WFragment w_dipole_boundary(const Scenario& s);

/// Full evaluation. Without a plate the boundary term is exactly zero.
/// W_total = W_vac + W_boundary holds by construction; near the plate the
/// total is integrated directly so that cancellations do not eat precision.
DecoherenceResult compute(const Scenario& s);

/// Expected sign of the image term for the symmetric cases, stated as data.
struct BoundarySignRule {
  const char* label;
  SourceKind source;
  Vec3 j_hat;
  Vec3 moment;
  int sign;  // sign of W_boundary at contact
};

std::span<const BoundarySignRule> boundary_sign_table();

/// Throws std::logic_error if the reductions disagree with the table. Runs
/// once per process from compute() in debug builds.
void check_boundary_sign_table();

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { z0, orientation, tau, N };

std::string_view to_string(SweepAxis a);

/// Parses "z0", "orientation", "tau" or "N". Throws InvalidValue.
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::z0;
  std::vector<double> values;             // z0, tau or N
  std::vector<Orientation> orientations;  // orientation axis only
};

/// n points from lo to hi inclusive, linear or logarithmic.
std::vector<double> sweep_grid(double lo, double hi, int n, bool log_spaced);

struct SweepPoint {
  double value = 0.0;
  Orientation orientation = Orientation::parallel;
  Scenario scenario;
  std::optional<DecoherenceResult> result;
  std::optional<ErrorKind> error;
  std::string error_message;
};

/// Evaluates the grid points in parallel; results keep grid order and do not
/// depend on the worker count. Per-point failures are recorded, not thrown.
/// Throws InvalidValue for an empty or non-monotone grid.
std::vector<SweepPoint> sweep(const Scenario& base, const SweepSpec& spec, int workers = 0);

/// Applies one sweep coordinate to a scenario and revalidates it.
Scenario with_sweep_value(const Scenario& base, SweepAxis axis, double value,
                          Orientation orientation);

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace vacdec
