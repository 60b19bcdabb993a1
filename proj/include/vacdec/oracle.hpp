#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

#include "vacdec/kernels.hpp"
#include "vacdec/scenario.hpp"

namespace vacdec {

/// Philox4x32-10 counter-based generator: a keyed bijection of 128-bit
/// counters, so every (seed, sample index) pair maps to fixed random bits no
/// matter which thread draws them.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const;

  /// Four uniforms in (0, 1) for the given sample index and stream word.
  std::array<double, 4> uniforms(std::uint64_t index, std::uint32_t stream = 0) const;

 private:
  Key key_;
};

/// Momentum-space difference source J(branch 1) - J(branch 2) at one wavevector.
struct MomentumSource {
  std::variant<FourCurrent, DipoleTensor> amplitude;
};

/// Builds the source from both branch worldlines via the trajectory phase
/// transforms. Charges give a 4-current, dipoles the tensor amplitude.
MomentumSource momentum_source(const Scenario& s, const KPoint& kp,
                               const SpectrumOptions& opts = {});

/// |omega rho + k.J| / |J| of the charge source (zero for dipoles, whose
/// effective current is conserved identically).
double conservation_residual(const Scenario& s, const KPoint& kp);

struct McComponent {
  double value = 0.0;
  double std_error = 0.0;
};

struct McEstimate {
  double value = 0.0;  // W_vac + W_boundary
  double std_error = 0.0;
  std::uint64_t samples_used = 0;
  McComponent vacuum;
  McComponent boundary;
};

/// Samples per reduction block. Blocks are the unit of parallel work and are
/// combined pairwise in index order.
inline constexpr std::uint64_t kMcBlockSize = 1u << 14;

/// Monte Carlo estimate of W from the covariant contraction of the sampled
/// sources with the vacuum and image kernels. The radial proposal is
/// k^3 exp(-a k^2) for smooth profiles and uniform on [0, k_max] for kinked
/// ones (CutoffRequired without k_max); directions are uniform.
/// Throws McVarianceBlowup if the error does not shrink like 1/sqrt(N).
McEstimate mc_w_first_principles(const Scenario& s, const McConfig& cfg);

/// Parameters for the closed-form catalog; each case reads what it needs.
struct LimitParams {
  double e2 = 1.0;
  double v = 0.0;           // speed scale (R/T for the adiabatic profile)
  double R = 0.0;           // excursion amplitude
  double T = 1.0;           // duration
  double tau = 0.0;         // ramp time
  double projection = 0.0;  // p_hat . j_hat for the dipole/charge ratio
};

/// Closed forms:
///   "adiabatic"                    2 e^2 v^2 / (3 pi)
///   "log-slope"                    2 e^2 v^2 / pi^2
///   "contact-ratio-parallel"       0
///   "contact-ratio-perpendicular"  2
///   "dipole-charge-ratio"          4 (2 - c^2) / 5
///   "small-z0-coefficient"         32 e^2 R^2 / (15 pi T^4)   (W_total / z0^2, parallel)
///   "large-z0-exponent"            -4
///   "large-z0-amplitude"           e^2 pi R^2 T^2 / (8 pi^2)  (W_boundary z0^4)
///   "trapezoid-vacuum"             exact W_vac of the trapezoid
/// Throws UnknownCase.
double analytic_limits(std::string_view case_name, const LimitParams& p);

struct PowerSample {
  double z0 = 0.0;
  double w = 0.0;
};

struct PowerFitOptions {
  bool extract_envelope = false;
  /// Smallest admissible z0 (the asymptotic regime).
  double min_z0 = 0.0;
};

struct PowerFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  // max |log residual|
  std::size_t points_used = 0;
};

/// Log-log least squares of |W| against z0. Needs six points over 1.5
/// decades at z0 >= min_z0 (InsufficientSpan); a non-monotone |W| raises
/// NonMonotoneEnvelope unless envelope extraction is requested, in which case
/// only local maxima of |W| are fitted.
PowerFit fit_power_law(std::span<const PowerSample> samples, const PowerFitOptions& opts = {});

/// Reference check of the dipole image normalization: Monte Carlo boundary
/// term versus the printed (uncalibrated) reduction on an adiabatic electric
/// dipole normal to the plate at contact.
struct CalibrationCheck {
  double mc_boundary = 0.0;
  double mc_std_error = 0.0;
  double printed_boundary = 0.0;
  double implied_factor = 0.0;
  double implied_std_error = 0.0;
};

CalibrationCheck dipole_boundary_calibration(const McConfig& cfg);

}  // namespace vacdec
