#pragma once

#include <complex>
#include <variant>
#include <vector>

namespace vacdec {

using cplx = std::complex<double>;

/// Gaussian excursion x(t) = R exp(-t^2/T^2); smooth, cutoff-free.
struct Adiabatic {
  double amplitude = 0.0;  // R
  double width = 1.0;      // T
};

/// Symmetric trapezoidal velocity profile on [0, T]: ramp to +v over tau,
/// coast, reverse to -v over 2 tau around T/2, coast, ramp back to rest over
/// tau. Closed: x(0) = x(T) = 0.
struct PiecewiseTrapezoid {
  double speed = 0.0;     // v
  double duration = 1.0;  // T
  double ramp = 0.0;      // tau, 0 < tau < T/4
};

/// N Gaussian excursions centred at n * separation, n = 0..N-1, optionally
/// modulated by cos(carrier * (t - t_n)).
struct PulseTrain {
  double amplitude = 0.0;    // R
  double pulse_width = 1.0;  // T_pulse
  double separation = 1.0;   // T_sep
  int count = 1;             // N
  double carrier = 0.0;      // Omega
};

struct TrajectorySpec {
  std::variant<Adiabatic, PiecewiseTrapezoid, PulseTrain> profile;
};

/// Gaussian profiles are truncated at this many widths.
inline constexpr double kGaussianSupportWidths = 8.0;

struct Support {
  double start = 0.0;
  double end = 0.0;
};

Support support(const TrajectorySpec& spec);

/// Characteristic time of the profile (T, T or T_pulse).
double time_scale(const TrajectorySpec& spec);

/// Upper bound on |x(t)|.
double max_excursion(const TrajectorySpec& spec);

/// Upper bound on |dx/dt|.
double max_speed(const TrajectorySpec& spec);

/// True when the velocity has kinks so the spectrum decays only as a power.
bool has_power_law_spectrum(const TrajectorySpec& spec);

/// Points where x(t) is not analytic, sorted, including the support ends.
std::vector<double> breakpoints(const TrajectorySpec& spec);

double position(const TrajectorySpec& spec, double t);

/// Exact derivative of position(); right limit at trapezoid breakpoints.
double velocity(const TrajectorySpec& spec, double t);

enum class SpectrumMode {
  charge,  // integral of xdot(t) cos(k_j x(t)) e^{ikt}
  dipole,  // integral of sin(k_j x(t)) e^{ikt}
};

struct SourceSpectrum {
  cplx value{};
  double k = 0.0;
  double k_j = 0.0;
  SpectrumMode mode = SpectrumMode::charge;
  double est_error = 0.0;
};

struct SpectrumOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
  /// Skip analytic shortcuts and integrate the time domain adaptively.
  bool force_numeric = false;
  int max_subdivisions = 100000;
};

/// Time-domain source transform over the trajectory support.
///
/// Gaussian families are evaluated by their convergent exp(i k_j x) series
/// (each power of a Gaussian has a closed-form transform); trapezoid coasts
/// have linear phase and are integrated exactly, ramps by Gauss-Kronrod.
/// Anything else, or `force_numeric`, goes through adaptive quadrature split
/// at the breakpoints. Throws QuadratureFailure.
SourceSpectrum source_spectrum(const TrajectorySpec& spec, double k, double k_j,
                               SpectrumMode mode, const SpectrumOptions& opts = {});

/// Both branch transforms needed to build a momentum-space current:
///   displacement = integral of (e^{i q x(t)} - 1) e^{ikt} dt
///   current      = integral of xdot(t) e^{i q x(t)} e^{ikt} dt
struct PhaseTransform {
  cplx displacement{};
  cplx current{};
  double est_error = 0.0;
};

PhaseTransform phase_transform(const TrajectorySpec& spec, double k, double q,
                               const SpectrumOptions& opts = {});

/// Dipole-approximation spectra: charge mode returns v(k) = integral of
/// xdot e^{ikt}; dipole mode returns x(k) = integral of x e^{ikt} (the k_j
/// factor is left to the angular reduction). Closed forms for all built-in
/// profiles.
SourceSpectrum dipole_approx_spectrum(const TrajectorySpec& spec, double k, SpectrumMode mode);

}  // namespace vacdec
