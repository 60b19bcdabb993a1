#include "vacdec/trajectories.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "vacdec/error.hpp"
#include "vacdec/quadrature.hpp"

namespace vacdec {

namespace {

using std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Constant-acceleration piece of the trapezoid: x = x0 + v0 s + a s^2 / 2.
struct Segment {
  double t0, t1, x0, v0, accel;
  double length() const { return t1 - t0; }
  double x(double t) const {
    const double s = t - t0;
    return x0 + v0 * s + 0.5 * accel * s * s;
  }
  double v(double t) const { return v0 + accel * (t - t0); }
};

std::array<Segment, 5> segments(const PiecewiseTrapezoid& p) {
  const double v = p.speed;
  const double tau = p.ramp;
  const double half = 0.5 * p.duration;
  const std::array<double, 6> t{0.0, tau, half - tau, half + tau, p.duration - tau, p.duration};
  const std::array<double, 5> v0{0.0, v, v, -v, -v};
  const std::array<double, 5> a{v / tau, 0.0, -v / tau, 0.0, v / tau};
  std::array<Segment, 5> out{};
  double x = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    out[i] = Segment{t[i], t[i + 1], x, v0[i], a[i]};
    x = out[i].x(t[i + 1]);
  }
  return out;
}

// Single modulated Gaussian pulse centred at `centre`.
struct GaussianPulse {
  double amplitude, width, carrier, centre;
  double x(double t) const {
    const double s = t - centre;
    return amplitude * std::exp(-s * s / (width * width)) * std::cos(carrier * s);
  }
  double v(double t) const {
    const double s = t - centre;
    const double g = amplitude * std::exp(-s * s / (width * width));
    return g * (-2.0 * s / (width * width) * std::cos(carrier * s) - carrier * std::sin(carrier * s));
  }
};

bool pulses_disjoint(const PulseTrain& p) {
  return p.count == 1 || p.separation >= 1.5 * kGaussianSupportWidths * p.pulse_width;
}

// m-th moment of the unit-interval Fourier kernel: integral_0^1 u^m e^{i phi u} du.
std::array<cplx, 3> unit_moments(double phi) {
  std::array<cplx, 3> e{};
  if (std::abs(phi) < 2.0) {
    // Taylor series; converges to full precision well before 40 terms here.
    cplx term = 1.0;  // (i phi)^n / n!
    for (int n = 0; n < 60; ++n) {
      for (int m = 0; m < 3; ++m) e[static_cast<std::size_t>(m)] += term / double(n + m + 1);
      term *= kI * phi / double(n + 1);
      if (std::abs(term) < 1e-18) break;
    }
    return e;
  }
  const cplx ip = kI * phi;
  const cplx ex = std::exp(ip);
  e[0] = (ex - 1.0) / ip;
  e[1] = (ex - e[0]) / ip;
  e[2] = (ex - 2.0 * e[1]) / ip;
  return e;
}

// Fourier transform of the n-th power of a modulated Gaussian pulse (n >= 1).
cplx gaussian_power_transform(const GaussianPulse& g, int n, double k) {
  const double T = g.width;
  const double base = std::pow(g.amplitude, n) * T * std::sqrt(pi / n);
  if (g.carrier == 0.0) {
    return base * std::exp(-k * k * T * T / (4.0 * n));
  }
  // cos^n expands into harmonics (n - 2j) * carrier with binomial weights.
  double sum = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    const double shift = k + (n - 2 * j) * g.carrier;
    sum += binom * std::exp(-shift * shift * T * T / (4.0 * n));
    binom = binom * (n - j) / (j + 1);
  }
  return base * std::ldexp(sum, -n);
}

struct SeriesParts {
  cplx disp_even{}, disp_odd{}, cur_even{}, cur_odd{};
  double err = 0.0;
};

// exp(i q x) expanded in powers of x; every power of a Gaussian has a closed
// transform. The centre phase is applied by the caller.
SeriesParts gaussian_series(GaussianPulse g, double k, double q) {
  g.centre = 0.0;
  SeriesParts out;
  const double qr = std::abs(q) * g.amplitude;
  cplx coef = 1.0;  // (i q)^n / n!
  cplx f_n{};       // transform of x^n
  cplx f_next = gaussian_power_transform(g, 1, k);
  double largest = 0.0;
  for (int n = 0; n < 400; ++n) {
    // xdot x^n = d/dt x^{n+1} / (n+1), and d/dt -> -ik under the transform.
    const cplx cur_term = coef * (-kI * k / double(n + 1)) * f_next;
    const cplx disp_term = n >= 1 ? coef * f_n : cplx{};
    if (n % 2 == 0) {
      out.cur_even += cur_term;
      out.disp_even += disp_term;
    } else {
      out.cur_odd += cur_term;
      out.disp_odd += disp_term;
    }
    const double mag = std::abs(cur_term) + std::abs(disp_term);
    largest = std::max(largest, mag);
    coef *= kI * q / double(n + 1);
    f_n = f_next;
    f_next = gaussian_power_transform(g, n + 2, k);
    if (n > qr + 2.0 && mag <= 1e-17 * largest) {
      out.err = mag + 4e-16 * largest;
      return out;
    }
  }
  out.err = largest;  // did not converge; caller falls back
  return out;
}

cplx array_factor(const PulseTrain& p, double k) {
  cplx sum{};
  for (int n = 0; n < p.count; ++n) sum += std::exp(kI * k * (n * p.separation));
  return sum;
}

// e^{ia} - 1 without cancellation for small a.
cplx expm1i(double a) {
  const double h = std::sin(0.5 * a);
  return {-2.0 * h * h, std::sin(a)};
}

// Series result is kept only when its truncation estimate meets the tolerance.
bool series_ok(const SeriesParts& parts, double scale, const SpectrumOptions& opts) {
  return parts.err <= std::max(opts.abs_tol, opts.rel_tol * scale);
}

// integral_0^1 e^{i phi u} du without cancellation: e^{i phi/2} sin(phi/2) / (phi/2).
cplx unit_moment0(double phi) {
  const double h = 0.5 * phi;
  const double sinc = std::abs(h) < 1e-4 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
  return std::polar(sinc, h);
}

// integral_0^1 u^p e^{i phi u} du into m[0..P]. The recurrence
// M_p = (e^{i phi} - p M_{p-1}) / (i phi) is run upward while p < |phi| and
// downward above, where each direction damps its own rounding.
void power_moments(double phi, int P, cplx* m) {
  const double a = std::abs(phi);
  if (a < 1.0) {
    // shared powers (i phi)^j / j!
    std::array<cplx, 40> pw;
    int J = 0;
    for (cplx term = 1.0; J < 40; ++J) {
      pw[static_cast<std::size_t>(J)] = term;
      term *= cplx(0.0, phi / double(J + 1));
      if (std::norm(term) < 1e-36) {
        ++J;
        break;
      }
    }
    for (int p = 0; p <= P; ++p) {
      cplx sum = 0.0;
      for (int j = 0; j < J; ++j) sum += pw[static_cast<std::size_t>(j)] / double(p + j + 1);
      m[p] = sum;
    }
    return;
  }
  const cplx ip(0.0, phi);
  const cplx inv_ip(0.0, -1.0 / phi);
  const cplx ex = std::polar(1.0, phi);
  const int up = std::min(P, static_cast<int>(a));
  m[0] = unit_moment0(phi);
  for (int p = 1; p <= up; ++p) m[p] = (ex - double(p) * m[p - 1]) * inv_ip;
  if (up < P) {
    // start well above P so the guess has been damped away by P
    const int top = P + 40 + static_cast<int>(a);
    cplx mp = ex / double(top + 1);
    for (int p = top; p > up; --p) {
      if (p <= P) m[p] = mp;
      mp = (ex - ip * mp) / double(p);
    }
  }
}

// integral over one segment of xdot e^{i(q x + k t)}. With x quadratic the
// phase is c + w s + g s^2, and e^{i g s^2} is expanded; |g| L^2 = |q a| L^2 / 2
// stays small for admissible speeds.
cplx segment_current(const Segment& s, double k, double q) {
  const double L = s.length();
  const cplx lead = std::polar(1.0, q * s.x0 + k * s.t0);
  const double w = (q * s.v0 + k) * L;
  if (s.accel == 0.0) return lead * s.v0 * L * unit_moment0(w);
  const double g = 0.5 * q * s.accel * L * L;
  int terms = 1;
  for (double c = 1.0; terms < 200; ++terms) {
    c *= std::abs(g) / terms;
    if (c < 1e-18) break;
  }
  std::array<cplx, 402> m;
  power_moments(w, 2 * terms + 1, m.data());
  cplx sum = 0.0, coef = 1.0;  // (i g)^n / n!
  for (int n = 0; n < terms; ++n) {
    sum += coef * (s.v0 * L * m[static_cast<std::size_t>(2 * n)] +
                   s.accel * L * L * m[static_cast<std::size_t>(2 * n + 1)]);
    coef *= cplx(0.0, g / double(n + 1));
  }
  return lead * sum;
}

PhaseTransform trapezoid_phase_transform(const PiecewiseTrapezoid& p, double k, double q) {
  PhaseTransform out;
  double scale = 0.0;
  for (const Segment& s : segments(p)) {
    const cplx c = segment_current(s, k, q);
    out.current += c;
    scale += std::abs(c);
  }
  // closed path: k D + q C = 0
  out.displacement = k > 0.0 ? -q * out.current / k : cplx{};
  out.est_error = 1e-14 * scale * (1.0 + (k > 0.0 ? std::abs(q) / k : 0.0));
  return out;
}

// Panel layout for adaptive time-domain quadrature: breakpoints refined so no
// panel spans more than ~pi of phase.
std::vector<double> time_edges(const TrajectorySpec& spec, double k, double q) {
  const auto bps = breakpoints(spec);
  const double rate = std::abs(k) + std::abs(q) * max_speed(spec);
  const double max_width =
      std::min(rate > 0.0 ? pi / rate : std::numeric_limits<double>::infinity(),
               0.5 * time_scale(spec));
  std::vector<double> edges;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    auto piece = uniform_edges(bps[i], bps[i + 1], max_width);
    if (!edges.empty()) piece.erase(piece.begin());
    edges.insert(edges.end(), piece.begin(), piece.end());
  }
  return edges;
}

template <class F>
AdaptiveResult<cplx> numeric_time_integral(const TrajectorySpec& spec, double k, double q, F&& f,
                                           const SpectrumOptions& opts) {
  const auto edges = time_edges(spec, k, q);
  return integrate_adaptive(f, edges, opts.rel_tol, opts.abs_tol, opts.max_subdivisions);
}

PhaseTransform numeric_phase_transform(const TrajectorySpec& spec, double k, double q,
                                       const SpectrumOptions& opts) {
  auto disp = numeric_time_integral(
      spec, k, q,
      [&](double t) { return expm1i(q * position(spec, t)) * std::exp(kI * k * t); },
      opts);
  auto cur = numeric_time_integral(
      spec, k, q,
      [&](double t) {
        return velocity(spec, t) * std::exp(kI * (q * position(spec, t) + k * t));
      },
      opts);
  return {disp.value, cur.value, disp.err_est + cur.err_est};
}

std::optional<SeriesParts> series_for(const TrajectorySpec& spec, double k, double q,
                                      cplx& phase) {
  constexpr double kMaxSeriesArgument = 20.0;
  return std::visit(
      overloaded{
          [&](const Adiabatic& a) -> std::optional<SeriesParts> {
            if (std::abs(q) * a.amplitude > kMaxSeriesArgument) return std::nullopt;
            phase = 1.0;
            return gaussian_series({a.amplitude, a.width, 0.0, 0.0}, k, q);
          },
          [&](const PulseTrain& p) -> std::optional<SeriesParts> {
            if (!pulses_disjoint(p) || std::abs(q) * p.amplitude > kMaxSeriesArgument) {
              return std::nullopt;
            }
            phase = array_factor(p, k);
            return gaussian_series({p.amplitude, p.pulse_width, p.carrier, 0.0}, k, q);
          },
          [&](const PiecewiseTrapezoid&) -> std::optional<SeriesParts> { return std::nullopt; },
      },
      spec.profile);
}

}  // namespace

Support support(const TrajectorySpec& spec) {
  return std::visit(
      overloaded{
          [](const Adiabatic& a) {
            return Support{-kGaussianSupportWidths * a.width, kGaussianSupportWidths * a.width};
          },
          [](const PiecewiseTrapezoid& p) { return Support{0.0, p.duration}; },
          [](const PulseTrain& p) {
            return Support{-kGaussianSupportWidths * p.pulse_width,
                           (p.count - 1) * p.separation + kGaussianSupportWidths * p.pulse_width};
          },
      },
      spec.profile);
}

double time_scale(const TrajectorySpec& spec) {
  return std::visit(overloaded{
                        [](const Adiabatic& a) { return a.width; },
                        [](const PiecewiseTrapezoid& p) { return p.duration; },
                        [](const PulseTrain& p) { return p.pulse_width; },
                    },
                    spec.profile);
}

double max_excursion(const TrajectorySpec& spec) {
  return std::visit(overloaded{
                        [](const Adiabatic& a) { return std::abs(a.amplitude); },
                        [](const PiecewiseTrapezoid& p) {
                          return std::abs(p.speed) * (0.5 * p.duration - p.ramp);
                        },
                        [](const PulseTrain& p) {
                          return std::abs(p.amplitude) * (pulses_disjoint(p) ? 1.0 : p.count);
                        },
                    },
                    spec.profile);
}

double max_speed(const TrajectorySpec& spec) {
  const double gaussian_peak_slope = std::sqrt(2.0) * std::exp(-0.5);
  return std::visit(
      overloaded{
          [&](const Adiabatic& a) { return std::abs(a.amplitude) / a.width * gaussian_peak_slope; },
          [](const PiecewiseTrapezoid& p) { return std::abs(p.speed); },
          [&](const PulseTrain& p) {
            const double one = std::abs(p.amplitude) *
                               (gaussian_peak_slope / p.pulse_width + std::abs(p.carrier));
            return one * (pulses_disjoint(p) ? 1.0 : p.count);
          },
      },
      spec.profile);
}

bool has_power_law_spectrum(const TrajectorySpec& spec) {
  return std::holds_alternative<PiecewiseTrapezoid>(spec.profile);
}

std::vector<double> breakpoints(const TrajectorySpec& spec) {
  if (const auto* p = std::get_if<PiecewiseTrapezoid>(&spec.profile)) {
    const double half = 0.5 * p->duration;
    return {0.0, p->ramp, half - p->ramp, half + p->ramp, p->duration - p->ramp, p->duration};
  }
  const Support s = support(spec);
  return {s.start, s.end};
}

double position(const TrajectorySpec& spec, double t) {
  return std::visit(overloaded{
                        [&](const Adiabatic& a) {
                          return a.amplitude * std::exp(-t * t / (a.width * a.width));
                        },
                        [&](const PiecewiseTrapezoid& p) {
                          if (t <= 0.0 || t >= p.duration) return 0.0;
                          for (const Segment& s : segments(p)) {
                            if (t < s.t1) return s.x(t);
                          }
                          return 0.0;
                        },
                        [&](const PulseTrain& p) {
                          double x = 0.0;
                          for (int n = 0; n < p.count; ++n) {
                            x += GaussianPulse{p.amplitude, p.pulse_width, p.carrier,
                                               n * p.separation}
                                     .x(t);
                          }
                          return x;
                        },
                    },
                    spec.profile);
}

double velocity(const TrajectorySpec& spec, double t) {
  return std::visit(overloaded{
                        [&](const Adiabatic& a) {
                          const double w2 = a.width * a.width;
                          return -2.0 * t / w2 * a.amplitude * std::exp(-t * t / w2);
                        },
                        [&](const PiecewiseTrapezoid& p) {
                          if (t < 0.0 || t >= p.duration) return 0.0;
                          for (const Segment& s : segments(p)) {
                            if (t < s.t1) return s.v(t);
                          }
                          return 0.0;
                        },
                        [&](const PulseTrain& p) {
                          double v = 0.0;
                          for (int n = 0; n < p.count; ++n) {
                            v += GaussianPulse{p.amplitude, p.pulse_width, p.carrier,
                                               n * p.separation}
                                     .v(t);
                          }
                          return v;
                        },
                    },
                    spec.profile);
}

PhaseTransform phase_transform(const TrajectorySpec& spec, double k, double q,
                               const SpectrumOptions& opts) {
  if (!opts.force_numeric) {
    const auto* p = std::get_if<PiecewiseTrapezoid>(&spec.profile);
    if (p && k > 0.0) {
      return trapezoid_phase_transform(*p, k, q);
    }
    cplx phase = 1.0;
    auto parts = series_for(spec, k, q, phase);
    if (parts && series_ok(*parts, std::abs(parts->disp_even + parts->disp_odd) +
                                       std::abs(parts->cur_even + parts->cur_odd),
                           opts)) {
      PhaseTransform out;
      out.displacement = phase * (parts->disp_even + parts->disp_odd);
      out.current = phase * (parts->cur_even + parts->cur_odd);
      out.est_error = std::abs(phase) * parts->err;
      return out;
    }
  }
  return numeric_phase_transform(spec, k, q, opts);
}

SourceSpectrum source_spectrum(const TrajectorySpec& spec, double k, double k_j,
                               SpectrumMode mode, const SpectrumOptions& opts) {
  SourceSpectrum out;
  out.k = k;
  out.k_j = k_j;
  out.mode = mode;
  if (mode == SpectrumMode::dipole && k_j == 0.0) return out;  // sin(0) integrand

  if (!opts.force_numeric) {
    cplx phase = 1.0;
    auto parts = series_for(spec, k, k_j, phase);
    if (parts && series_ok(*parts,
                           std::abs(mode == SpectrumMode::charge ? parts->cur_even : parts->disp_odd),
                           opts)) {
      out.value = phase * (mode == SpectrumMode::charge ? parts->cur_even : parts->disp_odd / kI);
      out.est_error = std::abs(phase) * parts->err;
      return out;
    }
    if (std::holds_alternative<PiecewiseTrapezoid>(spec.profile)) {
      const PhaseTransform plus = phase_transform(spec, k, k_j, opts);
      const PhaseTransform minus = phase_transform(spec, k, -k_j, opts);
      out.value = mode == SpectrumMode::charge
                      ? 0.5 * (plus.current + minus.current)
                      : (plus.displacement - minus.displacement) / (2.0 * kI);
      out.est_error = plus.est_error + minus.est_error;
      return out;
    }
  }

  AdaptiveResult<cplx> r;
  if (mode == SpectrumMode::charge) {
    r = numeric_time_integral(
        spec, k, k_j,
        [&](double t) {
          return velocity(spec, t) * std::cos(k_j * position(spec, t)) * std::exp(kI * k * t);
        },
        opts);
  } else {
    r = numeric_time_integral(
        spec, k, k_j,
        [&](double t) { return std::sin(k_j * position(spec, t)) * std::exp(kI * k * t); }, opts);
  }
  out.value = r.value;
  out.est_error = r.err_est;
  return out;
}

SourceSpectrum dipole_approx_spectrum(const TrajectorySpec& spec, double k, SpectrumMode mode) {
  SourceSpectrum out;
  out.k = k;
  out.mode = mode;

  auto gaussian_position_transform = [k](double amplitude, double width, double carrier) {
    auto bump = [&](double w) { return std::exp(-w * w * width * width / 4.0); };
    const double g = carrier == 0.0 ? bump(k) : 0.5 * (bump(k + carrier) + bump(k - carrier));
    return amplitude * width * std::sqrt(pi) * g;
  };

  const cplx x_hat = std::visit(
      overloaded{
          [&](const Adiabatic& a) -> cplx {
            return gaussian_position_transform(a.amplitude, a.width, 0.0);
          },
          [&](const PulseTrain& p) -> cplx {
            return array_factor(p, k) *
                   gaussian_position_transform(p.amplitude, p.pulse_width, p.carrier);
          },
          [&](const PiecewiseTrapezoid& p) -> cplx {
            cplx sum{};
            for (const Segment& s : segments(p)) {
              const double L = s.length();
              const auto e = unit_moments(k * L);
              sum += std::exp(kI * k * s.t0) *
                     (s.x0 * L * e[0] + s.v0 * L * L * e[1] + 0.5 * s.accel * L * L * L * e[2]);
            }
            return sum;
          },
      },
      spec.profile);

  if (mode == SpectrumMode::dipole) {
    out.value = x_hat;
  } else if (const auto* p = std::get_if<PiecewiseTrapezoid>(&spec.profile)) {
    cplx sum{};
    for (const Segment& s : segments(*p)) {
      const double L = s.length();
      const auto e = unit_moments(k * L);
      sum += std::exp(kI * k * s.t0) * (s.v0 * L * e[0] + s.accel * L * L * e[1]);
    }
    out.value = sum;
  } else {
    // Integration by parts: the excursion vanishes at both ends of the support.
    out.value = -kI * k * x_hat;
  }
  out.est_error = 1e-15 * std::abs(out.value);
  return out;
}

}  // namespace vacdec
