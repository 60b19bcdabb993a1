#include "vacdec/decoherence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace vacdec {

namespace {

using std::numbers::pi;

const double kVacuumPrefactor = 1.0 / (8.0 * pi * pi * pi);
const double kDipoleImagePrefactor = kDipoleBoundaryPrefactor * kDipoleBoundaryCalibration;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Radial onset of the analytic k^-3 tail for ramped profiles, in units of 1/tau.
constexpr double kTailOnsetPerRamp = 100.0;

enum class Term { vacuum, boundary, total };

// Largest oscillation period of the squared spectrum in k, ignoring the image.
double spectral_period(const TrajectorySpec& traj) {
  if (const auto* p = std::get_if<PiecewiseTrapezoid>(&traj.profile)) {
    return 2.0 * pi / p->duration;
  }
  if (const auto* t = std::get_if<PulseTrain>(&traj.profile)) {
    if (t->count > 1) return 2.0 * pi / ((t->count - 1) * t->separation);
  }
  return kInf;
}

double spectral_scale(const TrajectorySpec& traj) {
  if (const auto* t = std::get_if<PulseTrain>(&traj.profile)) {
    return 8.0 / t->pulse_width + std::abs(t->carrier);
  }
  return 8.0 / time_scale(traj);
}

// Sum of squared acceleration jumps; the mean of |v(k)|^2 k^4 at large k.
double kink_strength(const PiecewiseTrapezoid& p) {
  const double a = p.speed / p.ramp;
  return 6.0 * a * a;
}

// `tail_weight` is the large-k mean of f(k) k^3 / kink_strength, or nullopt
// when the integrand has no integrable power tail.
RadialProfile radial_profile(const Scenario& s, bool image, std::optional<double> tail_weight) {
  RadialProfile prof;
  prof.scale = spectral_scale(s.trajectory);
  prof.period = spectral_period(s.trajectory);
  if (image && s.geometry.z0 > 0.0) prof.period = std::min(prof.period, pi / s.geometry.z0);
  if (const auto* p = std::get_if<PiecewiseTrapezoid>(&s.trajectory.profile)) {
    prof.decay = SpectralDecay::algebraic;
    prof.scale = 1.0 / p->ramp;
    if (tail_weight) {
      AsymptoticTail tail;
      tail.power = 3.0;
      tail.onset = kTailOnsetPerRamp / p->ramp;
      tail.coefficient = *tail_weight * kink_strength(*p);
      tail.relative_error = 0.05;
      prof.tail = tail;
    }
  }
  return prof;
}

WFragment to_fragment(const IntegralEstimate& r) {
  return {r.value, r.err_est, r.evaluations, r.truncation_note};
}

const ChargeCoupling& charge_of(const Scenario& s) {
  if (const auto* c = std::get_if<ChargeCoupling>(&s.coupling)) return *c;
  throw Error(ErrorKind::InvalidValue, "scenario coupling is not a charge");
}

const DipoleCoupling& dipole_of(const Scenario& s) {
  if (const auto* d = std::get_if<DipoleCoupling>(&s.coupling)) return *d;
  throw Error(ErrorKind::InvalidValue, "scenario coupling is not a dipole");
}

double abs2(cplx z) { return std::norm(z); }

// ---------------------------------------------------------------------------
// Dipole approximation: closed angular reductions times a radial integral.
// ---------------------------------------------------------------------------

WFragment charge_dipole_approx(const Scenario& s, Term term) {
  const double e2 = charge_of(s).e2;
  const AngularReduction red({SourceKind::charge, s.geometry.j_hat, {}, KernelTerm::boundary});
  const double z0 = s.geometry.z0;
  const double u0 = red.vacuum_value();
  const double sign = red.boundary_sign();

  auto angular = [&](double k) {
    const double beta = 2.0 * k * z0;
    switch (term) {
      case Term::vacuum: return u0;
      case Term::boundary: return sign * red(beta);
      case Term::total: return red.total_weight(beta);
    }
    return 0.0;
  };
  auto f = [&](double k) {
    const cplx v = dipole_approx_spectrum(s.trajectory, k, SpectrumMode::charge).value;
    return e2 * kVacuumPrefactor * k * abs2(v) * angular(k);
  };

  double tail_angular = u0;
  if (term == Term::boundary) tail_angular = z0 == 0.0 ? sign * u0 : 0.0;
  if (term == Term::total) tail_angular = z0 == 0.0 ? (1.0 + sign) * u0 : u0;
  const auto prof =
      radial_profile(s, term != Term::vacuum, e2 * kVacuumPrefactor * tail_angular);
  return to_fragment(integrate_radial(f, prof, s.numerics));
}

struct DipoleReductions {
  std::vector<AngularReduction> parts;
};

DipoleReductions dipole_reductions(const Scenario& s) {
  const DipoleCoupling& d = dipole_of(s);
  DipoleReductions out;
  if (dot(d.p, d.p) > 0.0) {
    out.parts.emplace_back(
        AngularCase{SourceKind::electric_dipole, s.geometry.j_hat, d.p, KernelTerm::boundary});
  }
  if (dot(d.m, d.m) > 0.0) {
    out.parts.emplace_back(
        AngularCase{SourceKind::magnetic_dipole, s.geometry.j_hat, d.m, KernelTerm::boundary});
  }
  return out;
}

WFragment dipole_dipole_approx(const Scenario& s, Term term) {
  const DipoleReductions reds = dipole_reductions(s);
  const double z0 = s.geometry.z0;
  // The image prefactor equals the vacuum one once calibrated; the split
  // below keeps the two normalizations explicit.
  const double correction = kDipoleImagePrefactor - kVacuumPrefactor;

  auto angular = [&](double k) {
    const double beta = 2.0 * k * z0;
    double sum = 0.0;
    for (const auto& r : reds.parts) {
      switch (term) {
        case Term::vacuum: sum += kVacuumPrefactor * r.vacuum_value(); break;
        case Term::boundary: sum += kDipoleImagePrefactor * r.boundary_sign() * r(beta); break;
        case Term::total:
          sum += kVacuumPrefactor * r.total_weight(beta) + correction * r.boundary_sign() * r(beta);
          break;
      }
    }
    return sum;
  };
  auto f = [&](double k) {
    const cplx x = dipole_approx_spectrum(s.trajectory, k, SpectrumMode::dipole).value;
    const double k2 = k * k;
    return k2 * k2 * k * abs2(x) * angular(k);
  };
  // k^5 |x(k)|^2 falls only as 1/k for kinked paths: no integrable tail.
  const auto prof = radial_profile(s, term != Term::vacuum, std::nullopt);
  return to_fragment(integrate_radial(f, prof, s.numerics));
}

// ---------------------------------------------------------------------------
// Full path: exact source spectra on a (k, u, phi) grid.
// ---------------------------------------------------------------------------

// Scenario vectors expressed in a frame rotated about the normal so that the
// in-plane part of j_hat lies along x.
struct Frame {
  Vec3 j;
  Vec3 p;
  Vec3 m;
  AngularSymmetry symmetry = AngularSymmetry::none;
};

Vec3 rotate_about_normal(Vec3 v, double c, double s) {
  return {c * v.x + s * v.y, -s * v.x + c * v.y, v.z};
}

Frame frame_for(const Scenario& s) {
  Frame f;
  const Vec3 j = s.geometry.j_hat;
  const double rho = std::hypot(j.x, j.y);
  const double c = rho > 0.0 ? j.x / rho : 1.0;
  const double sn = rho > 0.0 ? j.y / rho : 0.0;
  f.j = {rho, 0.0, j.z};
  if (const auto* d = std::get_if<DipoleCoupling>(&s.coupling)) {
    f.p = rotate_about_normal(d->p, c, sn);
    f.m = rotate_about_normal(d->m, c, sn);
    return f;
  }
  switch (s.geometry.orientation) {
    case Orientation::perpendicular: f.symmetry = AngularSymmetry::azimuthal; break;
    case Orientation::parallel: f.symmetry = AngularSymmetry::quadrant; break;
    case Orientation::oblique: f.symmetry = AngularSymmetry::none; break;
  }
  return f;
}

QuadratureConfig angular_config(const Scenario& s) {
  QuadratureConfig cfg = s.numerics;
  cfg.rel_tol = 0.1 * s.numerics.rel_tol;
  cfg.abs_tol = 0.0;
  return cfg;
}

RadialProfile full_profile(const Scenario& s, bool image) {
  // The exact spectra of kinked paths have no simple mean tail: a cutoff is
  // required on this path.
  return radial_profile(s, image, std::nullopt);
}

WFragment charge_full(const Scenario& s, Term term) {
  const double e2 = charge_of(s).e2;
  const Frame fr = frame_for(s);
  const Vec3 j = fr.j;
  const Vec3 jr = reflect_geometric(j);
  const double jj = dot(j, jr);
  const double z0 = s.geometry.z0;
  const bool image = term == Term::boundary;
  const QuadratureConfig acfg = angular_config(s);
  long evals = 0;

  auto spectrum = [&](double k, double q) {
    return source_spectrum(s.trajectory, k, q, SpectrumMode::charge).value;
  };
  auto radial = [&](double k) {
    auto g = [&](double u, double phi) {
      const Vec3 n = KPoint{k, u, phi}.direction();
      const double c = dot(n, j);
      const cplx S = spectrum(k, k * c);
      if (!image) return e2 * kVacuumPrefactor * k * (1.0 - c * c) * abs2(S);
      const double cr = dot(n, jr);
      const cplx Sr = cr == c ? S : spectrum(k, k * cr);
      const cplx phase = std::polar(1.0, 2.0 * k * u * z0);
      return e2 * kVacuumPrefactor * k * (c * cr - jj) * std::real(phase * S * std::conj(Sr));
    };
    auto r = integrate_angular(g, image ? 2.0 * k * z0 : 0.0, acfg, fr.symmetry);
    evals += r.evaluations;
    return r.value;
  };
  WFragment out = to_fragment(integrate_radial(radial, full_profile(s, image), s.numerics));
  out.evaluations = evals;
  return out;
}

WFragment dipole_full(const Scenario& s, Term term) {
  const Frame fr = frame_for(s);
  const Vec3 j = fr.j;
  const Vec3 jr = reflect_geometric(j);
  const Vec3 p = fr.p;
  const Vec3 m = fr.m;
  const Vec3 p_im = reflect_electric_dipole(p);
  const Vec3 m_im = reflect_magnetic_dipole(m);
  const double z0 = s.geometry.z0;
  const bool image = term == Term::boundary;
  const QuadratureConfig acfg = angular_config(s);
  long evals = 0;

  auto spectrum = [&](double k, double q) {
    return source_spectrum(s.trajectory, k, q, SpectrumMode::dipole).value;
  };
  // Polarization weights of |J|^2 - |rho|^2 (vacuum) and of the image
  // contraction, per unit k^2 and unit source amplitude.
  auto vacuum_weight = [&](Vec3 n) {
    const double np = dot(n, p);
    const double nm = dot(n, m);
    return dot(p, p) - np * np + dot(m, m) - nm * nm + 2.0 * dot(p, cross(n, m));
  };
  auto image_weight = [&](Vec3 n) {
    return dot(p, p_im) - dot(n, p) * dot(n, p_im) + dot(m, m_im) - dot(n, m) * dot(n, m_im) +
           dot(p, cross(n, m_im)) + dot(cross(n, m), p_im);
  };
  auto radial = [&](double k) {
    const double k3 = k * k * k;
    auto g = [&](double u, double phi) {
      const Vec3 n = KPoint{k, u, phi}.direction();
      const double c = dot(n, j);
      const cplx S = spectrum(k, k * c);
      if (!image) return kVacuumPrefactor * k3 * vacuum_weight(n) * abs2(S);
      const double cr = dot(n, jr);
      const cplx Sr = cr == c ? S : spectrum(k, k * cr);
      const cplx phase = std::polar(1.0, 2.0 * k * u * z0);
      return kDipoleImagePrefactor * k3 * image_weight(n) * std::real(phase * S * std::conj(Sr));
    };
    auto r = integrate_angular(g, image ? 2.0 * k * z0 : 0.0, acfg, fr.symmetry);
    evals += r.evaluations;
    return r.value;
  };
  WFragment out = to_fragment(integrate_radial(radial, full_profile(s, image), s.numerics));
  out.evaluations = evals;
  return out;
}

WFragment dispatch(const Scenario& s, Term term, bool charge) {
  if (s.method == Method::full) return charge ? charge_full(s, term) : dipole_full(s, term);
  return charge ? charge_dipole_approx(s, term) : dipole_dipole_approx(s, term);
}

bool closed_reduction_available(const Scenario& s) {
  if (s.geometry.orientation == Orientation::oblique) return false;
  try {
    if (std::holds_alternative<DipoleCoupling>(s.coupling)) (void)dipole_reductions(s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnsupportedCase) return false;
    throw;
  }
  return true;
}

}  // namespace

std::string_view to_string(Regularization::Kind k) {
  switch (k) {
    case Regularization::Kind::none: return "none";
    case Regularization::Kind::ramp: return "ramp";
    case Regularization::Kind::cutoff: return "cutoff";
  }
  return "none";
}

WFragment w_charge_vacuum(const Scenario& s) { return dispatch(s, Term::vacuum, true); }
WFragment w_charge_boundary(const Scenario& s) { return dispatch(s, Term::boundary, true); }
WFragment w_dipole_vacuum(const Scenario& s) { return dispatch(s, Term::vacuum, false); }
WFragment w_dipole_boundary(const Scenario& s) { return dispatch(s, Term::boundary, false); }

DecoherenceResult compute(const Scenario& s) {
#ifndef NDEBUG
  static std::once_flag checked;
  std::call_once(checked, check_boundary_sign_table);
#endif
  DecoherenceResult r;
  Scenario eff = s;
  if (eff.method == Method::dipole_approx && !closed_reduction_available(eff)) {
    eff.method = Method::full;
    r.experimental = true;
    r.notes.emplace_back("oblique geometry evaluated on the full path (experimental)");
  }
  r.method = eff.method;
  const bool charge = std::holds_alternative<ChargeCoupling>(eff.coupling);

  const WFragment vac = dispatch(eff, Term::vacuum, charge);
  r.w_vac = vac.value;
  r.err_est = vac.err_est;
  r.w_total = vac.value;
  if (eff.geometry.plate) {
    const WFragment bnd = dispatch(eff, Term::boundary, charge);
    r.w_boundary = bnd.value;
    r.w_total = vac.value + bnd.value;
    r.err_est += bnd.err_est;
    if (eff.method == Method::dipole_approx) {
      // Where vacuum and image nearly cancel, the directly integrated total
      // is the accurate quantity and the image term follows from it.
      const WFragment tot = dispatch(eff, Term::total, charge);
      if (std::abs(tot.value) < std::abs(bnd.value)) {
        r.w_total = tot.value;
        r.w_boundary = tot.value - vac.value;
        r.err_est = vac.err_est + tot.err_est;
      }
    }
    if (!charge) {
      r.calibration =
          Calibration{kDipoleBoundaryCalibration, std::string(kDipoleBoundaryCalibrationProvenance)};
    }
  }

  if (eff.numerics.k_max) {
    r.regularization.kind = Regularization::Kind::cutoff;
    r.regularization.k_max = eff.numerics.k_max;
  } else if (const auto* p = std::get_if<PiecewiseTrapezoid>(&eff.trajectory.profile)) {
    r.regularization.kind = Regularization::Kind::ramp;
    r.regularization.tau = p->ramp;
  }
  r.regularization.note = vac.note;
  r.visibility = std::exp(-r.w_total);
  r.emission_prob_equiv = -std::expm1(-0.5 * r.w_total);
  for (const auto& w : s.warnings) r.notes.push_back(w);
  return r;
}

std::span<const BoundarySignRule> boundary_sign_table() {
  static constexpr Vec3 x{1.0, 0.0, 0.0};
  static constexpr Vec3 z{0.0, 0.0, 1.0};
  static constexpr BoundarySignRule table[] = {
      {"charge, parallel path", SourceKind::charge, x, {}, -1},
      {"charge, perpendicular path", SourceKind::charge, z, {}, +1},
      {"electric dipole in plane, parallel path", SourceKind::electric_dipole, x, x, -1},
      {"electric dipole along normal, parallel path", SourceKind::electric_dipole, x, z, +1},
      {"magnetic dipole in plane, parallel path", SourceKind::magnetic_dipole, x, x, +1},
      {"magnetic dipole along normal, parallel path", SourceKind::magnetic_dipole, x, z, -1},
      {"electric dipole in plane, perpendicular path", SourceKind::electric_dipole, z, x, +1},
      {"electric dipole along normal, perpendicular path", SourceKind::electric_dipole, z, z, -1},
      {"magnetic dipole in plane, perpendicular path", SourceKind::magnetic_dipole, z, x, -1},
      {"magnetic dipole along normal, perpendicular path", SourceKind::magnetic_dipole, z, z, +1},
  };
  return table;
}

void check_boundary_sign_table() {
  for (const auto& rule : boundary_sign_table()) {
    const AngularReduction red({rule.source, rule.j_hat, rule.moment, KernelTerm::boundary});
    const double contact = red.boundary_sign() * red(0.0);
    const int got = contact > 0.0 ? 1 : (contact < 0.0 ? -1 : 0);
    if (got != rule.sign) {
      throw std::logic_error(std::string("boundary sign flip: ") + rule.label);
    }
  }
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::z0: return "z0";
    case SweepAxis::orientation: return "orientation";
    case SweepAxis::tau: return "tau";
    case SweepAxis::N: return "N";
  }
  return "z0";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::z0, SweepAxis::orientation, SweepAxis::tau, SweepAxis::N}) {
    if (name == to_string(a)) return a;
  }
  throw Error(ErrorKind::InvalidValue, "unknown sweep axis '" + std::string(name) + "'");
}

std::vector<double> sweep_grid(double lo, double hi, int n, bool log_spaced) {
  if (n < 1) throw Error(ErrorKind::InvalidValue, "sweep needs at least one point");
  if (log_spaced && !(lo > 0.0 && hi > 0.0)) {
    throw Error(ErrorKind::InvalidValue, "logarithmic sweep needs positive bounds");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out[static_cast<std::size_t>(i)] =
        log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  out.front() = lo;
  if (n > 1) out.back() = hi;
  return out;
}

Scenario with_sweep_value(const Scenario& base, SweepAxis axis, double value,
                          Orientation orientation) {
  Scenario s = base;
  switch (axis) {
    case SweepAxis::z0: s.geometry.z0 = value; break;
    case SweepAxis::orientation: {
      if (orientation == Orientation::perpendicular) {
        s.geometry.j_hat = {0.0, 0.0, 1.0};
      } else if (orientation == Orientation::parallel) {
        const Vec3 j = base.geometry.j_hat;
        const double rho = std::hypot(j.x, j.y);
        s.geometry.j_hat = rho > 0.0 ? Vec3{j.x / rho, j.y / rho, 0.0} : Vec3{1.0, 0.0, 0.0};
      } else {
        throw Error(ErrorKind::InvalidValue, "orientation sweeps take parallel or perpendicular");
      }
      break;
    }
    case SweepAxis::tau: {
      auto* p = std::get_if<PiecewiseTrapezoid>(&s.trajectory.profile);
      if (!p) throw Error(ErrorKind::InvalidValue, "tau sweeps need a trapezoid trajectory");
      p->ramp = value;
      break;
    }
    case SweepAxis::N: {
      auto* t = std::get_if<PulseTrain>(&s.trajectory.profile);
      if (!t) throw Error(ErrorKind::InvalidValue, "N sweeps need a pulse-train trajectory");
      if (value != std::floor(value)) {
        throw Error(ErrorKind::InvalidValue, "pulse count must be an integer");
      }
      t->count = static_cast<int>(value);
      break;
    }
  }
  return make_scenario(std::move(s));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepPoint> sweep(const Scenario& base, const SweepSpec& spec, int workers) {
  std::vector<SweepPoint> points;
  if (spec.axis == SweepAxis::orientation) {
    if (spec.orientations.empty()) throw Error(ErrorKind::InvalidValue, "empty sweep grid");
    for (Orientation o : spec.orientations) {
      SweepPoint p;
      p.orientation = o;
      p.value = base.geometry.z0;
      points.push_back(std::move(p));
    }
  } else {
    const auto& v = spec.values;
    if (v.empty()) throw Error(ErrorKind::InvalidValue, "empty sweep grid");
    bool up = true;
    bool down = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
      up = up && v[i] > v[i - 1];
      down = down && v[i] < v[i - 1];
    }
    if (v.size() > 1 && !up && !down) {
      throw Error(ErrorKind::InvalidValue, "sweep grid must be strictly monotone");
    }
    for (double x : v) {
      SweepPoint p;
      p.value = x;
      p.orientation = base.geometry.orientation;
      points.push_back(std::move(p));
    }
  }

  parallel_for(points.size(), workers, [&](std::size_t i) {
    SweepPoint& p = points[i];
    try {
      p.scenario = with_sweep_value(base, spec.axis, p.value, p.orientation);
      p.orientation = p.scenario.geometry.orientation;
      p.result = compute(p.scenario);
    } catch (const Error& e) {
      p.error = e.kind();
      p.error_message = e.what();
      if (p.scenario.id.empty()) p.scenario = base;
    }
  });
  return points;
}

}  // namespace vacdec
