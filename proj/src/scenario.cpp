#include "vacdec/scenario.hpp"

#include <cmath>
#include <sstream>

namespace vacdec {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kAxisTolerance = 1e-12;

class Collector {
 public:
  void add(ErrorKind kind, std::string field, std::string message) {
    violations_.push_back({kind, std::move(field), std::move(message)});
  }
  bool empty() const { return violations_.empty(); }
  std::size_t size() const { return violations_.size(); }
  void throw_if_any() {
    if (!violations_.empty()) throw ValidationError(std::move(violations_));
  }

 private:
  std::vector<Violation> violations_;
};

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_coupling(const Coupling& c, Collector& out) {
  if (const auto* q = std::get_if<ChargeCoupling>(&c)) {
    if (!(q->e2 > 0.0) || !std::isfinite(q->e2)) {
      out.add(ErrorKind::InvalidValue, "particle.e2", "e2 must be positive, got " + num(q->e2));
    }
    return;
  }
  const auto& d = std::get<DipoleCoupling>(c);
  for (double x : {d.p.x, d.p.y, d.p.z, d.m.x, d.m.y, d.m.z}) {
    if (!std::isfinite(x)) {
      out.add(ErrorKind::InvalidValue, "particle.p", "dipole components must be finite");
      return;
    }
  }
}

void check_trajectory(const TrajectorySpec& spec, Collector& out, std::vector<std::string>& warnings) {
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      out.add(ErrorKind::InconsistentTrajectory, field, std::string(field) + " must be positive");
      return false;
    }
    return true;
  };
  auto non_negative = [&](double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      out.add(ErrorKind::InconsistentTrajectory, field, std::string(field) + " must be >= 0");
      return false;
    }
    return true;
  };

  bool ok = true;
  if (const auto* a = std::get_if<Adiabatic>(&spec.profile)) {
    ok &= non_negative(a->amplitude, "trajectory.R");
    ok &= positive(a->width, "trajectory.T");
  } else if (const auto* p = std::get_if<PiecewiseTrapezoid>(&spec.profile)) {
    ok &= non_negative(std::abs(p->speed), "trajectory.v");
    ok &= positive(p->duration, "trajectory.T");
    ok &= positive(p->ramp, "trajectory.tau");
    if (ok && !(p->ramp < 0.25 * p->duration)) {
      out.add(ErrorKind::InconsistentTrajectory, "trajectory.tau",
              "ramp time must satisfy tau < T/4 (tau=" + num(p->ramp) + ", T=" +
                  num(p->duration) + ")");
      ok = false;
    }
  } else if (const auto* t = std::get_if<PulseTrain>(&spec.profile)) {
    ok &= non_negative(t->amplitude, "trajectory.R");
    ok &= positive(t->pulse_width, "trajectory.T_pulse");
    ok &= positive(t->separation, "trajectory.T_sep");
    if (t->count < 1) {
      out.add(ErrorKind::InconsistentTrajectory, "trajectory.N", "pulse count must be >= 1");
      ok = false;
    }
    if (!std::isfinite(t->carrier)) {
      out.add(ErrorKind::InconsistentTrajectory, "trajectory.Omega", "carrier must be finite");
      ok = false;
    }
  }
  if (!ok) return;

  const double speed = max_speed(spec);
  if (speed >= kMaxSpeed) {
    out.add(ErrorKind::InconsistentTrajectory, "trajectory",
            "peak speed " + num(speed) + " is relativistic (limit " + num(kMaxSpeed) + ")");
  } else if (speed > kWarnSpeed) {
    warnings.push_back("peak speed " + num(speed) + " exceeds " + num(kWarnSpeed) +
                       "; non-relativistic treatment is marginal");
  }
}

void check_method(const Scenario& s, std::vector<std::string>& warnings) {
  if (s.method != Method::dipole_approx) return;
  const double eps = dipole_expansion_parameter(s);
  if (eps > kDipoleApproxWarn) {
    warnings.push_back("dipole approximation marginal: k_c * max excursion = " + num(eps) +
                       " exceeds " + num(kDipoleApproxWarn) + "; method full keeps the exact spectra");
  }
}

void check_geometry(Geometry& g, Collector& out) {
  if (!(g.z0 >= 0.0) || !std::isfinite(g.z0)) {
    out.add(ErrorKind::NegativeDistance, "geometry.z0",
            "distance to the plate must be >= 0, got " + num(g.z0));
  }
  const double len = norm(g.j_hat);
  if (!std::isfinite(len) || std::abs(len - 1.0) > kUnitTolerance) {
    out.add(ErrorKind::NonUnitDirection, "geometry.j_hat",
            "trajectory direction must be a unit vector, |j_hat| = " + num(len));
    return;
  }
  g.j_hat = g.j_hat / len;
  g.orientation = classify_orientation(g.j_hat);
}

void check_numerics(const QuadratureConfig& q, Collector& out) {
  if (!(q.rel_tol > 0.0)) out.add(ErrorKind::InvalidValue, "numerics.rel_tol", "must be > 0");
  if (!(q.abs_tol >= 0.0)) out.add(ErrorKind::InvalidValue, "numerics.abs_tol", "must be >= 0");
  if (q.k_max && !(*q.k_max > 0.0)) {
    out.add(ErrorKind::InvalidValue, "numerics.k_max", "must be > 0");
  }
  if (q.max_subdivisions < 1) {
    out.add(ErrorKind::InvalidValue, "numerics.max_subdivisions", "must be >= 1");
  }
}

}  // namespace

std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::parallel: return "parallel";
    case Orientation::perpendicular: return "perpendicular";
    case Orientation::oblique: return "oblique";
  }
  return "oblique";
}

std::string_view to_string(Method m) {
  return m == Method::full ? "full" : "dipole";
}

Orientation classify_orientation(Vec3 j_hat) {
  const double along = std::abs(j_hat.z);
  if (along < kAxisTolerance) return Orientation::parallel;
  if (std::abs(along - 1.0) < kAxisTolerance) return Orientation::perpendicular;
  return Orientation::oblique;
}

Vec3 reflect_geometric(Vec3 v) { return {v.x, v.y, -v.z}; }

Vec3 reflect_electric_dipole(Vec3 p) { return {-p.x, -p.y, p.z}; }

Vec3 reflect_magnetic_dipole(Vec3 m) { return {m.x, m.y, -m.z}; }

Scenario make_scenario(Scenario s) {
  Collector out;
  s.warnings.clear();
  check_coupling(s.coupling, out);
  check_trajectory(s.trajectory, out, s.warnings);
  check_geometry(s.geometry, out);
  check_numerics(s.numerics, out);
  out.throw_if_any();
  check_method(s, s.warnings);
  return s;
}

Scenario validate(const RawScenario& raw) {
  Collector out;
  Scenario s;
  s.id = raw.id.value_or("scenario");

  // particle
  if (!raw.particle) {
    out.add(ErrorKind::MissingCoupling, "particle.kind", "no particle coupling given");
  } else if (*raw.particle == "charge") {
    if (raw.p || raw.m) {
      out.add(ErrorKind::InvalidValue, "particle.p", "dipole moments given for a charge");
    }
    if (!raw.e2) {
      out.add(ErrorKind::MissingCoupling, "particle.e2", "charge coupling e2 missing");
    }
    s.coupling = ChargeCoupling{raw.e2.value_or(1.0)};
  } else if (*raw.particle == "dipole") {
    if (raw.e2) out.add(ErrorKind::InvalidValue, "particle.e2", "e2 given for a dipole");
    if (!raw.p && !raw.m) {
      out.add(ErrorKind::MissingCoupling, "particle.p", "dipole needs p and/or m");
    }
    s.coupling = DipoleCoupling{raw.p.value_or(Vec3{}), raw.m.value_or(Vec3{})};
  } else {
    out.add(ErrorKind::InvalidValue, "particle.kind", "unknown particle kind '" + *raw.particle + "'");
  }

  // trajectory
  auto need = [&](const std::optional<double>& v, const char* field) {
    if (!v) out.add(ErrorKind::MissingField, field, "required for this trajectory");
    return v.value_or(1.0);
  };
  auto forbid = [&](bool present, const char* field) {
    if (present) {
      out.add(ErrorKind::InconsistentTrajectory, field, "not used by this trajectory kind");
    }
  };
  bool trajectory_ok = true;
  const std::size_t before_trajectory = out.size();
  if (!raw.trajectory) {
    out.add(ErrorKind::MissingField, "trajectory.kind", "trajectory kind missing");
    trajectory_ok = false;
  } else if (*raw.trajectory == "adiabatic") {
    s.trajectory.profile = Adiabatic{need(raw.R, "trajectory.R"), need(raw.T, "trajectory.T")};
    forbid(raw.v.has_value(), "trajectory.v");
    forbid(raw.tau.has_value(), "trajectory.tau");
    forbid(raw.T_pulse || raw.T_sep || raw.N || raw.Omega, "trajectory.T_pulse");
  } else if (*raw.trajectory == "trapezoid") {
    s.trajectory.profile = PiecewiseTrapezoid{need(raw.v, "trajectory.v"),
                                              need(raw.T, "trajectory.T"),
                                              need(raw.tau, "trajectory.tau")};
    forbid(raw.R.has_value(), "trajectory.R");
    forbid(raw.T_pulse || raw.T_sep || raw.N || raw.Omega, "trajectory.T_pulse");
  } else if (*raw.trajectory == "pulse_train") {
    if (!raw.N) out.add(ErrorKind::MissingField, "trajectory.N", "required for this trajectory");
    s.trajectory.profile =
        PulseTrain{need(raw.R, "trajectory.R"), need(raw.T_pulse, "trajectory.T_pulse"),
                   need(raw.T_sep, "trajectory.T_sep"), static_cast<int>(raw.N.value_or(1)),
                   raw.Omega.value_or(0.0)};
    forbid(raw.T.has_value(), "trajectory.T");
    forbid(raw.v.has_value(), "trajectory.v");
    forbid(raw.tau.has_value(), "trajectory.tau");
  } else {
    out.add(ErrorKind::InvalidValue, "trajectory.kind",
            "unknown trajectory kind '" + *raw.trajectory + "'");
    trajectory_ok = false;
  }

  // geometry
  s.geometry.plate = raw.plate.value_or(false);
  s.geometry.z0 = raw.z0.value_or(0.0);
  s.geometry.j_hat = raw.j_hat.value_or(Vec3{1.0, 0.0, 0.0});

  // numerics
  if (raw.method) {
    if (*raw.method == "dipole") {
      s.method = Method::dipole_approx;
    } else if (*raw.method == "full") {
      s.method = Method::full;
    } else {
      out.add(ErrorKind::InvalidValue, "numerics.method", "method must be 'dipole' or 'full'");
    }
  }
  if (raw.rel_tol) s.numerics.rel_tol = *raw.rel_tol;
  if (raw.abs_tol) s.numerics.abs_tol = *raw.abs_tol;
  if (raw.k_max) s.numerics.k_max = *raw.k_max;
  if (raw.max_subdivisions) s.numerics.max_subdivisions = static_cast<int>(*raw.max_subdivisions);

  // oracle
  if (raw.samples || raw.seed || raw.workers) {
    McConfig mc;
    if (raw.samples) {
      if (*raw.samples < 2) out.add(ErrorKind::InvalidValue, "oracle.samples", "must be >= 2");
      mc.samples = static_cast<std::uint64_t>(std::max<std::int64_t>(*raw.samples, 2));
    }
    if (raw.seed) {
      if (*raw.seed < 0) out.add(ErrorKind::InvalidValue, "oracle.seed", "must be >= 0");
      mc.seed = static_cast<std::uint64_t>(*raw.seed);
    }
    if (raw.workers) {
      if (*raw.workers < 0) out.add(ErrorKind::InvalidValue, "oracle.workers", "must be >= 0");
      mc.workers = static_cast<int>(std::max<std::int64_t>(*raw.workers, 0));
    }
    s.oracle_numerics = mc;
  }

  // Semantic checks shared with make_scenario.
  check_coupling(s.coupling, out);
  trajectory_ok = trajectory_ok && out.size() == before_trajectory;
  if (trajectory_ok) check_trajectory(s.trajectory, out, s.warnings);
  check_geometry(s.geometry, out);
  check_numerics(s.numerics, out);
  out.throw_if_any();
  check_method(s, s.warnings);
  return s;
}

double dipole_expansion_parameter(const Scenario& s) {
  double kc = 1.0 / time_scale(s.trajectory);
  if (s.numerics.k_max) {
    kc = *s.numerics.k_max;
  } else if (const auto* p = std::get_if<PiecewiseTrapezoid>(&s.trajectory.profile)) {
    kc = 1.0 / p->ramp;
  } else if (const auto* p = std::get_if<PulseTrain>(&s.trajectory.profile)) {
    kc += std::abs(p->carrier);
  }
  return kc * max_excursion(s.trajectory);
}

}  // namespace vacdec
