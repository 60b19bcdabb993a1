// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vacdec/cli.hpp"
#include "vacdec/decoherence.hpp"
#include "vacdec/oracle.hpp"
#include "vacdec/quadrature.hpp"

using namespace vacdec;

namespace {

const double kPi = std::acos(-1.0);
const Vec3 X{1, 0, 0}, Y{0, 1, 0}, Z{0, 0, 1};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o = {false, std::string("error ") + std::string(to_string(e.kind())) + ": " + e.what()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %2d %-28s %s  %s  [%.2f s]\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RawScenario charge(double R, std::optional<double> z0, Vec3 j) {
  RawScenario r;
  r.particle = "charge";
  r.e2 = 1.0;
  r.trajectory = "adiabatic";
  r.R = R;
  r.T = 1.0;
  r.plate = z0.has_value();
  r.z0 = z0.value_or(0.0);
  r.j_hat = j;
  return r;
}

RawScenario dipole(std::optional<Vec3> p, std::optional<Vec3> m, std::optional<double> z0, Vec3 j) {
  RawScenario r = charge(0.01, z0, j);
  r.particle = "dipole";
  r.e2.reset();
  r.p = p;
  r.m = m;
  return r;
}

RawScenario trapezoid(double v, double tau) {
  RawScenario r = charge(0.0, std::nullopt, X);
  r.trajectory = "trapezoid";
  r.R.reset();
  r.v = v;
  r.tau = tau;
  return r;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace

int main() {
  std::printf("vacdec acceptance suite\n");

  criterion(1, "adiabatic vacuum", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto w = compute(validate(charge(0.01, std::nullopt, X)));
    const double secs = seconds_since(t0);
    LimitParams lp;
    lp.v = 0.01;
    const double closed = analytic_limits("adiabatic", lp);
    const double rel = std::abs(w.w_total / closed - 1);
    return Outcome{rel < 1e-3 && secs < 1.0,
                   fmt("W=%.6e closed=%.6e rel=%.2e runtime=%.3fs", w.w_total, closed, rel, secs)};
  });

  criterion(2, "cutoff independence", [] {
    RawScenario r = charge(0.01, std::nullopt, X);
    r.k_max = 40.0;
    const double a = compute(validate(r)).w_total;
    r.k_max = 80.0;
    const double b = compute(validate(r)).w_total;
    return Outcome{std::abs(a - b) < 1e-12, fmt("W(40)=%.12e W(80)=%.12e diff=%.2e", a, b, std::abs(a - b))};
  });

  criterion(3, "log divergence", [] {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<LogSample> samples;
    for (double tau : sweep_grid(1e-4, 1e-2, 7, true))
      samples.push_back({tau, compute(validate(trapezoid(0.01, tau))).w_total});
    const auto fit = regularized_log_fit(samples, 1.0);
    const double secs = seconds_since(t0);
    LimitParams lp;
    lp.v = 0.01;
    const double expected = analytic_limits("log-slope", lp);
    const double rel = std::abs(fit.slope / expected - 1);
    return Outcome{rel < 0.02 && fit.residual < 0.05 && secs < 30.0,
                   fmt("slope=%.5e expected=%.5e rel=%.2e residual=%.2e runtime=%.2fs", fit.slope, expected, rel,
                       fit.residual, secs)};
  });

  criterion(4, "contact doubling", [] {
    const auto w = compute(validate(charge(0.01, 1e-3, Z)));
    const double ratio = w.w_total / w.w_vac;
    return Outcome{ratio >= 1.96 && ratio <= 2.04, fmt("W_total/W_vac=%.6f", ratio)};
  });

  criterion(5, "contact recoherence", [] {
    const auto w = compute(validate(charge(0.01, 1e-3, X)));
    const double ratio = w.w_total / w.w_vac;
    return Outcome{ratio < 0.04, fmt("W_total/W_vac=%.3e", ratio)};
  });

  criterion(6, "positivity", [] {
    std::mt19937_64 g(20261017);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, U(g)); };
    int bad = 0;
    double worst = HUGE_VAL;
    int drawn = 0;
    for (int i = 0; i < 200;) {
      ++drawn;
      RawScenario r;
      const bool is_dipole = U(g) < 0.4;
      if (is_dipole) {
        r.particle = "dipole";
        const Vec3 axis = std::array{X, Y, Z}[static_cast<int>(3 * U(g))];
        const double mag = log_uniform(1e-3, 1.0);
        if (U(g) < 0.5)
          r.p = mag * axis;
        else
          r.m = mag * axis;
      } else {
        r.particle = "charge";
        r.e2 = log_uniform(1e-2, 10.0);
      }
      const double T = log_uniform(0.1, 10.0);
      const double kind = U(g);
      if (kind < 0.4) {
        r.trajectory = "adiabatic";
        r.T = T;
        r.R = log_uniform(1e-4, 0.1) * T;
      } else if (kind < 0.7) {
        r.trajectory = "trapezoid";
        r.T = T;
        r.v = log_uniform(1e-4, 0.1);
        r.tau = log_uniform(1e-3, 0.2) * T;
        if (is_dipole) r.k_max = 10.0 / *r.tau;
      } else {
        r.trajectory = "pulse_train";
        r.T_pulse = T;
        r.R = log_uniform(1e-4, 0.1) * T;
        r.N = 1 + static_cast<int>(4 * U(g));
        r.T_sep = T * (2.0 + 20.0 * U(g));
        r.Omega = U(g) < 0.5 ? 0.0 : 4.0 * U(g) / T;
      }
      r.plate = U(g) < 0.7;
      r.z0 = log_uniform(1e-3, 20.0) * T;
      r.j_hat = U(g) < 0.5 ? X : Z;
      // only admissible draws count
      std::optional<Scenario> s;
      try {
        s = validate(r);
      } catch (const ValidationError&) {
        continue;
      }
      ++i;
      const auto w = compute(*s);
      const double margin = w.w_total + w.err_est;
      if (margin < 0) ++bad;
      if (w.w_vac > 0) worst = std::min(worst, w.w_total / w.w_vac);
    }
    return Outcome{bad == 0, fmt("violations=%d/200 (draws=%d) min W_total/W_vac=%.3e", bad, drawn, worst)};
  });

  criterion(7, "N-linearity", [] {
    RawScenario r = charge(0.01, std::nullopt, X);
    r.trajectory = "pulse_train";
    r.T.reset();
    r.T_pulse = 1.0;
    r.T_sep = 50.0;
    r.N = 1;
    SweepSpec spec;
    spec.axis = SweepAxis::N;
    spec.values = {1, 2, 4, 8};
    const auto pts = sweep(validate(r), spec);
    double dev = 0.0;
    for (const auto& p : pts) {
      if (!p.result) throw Error(ErrorKind::QuadratureFailure, "sweep point failed");
      dev = std::max(dev, std::abs(p.result->w_total / (p.value * pts[0].result->w_total) - 1));
    }
    return Outcome{dev < 0.01, fmt("max |W(N)/(N W(1)) - 1|=%.3e", dev)};
  });

  criterion(8, "dipole sign table", [] {
    struct Case {
      const char* name;
      std::optional<Vec3> p, m;
      int expected;
    };
    const Case cases[] = {{"p par", X, std::nullopt, +1},
                          {"p perp", Z, std::nullopt, -1},
                          {"m par", std::nullopt, X, +1},
                          {"m perp", std::nullopt, Z, -1}};
    bool ok = true;
    std::string detail;
    for (const Case& c : cases) {
      const double wb = compute(validate(dipole(c.p, c.m, 0.05, X))).w_boundary;
      const int sign = wb > 0 ? 1 : (wb < 0 ? -1 : 0);
      ok = ok && sign == c.expected;
      detail += fmt("%s: W_B=%+.4e (want %c) ", c.name, wb, c.expected > 0 ? '+' : '-');
    }
    return Outcome{ok, detail};
  });

  criterion(9, "dipole contact limit", [] {
    struct Case {
      const char* name;
      std::optional<Vec3> p, m;
    };
    const Case cases[] = {
        {"p par", X, std::nullopt}, {"p perp", Z, std::nullopt}, {"m par", std::nullopt, X}, {"m perp", std::nullopt, Z}};
    bool ok = true;
    std::string detail;
    for (const Case& c : cases) {
      const Scenario s = validate(dipole(c.p, c.m, 1e-3, X));
      const auto mc = mc_w_first_principles(s, McConfig{400000, 11, 0});
      const auto w = compute(s);
      const double mc_ratio = std::abs(mc.boundary.value) / mc.vacuum.value;
      const double ratio = std::abs(w.w_boundary) / w.w_vac;
      const bool agree = std::abs(w.w_boundary - mc.boundary.value) <= 3 * mc.boundary.std_error;
      ok = ok && mc_ratio >= 0.95 && mc_ratio <= 1.05 && ratio >= 0.95 && ratio <= 1.05 && agree;
      detail += fmt("%s: mc=%.4f engine=%.4f%s ", c.name, mc_ratio, ratio, agree ? "" : " (engine off mc)");
    }
    return Outcome{ok, detail};
  });

  criterion(10, "dipole/charge ratio", [] {
    const double wc = compute(validate(charge(0.01, std::nullopt, X))).w_vac;
    bool ok = true;
    std::string detail;
    for (auto [axis, proj] : {std::pair{X, 1.0}, std::pair{Z, 0.0}}) {
      const double pmag = 0.3;
      const double wd = compute(validate(dipole(pmag * axis, std::nullopt, std::nullopt, X))).w_vac;
      LimitParams lp;
      lp.projection = proj;
      const double C = analytic_limits("dipole-charge-ratio", lp);
      const double measured = (wd / wc) / (pmag * pmag);  // e^2 = T = 1
      const double rel = std::abs(measured / C - 1);
      ok = ok && rel < 0.01;
      detail += fmt("p.j=%.0f: C=%.5f measured=%.5f rel=%.1e ", proj, C, measured, rel);
    }
    return Outcome{ok, detail};
  });

  criterion(11, "small-z0 quadratic law", [] {
    std::vector<double> lx, ly;
    for (double z0 : sweep_grid(1e-3, 1e-2, 8, true)) {
      lx.push_back(std::log(z0));
      ly.push_back(std::log(compute(validate(charge(0.01, z0, X))).w_total));
    }
    const auto fit = least_squares(lx, ly);
    const double coefficient = std::exp(fit.intercept);
    // charge plus image: a normal dipole of moment 2 e z0 moving along the plate
    const double dipole_coeff = compute(validate(dipole(2.0 * Z, std::nullopt, std::nullopt, X))).w_vac;
    const double rel = std::abs(coefficient / (0.5 * dipole_coeff) - 1);
    LimitParams lp;
    lp.R = 0.01;
    const double closed = analytic_limits("small-z0-coefficient", lp);
    return Outcome{std::abs(fit.slope - 2.0) <= 0.05 && rel < 0.05,
                   fmt("exponent=%.4f coefficient=%.5e half-dipole=%.5e rel=%.2e closed=%.5e", fit.slope,
                       coefficient, 0.5 * dipole_coeff, rel, closed)};
  });

  criterion(12, "large-z0 decay", [] {
    const auto t0 = std::chrono::steady_clock::now();
    RawScenario r = charge(0.01, 5.0, X);
    r.abs_tol = 1e-30;
    SweepSpec spec;
    spec.values = sweep_grid(5.0, 50.0, 40, true);
    const auto pts = sweep(validate(r), spec);
    std::vector<double> z, w;
    for (const auto& p : pts) {
      if (!p.result) throw Error(ErrorKind::QuadratureFailure, "sweep point failed");
      z.push_back(p.value);
      w.push_back(std::abs(p.result->w_boundary));
    }
    // envelope: keep local maxima when |W| is not monotone
    bool monotone = true;
    for (std::size_t i = 1; i < w.size(); ++i) monotone = monotone && w[i] < w[i - 1];
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const bool peak = monotone || (i > 0 && i + 1 < w.size() && w[i] >= w[i - 1] && w[i] > w[i + 1]);
      if (!peak) continue;
      lx.push_back(std::log(z[i]));
      ly.push_back(std::log(w[i]));
    }
    if (lx.size() < 6) throw Error(ErrorKind::NonMonotoneEnvelope, "too few envelope points");
    const auto fit = least_squares(lx, ly);
    const double expected = analytic_limits("large-z0-exponent", {});
    const double secs = seconds_since(t0);
    return Outcome{std::abs(fit.slope - expected) <= 0.1 && secs < 120.0,
                   fmt("exponent=%.4f oracle=%.1f points=%zu %s runtime=%.2fs", fit.slope, expected, lx.size(),
                       monotone ? "monotone" : "envelope", secs)};
  });

  criterion(13, "engine-oracle equivalence", [] {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 g(4242);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, U(g)); };
    int agree = 0, drawn = 0;
    std::string misses;
    for (int i = 0; i < 20;) {
      ++drawn;
      RawScenario r;
      const bool is_dipole = U(g) < 0.35;
      if (is_dipole) {
        r.particle = "dipole";
        const Vec3 axis = U(g) < 0.5 ? X : Z;
        if (U(g) < 0.5)
          r.p = axis;
        else
          r.m = axis;
      } else {
        r.particle = "charge";
        r.e2 = 1.0;
      }
      r.T = log_uniform(0.5, 2.0);
      if (U(g) < 0.6) {
        r.trajectory = "adiabatic";
        r.R = log_uniform(1e-3, 1e-2) * *r.T;
      } else {
        r.trajectory = "trapezoid";
        r.v = log_uniform(1e-4, 1e-2);
        r.tau = log_uniform(0.02, 0.1) * *r.T;
        r.k_max = 10.0 / *r.tau;
      }
      r.plate = U(g) < 0.8;
      r.z0 = log_uniform(0.02, 2.0) * *r.T;
      r.j_hat = U(g) < 0.5 ? X : Z;
      // the engine's own validity warnings (dipole expansion, speed) exclude a draw
      const Scenario s = validate(r);
      if (!s.warnings.empty()) continue;
      const auto w = compute(s);
      const auto mc = mc_w_first_principles(s, McConfig{4'000'000, 1000u + i, 0});
      ++i;
      const double dev = std::abs(w.w_total - mc.value) / mc.std_error;
      if (dev <= 3.0)
        ++agree;
      else
        misses += fmt("#%d %s/%s %.1f sigma; ", i - 1, r.particle->c_str(), r.trajectory->c_str(), dev);
    }
    const double secs = seconds_since(t0);
    return Outcome{agree >= 19 && secs < 600.0,
                   fmt("agree=%d/20 (draws=%d) %sruntime=%.1fs", agree, drawn, misses.c_str(), secs)};
  });

  criterion(14, "determinism", [] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "vacdec_acceptance";
    fs::create_directories(dir);
    const fs::path scn = dir / "determinism.scn";
    std::ofstream(scn) << "[particle]\nkind = charge\ne2 = 1\n[trajectory]\nkind = adiabatic\nR = 0.01\nT = 1\n"
                          "[geometry]\nplate = true\nz0 = 0.1\nj_hat = 1, 0, 0\n";
    auto once = [&](int workers) {
      cli::RunOptions o;
      o.scenario = scn;
      o.sweep = "z0=0.01:1:5";
      o.log_axis = true;
      o.oracle = true;
      o.mc_samples = 100000;
      o.seed = 99;
      o.workers = workers;
      std::ostringstream out, log;
      if (cli::run(o, out, log) != cli::kExitOk) throw Error(ErrorKind::QuadratureFailure, log.str());
      return out.str();
    };
    const std::string ref = once(1);
    bool same = true;
    for (int workers : {1, 2, 3, 8, 0}) same = same && once(workers) == ref;
    return Outcome{same && !ref.empty(), fmt("%zu bytes identical across workers {1,1,2,3,8,auto}", ref.size())};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
