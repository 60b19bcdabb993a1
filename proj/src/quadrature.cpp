#include "vacdec/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace vacdec {

namespace detail {

const KronrodRule& gk21() {
  static const KronrodRule rule = [] {
    namespace bq = boost::math::quadrature;
    const auto& x = bq::gauss_kronrod<double, 21>::abscissa();
    const auto& w = bq::gauss_kronrod<double, 21>::weights();
    const auto& gx = bq::gauss<double, 10>::abscissa();
    const auto& gw = bq::gauss<double, 10>::weights();
    KronrodRule r{};
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      r.nodes[i] = x[i];
      r.kronrod_weights[i] = w[i];
      r.gauss_weights[i] = 0.0;
      for (std::size_t j = 0; j < gx.size(); ++j) {
        if (gx[j] == x[i]) r.gauss_weights[i] = gw[j];
      }
    }
    return r;
  }();
  return rule;
}

}  // namespace detail

std::vector<double> uniform_edges(double a, double b, double max_width, int max_panels) {
  double span = b - a;
  int n = 1;
  if (std::isfinite(max_width) && max_width > 0.0) {
    double want = std::ceil(span / max_width);
    n = static_cast<int>(std::clamp(want, 1.0, static_cast<double>(max_panels)));
  }
  std::vector<double> edges(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) edges[static_cast<std::size_t>(i)] = a + span * i / n;
  edges.back() = b;
  return edges;
}

namespace {

std::string format_k(double k) {
  std::ostringstream os;
  os.precision(6);
  os << k;
  return os.str();
}

AdaptiveResult<double> integrate_segment(const RadialIntegrand& f, double a, double b,
                                         double period, int min_panels, double rel_tol,
                                         double abs_tol, int max_subdivisions) {
  double width = (b - a) / min_panels;
  if (std::isfinite(period)) width = std::min(width, period);
  auto edges = uniform_edges(a, b, width);
  return integrate_adaptive(f, edges, rel_tol, abs_tol, max_subdivisions);
}

}  // namespace

IntegralEstimate integrate_radial(const RadialIntegrand& f, const RadialProfile& profile,
                                  const QuadratureConfig& cfg) {
  IntegralEstimate out;
  if (cfg.k_max) {
    if (!(*cfg.k_max > 0.0)) throw Error(ErrorKind::InvalidValue, "k_max must be positive");
    auto r = integrate_segment(f, 0.0, *cfg.k_max, profile.period, 8, cfg.rel_tol, cfg.abs_tol,
                               cfg.max_subdivisions);
    out.value = r.value;
    out.err_est = r.err_est;
    out.evaluations = r.evaluations;
    out.truncation_note = "hard cutoff k_max=" + format_k(*cfg.k_max);
    return out;
  }

  if (profile.decay == SpectralDecay::algebraic) {
    if (!profile.tail) {
      throw Error(ErrorKind::CutoffRequired,
                  "algebraically decaying integrand needs k_max or an asymptotic tail");
    }
    const AsymptoticTail& tail = *profile.tail;
    auto r = integrate_segment(f, 0.0, tail.onset, profile.period, 8, cfg.rel_tol,
                               0.5 * cfg.abs_tol, cfg.max_subdivisions);
    double rest = 0.0;
    if (tail.coefficient != 0.0) {
      rest = tail.coefficient * std::pow(tail.onset, 1.0 - tail.power) / (tail.power - 1.0);
    }
    out.value = r.value + rest;
    out.err_est = r.err_est + std::abs(rest) * tail.relative_error;
    out.evaluations = r.evaluations;
    out.truncation_note = "analytic power-law tail beyond k=" + format_k(tail.onset);
    return out;
  }

  // Exponential decay: integrate the bulk, then double the domain until the
  // newest panel no longer matters.
  auto base = integrate_segment(f, 0.0, profile.scale, profile.period, 8, cfg.rel_tol,
                                0.5 * cfg.abs_tol, cfg.max_subdivisions);
  double value = base.value;
  double err = base.err_est;
  long evals = base.evaluations;
  double lo = profile.scale;
  constexpr int kMaxDoublings = 64;
  for (int i = 0; i < kMaxDoublings; ++i) {
    const double hi = 2.0 * lo;
    const double panel_tol = 0.1 * std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
    auto piece = integrate_segment(f, lo, hi, profile.period, 4, cfg.rel_tol, panel_tol,
                                   cfg.max_subdivisions);
    value += piece.value;
    err += piece.err_est;
    evals += piece.evaluations;
    lo = hi;
    const double negligible = 0.1 * std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
    if (piece.abs_integral <= negligible) {
      out.value = value;
      out.err_est = err + piece.abs_integral;
      out.evaluations = evals;
      out.truncation_note = "spectrum exhausted at k=" + format_k(lo);
      return out;
    }
  }
  throw Error(ErrorKind::QuadratureFailure, "radial tail did not decay");
}

IntegralEstimate integrate_angular(const AngularIntegrand& f, double oscillation_scale,
                                   const QuadratureConfig& cfg, AngularSymmetry symmetry) {
  using std::numbers::pi;
  const double beta = std::abs(oscillation_scale);
  const int u_panels = std::max(2, static_cast<int>(std::ceil(beta / pi)));
  auto u_edges = uniform_edges(-1.0, 1.0, 2.0 / u_panels);

  const double inner_rel = 0.1 * cfg.rel_tol;
  const double inner_abs = 0.05 * cfg.abs_tol;
  long evals = 0;

  auto over_phi = [&](double u) -> double {
    switch (symmetry) {
      case AngularSymmetry::azimuthal:
        ++evals;
        return 2.0 * pi * f(u, 0.0);
      case AngularSymmetry::quadrant: {
        const std::array<double, 3> edges{0.0, 0.25 * pi, 0.5 * pi};
        auto r = integrate_adaptive([&](double phi) { return f(u, phi); }, edges, inner_rel,
                                    inner_abs, cfg.max_subdivisions);
        evals += r.evaluations;
        return 4.0 * r.value;
      }
      case AngularSymmetry::none:
      default: {
        auto edges = uniform_edges(0.0, 2.0 * pi, 0.5 * pi);
        auto r = integrate_adaptive([&](double phi) { return f(u, phi); }, edges, inner_rel,
                                    inner_abs, cfg.max_subdivisions);
        evals += r.evaluations;
        return r.value;
      }
    }
  };

  auto r = integrate_adaptive(over_phi, u_edges, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions);
  IntegralEstimate out;
  out.value = r.value;
  out.err_est = r.err_est;
  out.evaluations = evals;
  return out;
}

LogFit regularized_log_fit(std::span<const LogSample> samples, double duration) {
  if (samples.size() < 5) {
    throw Error(ErrorKind::InsufficientSpan, "log fit needs at least 5 samples");
  }
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (const auto& s : samples) {
    if (!(s.tau > 0.0) || s.tau / duration > 0.02) {
      throw Error(ErrorKind::InsufficientSpan,
                  "log fit samples must satisfy 0 < tau/T <= 0.02");
    }
    const double x = std::log(duration / s.tau);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  }
  if (x_max - x_min < 2.0 * std::log(10.0) * (1.0 - 1e-12)) {
    throw Error(ErrorKind::InsufficientSpan, "log fit samples must span two decades of T/tau");
  }

  const double n = static_cast<double>(samples.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& s : samples) {
    sx += std::log(duration / s.tau);
    sy += s.w;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = std::log(duration / s.tau) - mx;
    sxx += dx * dx;
    sxy += dx * (s.w - my);
  }
  LogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& s : samples) {
    const double model = fit.intercept + fit.slope * std::log(duration / s.tau);
    const double scale = std::abs(s.w) > 0.0 ? std::abs(s.w) : 1.0;
    fit.residual = std::max(fit.residual, std::abs(s.w - model) / scale);
  }
  return fit;
}

}  // namespace vacdec
