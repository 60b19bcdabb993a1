#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "vacdec/error.hpp"

namespace vacdec {

/// Tolerances and limits for the deterministic integration engine.
///
/// Every panel is integrated with the nested 10-point Gauss / 21-point
/// Kronrod pair; refinement bisects the panel with the largest error.
struct QuadratureConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  /// Hard radial cutoff. Unset means "integrate the full spectrum".
  std::optional<double> k_max;
  int max_subdivisions = 200000;
};

struct IntegralEstimate {
  double value = 0.0;
  double err_est = 0.0;
  long evaluations = 0;
  std::string truncation_note;
};

template <typename T>
struct AdaptiveResult {
  T value{};
  double err_est = 0.0;
  double abs_integral = 0.0;  // integral of |f|, for roundoff floors
  long evaluations = 0;
};

namespace detail {

struct KronrodRule {
  std::array<double, 11> nodes;          // non-negative abscissae, nodes[0] == 0
  std::array<double, 11> kronrod_weights;
  std::array<double, 11> gauss_weights;  // zero where the node is not a Gauss node
};

const KronrodRule& gk21();

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <typename T>
struct Panel {
  double a = 0.0;
  double b = 0.0;
  T value{};
  double err = 0.0;
  double abs_value = 0.0;
};

template <typename T, typename F>
Panel<T> integrate_panel(F& f, double a, double b) {
  const KronrodRule& rule = gk21();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  T center = f(mid);
  T kron = center * rule.kronrod_weights[0];
  T gauss = center * rule.gauss_weights[0];
  double abs_sum = magnitude(center) * rule.kronrod_weights[0];
  for (std::size_t i = 1; i < rule.nodes.size(); ++i) {
    const double dx = half * rule.nodes[i];
    T lo = f(mid - dx);
    T hi = f(mid + dx);
    kron += (lo + hi) * rule.kronrod_weights[i];
    gauss += (lo + hi) * rule.gauss_weights[i];
    abs_sum += (magnitude(lo) + magnitude(hi)) * rule.kronrod_weights[i];
  }
  Panel<T> p;
  p.a = a;
  p.b = b;
  p.value = kron * half;
  p.err = magnitude((kron - gauss) * half);
  p.abs_value = abs_sum * std::abs(half);
  return p;
}

}  // namespace detail

/// Globally adaptive integration of `f` over the partition given by `edges`
/// (sorted, at least two entries). Works for real and complex integrands.
/// Throws QuadratureFailure when the tolerance is not met within
/// `max_subdivisions` bisections.
template <typename F>
auto integrate_adaptive(F&& f, std::span<const double> edges, double rel_tol, double abs_tol,
                        int max_subdivisions) {
  using T = std::decay_t<decltype(f(0.0))>;
  using detail::Panel;
  constexpr long kEvalsPerPanel = 21;
  AdaptiveResult<T> out;
  if (edges.size() < 2) return out;

  auto worse = [](const Panel<T>& l, const Panel<T>& r) { return l.err < r.err; };
  std::priority_queue<Panel<T>, std::vector<Panel<T>>, decltype(worse)> heap(worse);

  T total{};
  double err = 0.0;
  double abs_total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) continue;
    Panel<T> p = detail::integrate_panel<T>(f, edges[i], edges[i + 1]);
    out.evaluations += kEvalsPerPanel;
    total += p.value;
    err += p.err;
    abs_total += p.abs_value;
    heap.push(p);
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto target = [&] {
    return std::max({abs_tol, rel_tol * detail::magnitude(total), 50.0 * eps * abs_total});
  };
  int splits = 0;
  while (err > target() && !heap.empty()) {
    if (splits >= max_subdivisions) {
      throw Error(ErrorKind::QuadratureFailure,
                  "adaptive quadrature: tolerance not met within " +
                      std::to_string(max_subdivisions) + " subdivisions (err " +
                      std::to_string(err) + ")");
    }
    Panel<T> worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // cannot split further
    heap.pop();
    Panel<T> left = detail::integrate_panel<T>(f, worst.a, mid);
    Panel<T> right = detail::integrate_panel<T>(f, mid, worst.b);
    out.evaluations += 2 * kEvalsPerPanel;
    total += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    abs_total += left.abs_value + right.abs_value - worst.abs_value;
    heap.push(left);
    heap.push(right);
    ++splits;
  }

  // Resum in positional order so the result does not depend on the running
  // update history.
  std::vector<Panel<T>> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel<T>& l, const Panel<T>& r) { return l.a < r.a; });
  out.value = T{};
  out.err_est = 0.0;
  out.abs_integral = 0.0;
  for (const auto& p : panels) {
    out.value += p.value;
    out.err_est += p.err;
    out.abs_integral += p.abs_value;
  }
  return out;
}

/// Uniform partition of [a, b] into panels no longer than `max_width`.
std::vector<double> uniform_edges(double a, double b, double max_width, int max_panels = 1 << 22);

enum class SpectralDecay {
  exponential,  // integrand dies off faster than any power beyond `scale`
  algebraic,    // power-law tail; needs a hard cutoff or an asymptotic tail model
};

/// Mean asymptotic behaviour f(k) ~ coefficient * k^(-power) beyond `onset`.
struct AsymptoticTail {
  double power = 3.0;
  double coefficient = 0.0;
  double onset = 0.0;
  /// Relative uncertainty attached to the analytic tail in the error budget.
  double relative_error = 0.05;
};

struct RadialProfile {
  SpectralDecay decay = SpectralDecay::exponential;
  /// Wavenumber by which the bulk of the integrand has been seen.
  double scale = 1.0;
  /// Shortest oscillation period of the integrand in k (inf if none).
  double period = std::numeric_limits<double>::infinity();
  std::optional<AsymptoticTail> tail;
};

using RadialIntegrand = std::function<double(double)>;

/// Integrates f(k) over (0, k_max) or (0, inf).
///
/// With cfg.k_max set the domain ends exactly there. Otherwise exponential
/// profiles are extended by doubling until the last panel is negligible, and
/// algebraic profiles are closed with their analytic tail (CutoffRequired if
/// none is declared).
IntegralEstimate integrate_radial(const RadialIntegrand& f, const RadialProfile& profile,
                                  const QuadratureConfig& cfg);

enum class AngularSymmetry {
  none,
  azimuthal,  // integrand independent of phi
  quadrant,   // f(u, phi) = f(u, -phi) = f(u, pi - phi)
};

using AngularIntegrand = std::function<double(double u, double phi)>;

/// Integrates f(u, phi) du dphi over the unit sphere (u = cos theta).
/// `oscillation_scale` is the largest angular frequency in u, e.g. the
/// image-phase parameter 2 k z0.
IntegralEstimate integrate_angular(const AngularIntegrand& f, double oscillation_scale,
                                   const QuadratureConfig& cfg,
                                   AngularSymmetry symmetry = AngularSymmetry::none);

struct LogSample {
  double tau = 0.0;
  double w = 0.0;
};

struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max relative residual
};

/// Least-squares fit of W against ln(duration / tau). Requires at least five
/// samples, all with tau/duration <= 0.02, spanning two decades.
LogFit regularized_log_fit(std::span<const LogSample> samples, double duration);

}  // namespace vacdec
