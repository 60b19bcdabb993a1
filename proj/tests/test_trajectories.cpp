#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "vacdec/trajectories.hpp"

using namespace vacdec;

namespace {

const double kPi = std::acos(-1.0);

// Composite Simpson rule on a uniform grid; the reference for every transform.
cplx simpson(const std::function<cplx(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  cplx s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

TrajectorySpec gaussian(double R, double T) { return {Adiabatic{R, T}}; }

}  // namespace

TEST_CASE("adiabatic position and velocity") {
  const auto s = gaussian(1.0, 1.0);
  CHECK(position(s, 0.0) == 1.0);
  CHECK(position(s, 40.0) == doctest::Approx(0.0));
  CHECK(velocity(s, 0.0) == 0.0);
  CHECK(velocity(s, 1.0) == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-14));
  const double h = 1e-5;
  const double fd = (position(s, 1.0 + h) - position(s, 1.0 - h)) / (2 * h);
  CHECK(velocity(s, 1.0) == doctest::Approx(fd).epsilon(1e-9));
}

TEST_CASE("trapezoid is closed and coasts at +/- v") {
  const TrajectorySpec s{PiecewiseTrapezoid{0.01, 1.0, 0.05}};
  const auto sup = support(s);
  CHECK(position(s, sup.start) == 0.0);
  CHECK(std::abs(position(s, sup.end)) < 1e-15);
  CHECK(velocity(s, 0.2) == 0.01);
  CHECK(velocity(s, 0.8) == -0.01);
  CHECK(max_speed(s) == doctest::Approx(0.01));
  CHECK(has_power_law_spectrum(s));
  CHECK_FALSE(has_power_law_spectrum(gaussian(1, 1)));
  // velocity is the derivative of position away from the breakpoints
  for (double t : {0.02, 0.3, 0.47, 0.52, 0.9, 0.98}) {
    const double h = 1e-7;
    CHECK(velocity(s, t) ==
          doctest::Approx((position(s, t + h) - position(s, t - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("dipole mode vanishes at k_j = 0") {
  for (const TrajectorySpec& s : {gaussian(0.3, 1.0), TrajectorySpec{PiecewiseTrapezoid{0.01, 1, 0.1}}}) {
    const auto r = source_spectrum(s, 1.7, 0.0, SpectrumMode::dipole);
    CHECK(r.value == cplx(0.0, 0.0));
  }
}

TEST_CASE("charge mode at k_j = 0 is the velocity transform") {
  const double R = 0.7, T = 1.3, k = 2.1;
  const auto r = source_spectrum(gaussian(R, T), k, 0.0, SpectrumMode::charge);
  // integrating by parts: -i k R sqrt(pi) T exp(-k^2 T^2 / 4)
  const cplx expected = cplx(0.0, -1.0) * k * R * std::sqrt(kPi) * T * std::exp(-k * k * T * T / 4);
  CHECK(std::abs(r.value - expected) < 1e-12);
  CHECK(source_spectrum(gaussian(0.0, T), k, 0.0, SpectrumMode::charge).value == cplx(0.0, 0.0));
}

TEST_CASE("dipole-approximation velocity spectrum") {
  const auto s = gaussian(1.0, 1.0);
  const auto at2 = dipole_approx_spectrum(s, 2.0, SpectrumMode::charge);
  CHECK(std::abs(at2.value) == doctest::Approx(2.0 * std::sqrt(kPi) * std::exp(-1.0)).epsilon(1e-12));
  CHECK(std::abs(at2.value) == doctest::Approx(1.3041).epsilon(1e-4));
  CHECK(at2.value.real() == doctest::Approx(0.0));
  CHECK(at2.value.imag() < 0.0);
  CHECK(std::abs(dipole_approx_spectrum(s, 0.0, SpectrumMode::charge).value) < 1e-15);

  // numeric reference
  auto f = [&](double t) { return velocity(s, t) * std::exp(cplx(0, 2.0 * t)); };
  CHECK(std::abs(at2.value - simpson(f, -9, 9, 20000)) < 1e-10);
}

TEST_CASE("trapezoid dipole-approximation spectra against quadrature") {
  const TrajectorySpec s{PiecewiseTrapezoid{0.01, 1.0, 0.05}};
  for (double k : {0.5, 7.0, 40.0}) {
    auto fv = [&](double t) { return velocity(s, t) * std::exp(cplx(0, k * t)); };
    auto fx = [&](double t) { return position(s, t) * std::exp(cplx(0, k * t)); };
    const auto v = dipole_approx_spectrum(s, k, SpectrumMode::charge).value;
    const auto x = dipole_approx_spectrum(s, k, SpectrumMode::dipole).value;
    CHECK(std::abs(v - simpson(fv, 0, 1, 200000)) < 1e-9 * 0.01);
    CHECK(std::abs(x - simpson(fx, 0, 1, 200000)) < 1e-10 * 0.01);
  }
}

TEST_CASE("exact spectra against quadrature") {
  const double k = 3.0, kj = 2.5;
  SUBCASE("gaussian") {
    const auto s = gaussian(0.4, 1.0);
    auto fc = [&](double t) {
      return velocity(s, t) * std::cos(kj * position(s, t)) * std::exp(cplx(0, k * t));
    };
    auto fd = [&](double t) { return std::sin(kj * position(s, t)) * std::exp(cplx(0, k * t)); };
    CHECK(std::abs(source_spectrum(s, k, kj, SpectrumMode::charge).value - simpson(fc, -9, 9, 40000)) < 1e-10);
    CHECK(std::abs(source_spectrum(s, k, kj, SpectrumMode::dipole).value - simpson(fd, -9, 9, 40000)) < 1e-10);
  }
  SUBCASE("pulse train with carrier") {
    const TrajectorySpec s{PulseTrain{0.3, 0.5, 2.0, 3, 4.0}};
    const auto sup = support(s);
    auto fc = [&](double t) {
      return velocity(s, t) * std::cos(kj * position(s, t)) * std::exp(cplx(0, k * t));
    };
    CHECK(std::abs(source_spectrum(s, k, kj, SpectrumMode::charge).value -
                   simpson(fc, sup.start, sup.end, 200000)) < 1e-9);
  }
  SUBCASE("series and adaptive paths agree") {
    const auto s = gaussian(0.8, 1.0);
    SpectrumOptions numeric;
    numeric.force_numeric = true;
    for (auto mode : {SpectrumMode::charge, SpectrumMode::dipole}) {
      const auto a = source_spectrum(s, k, kj, mode);
      const auto b = source_spectrum(s, k, kj, mode, numeric);
      CHECK(std::abs(a.value - b.value) < 1e-9);
    }
  }
}

TEST_CASE("pulse train spectrum is the single pulse times the array factor") {
  const double k = 1.3, Tsep = 5.0;
  const int N = 4;
  const auto one = dipole_approx_spectrum({PulseTrain{0.2, 0.6, Tsep, 1, 0.0}}, k, SpectrumMode::charge);
  const auto many = dipole_approx_spectrum({PulseTrain{0.2, 0.6, Tsep, N, 0.0}}, k, SpectrumMode::charge);
  cplx array{};
  for (int n = 0; n < N; ++n) array += std::exp(cplx(0, k * n * Tsep));
  CHECK(std::abs(many.value - one.value * array) < 1e-13);
}

TEST_CASE("exact spectrum approaches the dipole approximation as R -> 0") {
  // charge mode: cos(k_j x) - 1 = O((k_j R)^2), so the relative error scales as R^2
  const double k = 1.5, kj = 1.0;
  auto rel = [&](double R) {
    const auto s = gaussian(R, 1.0);
    const auto exact = source_spectrum(s, k, kj, SpectrumMode::charge).value;
    const auto approx = dipole_approx_spectrum(s, k, SpectrumMode::charge).value;
    return std::abs(exact - approx) / std::abs(approx);
  };
  const double r1 = rel(0.02), r2 = rel(0.01);
  CHECK(r1 < 1e-3);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("phase transform against quadrature") {
  const auto s = gaussian(0.5, 1.0);
  const double k = 2.0, q = 3.0;
  const auto p = phase_transform(s, k, q);
  auto fd = [&](double t) {
    return (std::exp(cplx(0, q * position(s, t))) - 1.0) * std::exp(cplx(0, k * t));
  };
  auto fc = [&](double t) {
    return velocity(s, t) * std::exp(cplx(0, q * position(s, t))) * std::exp(cplx(0, k * t));
  };
  CHECK(std::abs(p.displacement - simpson(fd, -9, 9, 40000)) < 1e-10);
  CHECK(std::abs(p.current - simpson(fc, -9, 9, 40000)) < 1e-10);
  // closed path: k * displacement + q * current = 0
  CHECK(std::abs(k * p.displacement + q * p.current) < 1e-10);
}

TEST_CASE("trapezoid phase transform against quadrature") {
  struct Case {
    double v, tau, k, q;
  };
  for (const Case& c : {Case{0.01, 0.05, 150.0, 120.0}, Case{0.25, 0.01, 1000.0, -1000.0},
                        Case{0.1, 0.2, 1e-3, 2e-3}, Case{0.3, 0.01, 3.0, 2500.0}}) {
    const TrajectorySpec s{PiecewiseTrapezoid{c.v, 1.0, c.tau}};
    const auto p = phase_transform(s, c.k, c.q);
    auto fd = [&](double t) {
      return (std::exp(cplx(0, c.q * position(s, t))) - 1.0) * std::exp(cplx(0, c.k * t));
    };
    auto fc = [&](double t) {
      return velocity(s, t) * std::exp(cplx(0, c.q * position(s, t) + c.k * t));
    };
    // Simpson per smooth piece
    cplx d{}, cur{};
    const auto bp = breakpoints(s);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      d += simpson(fd, bp[i], bp[i + 1], 200000);
      cur += simpson(fc, bp[i], bp[i + 1], 200000);
    }
    CAPTURE(c.k);
    CHECK(std::abs(p.current - cur) < 1e-9 * (std::abs(cur) + 1e-6 * c.v));
    CHECK(std::abs(p.displacement - d) < 1e-9 * (std::abs(d) + 1e-6 * c.v));
    SpectrumOptions numeric;
    numeric.force_numeric = true;
    const auto n = phase_transform(s, c.k, c.q, numeric);
    CHECK(std::abs(p.current - n.current) < 1e-9 * (std::abs(cur) + 1e-6 * c.v));
  }
}
