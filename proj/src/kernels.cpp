#include "vacdec/kernels.hpp"

#include <cmath>

#include "vacdec/error.hpp"
#include "vacdec/scenario.hpp"

namespace vacdec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Below this beta the alternating Taylor series is used; above it the
// antiderivative, whose 1/beta^(m+1) terms cancel badly near zero.
constexpr double kSeriesCrossover = 1.0;

constexpr double kAxisTolerance = 1e-12;

// int_{-1}^{1} u^m cos(beta u) du = 2 sum_n (-1)^n beta^2n / ((2n)! (2n+m+1)),
// starting the sum at n = first.
double moment_series(int m, double beta, int first) {
  const double b2 = beta * beta;
  double power = 1.0;  // beta^2n / (2n)!
  for (int n = 1; n <= first; ++n) power *= -b2 / ((2.0 * n - 1.0) * (2.0 * n));
  double sum = 0.0;
  for (int n = first; n < 60; ++n) {
    const double term = power / (2.0 * n + m + 1.0);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    power *= -b2 / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
  }
  return 2.0 * sum;
}

double moment_closed(int m, double beta) {
  const double s = std::sin(beta);
  const double c = std::cos(beta);
  const double b = beta;
  switch (m) {
    case 0: return 2.0 * s / b;
    case 2: return 2.0 * s / b + 4.0 * c / (b * b) - 4.0 * s / (b * b * b);
    case 4: {
      const double b2 = b * b;
      return 2.0 * (s / b + 4.0 * c / b2 - 12.0 * s / (b2 * b) - 24.0 * c / (b2 * b2) +
                    24.0 * s / (b2 * b2 * b));
    }
    default: break;
  }
  throw Error(ErrorKind::InvalidValue, "cosine moment order must be 0, 2 or 4");
}

void check_order(int m) {
  if (m < 0 || m > 4) throw Error(ErrorKind::InvalidValue, "cosine moment order must be in [0, 4]");
}

// int_0^{2 pi} cos^a(phi) sin^b(phi) dphi for a + b <= 4.
double azimuthal(int a, int b) {
  if (a % 2 != 0 || b % 2 != 0) return 0.0;
  if (a + b == 0) return 2.0 * kPi;
  if (a + b == 2) return kPi;
  if (a == 2 && b == 2) return kPi / 4.0;
  return 3.0 * kPi / 4.0;  // (4, 0) and (0, 4)
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// int dOmega n_x^a n_y^b n_z^c cos(beta n_z), or its deficit.
double monomial(int a, int b, int c, double beta, bool deficit) {
  if (a % 2 != 0 || b % 2 != 0 || c % 2 != 0) return 0.0;
  const int h = (a + b) / 2;
  double radial = 0.0;
  for (int j = 0; j <= h; ++j) {
    const double w = binomial(h, j) * ((j % 2 == 0) ? 1.0 : -1.0);
    const int order = 2 * j + c;
    radial += w * (deficit ? cosine_moment_deficit(order, beta) : cosine_moment(order, beta));
  }
  return azimuthal(a, b) * radial;
}

bool in_plane(Vec3 v) { return std::abs(v.z) <= kAxisTolerance * norm(v); }
bool along_normal(Vec3 v) {
  return std::hypot(v.x, v.y) <= kAxisTolerance * norm(v);
}

constexpr double kMetric[4] = {1.0, -1.0, -1.0, -1.0};

}  // namespace

Vec3 KPoint::direction() const {
  const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
  return {s * std::cos(phi), s * std::sin(phi), u};
}

double vacuum_kernel_weight(const KPoint& kp) {
  if (!(kp.k > 0.0)) {
    throw Error(ErrorKind::InvalidValue, "kernel weight needs k > 0");
  }
  return 1.0 / (std::pow(2.0 * kPi, 3) * 2.0 * kp.k);
}

double image_phase(const KPoint& kp, double z0) { return std::cos(2.0 * kp.k_z() * z0); }

double polarization_factor(const KPoint& kp, Vec3 axis) {
  const double c = dot(kp.direction(), axis);
  return 1.0 - c * c;
}

double cosine_moment(int m, double beta) {
  check_order(m);
  if (m % 2 != 0) return 0.0;
  beta = std::abs(beta);
  if (beta < kSeriesCrossover) return moment_series(m, beta, 0);
  return moment_closed(m, beta);
}

double cosine_moment_deficit(int m, double beta) {
  check_order(m);
  if (m % 2 != 0) return 0.0;
  beta = std::abs(beta);
  if (beta < kSeriesCrossover) return -moment_series(m, beta, 1);
  return 2.0 / (m + 1.0) - moment_closed(m, beta);
}

double constant_moment(double beta, bool deficit) { return monomial(0, 0, 0, beta, deficit); }

double quadratic_moment(Vec3 a, Vec3 b, double beta, bool deficit) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double w = a[i] * b[j];
      if (w == 0.0) continue;
      int e[3] = {0, 0, 0};
      ++e[i];
      ++e[j];
      sum += w * monomial(e[0], e[1], e[2], beta, deficit);
    }
  }
  return sum;
}

double quartic_moment(Vec3 a, Vec3 b, Vec3 c, Vec3 d, double beta, bool deficit) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          const double w = a[i] * b[j] * c[k] * d[l];
          if (w == 0.0) continue;
          int e[3] = {0, 0, 0};
          ++e[i];
          ++e[j];
          ++e[k];
          ++e[l];
          sum += w * monomial(e[0], e[1], e[2], beta, deficit);
        }
      }
    }
  }
  return sum;
}

AngularReduction::AngularReduction(const AngularCase& c) : case_(c) {
  const Vec3 j = c.j_hat;
  if (!in_plane(j) && !along_normal(j)) {
    throw Error(ErrorKind::UnsupportedCase,
                "closed angular reduction needs j_hat parallel or perpendicular to the plate");
  }
  const Vec3 j_image = reflect_geometric(j);
  if (c.source == SourceKind::charge) {
    sign_ = -dot(j, j_image);
    return;
  }
  const Vec3 d = c.moment;
  const double d2 = dot(d, d);
  if (d2 == 0.0) {
    sign_ = 1.0;
    return;
  }
  if (!in_plane(d) && !along_normal(d)) {
    throw Error(ErrorKind::UnsupportedCase,
                "closed angular reduction needs the dipole along the normal or in the plane");
  }
  const Vec3 d_image = c.source == SourceKind::electric_dipole ? reflect_electric_dipole(d)
                                                               : reflect_magnetic_dipole(d);
  sign_ = dot(j, j_image) * dot(d, d_image) / d2;
}

double AngularReduction::evaluate(double beta, bool deficit) const {
  const Vec3 j = case_.j_hat;
  if (case_.source == SourceKind::charge) {
    return constant_moment(beta, deficit) - quadratic_moment(j, j, beta, deficit);
  }
  const Vec3 d = case_.moment;
  return dot(d, d) * quadratic_moment(j, j, beta, deficit) -
         quartic_moment(j, j, d, d, beta, deficit);
}

double AngularReduction::operator()(double beta) const {
  return evaluate(case_.term == KernelTerm::vacuum ? 0.0 : beta, false);
}

double AngularReduction::deficit(double beta) const {
  if (case_.term == KernelTerm::vacuum) return 0.0;
  return evaluate(beta, true);
}

double AngularReduction::total_weight(double beta) const {
  if (sign_ < 0.0) return evaluate(beta, true);
  return evaluate(0.0, false) + evaluate(beta, false);
}

double angular_reduction(const AngularCase& c, double beta) { return AngularReduction(c)(beta); }

DipoleTensor DipoleTensor::from_moments(Vec3 p, Vec3 m, cplx phase) {
  DipoleTensor t;
  for (int i = 0; i < 3; ++i) {
    t.lower[0][i + 1] = 0.5 * p[i] * phase;
    t.lower[i + 1][0] = -t.lower[0][i + 1];
  }
  // P_ij = eps_ijk m_k / 2
  t.lower[1][2] = 0.5 * m.z * phase;
  t.lower[2][1] = -t.lower[1][2];
  t.lower[2][3] = 0.5 * m.x * phase;
  t.lower[3][2] = -t.lower[2][3];
  t.lower[3][1] = 0.5 * m.y * phase;
  t.lower[1][3] = -t.lower[3][1];
  return t;
}

FourCurrent effective_current(const DipoleTensor& P, const KPoint& kp) {
  const Vec3 kv = kp.vector();
  const double kappa[4] = {kp.k, kv.x, kv.y, kv.z};  // covariant, matches e^{i(kt + k.x)}
  FourCurrent out;
  const cplx minus_2i(0.0, -2.0);
  for (int nu = 0; nu < 4; ++nu) {
    cplx sum{};
    for (int mu = 0; mu < 4; ++mu) {
      sum += kappa[mu] * kMetric[mu] * kMetric[nu] * P.lower[mu][nu];
    }
    out.j[nu] = minus_2i * sum;
  }
  return out;
}

cplx conservation_residual(const FourCurrent& a, const KPoint& kp) {
  const Vec3 kv = kp.vector();
  return kp.k * a.j[0] + kv.x * a.j[1] + kv.y * a.j[2] + kv.z * a.j[3];
}

cplx field_strength_contraction(const FourCurrent& a, const FourCurrent& b, KernelTerm term) {
  // vacuum: -eta = diag(-1, 1, 1, 1); image: eta + 2 n n = diag(1, -1, -1, 1)
  static constexpr double kVacuum[4] = {-1.0, 1.0, 1.0, 1.0};
  static constexpr double kImage[4] = {1.0, -1.0, -1.0, 1.0};
  const double* g = term == KernelTerm::vacuum ? kVacuum : kImage;
  cplx sum{};
  for (int mu = 0; mu < 4; ++mu) sum += g[mu] * a.j[mu] * std::conj(b.j[mu]);
  return sum;
}

cplx field_strength_contraction(const KPoint& kp, const DipoleTensor& a, const DipoleTensor& b,
                                KernelTerm term) {
  const FourCurrent ja = effective_current(a, kp);
  const FourCurrent jb =
      effective_current(b, term == KernelTerm::vacuum ? kp : kp.reflected());
  return field_strength_contraction(ja, jb, term);
}

}  // namespace vacdec
