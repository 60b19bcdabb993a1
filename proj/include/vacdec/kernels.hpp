#pragma once

#include <array>
#include <complex>

#include "vacdec/vec3.hpp"

namespace vacdec {

using cplx = std::complex<double>;

/// A wavevector in spherical coordinates about the plate normal z_hat.
struct KPoint {
  double k = 0.0;    // radial wavenumber
  double u = 1.0;    // cos(theta) from z_hat
  double phi = 0.0;  // azimuth

  Vec3 direction() const;
  Vec3 vector() const { return k * direction(); }
  double k_z() const { return k * u; }
  /// Component along a (unit) axis.
  double along(Vec3 axis) const { return dot(vector(), axis); }
  /// The mirror wavevector (k_x, k_y, -k_z).
  KPoint reflected() const { return {k, -u, phi}; }
};

/// Mode-density weight 1/((2 pi)^3 2k) of the vacuum Hadamard function.
/// Throws InvalidValue for k <= 0.
double vacuum_kernel_weight(const KPoint& kp);

/// Real part of the image phase exp(2 i k_z z0).
double image_phase(const KPoint& kp, double z0);

/// Transverse projector weight 1 - (k_hat . axis)^2 for a unit axis.
double polarization_factor(const KPoint& kp, Vec3 axis);

// ---------------------------------------------------------------------------
// Closed-form angular integrals
// ---------------------------------------------------------------------------

/// Integral over u in [-1, 1] of u^m cos(beta u), for even m in {0, 2, 4}.
/// Series below a per-moment crossover, elementary antiderivative above it.
double cosine_moment(int m, double beta);

/// cosine_moment(m, 0) - cosine_moment(m, beta) without cancellation.
double cosine_moment_deficit(int m, double beta);

/// Sphere integrals of products of linear forms times cos(beta u):
///   quadratic_moment(a, b)      = int dOmega (n.a)(n.b) cos(beta n_z)
///   quartic_moment(a, b, c, d)  = int dOmega (n.a)(n.b)(n.c)(n.d) cos(beta n_z)
/// The `deficit` flag returns value(0) - value(beta) instead.
double constant_moment(double beta, bool deficit = false);
double quadratic_moment(Vec3 a, Vec3 b, double beta, bool deficit = false);
double quartic_moment(Vec3 a, Vec3 b, Vec3 c, Vec3 d, double beta, bool deficit = false);

enum class SourceKind { charge, electric_dipole, magnetic_dipole };
enum class KernelTerm { vacuum, boundary };

/// A symmetric configuration for which the angular integral closes:
/// trajectory direction j_hat parallel or perpendicular to the plate and,
/// for dipoles, the moment along the normal or in the plane.
struct AngularCase {
  SourceKind source = SourceKind::charge;
  Vec3 j_hat{1.0, 0.0, 0.0};
  Vec3 moment{};  // dipole moment (ignored for charges)
  KernelTerm term = KernelTerm::vacuum;
};

/// Unsigned angular integral of the polarization structure against the image
/// phase, as a function of beta = 2 k z0:
///   charge: int dOmega (1 - (n.j)^2) cos(beta u)
///   dipole: int dOmega (n.j)^2 (d^2 - (n.d)^2) cos(beta u)
/// (the vacuum term is the beta = 0 value). `boundary_sign()` is the sign with
/// which the boundary term enters W: -j.j' for charges, (j.j')(d.d_im)/d^2 for
/// dipoles, where j' is the mirror image of j and d_im the image dipole.
class AngularReduction {
 public:
  /// Throws UnsupportedCase for oblique axes.
  explicit AngularReduction(const AngularCase& c);

  double operator()(double beta) const;
  /// value(0) - value(beta), accurate as beta -> 0.
  double deficit(double beta) const;
  double vacuum_value() const { return (*this)(0.0); }
  double boundary_sign() const { return sign_; }
  /// Angular weight of W_vac + W_boundary: value(0) + sign * value(beta).
  double total_weight(double beta) const;

  const AngularCase& which() const { return case_; }

 private:
  double evaluate(double beta, bool deficit) const;
  AngularCase case_;
  double sign_ = 1.0;
};

/// Free-function form: AngularReduction(c)(beta).
double angular_reduction(const AngularCase& c, double beta);

// ---------------------------------------------------------------------------
// Covariant contraction used by the first-principles oracle
// ---------------------------------------------------------------------------

/// Contravariant momentum-space 4-current (rho, J_x, J_y, J_z).
struct FourCurrent {
  std::array<cplx, 4> j{};
};

/// Covariant antisymmetric dipole tensor amplitude P_{mu nu}:
/// P_{0i} = p_i / 2 and P_{ij} = eps_{ijk} m_k / 2, times a source phase.
struct DipoleTensor {
  std::array<std::array<cplx, 4>, 4> lower{};

  static DipoleTensor from_moments(Vec3 p, Vec3 m, cplx phase);
};

/// Conserved current generated by L = P_{mu nu} F^{mu nu}: each field-strength
/// derivative becomes -i kappa with kappa = (k, k_vec) on shell.
FourCurrent effective_current(const DipoleTensor& P, const KPoint& kp);

/// kappa_mu j^mu residual (omega rho + k.J); zero for conserved sources.
cplx conservation_residual(const FourCurrent& a, const KPoint& kp);

/// Bilinear contraction of two momentum-space sources with the metric part of
/// the Hadamard kernel: -eta_{mu nu} for the vacuum term and
/// (eta_{mu nu} + 2 n_mu n_nu) for the image term, with eta = diag(1,-1,-1,-1)
/// and n the plate normal. Returns sum_{mu nu} G_{mu nu} a^mu conj(b^nu).
/// For the image term `b` must be the amplitude at the reflected wavevector.
cplx field_strength_contraction(const FourCurrent& a, const FourCurrent& b, KernelTerm term);

/// Dipole form: builds both effective currents (b at the reflected wavevector
/// for the image term) and contracts them.
cplx field_strength_contraction(const KPoint& kp, const DipoleTensor& a, const DipoleTensor& b,
                                KernelTerm term);

}  // namespace vacdec
