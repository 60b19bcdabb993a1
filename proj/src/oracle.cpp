#include "vacdec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "vacdec/decoherence.hpp"
#include "vacdec/error.hpp"

namespace vacdec {

namespace {

using std::numbers::pi;

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Running mean and squared deviation; merged with Chan's pairwise update.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }

  static Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Moments out;
    out.n = a.n + b.n;
    const double d = b.mean - a.mean;
    out.mean = a.mean + d * (b.n / out.n);
    out.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / out.n);
    return out;
  }

  double std_error() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

struct BlockStats {
  Moments vacuum;
  Moments boundary;
  Moments total;

  static BlockStats merge(const BlockStats& a, const BlockStats& b) {
    return {Moments::merge(a.vacuum, b.vacuum), Moments::merge(a.boundary, b.boundary),
            Moments::merge(a.total, b.total)};
  }
};

// Pairwise reduction over [lo, hi) in index order.
BlockStats reduce(const std::vector<BlockStats>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return BlockStats::merge(reduce(blocks, lo, mid), reduce(blocks, mid, hi));
}

struct RadialProposal {
  bool uniform = false;
  double a = 1.0;      // k^3 exp(-a k^2)
  double k_max = 0.0;  // uniform support, or hard cutoff for the Gamma proposal

  double sample(double u1, double u2) const {
    if (uniform) return u1 * k_max;
    // k^2 ~ Gamma(2, 1/a)
    return std::sqrt(-(std::log(u1) + std::log(u2)) / a);
  }
  double pdf(double k) const {
    if (uniform) return 1.0 / k_max;
    return 2.0 * a * a * k * k * k * std::exp(-a * k * k);
  }
};

RadialProposal proposal_for(const Scenario& s) {
  RadialProposal p;
  if (has_power_law_spectrum(s.trajectory)) {
    if (!s.numerics.k_max) {
      throw Error(ErrorKind::CutoffRequired,
                  "Monte Carlo over a kinked trajectory needs numerics.k_max");
    }
    p.uniform = true;
    p.k_max = *s.numerics.k_max;
    return p;
  }
  if (const auto* t = std::get_if<PulseTrain>(&s.trajectory.profile)) {
    const double T = t->pulse_width;
    const double w = t->carrier * T / 2.0;
    p.a = T * T / (4.0 * (1.0 + w * w));
  } else {
    const double T = time_scale(s.trajectory);
    p.a = T * T / 4.0;
  }
  p.k_max = s.numerics.k_max.value_or(std::numeric_limits<double>::infinity());
  return p;
}

// Real part of the kernel contraction for one pair of sources.
double contract(const KPoint& kp, const MomentumSource& a, const MomentumSource& b,
                KernelTerm term) {
  if (const auto* ja = std::get_if<FourCurrent>(&a.amplitude)) {
    return std::real(field_strength_contraction(*ja, std::get<FourCurrent>(b.amplitude), term));
  }
  return std::real(field_strength_contraction(kp, std::get<DipoleTensor>(a.amplitude),
                                              std::get<DipoleTensor>(b.amplitude), term));
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<double, 4> Philox4x32::uniforms(std::uint64_t index, std::uint32_t stream) const {
  const Counter bits = (*this)({static_cast<std::uint32_t>(index),
                                static_cast<std::uint32_t>(index >> 32), stream, 0u});
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = (bits[i] + 0.5) * 0x1p-32;
  return out;
}

namespace {

struct BranchTransforms {
  double q = 0.0;
  PhaseTransform plus, minus;  // at +q and -q
};

BranchTransforms branch_transforms(const Scenario& s, const KPoint& kp, const SpectrumOptions& opts) {
  const double q = dot(kp.vector(), s.geometry.j_hat);
  return {q, phase_transform(s.trajectory, kp.k, q, opts), phase_transform(s.trajectory, kp.k, -q, opts)};
}

MomentumSource assemble_source(const Scenario& s, const KPoint& kp, const BranchTransforms& t) {
  const cplx phase = std::polar(1.0, kp.vector().z * s.geometry.z0);
  const cplx branch_difference = phase * (t.plus.displacement - t.minus.displacement);
  if (const auto* c = std::get_if<ChargeCoupling>(&s.coupling)) {
    const double e = std::sqrt(c->e2);
    const cplx current = e * phase * (t.plus.current + t.minus.current);
    const Vec3 j = s.geometry.j_hat;
    FourCurrent fc;
    fc.j = {e * branch_difference, current * j.x, current * j.y, current * j.z};
    return {fc};
  }
  const auto& d = std::get<DipoleCoupling>(s.coupling);
  return {DipoleTensor::from_moments(d.p, d.m, branch_difference)};
}

// Transforms at the mirrored wavevector. Both share |k|, and when k_j only
// changes sign the pair is reused with its halves exchanged.
BranchTransforms mirrored_transforms(const Scenario& s, const KPoint& mirrored, const BranchTransforms& t) {
  const double q = dot(mirrored.vector(), s.geometry.j_hat);
  if (q == t.q) return t;
  if (q == -t.q) return {q, t.minus, t.plus};
  return branch_transforms(s, mirrored, {});
}

}  // namespace

MomentumSource momentum_source(const Scenario& s, const KPoint& kp, const SpectrumOptions& opts) {
  return assemble_source(s, kp, branch_transforms(s, kp, opts));
}

double conservation_residual(const Scenario& s, const KPoint& kp) {
  const MomentumSource src = momentum_source(s, kp);
  const auto* fc = std::get_if<FourCurrent>(&src.amplitude);
  if (!fc) return 0.0;
  double scale = 0.0;
  for (const cplx& x : fc->j) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  return std::abs(conservation_residual(*fc, kp)) / (kp.k * scale);
}

McEstimate mc_w_first_principles(const Scenario& s, const McConfig& cfg) {
  if (cfg.samples < 2) throw Error(ErrorKind::InvalidValue, "Monte Carlo needs at least 2 samples");
  const RadialProposal proposal = proposal_for(s);
  const Philox4x32 rng(cfg.seed);
  const bool image = s.geometry.plate;

  const std::uint64_t n_blocks = (cfg.samples + kMcBlockSize - 1) / kMcBlockSize;
  std::vector<BlockStats> blocks(n_blocks);

  parallel_for(n_blocks, cfg.workers, [&](std::size_t b) {
    BlockStats st;
    const std::uint64_t first = b * kMcBlockSize;
    const std::uint64_t last = std::min<std::uint64_t>(cfg.samples, first + kMcBlockSize);
    for (std::uint64_t i = first; i < last; ++i) {
      const auto u = rng.uniforms(i);
      const double k = proposal.sample(u[0], u[1]);
      double vac = 0.0;
      double bnd = 0.0;
      if (k > 0.0 && k <= proposal.k_max) {
        const KPoint kp{k, 2.0 * u[2] - 1.0, 2.0 * pi * u[3]};
        const double weight =
            0.5 * vacuum_kernel_weight(kp) * 4.0 * pi * k * k / proposal.pdf(k);
        const BranchTransforms t = branch_transforms(s, kp, {});
        const MomentumSource a = assemble_source(s, kp, t);
        vac = weight * contract(kp, a, a, KernelTerm::vacuum);
        if (image) {
          const KPoint m = kp.reflected();
          const MomentumSource r = assemble_source(s, m, mirrored_transforms(s, m, t));
          bnd = weight * contract(kp, a, r, KernelTerm::boundary);
        }
      }
      st.vacuum.add(vac);
      st.boundary.add(bnd);
      st.total.add(vac + bnd);
    }
    blocks[b] = st;
  });

  const BlockStats all = reduce(blocks, 0, blocks.size());
  McEstimate out;
  out.samples_used = cfg.samples;
  out.value = all.total.mean;
  out.std_error = all.total.std_error();
  out.vacuum = {all.vacuum.mean, all.vacuum.std_error()};
  out.boundary = {all.boundary.mean, all.boundary.std_error()};

  if (n_blocks >= 4) {
    const BlockStats quarter = reduce(blocks, 0, n_blocks / 4);
    const double early = quarter.total.std_error();
    if (early > 0.0 && out.std_error / early > 0.8) {
      throw Error(ErrorKind::McVarianceBlowup,
                  "Monte Carlo error did not shrink with samples (ratio " +
                      std::to_string(out.std_error / early) + ")");
    }
  }
  return out;
}

double analytic_limits(std::string_view name, const LimitParams& p) {
  if (name == "adiabatic") return 2.0 * p.e2 * p.v * p.v / (3.0 * pi);
  if (name == "log-slope") return 2.0 * p.e2 * p.v * p.v / (pi * pi);
  if (name == "contact-ratio-parallel") return 0.0;
  if (name == "contact-ratio-perpendicular") return 2.0;
  if (name == "dipole-charge-ratio") return 4.0 * (2.0 - p.projection * p.projection) / 5.0;
  if (name == "small-z0-coefficient") {
    return 32.0 * p.e2 * p.R * p.R / (15.0 * pi * std::pow(p.T, 4));
  }
  if (name == "large-z0-exponent") return -4.0;
  if (name == "large-z0-amplitude") return p.e2 * pi * p.R * p.R * p.T * p.T / (8.0 * pi * pi);
  if (name == "trapezoid-vacuum") {
    if (!(p.tau > 0.0 && p.tau < 0.25 * p.T)) {
      throw Error(ErrorKind::InvalidValue, "trapezoid-vacuum needs 0 < tau < T/4");
    }
    const double a = p.v / p.tau;
    const double t[6] = {0.0, p.tau, 0.5 * p.T - p.tau, 0.5 * p.T + p.tau, p.T - p.tau, p.T};
    const double jump[6] = {a, -a, -a, a, a, -a};
    double sum = 0.0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (i == j) continue;
        const double d = std::abs(t[i] - t[j]);
        sum += jump[i] * jump[j] * d * d * std::log(d);
      }
    }
    return p.e2 * sum / (6.0 * pi * pi);
  }
  throw Error(ErrorKind::UnknownCase, "unknown analytic case '" + std::string(name) + "'");
}

PowerFit fit_power_law(std::span<const PowerSample> samples, const PowerFitOptions& opts) {
  std::vector<PowerSample> pts(samples.begin(), samples.end());
  if (pts.size() < 6) {
    throw Error(ErrorKind::InsufficientSpan, "power-law fit needs at least 6 points");
  }
  std::sort(pts.begin(), pts.end(),
            [](const PowerSample& l, const PowerSample& r) { return l.z0 < r.z0; });
  if (!(pts.front().z0 > 0.0) || pts.front().z0 < opts.min_z0) {
    throw Error(ErrorKind::InsufficientSpan, "power-law fit points lie outside the asymptotic regime");
  }
  if (std::log10(pts.back().z0 / pts.front().z0) < 1.5) {
    throw Error(ErrorKind::InsufficientSpan, "power-law fit needs 1.5 decades in z0");
  }

  bool monotone = true;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    monotone = monotone && std::abs(pts[i].w) <= std::abs(pts[i - 1].w);
  }
  if (!monotone) {
    if (!opts.extract_envelope) {
      throw Error(ErrorKind::NonMonotoneEnvelope,
                  "|W| is not monotone in z0; extract the envelope first");
    }
    std::vector<PowerSample> peaks;
    // interior maxima only: an end point need not sit on the envelope
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const double w = std::abs(pts[i].w);
      if (w >= std::abs(pts[i - 1].w) && w > std::abs(pts[i + 1].w)) peaks.push_back(pts[i]);
    }
    if (peaks.size() < 3) {
      throw Error(ErrorKind::InsufficientSpan, "too few envelope peaks for a power-law fit");
    }
    pts = std::move(peaks);
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    if (p.w == 0.0) throw Error(ErrorKind::InvalidValue, "power-law fit of a zero sample");
    const double x = std::log(p.z0);
    const double y = std::log(std::abs(p.w));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  PowerFit fit;
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.amplitude = std::exp(intercept);
  for (const auto& p : pts) {
    const double r = std::log(std::abs(p.w)) - (intercept + fit.exponent * std::log(p.z0));
    fit.residual = std::max(fit.residual, std::abs(r));
  }
  fit.points_used = pts.size();
  return fit;
}

CalibrationCheck dipole_boundary_calibration(const McConfig& cfg) {
  Scenario s;
  s.id = "dipole-calibration";
  s.coupling = DipoleCoupling{{0.0, 0.0, 1.0}, {}};
  s.trajectory.profile = Adiabatic{0.01, 1.0};
  s.geometry.plate = true;
  s.geometry.z0 = 0.0;
  s.geometry.j_hat = {1.0, 0.0, 0.0};
  s.method = Method::dipole_approx;
  s.numerics.rel_tol = 1e-9;
  s.numerics.abs_tol = 1e-30;
  s = make_scenario(s);

  CalibrationCheck out;
  out.printed_boundary = w_dipole_boundary(s).value / kDipoleBoundaryCalibration;
  const McEstimate mc = mc_w_first_principles(s, cfg);
  out.mc_boundary = mc.boundary.value;
  out.mc_std_error = mc.boundary.std_error;
  out.implied_factor = out.mc_boundary / out.printed_boundary;
  out.implied_std_error = out.mc_std_error / std::abs(out.printed_boundary);
  return out;
}

}  // namespace vacdec
