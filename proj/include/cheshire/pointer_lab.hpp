#ifndef CHESHIRE_POINTER_LAB_HPP
#define CHESHIRE_POINTER_LAB_HPP

// Weak measurement of sigma_x with a transverse Gaussian pointer.
//
// A birefringent plate displaces the D component of the beam by +a/2 and the
// A component by -a/2. The beam then runs through the cavity protocol and is
// post-selected on cos(b) D + sin(b) A. Everything is evaluated on a 1-D
// y-grid at x = 0; the x envelope factors out of every integral.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cheshire/core_sim.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/polarisation.hpp"

namespace cheshire {

struct GaussianPointer {
  double w0 = 1.0;                      // beam waist
  double a = 0.01;                      // birefringent separation
  double alpha = std::numbers::pi / 4;  // pre-selection cos(alpha) D + sin(alpha) A
  double beta = 0.0;                    // post-selection cos(beta) D + sin(beta) A

  void validate() const {
    if (!(w0 > 0.0)) throw std::invalid_argument("w0 must be > 0");
    if (!(a >= 0.0)) throw std::invalid_argument("a must be >= 0");
    constexpr double half_pi = std::numbers::pi / 2;
    if (!(alpha >= 0.0 && alpha <= half_pi)) {
      throw std::invalid_argument("alpha must lie in [0, pi/2]");
    }
    if (!(beta >= 0.0 && beta <= half_pi)) {
      throw std::invalid_argument("beta must lie in [0, pi/2]");
    }
  }

  /// Pre-selection weights on D and A. Both are cosines so that alpha = pi/4
  /// gives bit-identical weights; the endpoints are exact zeros.
  double weight_d() const {
    return alpha == std::numbers::pi / 2 ? 0.0 : std::cos(alpha);
  }
  double weight_a() const {
    return alpha == 0.0 ? 0.0 : std::cos(std::numbers::pi / 2 - alpha);
  }

  /// a >= w0 is accepted but is no longer a weak coupling.
  bool weak_coupling() const { return a < w0; }

  /// Unnormalised envelope of the component displaced by `shift`.
  double envelope(double y, double shift) const {
    const double u = (y - shift) / w0;
    return std::exp(-u * u);
  }
};

/// Uniform sampling of [-half_extent, half_extent].
struct Grid {
  double half_extent = 0.0;
  std::size_t samples = 4096;

  static Grid default_for(const GaussianPointer& gp) {
    return {6.0 * gp.w0 + gp.a, 4096};
  }

  double spacing() const {
    return 2.0 * half_extent / static_cast<double>(samples - 1);
  }
  double y(std::size_t i) const {
    return -half_extent + spacing() * static_cast<double>(i);
  }
};

/// Trapezoidal rule over the grid.
inline double integrate(const Grid& grid, const std::vector<double>& f) {
  if (f.size() < 2) return 0.0;
  double total = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) total += f[i];
  return total * grid.spacing();
}

/// Polarisation-resolved transverse field, stored in the (D, A) basis.
struct TransverseField {
  Grid grid;
  std::vector<cplx> d;
  std::vector<cplx> a;

  std::vector<double> intensity() const {
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      out[i] = std::norm(d[i]) + std::norm(a[i]);
    }
    return out;
  }

  double power() const { return integrate(grid, intensity()); }

  Polarisation polarisation_at(std::size_t i) const {
    return Polarisation::from_diagonal(d[i], a[i]);
  }

  void set_polarisation_at(std::size_t i, const Polarisation& p) {
    d[i] = p.d();
    a[i] = p.a();
  }

  /// Apply a polarisation operator pointwise.
  TransverseField transformed(const PolarisationOperator& op) const {
    TransverseField out = *this;
    for (std::size_t i = 0; i < d.size(); ++i) {
      out.set_polarisation_at(i, op.apply(polarisation_at(i)));
    }
    return out;
  }
};

/// Scalar amplitude profile after projecting onto one polarisation.
struct Profile {
  Grid grid;
  std::vector<cplx> amplitude;

  std::vector<double> intensity() const {
    std::vector<double> out(amplitude.size());
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
      out[i] = std::norm(amplitude[i]);
    }
    return out;
  }

  double power() const { return integrate(grid, intensity()); }

  double first_moment() const {
    std::vector<double> f = intensity();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= grid.y(i);
    return integrate(grid, f);
  }
};

/// Power floor below which a profile counts as identically zero.
inline constexpr double kZeroPowerFloor = 1e-24;

/// Intensity-weighted mean position, int y I dy / int I dy.
inline double centroid(const Profile& profile) {
  const double p = profile.power();
  if (!(p > kZeroPowerFloor)) {
    throw UndefinedProfile("centroid undefined: profile has zero intensity");
  }
  return profile.first_moment() / p;
}

/// int y I dy in units where `reference_power` is one. With the unperturbed
/// D-port power as reference this is the pointer position as read against
/// the no-protocol beam.
inline double displacement(const Profile& profile, double reference_power) {
  if (!(reference_power > kZeroPowerFloor)) {
    throw UndefinedProfile("reference power is zero");
  }
  return profile.first_moment() / reference_power;
}

inline TransverseField prepare_pointer(const GaussianPointer& gp,
                                       std::optional<Grid> grid = std::nullopt) {
  gp.validate();
  const Grid g = grid.value_or(Grid::default_for(gp));
  const double required = 6.0 * gp.w0 + gp.a;
  if (g.samples < 2 || g.half_extent < required * (1.0 - 1e-12)) {
    throw std::invalid_argument(
        "grid must cover at least +/-(6 w0 + a) = +/-" + std::to_string(required));
  }
  TransverseField f;
  f.grid = g;
  f.d.resize(g.samples);
  f.a.resize(g.samples);
  for (std::size_t i = 0; i < g.samples; ++i) {
    const double y = g.y(i);
    f.d[i] = gp.weight_d() * gp.envelope(y, +gp.a / 2);
    f.a[i] = gp.weight_a() * gp.envelope(y, -gp.a / 2);
  }
  const double scale = 1.0 / std::sqrt(f.power());
  for (std::size_t i = 0; i < g.samples; ++i) {
    f.d[i] *= scale;
    f.a[i] *= scale;
  }
  return f;
}

/// Project onto cos(b) D + sin(b) A.
inline Profile postselect(const TransverseField& field, double beta) {
  Profile p;
  p.grid = field.grid;
  p.amplitude.resize(field.d.size());
  for (std::size_t i = 0; i < field.d.size(); ++i) {
    p.amplitude[i] = std::cos(beta) * field.d[i] + std::sin(beta) * field.a[i];
  }
  return p;
}

/// L-mode output of the full 2N-cycle protocol, applied pointwise. The
/// attenuation cos^{2N}(pi/2N) on H is kept exact.
inline TransverseField evolve_field(const TransverseField& field, int half_cycles,
                                    bool mirror_present) {
  const ProtocolParams params(half_cycles, mirror_present);
  return field.transformed(left_transfer(params, params.default_steps()));
}

/// Post-selected output profile (not renormalised). Throws UndefinedProfile if
/// it is identically zero.
inline Profile evolve_postselect(const TransverseField& field, int half_cycles,
                                 bool mirror_present, double beta) {
  Profile p = postselect(evolve_field(field, half_cycles, mirror_present), beta);
  if (!(p.power() > kZeroPowerFloor)) {
    throw UndefinedProfile("post-selected profile is identically zero");
  }
  return p;
}

/// Beam sent straight to the D port, skipping the protocol.
inline Profile unperturbed_profile(const TransverseField& field) {
  return postselect(field, 0.0);
}

struct PointerReadout {
  double centroid_before = 0.0;  // <y_w>, centroid at the D port, no protocol
  double centroid_after = 0.0;   // centroid of the post-selected profile
  double displacement_after = 0.0;  // first moment, D-port power = 1
  double postselection_power = 0.0;
  double weak_value = 0.0;       // centroid_after / centroid_before
  bool weak_coupling = true;
};

inline PointerReadout pointer_readout(const GaussianPointer& gp, int half_cycles,
                                      bool mirror_present,
                                      std::optional<Grid> grid = std::nullopt) {
  const TransverseField field = prepare_pointer(gp, grid);
  const Profile before = unperturbed_profile(field);
  const Profile after = evolve_postselect(field, half_cycles, mirror_present, gp.beta);
  PointerReadout r;
  r.centroid_before = centroid(before);
  r.centroid_after = centroid(after);
  r.displacement_after = displacement(after, before.power());
  r.postselection_power = after.power();
  r.weak_coupling = gp.weak_coupling();
  if (gp.a > 0.0) r.weak_value = r.centroid_after / r.centroid_before;
  return r;
}

/// sigma_x weak value read off the pointer: centroid after the protocol over
/// centroid without it.
inline double weak_value_from_centroids(const GaussianPointer& gp, int half_cycles,
                                        bool mirror_present,
                                        std::optional<Grid> grid = std::nullopt) {
  if (!(gp.a > 0.0)) {
    throw std::invalid_argument("weak value from centroids needs a > 0");
  }
  return pointer_readout(gp, half_cycles, mirror_present, grid).weak_value;
}

// ---------------------------------------------------------------------------
// Weak value of the right-cavity projector at cycle n, for the pointer-
// entangled input and post-selection <L, D|.

namespace detail {

inline void check_cycle(int n, int half_cycles) {
  if (half_cycles < 1) throw std::invalid_argument("N must be >= 1");
  if (n < 0 || n > 2 * half_cycles) {
    throw std::invalid_argument("n must lie in [0, 2N]");
  }
}

/// sin((2N - n) pi / 2N) sin(n pi / 2N)
inline double right_visit_factor(int n, int half_cycles) {
  const double eps = std::numbers::pi / (2.0 * half_cycles);
  return std::sin((2 * half_cycles - n) * eps) * std::sin(n * eps);
}

}  // namespace detail

/// Large-N closed form. For alpha = pi/4 this is
/// sin((2N-n)pi/2N) sin(n pi/2N) (1 - exp(2 a y / w0^2)) / 2.
inline double projector_R_weak_profile(int n, int half_cycles, double y,
                                       const GaussianPointer& gp) {
  gp.validate();
  detail::check_cycle(n, half_cycles);
  if (gp.weight_a() == 0.0) {
    throw UndefinedWeakValue(0.0, 0.0);
  }
  const double ratio = gp.envelope(y, gp.a / 2) / gp.envelope(y, -gp.a / 2);
  const double tilt = gp.weight_d() / gp.weight_a();
  return detail::right_visit_factor(n, half_cycles) * (1.0 - tilt * ratio) / 2.0;
}

/// Same quantity with the cos^{2N}(pi/2N) attenuation of the H part kept in
/// the denominator.
inline double projector_R_weak_exact(int n, int half_cycles, double y,
                                     const GaussianPointer& gp) {
  gp.validate();
  detail::check_cycle(n, half_cycles);
  const double c = survival_amplitude_closed_form(half_cycles);
  const double gd = gp.weight_d() * gp.envelope(y, gp.a / 2);
  const double ga = gp.weight_a() * gp.envelope(y, -gp.a / 2);
  const double num = detail::right_visit_factor(n, half_cycles) * (ga - gd) / 2.0;
  const double den = (gd * (c - 1.0) + ga * (c + 1.0)) / 2.0;
  if (den == 0.0) throw UndefinedWeakValue(num, den);
  return num / den;
}

/// Direct evaluation with the simulator:
///   <L, D| U^{2N-n} P_R U^n |E_w(y), L>  /  <L, D| U^{2N} |E_w(y), L>
inline cplx projector_R_weak_direct(int n, int half_cycles, double y,
                                    const GaussianPointer& gp,
                                    double overlap_floor = 1e-300) {
  gp.validate();
  detail::check_cycle(n, half_cycles);
  const ProtocolParams params(half_cycles, true);
  const std::size_t total = params.default_steps();
  const Polarisation pointer = Polarisation::from_diagonal(
      gp.weight_d() * gp.envelope(y, gp.a / 2),
      gp.weight_a() * gp.envelope(y, -gp.a / 2));
  const SystemState start = SystemState::from_cavities(pointer, {});
  const SystemState post = SystemState::from_cavities(Polarisation::D(), {});

  const auto steps_n = static_cast<std::size_t>(n);
  const SystemState visited =
      evolve(evolve(start, params, steps_n).projected(ModeKind::R), params,
             total - steps_n);
  const cplx num = post.inner(visited);
  const cplx den = post.inner(evolve(start, params, total));
  if (std::abs(den) <= overlap_floor) throw UndefinedWeakValue(num, den);
  return num / den;
}

// ---------------------------------------------------------------------------
// H polariser between the plate and the protocol.

struct HPolariserResult {
  Profile profile;  // post-selected on D
  double centroid = 0.0;
};

inline HPolariserResult h_polariser_variant(const GaussianPointer& gp,
                                            int half_cycles, bool mirror_present,
                                            std::optional<Grid> grid = std::nullopt) {
  const TransverseField field = prepare_pointer(gp, grid).transformed(
      PolarisationOperator::projector(Polarisation::H()));
  HPolariserResult r;
  r.profile = evolve_postselect(field, half_cycles, mirror_present, 0.0);
  r.centroid = centroid(r.profile);
  return r;
}

}  // namespace cheshire

#endif  // CHESHIRE_POINTER_LAB_HPP
