#ifndef CHESHIRE_WEAK_VALUES_HPP
#define CHESHIRE_WEAK_VALUES_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "cheshire/core_sim.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/polarisation.hpp"

namespace cheshire {

inline constexpr double kDefaultOverlapFloor = 1e-14;

/// Polarisation operator, optionally followed by a projector onto one mode
/// kind (e.g. |R><R| (x) 1 for the right-cavity projector).
struct Observable {
  PolarisationOperator pol = PolarisationOperator::identity();
  std::optional<ModeKind> mode;

  static Observable identity() { return {}; }
  static Observable sigma_x() { return {PolarisationOperator::sigma_x(), {}}; }
  static Observable right_projector() {
    return {PolarisationOperator::identity(), ModeKind::R};
  }

  SystemState apply(const SystemState& psi) const {
    SystemState out = psi.with_polarisation_op(pol);
    return mode ? out.projected(*mode) : out;
  }

  bool is_hermitian(double tol = 1e-12) const { return pol.is_hermitian(tol); }
};

/// <psi_f| A |psi_i> / <psi_f|psi_i>. Throws UndefinedWeakValue, carrying both
/// parts, when |<psi_f|psi_i>| is at or below the floor.
inline cplx weak_value(const Observable& obs, const SystemState& psi_i,
                       const SystemState& psi_f,
                       double overlap_floor = kDefaultOverlapFloor) {
  const cplx numerator = psi_f.inner(obs.apply(psi_i));
  const cplx denominator = psi_f.inner(psi_i);
  if (std::abs(denominator) <= overlap_floor) {
    throw UndefinedWeakValue(numerator, denominator);
  }
  return numerator / denominator;
}

/// Post-selection (cos b * cos^{2N}(pi/2N) H - sin b V) (x) L, kept
/// unnormalised. This is the L-mode part of U^{2N} (cos b H + sin b V) L.
struct PostSelection {
  double beta = 0.0;
  int half_cycles = 1;

  Polarisation polarisation() const {
    const double c = survival_amplitude_closed_form(half_cycles);
    return {std::cos(beta) * c, -std::sin(beta)};
  }

  SystemState state() const {
    return SystemState::from_cavities(polarisation(), {});
  }
};

namespace detail {

inline void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= std::numbers::pi / 2)) {
    throw std::invalid_argument("beta must lie in [0, pi/2]");
  }
}

}  // namespace detail

/// Exact finite-N weak value of sigma_x for pre-selection H (x) L and the
/// post-selection above: -sin b / (cos b cos^{2N}(pi/2N)) with the mirror,
/// +tan b without it.
inline double sigma_x_weak_analytic(double beta, int half_cycles,
                                    bool mirror_present) {
  detail::check_beta(beta);
  const double c = survival_amplitude_closed_form(half_cycles);
  const double num = mirror_present ? -std::sin(beta) : std::sin(beta);
  const double den = mirror_present ? std::cos(beta) * c : std::cos(beta);
  if (beta == std::numbers::pi / 2 || std::abs(den) <= kDefaultOverlapFloor) {
    throw UndefinedWeakValue(num, den);
  }
  return num / den;
}

/// The large-N approximation: -tan b (mirror) or +tan b (no mirror).
inline double sigma_x_weak_tan_approx(double beta, bool mirror_present) {
  detail::check_beta(beta);
  if (beta == std::numbers::pi / 2) {
    throw UndefinedWeakValue(mirror_present ? -1.0 : 1.0, 0.0);
  }
  return mirror_present ? -std::tan(beta) : std::tan(beta);
}

/// Same weak value, but with the post-selection obtained by running the
/// simulator: psi_f = <L| U^{2N} (cos b H + sin b V) L.
inline cplx sigma_x_weak_simulated(double beta, int half_cycles,
                                   bool mirror_present,
                                   double overlap_floor = kDefaultOverlapFloor) {
  detail::check_beta(beta);
  const ProtocolParams params(half_cycles, mirror_present);
  const SystemState psi_i = make_initial(Polarisation::H());
  const SystemState psi_f =
      evolve(make_initial(Polarisation::linear(beta)), params,
             params.default_steps())
          .projected(ModeKind::L);
  return weak_value(Observable::sigma_x(), psi_i, psi_f, overlap_floor);
}

}  // namespace cheshire

#endif  // CHESHIRE_WEAK_VALUES_HPP
