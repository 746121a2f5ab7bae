#ifndef CHESHIRE_CORE_SIM_HPP
#define CHESHIRE_CORE_SIM_HPP

// Stroboscopic simulator for two coupled cavities separated by a partition
// with mixing angle eps = pi/2N, closed on the right by a polarising mirror
// that transmits H and reflects V.
//
// At t_n = nT the field lives on three kinds of mode:
//   L        wave-packet at the left wall,
//   R        wave-packet just reflected at the right wall,
//   Leak(k)  wave-packet transmitted through the right wall k cycles ago.
// Leak modes never re-enter the cavities, so they are stored as an explicit
// orthogonal ladder and the evolution stays exactly unitary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cheshire/errors.hpp"
#include "cheshire/polarisation.hpp"

namespace cheshire {

enum class ModeKind { L, R, Leak };
enum class Pol { H, V };

struct ModeIndex {
  ModeKind kind = ModeKind::L;
  std::size_t k = 0;  // only meaningful for Leak

  static constexpr ModeIndex L() { return {ModeKind::L, 0}; }
  static constexpr ModeIndex R() { return {ModeKind::R, 0}; }
  static constexpr ModeIndex Leak(std::size_t k) { return {ModeKind::Leak, k}; }

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// One apparatus configuration. eps is always derived from N.
class ProtocolParams {
 public:
  explicit ProtocolParams(int half_cycles, bool mirror_present = true)
      : n_(half_cycles), mirror_(mirror_present) {
    if (half_cycles < 1) {
      throw std::invalid_argument("N must be a positive integer, got " +
                                  std::to_string(half_cycles));
    }
  }

  int N() const noexcept { return n_; }
  bool mirror_present() const noexcept { return mirror_; }
  double epsilon() const noexcept { return std::numbers::pi / (2.0 * n_); }
  /// Full protocol length, 2N cycles.
  std::size_t default_steps() const noexcept {
    return 2 * static_cast<std::size_t>(n_);
  }

 private:
  int n_;
  bool mirror_;
};

class SystemState {
 public:
  SystemState() = default;

  /// Arbitrary in-cavity state at step 0 (no leak modes yet).
  static SystemState from_cavities(Polarisation left, Polarisation right) {
    SystemState s;
    s.left_ = left;
    s.right_ = right;
    return s;
  }

  std::size_t steps() const noexcept { return steps_; }
  std::size_t leak_count() const noexcept { return leaks_.size(); }

  Polarisation at(ModeIndex m) const {
    switch (m.kind) {
      case ModeKind::L:
        return left_;
      case ModeKind::R:
        return right_;
      case ModeKind::Leak:
        if (m.k >= leaks_.size()) return {};
        return leaks_[leaks_.size() - 1 - m.k];
    }
    return {};
  }

  cplx amplitude(ModeIndex m, Pol p) const {
    const Polarisation pol = at(m);
    return p == Pol::H ? pol.h : pol.v;
  }

  const Polarisation& left() const noexcept { return left_; }
  const Polarisation& right() const noexcept { return right_; }

  double in_cavity_norm() const { return left_.norm() + right_.norm(); }

  double leak_norm() const {
    double total = 0.0;
    for (const auto& p : leaks_) total += p.norm();
    return total;
  }

  double norm() const { return in_cavity_norm() + leak_norm(); }

  /// <this|other> summed over every mode.
  cplx inner(const SystemState& other) const {
    cplx total = left_.inner(other.left_) + right_.inner(other.right_);
    const std::size_t common = std::min(leak_count(), other.leak_count());
    for (std::size_t k = 0; k < common; ++k) {
      total += at(ModeIndex::Leak(k)).inner(other.at(ModeIndex::Leak(k)));
    }
    return total;
  }

  /// Keep only the amplitude on one mode kind (all leaks for Leak).
  SystemState projected(ModeKind kind) const {
    SystemState s = *this;
    if (kind != ModeKind::L) s.left_ = {};
    if (kind != ModeKind::R) s.right_ = {};
    if (kind != ModeKind::Leak) {
      for (auto& p : s.leaks_) p = {};
    }
    return s;
  }

  /// Apply a polarisation operator on every mode.
  SystemState with_polarisation_op(const PolarisationOperator& op) const {
    SystemState s = *this;
    s.left_ = op.apply(left_);
    s.right_ = op.apply(right_);
    for (auto& p : s.leaks_) p = op.apply(p);
    return s;
  }

  /// alpha*x + beta*y; the leak ladders are aligned on k and zero-padded.
  static SystemState combine(cplx alpha, const SystemState& x, cplx beta,
                             const SystemState& y) {
    SystemState s;
    s.steps_ = std::max(x.steps_, y.steps_);
    s.left_ = alpha * x.left_ + beta * y.left_;
    s.right_ = alpha * x.right_ + beta * y.right_;
    const std::size_t n = std::max(x.leak_count(), y.leak_count());
    s.leaks_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      s.leaks_[n - 1 - k] = alpha * x.at(ModeIndex::Leak(k)) +
                            beta * y.at(ModeIndex::Leak(k));
    }
    return s;
  }

  /// One cycle in place. The partition mixes L and R as a real rotation by
  /// eps with the -1 on the R -> L branch. The right wall then reflects the V
  /// part of the outgoing packet back into R (mirror present) and transmits
  /// everything else into Leak(0).
  void advance(const ProtocolParams& params) {
    const double c = std::cos(params.epsilon());
    const double s = std::sin(params.epsilon());

    const Polarisation to_left{c * left_.h - s * right_.h,
                               c * left_.v - s * right_.v};
    const Polarisation to_wall{s * left_.h + c * right_.h,
                               s * left_.v + c * right_.v};
    left_ = to_left;
    if (params.mirror_present()) {
      right_ = {0.0, to_wall.v};
      leaks_.push_back({to_wall.h, 0.0});
    } else {
      right_ = {};
      leaks_.push_back(to_wall);
    }
    ++steps_;
  }

  friend SystemState make_initial(const Polarisation& pol);

 private:
  Polarisation left_{};
  Polarisation right_{};
  // Reversed ladder: back() is Leak(0), front() the oldest leak. Shifting
  // every Leak(k) to Leak(k+1) is then a single push_back.
  std::vector<Polarisation> leaks_;
  std::size_t steps_ = 0;
};

/// |L> (x) pol. Throws NormalizationError unless |c_H|^2 + |c_V|^2 = 1.
inline SystemState make_initial(const Polarisation& pol) {
  const double n = pol.norm();
  if (std::abs(n - 1.0) > 1e-12) {
    throw NormalizationError("input polarisation has norm " + std::to_string(n) +
                             ", expected 1");
  }
  SystemState s;
  s.left_ = pol;
  return s;
}

/// One cycle of the protocol. See SystemState::advance.
inline SystemState step(const SystemState& state, const ProtocolParams& params) {
  SystemState next = state;
  next.advance(params);
  return next;
}

inline SystemState evolve(SystemState state, const ProtocolParams& params,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) state.advance(params);
  return state;
}

/// cos^{2N}(pi/2N): what is left on (L, H) after the full protocol.
inline double survival_amplitude_closed_form(int half_cycles) {
  if (half_cycles < 1) throw std::invalid_argument("N must be >= 1");
  const double eps = std::numbers::pi / (2.0 * half_cycles);
  return std::pow(std::cos(eps), 2 * half_cycles);
}

inline double leak_probability(const SystemState& state) {
  return state.leak_norm();
}

/// Operator on the L-mode polarisation after n cycles, i.e. the map
/// pol -> <L| U^n |L, pol>. Columns are the images of H and V.
inline PolarisationOperator left_transfer(const ProtocolParams& params,
                                          std::size_t n) {
  const SystemState h = evolve(make_initial(Polarisation::H()), params, n);
  const SystemState v = evolve(make_initial(Polarisation::V()), params, n);
  return {{h.left().h, v.left().h, h.left().v, v.left().v}};
}

}  // namespace cheshire

#endif  // CHESHIRE_CORE_SIM_HPP
