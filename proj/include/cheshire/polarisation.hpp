#ifndef CHESHIRE_POLARISATION_HPP
#define CHESHIRE_POLARISATION_HPP

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace cheshire {

using cplx = std::complex<double>;

inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

/// Polarisation amplitudes, always stored in the rectilinear (H, V) basis.
/// The diagonal basis is D = (H + V)/sqrt2, A = (H - V)/sqrt2.
struct Polarisation {
  cplx h{};
  cplx v{};

  static constexpr Polarisation H() { return {1.0, 0.0}; }
  static constexpr Polarisation V() { return {0.0, 1.0}; }
  static Polarisation D() { return {kInvSqrt2, kInvSqrt2}; }
  static Polarisation A() { return {kInvSqrt2, -kInvSqrt2}; }

  /// Build from diagonal-basis amplitudes (c_D, c_A).
  static Polarisation from_diagonal(cplx d, cplx a) {
    return {(d + a) * kInvSqrt2, (d - a) * kInvSqrt2};
  }

  /// Linear polarisation at angle theta from H toward V.
  static Polarisation linear(double theta) {
    return {std::cos(theta), std::sin(theta)};
  }

  cplx d() const { return (h + v) * kInvSqrt2; }
  cplx a() const { return (h - v) * kInvSqrt2; }

  double norm() const { return std::norm(h) + std::norm(v); }

  /// <this|other>
  cplx inner(const Polarisation& other) const {
    return std::conj(h) * other.h + std::conj(v) * other.v;
  }

  friend Polarisation operator*(cplx s, const Polarisation& p) {
    return {s * p.h, s * p.v};
  }
  friend Polarisation operator+(const Polarisation& x, const Polarisation& y) {
    return {x.h + y.h, x.v + y.v};
  }
};

/// The rectilinear/diagonal change of basis. It is its own inverse.
inline std::array<cplx, 2> hadamard(cplx first, cplx second) {
  return {(first + second) * kInvSqrt2, (first - second) * kInvSqrt2};
}

/// 2x2 complex operator on polarisation, row-major in the (H, V) basis.
struct PolarisationOperator {
  std::array<cplx, 4> m{};

  static constexpr PolarisationOperator identity() {
    return {{1.0, 0.0, 0.0, 1.0}};
  }
  /// |D><D| - |A><A|
  static constexpr PolarisationOperator sigma_x() {
    return {{0.0, 1.0, 1.0, 0.0}};
  }
  static constexpr PolarisationOperator sigma_z() {
    return {{1.0, 0.0, 0.0, -1.0}};
  }
  static PolarisationOperator projector(const Polarisation& p) {
    return {{p.h * std::conj(p.h), p.h * std::conj(p.v),
             p.v * std::conj(p.h), p.v * std::conj(p.v)}};
  }

  Polarisation apply(const Polarisation& p) const {
    return {m[0] * p.h + m[1] * p.v, m[2] * p.h + m[3] * p.v};
  }

  bool is_hermitian(double tol = 1e-12) const {
    return std::abs(m[0] - std::conj(m[0])) < tol &&
           std::abs(m[3] - std::conj(m[3])) < tol &&
           std::abs(m[1] - std::conj(m[2])) < tol;
  }
};

}  // namespace cheshire

#endif  // CHESHIRE_POLARISATION_HPP
