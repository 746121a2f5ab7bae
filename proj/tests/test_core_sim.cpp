#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cheshire/core_sim.hpp"
#include "dense_oracle.hpp"

using namespace cheshire;

namespace {

constexpr double kPi = std::numbers::pi;

// cos^20(pi/20), from an mpmath evaluation at 30 digits.
constexpr double kSurvivalN10 = 0.780546069781140169905;

Polarisation random_polarisation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Polarisation p{{g(rng), g(rng)}, {g(rng), g(rng)}};
  const double n = std::sqrt(p.norm());
  return (1.0 / n) * p;
}

}  // namespace

TEST(Polarisation, DiagonalBasisIsAnInvolution) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Polarisation p = random_polarisation(rng);
    const auto [d, a] = hadamard(p.h, p.v);
    const auto [h, v] = hadamard(d, a);
    EXPECT_LT(std::abs(h - p.h), 1e-12);
    EXPECT_LT(std::abs(v - p.v), 1e-12);
    EXPECT_NEAR(std::norm(d) + std::norm(a), p.norm(), 1e-12);
  }
}

TEST(Polarisation, SigmaXIsHermitianAndDiagonalInDA) {
  const auto sx = PolarisationOperator::sigma_x();
  EXPECT_TRUE(sx.is_hermitian());
  const Polarisation d = sx.apply(Polarisation::D());
  const Polarisation a = sx.apply(Polarisation::A());
  EXPECT_LT(std::abs(d.d() - 1.0), 1e-15);
  EXPECT_LT(std::abs(a.a() + 1.0), 1e-15);
}

TEST(MakeInitial, BasisStates) {
  const SystemState h = make_initial(Polarisation::H());
  EXPECT_EQ(h.amplitude(ModeIndex::L(), Pol::H), cplx(1.0));
  EXPECT_EQ(h.amplitude(ModeIndex::L(), Pol::V), cplx(0.0));
  EXPECT_EQ(h.right().norm(), 0.0);
  EXPECT_EQ(h.steps(), 0u);
  EXPECT_EQ(h.leak_count(), 0u);

  const SystemState d = make_initial(Polarisation::D());
  EXPECT_NEAR(d.left().h.real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.left().v.real(), 1.0 / std::sqrt(2.0), 1e-15);

  const SystemState c = make_initial({0.6, {0.0, 0.8}});
  EXPECT_NEAR(c.norm(), 1.0, 1e-15);
  EXPECT_EQ(c.amplitude(ModeIndex::L(), Pol::V), cplx(0.0, 0.8));
}

TEST(MakeInitial, RejectsUnnormalisedInput) {
  EXPECT_THROW(make_initial({1.0, 1.0}), NormalizationError);
  EXPECT_THROW(make_initial({0.0, 0.0}), NormalizationError);
}

TEST(ProtocolParams, EpsilonDerivedFromN) {
  for (int n : {1, 2, 10, 50, 1000}) {
    const ProtocolParams p(n);
    EXPECT_GT(p.epsilon(), 0.0);
    EXPECT_LE(p.epsilon(), kPi / 2);
    EXPECT_NEAR(p.epsilon() * 2 * n, kPi, 1e-15);
    EXPECT_EQ(p.default_steps(), 2u * n);
  }
  EXPECT_THROW(ProtocolParams(0), std::invalid_argument);
  EXPECT_THROW(ProtocolParams(-3), std::invalid_argument);
}

TEST(Step, HOnLeftLeaksThroughTheWall) {
  const ProtocolParams p(10);
  const SystemState s = step(make_initial(Polarisation::H()), p);
  EXPECT_NEAR(s.amplitude(ModeIndex::L(), Pol::H).real(), std::cos(kPi / 20), 1e-15);
  EXPECT_NEAR(s.amplitude(ModeIndex::Leak(0), Pol::H).real(), std::sin(kPi / 20), 1e-15);
  EXPECT_EQ(s.right().norm(), 0.0);
  EXPECT_EQ(s.steps(), 1u);
  EXPECT_EQ(s.leak_count(), 1u);
}

TEST(Step, VOnLeftCrossesIntoRightWithoutPhase) {
  const ProtocolParams p(10);
  const SystemState s = step(make_initial(Polarisation::V()), p);
  EXPECT_NEAR(s.amplitude(ModeIndex::L(), Pol::V).real(), std::cos(kPi / 20), 1e-15);
  EXPECT_NEAR(s.amplitude(ModeIndex::R(), Pol::V).real(), std::sin(kPi / 20), 1e-15);
  EXPECT_EQ(s.leak_norm(), 0.0);
}

TEST(Step, VOnRightPicksUpMinusSignOnReturn) {
  const ProtocolParams p(7);
  const double eps = p.epsilon();
  const SystemState s = step(SystemState::from_cavities({}, Polarisation::V()), p);
  EXPECT_NEAR(s.amplitude(ModeIndex::R(), Pol::V).real(), std::cos(eps), 1e-15);
  EXPECT_NEAR(s.amplitude(ModeIndex::L(), Pol::V).real(), -std::sin(eps), 1e-15);
}

TEST(Step, LeakLadderShifts) {
  const ProtocolParams p(5);
  SystemState s = make_initial(Polarisation::H());
  for (int n = 1; n <= 6; ++n) {
    s = step(s, p);
    EXPECT_EQ(s.leak_count(), static_cast<std::size_t>(n));
  }
  // Leak(k) after n steps holds sin(eps) cos^{n-1-k}(eps).
  const double eps = p.epsilon();
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(s.amplitude(ModeIndex::Leak(k), Pol::H).real(),
                std::sin(eps) * std::pow(std::cos(eps), 5 - static_cast<int>(k)), 1e-15);
  }
  EXPECT_EQ(s.at(ModeIndex::Leak(99)).norm(), 0.0);
}

TEST(Step, MirrorAbsentVBehavesLikeH) {
  const ProtocolParams p(10, false);
  const SystemState s = step(make_initial(Polarisation::V()), p);
  EXPECT_NEAR(s.amplitude(ModeIndex::L(), Pol::V).real(), std::cos(kPi / 20), 1e-15);
  EXPECT_NEAR(s.amplitude(ModeIndex::Leak(0), Pol::V).real(), std::sin(kPi / 20), 1e-15);
  EXPECT_EQ(s.right().norm(), 0.0);
}

TEST(Step, DegenerateNOneTransmitsEverything) {
  const ProtocolParams p(1);
  const SystemState s = step(make_initial(Polarisation::H()), p);
  EXPECT_LT(std::abs(s.left().h), 1e-15);
  EXPECT_NEAR(leak_probability(s), 1.0, 1e-15);
}

TEST(Evolve, HSurvivalAfterTwoN) {
  const SystemState s = evolve(make_initial(Polarisation::H()), ProtocolParams(10), 20);
  EXPECT_NEAR(s.left().h.real(), kSurvivalN10, 1e-10);
  EXPECT_NEAR(survival_amplitude_closed_form(10), kSurvivalN10, 1e-15);
}

TEST(Evolve, MatchesDenseMatrixOracle) {
  // 20 brute-force dense matrix applications.
  for (bool mirror : {true, false}) {
    const oracle::DenseModel model(10, mirror, 24);
    std::vector<oracle::cd> x(model.dim(), 0.0);
    x[oracle::DenseModel::index_l(0)] = 0.6;
    x[oracle::DenseModel::index_l(1)] = oracle::cd(0.0, 0.8);
    x = model.apply_n(x, 20);

    const SystemState s =
        evolve(make_initial({0.6, {0.0, 0.8}}), ProtocolParams(10, mirror), 20);
    for (int p = 0; p < 2; ++p) {
      const Pol pol = p == 0 ? Pol::H : Pol::V;
      EXPECT_LT(std::abs(s.amplitude(ModeIndex::L(), pol) - x[model.index_l(p)]), 1e-12);
      EXPECT_LT(std::abs(s.amplitude(ModeIndex::R(), pol) - x[model.index_r(p)]), 1e-12);
      for (std::size_t k = 0; k < 20; ++k) {
        EXPECT_LT(std::abs(s.amplitude(ModeIndex::Leak(k), pol) -
                           x[model.index_leak(k, p)]),
                  1e-12);
      }
    }
  }
}

TEST(Evolve, VBranchFlipsSignAfterTwoN) {
  for (int n : {1, 2, 3, 5, 10, 50, 100}) {
    const SystemState s =
        evolve(make_initial(Polarisation::V()), ProtocolParams(n), 2 * n);
    EXPECT_LT(std::abs(s.left().v + 1.0), 1e-12) << "N=" << n;
    EXPECT_LT(s.right().norm(), 1e-24);
  }
}

TEST(Evolve, VBranchFollowsRotation) {
  const ProtocolParams p(10);
  const SystemState l0 = make_initial(Polarisation::V());
  const SystemState r0 = SystemState::from_cavities({}, Polarisation::V());
  for (std::size_t n = 0; n <= 40; ++n) {
    const double a = static_cast<double>(n) * p.epsilon();
    const SystemState l = evolve(l0, p, n);
    const SystemState r = evolve(r0, p, n);
    EXPECT_NEAR(l.left().v.real(), std::cos(a), 1e-13);
    EXPECT_NEAR(l.right().v.real(), std::sin(a), 1e-13);
    EXPECT_NEAR(r.right().v.real(), std::cos(a), 1e-13);
    EXPECT_NEAR(r.left().v.real(), -std::sin(a), 1e-13);
  }
}

TEST(Evolve, DiagonalInputComesOutNearAntiDiagonal) {
  const SystemState s = evolve(make_initial(Polarisation::D()), ProtocolParams(10), 20);
  EXPECT_NEAR(s.left().h.real(), kSurvivalN10 / std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(s.left().v.real(), -1.0 / std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(s.left().d().real(), (kSurvivalN10 - 1.0) / 2.0, 1e-10);
  EXPECT_NEAR(s.left().a().real(), (kSurvivalN10 + 1.0) / 2.0, 1e-10);
}

TEST(Evolve, MirrorAbsentVMatchesHBranch) {
  for (int n : {1, 4, 10, 37}) {
    const SystemState s =
        evolve(make_initial(Polarisation::V()), ProtocolParams(n, false), 2 * n);
    EXPECT_NEAR(s.left().v.real(), survival_amplitude_closed_form(n), 1e-10);
  }
}

TEST(SurvivalClosedForm, Values) {
  EXPECT_NEAR(survival_amplitude_closed_form(1), 0.0, 1e-30);
  EXPECT_NEAR(survival_amplitude_closed_form(10), kSurvivalN10, 1e-15);
  // 1 - c ~ pi^2/(4N)
  const double r = (1.0 - survival_amplitude_closed_form(200)) /
                   (1.0 - survival_amplitude_closed_form(400));
  EXPECT_NEAR(r, 2.0, 0.1);
  EXPECT_THROW(survival_amplitude_closed_form(0), std::invalid_argument);
}

TEST(LeakProbability, Bookkeeping) {
  EXPECT_EQ(leak_probability(make_initial(Polarisation::H())), 0.0);
  const SystemState s = evolve(make_initial(Polarisation::H()), ProtocolParams(10), 20);
  // 1 - cos^40(pi/20), mpmath
  EXPECT_NEAR(leak_probability(s), 0.390747832949215460475, 1e-12);
  EXPECT_NEAR(leak_probability(s), 1.0 - s.in_cavity_norm(), 1e-12);
}

TEST(LeakProbability, ScalesAsOneOverN) {
  auto leak = [](int n) {
    return leak_probability(
        evolve(make_initial(Polarisation::H()), ProtocolParams(n), 2 * n));
  };
  for (int n : {100, 150, 400}) {
    EXPECT_NEAR(leak(n) / leak(2 * n), 2.0, 0.2) << "N=" << n;
  }
}

// --- properties -----------------------------------------------------------

TEST(Properties, UnitarityForRandomInputs) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick_n(1, 50);
  std::uniform_int_distribution<int> pick_steps(0, 150);
  std::bernoulli_distribution pick_mirror(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Polarisation l = random_polarisation(rng);
    const Polarisation r = random_polarisation(rng);
    std::uniform_real_distribution<double> theta(0.0, kPi / 2);
    const double t = theta(rng);
    const SystemState s0 = SystemState::from_cavities(std::cos(t) * l, std::sin(t) * r);
    const ProtocolParams p(pick_n(rng), pick_mirror(rng));
    const SystemState s = evolve(s0, p, static_cast<std::size_t>(pick_steps(rng)));
    EXPECT_NEAR(s.norm(), 1.0, 1e-10);
    EXPECT_NEAR(step(s, p).norm(), s.norm(), 1e-12);
  }
}

TEST(Properties, StepIsLinear) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const ProtocolParams p(1 + trial % 30, trial % 3 != 0);
    const SystemState x = evolve(
        SystemState::from_cavities(random_polarisation(rng), random_polarisation(rng)),
        p, trial % 7);
    const SystemState y = evolve(
        SystemState::from_cavities(random_polarisation(rng), random_polarisation(rng)),
        p, trial % 7);
    const cplx alpha(g(rng), g(rng));
    const cplx beta(g(rng), g(rng));
    const SystemState lhs = step(SystemState::combine(alpha, x, beta, y), p);
    const SystemState rhs = SystemState::combine(alpha, step(x, p), beta, step(y, p));
    const SystemState diff = SystemState::combine(1.0, lhs, -1.0, rhs);
    EXPECT_LT(std::sqrt(diff.norm()), 1e-12);
  }
}

TEST(Properties, ClosedFormLeakPattern) {
  for (int n = 1; n <= 50; ++n) {
    const ProtocolParams p(n);
    const double eps = p.epsilon();
    SystemState s = make_initial(Polarisation::H());
    for (int k = 1; k <= 2 * n; ++k) {
      s = step(s, p);
      ASSERT_NEAR(s.left().h.real(), std::pow(std::cos(eps), k), 1e-10);
    }
    for (int k = 0; k < 2 * n; ++k) {
      ASSERT_NEAR(s.amplitude(ModeIndex::Leak(static_cast<std::size_t>(k)), Pol::H).real(),
                  std::sin(eps) * std::pow(std::cos(eps), 2 * n - 1 - k), 1e-10);
    }
  }
}

TEST(Properties, PureHNeverReachesRightOrV) {
  for (int n : {3, 10, 25}) {
    const ProtocolParams p(n);
    SystemState s = make_initial(Polarisation::H());
    for (int k = 0; k < 2 * n; ++k) {
      s = step(s, p);
      ASSERT_EQ(s.right().norm(), 0.0);
      ASSERT_EQ(s.left().v, cplx(0.0));
      for (std::size_t j = 0; j < s.leak_count(); ++j) {
        ASSERT_EQ(s.amplitude(ModeIndex::Leak(j), Pol::V), cplx(0.0));
      }
    }
  }
}

TEST(Properties, LeftTransferAfterTwoNFlipsSigmaX) {
  // <L| U^{2N} |L> acts as diag(c, -1) in (H, V), i.e. D <-> A up to c.
  for (int n : {5, 10, 50}) {
    const ProtocolParams p(n);
    const PolarisationOperator t = left_transfer(p, p.default_steps());
    const double c = survival_amplitude_closed_form(n);
    EXPECT_NEAR(t.m[0].real(), c, 1e-10);
    EXPECT_LT(std::abs(t.m[1]), 1e-15);
    EXPECT_LT(std::abs(t.m[2]), 1e-15);
    EXPECT_NEAR(t.m[3].real(), -1.0, 1e-12);
  }
}
