#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qlim/geometry.hpp"

using namespace qlim;

namespace {

Scenario two_source(Mode mode = Mode::Paraxial) {
  return Scenario{{{0.1, 0.0, 0.0, 0.5}, {-0.1, 0.0, 0.0, 0.5}}, {{5.0, 0.0}, {-5.0, 0.0}}, 1.0, 100.0, mode};
}

}  // namespace

TEST(Amplitude, ParaxialOnAxisSource) {
  const auto g = amplitude({3.0, -2.0}, {0, 0, 0, 1}, 1.0, 100.0, Mode::Paraxial, 2);
  EXPECT_NEAR(std::abs(g), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(std::arg(g), 0.0);
}

TEST(Amplitude, ParaxialLinearPhase) {
  const double k = 2.0, z0 = 50.0, u = 3.0, x = 0.25;
  const auto g = amplitude({u, 0.0}, {x, 0, 0, 1}, k, z0, Mode::Paraxial, 4);
  EXPECT_NEAR(std::arg(g), -k * u * x / z0, 1e-15);
  EXPECT_NEAR(std::abs(g), 0.5, 1e-15);
}

TEST(Amplitude, ParaxialAxialPhase) {
  const double k = 1.5, z0 = 10.0, u = 1.0, v = 2.0, z = 0.3;
  const auto g = amplitude({u, v}, {0, 0, z, 1}, k, z0, Mode::Paraxial, 1);
  EXPECT_NEAR(std::arg(g), -k * z * (u * u + v * v) / (2 * z0 * z0), 1e-15);
}

TEST(Amplitude, ExactUnitDistance) {
  const auto g = amplitude({0.0, 0.0}, {0, 0, 0, 1}, 1.0, 1.0, Mode::Exact, 1);
  EXPECT_NEAR(std::arg(g), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(g), 1.0, 1e-15);
}

TEST(Amplitude, ExactCoincidentSourceIsDegenerate) {
  EXPECT_THROW(amplitude({0.0, 0.0}, {0, 0, -1.0, 1}, 1.0, 1.0, Mode::Exact, 1), DegenerateGeometryError);
}

TEST(AmplitudeMatrix, OnAxisSymmetricColumn) {
  const Scenario sc{{{0, 0, 0, 1}}, {{1.0, 0.0}, {-1.0, 0.0}}, 1.0, 10.0, Mode::Paraxial};
  const CMatrix c = build_amplitude_matrix(sc);
  EXPECT_NEAR(std::abs(c(0, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c(1, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(AmplitudeMatrix, EqualWeightsGiveHalfNorm) {
  const CMatrix c = build_amplitude_matrix(two_source());
  EXPECT_NEAR(c.col(0).squaredNorm(), 0.5, 1e-15);
  EXPECT_NEAR(c.col(1).squaredNorm(), 0.5, 1e-15);
}

TEST(AmplitudeMatrix, ExactModuliFollowInverseDistance) {
  const Scenario sc{{{0.3, -0.2, 0.1, 2.0}, {-0.5, 0.4, 0.0, 1.0}},
                    {{4.0, 0.0}, {-1.0, 2.0}, {0.5, -6.0}},
                    3.0,
                    5.0,
                    Mode::Exact};
  const CMatrix c = build_amplitude_matrix(sc);
  const double weights[2] = {2.0 / 3.0, 1.0 / 3.0};
  for (int s = 0; s < 2; ++s) {
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) sum += std::norm(c(j, s));
    EXPECT_NEAR(sum, weights[s], 1e-12);
    const auto& src = sc.sources[s];
    for (int j = 1; j < 3; ++j) {
      auto dist = [&](int jj) {
        const auto& col = sc.collectors[jj];
        return std::sqrt(std::pow(src.x - col.u, 2) + std::pow(src.y - col.v, 2) + std::pow(sc.z0 + src.z, 2));
      };
      EXPECT_NEAR(std::abs(c(j, s)) / std::abs(c(0, s)), dist(0) / dist(j), 1e-12);
    }
  }
}

TEST(AmplitudeMatrix, ExactMatchesDirectFormulaUpToReferencePhases) {
  // Library C = diag(collector phases) * direct C * diag(source phases).
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sc = oracle::random_scenario(rng, {3, 4, Mode::Exact}, 7.0, 1.0, 3.0, 2.0);
    const CMatrix c = build_amplitude_matrix(sc);
    const CMatrix ref = oracle::exact_amplitudes(sc);
    EXPECT_LT((c.cwiseAbs() - ref.cwiseAbs()).norm(), 1e-14);
    CMatrix g(4, 3);
    for (int j = 0; j < 4; ++j)
      for (int s = 0; s < 3; ++s) g(j, s) = c(j, s) * std::conj(ref(j, s)) / std::abs(c(j, s) * ref(j, s));
    for (int j = 1; j < 4; ++j)
      for (int s = 1; s < 3; ++s) EXPECT_NEAR(std::abs(g(j, s) * g(0, 0) - g(j, 0) * g(0, s)), 0.0, 1e-12);
  }
}

TEST(AmplitudeMatrix, ColumnNormalizationProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int ns = 1 + trial % 4;
    const auto sc = oracle::random_scenario(rng, {ns, ns + trial % 5, trial % 2 ? Mode::Exact : Mode::Paraxial});
    const CMatrix c = build_amplitude_matrix(sc);
    for (int s = 0; s < ns; ++s) EXPECT_NEAR(c.col(s).squaredNorm(), sc.sources[s].weight, 1e-12);
    EXPECT_TRUE(c.allFinite());
  }
}

TEST(AmplitudeMatrix, ParaxialAgreesWithExactPhaseDifferences) {
  // Geometry 1e-3 of z0, source in the reference plane: the neglected terms are quartic.
  // (An axial offset adds k z x u / z0^2, which the paraxial phase drops.)
  std::mt19937_64 rng(5);
  const double z0 = 1000.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto sc = oracle::random_scenario(rng, {1, 5, Mode::Exact}, z0, 1.0, 1.0, 1000.0);
    sc.sources[0].z = 0;
    const CMatrix ce = build_amplitude_matrix(sc);
    sc.mode = Mode::Paraxial;
    const CMatrix cp = build_amplitude_matrix(sc);
    for (int j = 1; j < 5; ++j) {
      const double de = std::arg(ce(j, 0) / ce(0, 0));
      const double dp = std::arg(cp(j, 0) / cp(0, 0));
      EXPECT_LT(std::abs(std::remainder(de - dp, 2 * std::numbers::pi)), 1e-4 * std::max(std::abs(dp), 1.0));
    }
  }
}

TEST(AmplitudeMatrix, LargePhaseKeepsPrecision) {
  // k z0 = 1e8: phases referenced per source and collector stay accurate.
  Scenario sc{{{1e-3, 0, 0, 1}}, {{1.0, 0.0}, {-1.0, 0.0}}, 1e4, 1e4, Mode::Exact};
  const CMatrix c = build_amplitude_matrix(sc);
  // Exact difference of path lengths to the two collectors, scaled by k.
  const double x = 1e-3, u = 1.0, z0 = 1e4;
  const double d1 = std::hypot(x - u, z0), d2 = std::hypot(x + u, z0);
  const double expect = 1e4 * (-4 * x * u) / (d1 + d2);
  // Collector reference distances are equal, so the relative phase is k (d1 - d2).
  EXPECT_NEAR(std::arg(c(0, 0) / c(1, 0)), expect, 1e-9);
}

TEST(AmplitudeMatrix, ZeroWeightRejected) {
  auto sc = two_source();
  sc.sources[0].weight = 0.0;
  EXPECT_THROW(build_amplitude_matrix(sc), ValidationError);
}

TEST(AmplitudeDerivative, MatchesCentralDifference) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int ns = 1 + trial % 3;
    const auto sc = oracle::random_scenario(rng, {ns, ns + 2, trial % 2 ? Mode::Exact : Mode::Paraxial}, 20.0, 1.0,
                                            4.0, 3.0);
    const Eigen::VectorXd d = oracle::random_unit(rng, 3 * ns);
    const CMatrix dc = amplitude_derivative(sc, d);
    const double h = 1e-5;
    const CMatrix fd = (build_amplitude_matrix(displace(sc, d, h)) - build_amplitude_matrix(displace(sc, d, -h))) / (2 * h);
    EXPECT_LT((dc - fd).norm(), 1e-8 * std::max(dc.norm(), 1e-3));
  }
}

TEST(Displace, ZeroStepIsIdentity) {
  const auto sc = two_source();
  const auto a = GeneralizedCoordinate::normalized(Eigen::VectorXd::Ones(6));
  EXPECT_EQ(displace(sc, a, 0.0), sc);
}

TEST(Displace, AxisStep) {
  Scenario sc{{{0.25, 0.5, 0.0, 1.0}}, {{1.0, 0.0}}, 1.0, 10.0, Mode::Paraxial};
  Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
  a(0) = 1.0;
  const auto moved = displace(sc, GeneralizedCoordinate(a), 0.1);
  EXPECT_EQ(moved.sources[0].x, 0.25 + 0.1);
  EXPECT_EQ(moved.sources[0].y, 0.5);
  EXPECT_EQ(moved.collectors, sc.collectors);
}

TEST(Displace, SeparationDirectionComponents) {
  const auto sc = two_source();
  Eigen::VectorXd a(6);
  a << 1, 0, 0, -1, 0, 0;
  const double eps = 0.01;
  const auto moved = displace(sc, GeneralizedCoordinate::normalized(a), eps);
  EXPECT_NEAR(moved.sources[0].x - 0.1, eps / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(moved.sources[1].x + 0.1, -eps / std::sqrt(2.0), 1e-16);
  EXPECT_EQ(moved.sources[0].weight, 0.5);
}

TEST(Displace, RoundTripRestoresCoordinates) {
  Scenario sc{{{0.375, -0.25, 0.125, 1.0}, {-1.5, 0.75, 0.0, 1.0}}, {{1.0, 0.0}}, 1.0, 10.0, Mode::Paraxial};
  Eigen::VectorXd a(6);
  a << 0.5, 0.5, 0.5, -0.5, 0, 0;
  const GeneralizedCoordinate g(a);
  EXPECT_EQ(displace(displace(sc, g, 0.0625), g, -0.0625), sc);

  std::mt19937_64 rng(2);
  const auto gen = GeneralizedCoordinate(oracle::random_unit(rng, 6));
  const auto back = displace(displace(sc, gen, 0.1), gen, -0.1);
  for (int s = 0; s < 2; ++s) {
    EXPECT_NEAR(back.sources[s].x, sc.sources[s].x, 1e-15);
    EXPECT_NEAR(back.sources[s].y, sc.sources[s].y, 1e-15);
    EXPECT_NEAR(back.sources[s].z, sc.sources[s].z, 1e-15);
  }
}

TEST(GeneralizedCoordinateTest, RejectsNonUnit) {
  EXPECT_THROW(GeneralizedCoordinate(Eigen::VectorXd::Ones(3)), ValidationError);
  EXPECT_THROW(GeneralizedCoordinate(Eigen::VectorXd::Ones(4).normalized()), ValidationError);
  EXPECT_THROW(GeneralizedCoordinate::normalized(Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST(Presets, SeparationMovesHalfEach) {
  const auto p = preset_parameter("separation-x", 2);
  const Eigen::VectorXd d = p.displacement();
  EXPECT_NEAR(d(0), 0.5, 1e-16);
  EXPECT_NEAR(d(3), -0.5, 1e-16);
  EXPECT_NEAR(p.coordinate.direction().norm(), 1.0, 1e-15);
  EXPECT_NEAR(p.scale, std::sqrt(2.0), 1e-15);
}

TEST(Presets, CentroidAndSource) {
  const Eigen::VectorXd c = preset_parameter("centroid-z", 3).displacement();
  for (int s = 0; s < 3; ++s) EXPECT_NEAR(c(3 * s + 2), 1.0, 1e-15);
  const Eigen::VectorXd s2 = preset_parameter("source2-y", 2).displacement();
  EXPECT_NEAR(s2(4), 1.0, 1e-15);
  EXPECT_NEAR(s2.norm(), 1.0, 1e-15);
}

TEST(Presets, Rejections) {
  EXPECT_THROW(preset_parameter("separation-x", 3), ValidationError);
  EXPECT_THROW(preset_parameter("source3-x", 2), ValidationError);
  EXPECT_THROW(preset_parameter("diagonal", 2), ValidationError);
}

TEST(Validate, Basics) {
  auto sc = two_source();
  EXPECT_NO_THROW(validate(sc));
  sc.z0 = 0.0;
  EXPECT_THROW(validate(sc), ValidationError);
  sc = two_source();
  sc.k = -1.0;
  EXPECT_THROW(validate(sc), ValidationError);
  sc = two_source();
  sc.collectors.clear();
  EXPECT_THROW(validate(sc), ValidationError);
}
