#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qlim/estimation.hpp"
#include "qlim/fisher.hpp"
#include "qlim/synthesis.hpp"

using namespace qlim;

namespace {

// Wide template separation keeps the splitter phase monotone over the search window.
Scenario splitter_scenario(double dx = 10.0) {
  return Scenario{{{dx / 2, 0, 0, 0.5}, {-dx / 2, 0, 0, 0.5}}, {{5, 0}, {-5, 0}}, 1.0, 100.0, Mode::Paraxial};
}

}  // namespace

TEST(Sampling, DeterministicDistribution) {
  Eigen::VectorXd p(2);
  p << 1.0, 0.0;
  const auto counts = sample_counts(p, 100, 7);
  EXPECT_EQ(counts[0], 100);
  EXPECT_EQ(counts[1], 0);
}

TEST(Sampling, BinomialConcentration) {
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  const auto counts = sample_counts(p, 1000000, 3);
  EXPECT_LT(std::abs(counts[0] - 500000), 5 * 500);
  EXPECT_EQ(counts[0] + counts[1], 1000000);
}

TEST(Sampling, SeedDeterminism) {
  const auto sc = splitter_scenario();
  const auto p = preset_parameter("separation-x", 2);
  const auto a = sample_detections(sc, p, 0.0, beam_splitter_with_phase(0.0), 10000, 99);
  const auto b = sample_detections(sc, p, 0.0, beam_splitter_with_phase(0.0), 10000, 99);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.n_photons, 10000);
  EXPECT_NE(a.counts, sample_detections(sc, p, 0.0, beam_splitter_with_phase(0.0), 10000, 100).counts);
}

TEST(Sampling, MultinomialMeans) {
  Eigen::VectorXd p(4);
  p << 0.1, 0.2, 0.3, 0.4;
  std::vector<double> mean(4, 0.0);
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    const auto c = sample_counts(p, 1000, trial_seed(5, i));
    for (int q = 0; q < 4; ++q) mean[q] += c[q] / 1000.0 / reps;
  }
  for (int q = 0; q < 4; ++q) EXPECT_NEAR(mean[q], p(q), 5 * std::sqrt(p(q) * (1 - p(q)) / 1000.0 / reps));
}

TEST(Mle, ZeroNoiseRecoversTruth) {
  const auto sc = splitter_scenario();
  const auto param = preset_parameter("separation-x", 2);
  const auto r = beam_splitter_with_phase(0.0);
  const double truth = 0.037;
  const auto p = probabilities_at(sc, param, truth, r);
  // Counts proportional to the probabilities (scaled up so rounding is negligible).
  DetectionRecord rec;
  rec.n_photons = 0;
  for (Eigen::Index q = 0; q < p.size(); ++q) {
    rec.counts.push_back(std::llround(p(q) * 1e15));
    rec.n_photons += rec.counts.back();
  }
  const auto est = mle_estimate(rec, sc, param, r, {-0.5, 0.5});
  EXPECT_NEAR(est.theta_hat, truth, 1e-7);
}

TEST(Mle, WithinFiveSigma) {
  const auto sc = splitter_scenario();
  const auto param = preset_parameter("separation-x", 2);
  const auto r = beam_splitter_with_phase(0.0);
  const double info = *cfi(sc, param, r).cfi;
  const std::int64_t n = 100000;
  const double sd = 1 / std::sqrt(n * info);
  int inside = 0;
  for (int t = 0; t < 200; ++t) {
    const auto rec = sample_detections(sc, param, 0.0, r, n, trial_seed(11, t));
    const auto est = mle_estimate(rec, sc, param, r, {-10 * sd, 10 * sd});
    if (std::abs(est.theta_hat) < 5 * sd) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(Mle, IdentityIsNonIdentifiable) {
  const auto sc = splitter_scenario(0.2);
  const auto param = preset_parameter("separation-x", 2);
  const auto rec = sample_detections(sc, param, 0.0, identity_interferometer(2), 1000, 1);
  EXPECT_THROW(mle_estimate(rec, sc, param, identity_interferometer(2), {-0.1, 0.1}), NonIdentifiableError);
}

TEST(Mle, MultimodalIntervalRejected) {
  // Around zero separation the splitter probabilities are even in the separation.
  const auto sc = splitter_scenario(0.0);
  const auto param = preset_parameter("separation-x", 2);
  const auto r = beam_splitter_with_phase(0.0);
  const auto rec = sample_detections(sc, param, 20.0, r, 100000, 1);
  EXPECT_THROW(mle_estimate(rec, sc, param, r, {-30.0, 30.0}), PreconditionError);
}

TEST(Crb, SweepDeterministicAcrossThreads) {
  const auto sc = splitter_scenario();
  const auto param = preset_parameter("separation-x", 2);
  const auto r = beam_splitter_with_phase(0.0);
  const auto a = crb_sweep(sc, param, r, 10000, 100, 5, 1);
  const auto b = crb_sweep(sc, param, r, 10000, 100, 5, 3);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].theta_hat, b.trials[i].theta_hat);
  EXPECT_EQ(a.ratio, b.ratio);
  std::ostringstream os;
  write_trials_csv(os, a);
  EXPECT_EQ(os.str().rfind("trial,seed,theta_hat\n", 0), 0u);
  EXPECT_EQ(to_json(a)["trials"], 100);
}

TEST(Crb, SuboptimalSplitterPaysItsFisherDeficit) {
  // alpha = 1: the splitter extracts a fraction c < 1 of the quantum information and the
  // estimator variance follows 1/(n c QFI).
  const auto sc = splitter_scenario();
  const auto param = preset_parameter("separation-x", 2);
  const auto r = beam_splitter_with_phase(1.0);
  const double c = oracle::splitter_cfi_dx(5, -5, 10.0, 1.0, 100.0, 1.0) / oracle::two_collector_qfi_dx(5, -5, 1.0, 100.0);
  ASSERT_LT(c, 0.6);
  const auto sweep = crb_sweep(sc, param, r, 100000, 300, 21);
  EXPECT_NEAR(sweep.cfi / sweep.qfi, c, 1e-6);
  const double predicted = 1 / (100000 * c * sweep.qfi);
  EXPECT_NEAR(sweep.aggregate.empirical_variance / predicted, 1.0, 0.2);
  EXPECT_GE(sweep.aggregate.empirical_variance, 0.9 / (100000 * sweep.qfi));
  EXPECT_LT(std::abs(sweep.mean_bias), 3 * sweep.bias_standard_error);
}

TEST(Crb, FourCollectorFourier) {
  const Scenario sc{{{5, 0, 0, 0.5}, {-5, 0, 0, 0.5}}, {{3, 0}, {1, 0}, {-1, 0}, {-3, 0}}, 1.0, 100.0, Mode::Paraxial};
  const auto param = preset_parameter("separation-x", 2);
  const auto sweep = crb_sweep(sc, param, qft_interferometer(4), 100000, 200, 8);
  EXPECT_NEAR(sweep.ratio, 1.0, 0.2);
}

TEST(Crb, RejectsTooFewTrials) {
  const auto sc = splitter_scenario();
  EXPECT_THROW(crb_sweep(sc, preset_parameter("separation-x", 2), beam_splitter_with_phase(0.0), 1000, 10, 1),
               ValidationError);
}
