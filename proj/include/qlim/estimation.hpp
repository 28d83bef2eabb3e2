#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "qlim/geometry.hpp"
#include "qlim/interferometer.hpp"

namespace qlim {

struct DetectionRecord {
  std::vector<std::int64_t> counts;
  std::int64_t n_photons = 0;
  std::uint64_t seed = 0;
  double true_theta = 0.0;
};

struct EstimationResult {
  double theta_hat = 0.0;
  double log_likelihood = 0.0;
  double fisher_predicted_variance = 0.0;
  double empirical_variance = 0.0;
  int trials = 1;
};

struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Detection probabilities with the parameter moved by theta from the scenario's configuration.
Eigen::VectorXd probabilities_at(const Scenario& scenario, const Parameter& parameter, double theta,
                                 const Interferometer& r);

// Multinomial draw by sequential binomials on a 64-bit Mersenne twister.
std::vector<std::int64_t> sample_counts(const Eigen::VectorXd& p, std::int64_t n, std::uint64_t seed);

DetectionRecord sample_detections(const Scenario& scenario, const Parameter& parameter, double theta_true,
                                  const Interferometer& r, std::int64_t n, std::uint64_t seed);

// 64-point grid scan, then golden-section search to 1e-8 of the interval width.
EstimationResult mle_estimate(const DetectionRecord& record, const Scenario& scenario, const Parameter& parameter,
                              const Interferometer& r, SearchInterval interval);

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double theta_hat = 0.0;
  double log_likelihood = 0.0;
};

struct CrbSweep {
  EstimationResult aggregate;
  std::vector<TrialRecord> trials;
  double cfi = 0.0;
  double qfi = 0.0;
  double ratio = 0.0;  // empirical_variance * n * CFI
  double mean_bias = 0.0;
  double bias_standard_error = 0.0;
  std::int64_t n_photons = 0;
  SearchInterval interval;
};

// Trials at theta_true, searched over +-10 predicted standard deviations around `prior_center`.
CrbSweep crb_sweep(const Scenario& scenario, const Parameter& parameter, const Interferometer& r, std::int64_t n,
                   int trials, std::uint64_t seed, unsigned threads = 1, double theta_true = 0.0,
                   double prior_center = 0.0);

void write_trials_csv(std::ostream& os, const CrbSweep& sweep);
nlohmann::json to_json(const CrbSweep& sweep);

}  // namespace qlim
