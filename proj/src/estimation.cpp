#include "qlim/estimation.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "qlim/fisher.hpp"
#include "qlim/linalg.hpp"

namespace qlim {

Eigen::VectorXd probabilities_at(const Scenario& sc, const Parameter& parameter, double theta,
                                 const Interferometer& r) {
  return detection_probabilities(build_amplitude_matrix(displace(sc, parameter.displacement(), theta)), r.matrix);
}

std::vector<std::int64_t> sample_counts(const Eigen::VectorXd& p, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("photon number must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(p.size()), 0);
  std::int64_t remaining = n;
  double mass = p.sum();
  for (Eigen::Index q = 0; q + 1 < p.size() && remaining > 0; ++q) {
    const double prob = mass > 0.0 ? std::clamp(p(q) / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> draw(remaining, prob);
    const auto k = draw(rng);
    counts[static_cast<std::size_t>(q)] = k;
    remaining -= k;
    mass -= p(q);
  }
  if (p.size() > 0) counts.back() += remaining;
  return counts;
}

DetectionRecord sample_detections(const Scenario& sc, const Parameter& parameter, double theta_true,
                                  const Interferometer& r, std::int64_t n, std::uint64_t seed) {
  const auto p = probabilities_at(sc, parameter, theta_true, r);
  return DetectionRecord{sample_counts(p, n, seed), n, seed, theta_true};
}

namespace {

double log_likelihood(const std::vector<std::int64_t>& counts, const Eigen::VectorXd& p) {
  double total = 0.0;
  for (std::size_t q = 0; q < counts.size(); ++q) {
    if (counts[q] == 0) continue;
    const double pq = p(static_cast<Eigen::Index>(q));
    if (!(pq > 0.0)) return -std::numeric_limits<double>::infinity();
    total += static_cast<double>(counts[q]) * std::log(pq);
  }
  return total;
}

}  // namespace

EstimationResult mle_estimate(const DetectionRecord& record, const Scenario& sc, const Parameter& parameter,
                              const Interferometer& r, SearchInterval interval) {
  if (!(interval.hi > interval.lo)) throw ValidationError("search interval is empty");
  if (record.counts.size() != sc.num_collectors()) throw ValidationError("count vector does not match collectors");
  constexpr int grid = 64;
  const double width = interval.hi - interval.lo;
  std::vector<double> theta(grid), ll(grid);
  std::vector<Eigen::VectorXd> probs(grid);
  for (int i = 0; i < grid; ++i) {
    theta[i] = interval.lo + width * i / (grid - 1);
    probs[i] = probabilities_at(sc, parameter, theta[i], r);
    ll[i] = log_likelihood(record.counts, probs[i]);
  }
  double spread = 0.0;
  for (int i = 1; i < grid; ++i) spread = std::max(spread, (probs[i] - probs[0]).cwiseAbs().maxCoeff());
  if (spread < 1e-12) throw NonIdentifiableError("detection probabilities do not depend on the parameter");

  int best = 0;
  int peaks = 0;
  for (int i = 0; i < grid; ++i) {
    if (ll[i] > ll[best]) best = i;
    const bool left = i == 0 || ll[i] > ll[i - 1];
    const bool right = i == grid - 1 || ll[i] > ll[i + 1];
    if (left && right) ++peaks;
  }
  if (peaks > 1) throw PreconditionError("likelihood is not unimodal on the search interval");

  auto f = [&](double t) { return log_likelihood(record.counts, probabilities_at(sc, parameter, t, r)); };
  double a = theta[std::max(best - 1, 0)];
  double b = theta[std::min(best + 1, grid - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-8 * width) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  EstimationResult res;
  res.theta_hat = 0.5 * (a + b);
  res.log_likelihood = f(res.theta_hat);
  return res;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CrbSweep crb_sweep(const Scenario& sc, const Parameter& parameter, const Interferometer& r, std::int64_t n,
                   int trials, std::uint64_t seed, unsigned threads, double theta_true, double prior_center) {
  if (trials < 100) throw ValidationError("a CRB sweep needs at least 100 trials");
  if (n < 1) throw ValidationError("photon number must be positive");
  const Scenario at_truth = displace(sc, parameter.displacement(), theta_true);
  const auto fisher = cfi(at_truth, parameter, r);
  if (!fisher.cfi || !(*fisher.cfi > 0.0) || !std::isfinite(*fisher.cfi))
    throw NonIdentifiableError("classical Fisher information vanishes or diverges at the true parameter");

  CrbSweep out;
  out.cfi = *fisher.cfi;
  out.qfi = fisher.qfi;
  out.n_photons = n;
  const double sd = 1.0 / std::sqrt(static_cast<double>(n) * out.cfi);
  out.interval = {prior_center - 10.0 * sd, prior_center + 10.0 * sd};
  out.trials.resize(static_cast<std::size_t>(trials));

  auto work = [&](unsigned worker, unsigned stride) {
    for (int t = static_cast<int>(worker); t < trials; t += static_cast<int>(stride)) {
      const auto s = trial_seed(seed, static_cast<std::uint64_t>(t));
      const auto rec = sample_detections(sc, parameter, theta_true, r, n, s);
      const auto est = mle_estimate(rec, sc, parameter, r, out.interval);
      out.trials[static_cast<std::size_t>(t)] = {t, s, est.theta_hat, est.log_likelihood};
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          work(w, threads);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  double mean = 0.0, mean_ll = 0.0;
  for (const auto& t : out.trials) {
    mean += t.theta_hat;
    mean_ll += t.log_likelihood;
  }
  mean /= trials;
  mean_ll /= trials;
  double var = 0.0;
  for (const auto& t : out.trials) var += (t.theta_hat - mean) * (t.theta_hat - mean);
  var /= (trials - 1);

  out.aggregate.theta_hat = mean;
  out.aggregate.trials = trials;
  out.aggregate.empirical_variance = var;
  out.aggregate.fisher_predicted_variance = sd * sd;
  out.aggregate.log_likelihood = mean_ll;
  out.ratio = var * static_cast<double>(n) * out.cfi;
  out.mean_bias = mean - theta_true;
  out.bias_standard_error = std::sqrt(var / trials);
  return out;
}

void write_trials_csv(std::ostream& os, const CrbSweep& sweep) {
  os << "trial,seed,theta_hat\n";
  os.precision(17);
  for (const auto& t : sweep.trials) os << t.trial << ',' << t.seed << ',' << t.theta_hat << '\n';
}

nlohmann::json to_json(const CrbSweep& s) {
  return {{"ratio", s.ratio},
          {"empirical_variance", s.aggregate.empirical_variance},
          {"fisher_predicted_variance", s.aggregate.fisher_predicted_variance},
          {"cfi", s.cfi},
          {"qfi", s.qfi},
          {"mean_theta_hat", s.aggregate.theta_hat},
          {"mean_bias", s.mean_bias},
          {"bias_standard_error", s.bias_standard_error},
          {"trials", s.aggregate.trials},
          {"n_photons", s.n_photons},
          {"search_interval", {s.interval.lo, s.interval.hi}}};
}

}  // namespace qlim
