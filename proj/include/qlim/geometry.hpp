#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qlim/core.hpp"

namespace qlim {

enum class Mode { Exact, Paraxial };

struct SourcePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double weight = 1.0;

  bool operator==(const SourcePoint&) const = default;
};

struct Collector {
  double u = 0.0;
  double v = 0.0;

  bool operator==(const Collector&) const = default;
};

struct Scenario {
  std::vector<SourcePoint> sources;
  std::vector<Collector> collectors;
  double k = 1.0;
  double z0 = 1.0;
  Mode mode = Mode::Paraxial;

  std::size_t num_sources() const { return sources.size(); }
  std::size_t num_collectors() const { return collectors.size(); }

  bool operator==(const Scenario&) const = default;
};

// Throws ValidationError when k, z0, weights or coordinates are out of range.
void validate(const Scenario& scenario);

// Copy with weights rescaled to sum to one.
Scenario normalize_weights(Scenario scenario);

// max(|x|,|y|,|z|)/z0 over all sources.
double paraxial_ratio(const Scenario& scenario);

// Unit direction in the 3*N_S dimensional source coordinate space.
class GeneralizedCoordinate {
 public:
  // Requires a unit vector (to 1e-12).
  explicit GeneralizedCoordinate(Eigen::VectorXd direction);
  static GeneralizedCoordinate normalized(const Eigen::VectorXd& direction);

  const Eigen::VectorXd& direction() const { return a_; }
  std::size_t num_sources() const { return static_cast<std::size_t>(a_.size() / 3); }

 private:
  Eigen::VectorXd a_;
};

// A physical parameter theta along a unit coordinate: theta = scale * (a . r).
// Moving theta by one unit displaces the sources by a / scale, so
// I_theta = I_a / scale^2.
struct Parameter {
  GeneralizedCoordinate coordinate;
  double scale = 1.0;
  std::string name;

  static Parameter along(const GeneralizedCoordinate& coordinate, std::string name = "custom");
  static Parameter from_displacement(const Eigen::VectorXd& displacement, std::string name);

  Eigen::VectorXd displacement() const { return coordinate.direction() / scale; }
};

// Named presets: centroid-{x,y,z}, separation-{x,y,z} (two sources),
// source<i>-{x,y,z} (1-based).
Parameter preset_parameter(const std::string& name, std::size_t num_sources);

// Raw single-collector amplitude. Exact: exp(i k d)/d. Paraxial: exp(i phi)/sqrt(N_C).
Complex amplitude(const Collector& collector, const SourcePoint& source, double k, double z0, Mode mode,
                  std::size_t num_collectors);

// N_C x N_S matrix with column s of squared norm p(s).
CMatrix build_amplitude_matrix(const Scenario& scenario);

// d C / d t for sources moving along `displacement` per unit t.
CMatrix amplitude_derivative(const Scenario& scenario, const Eigen::VectorXd& displacement);

Scenario displace(const Scenario& scenario, const GeneralizedCoordinate& a, double delta);
Scenario displace(const Scenario& scenario, const Eigen::VectorXd& displacement, double t);

}  // namespace qlim
