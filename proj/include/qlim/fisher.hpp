#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qlim/extrapolation.hpp"
#include "qlim/geometry.hpp"
#include "qlim/interferometer.hpp"
#include "qlim/linalg.hpp"

namespace qlim {

struct FisherReport {
  Parameter parameter;
  double qfi = 0.0;
  std::optional<double> cfi;
  std::optional<double> saturation_ratio;
  std::vector<StepEstimate> step_sequence;
  std::vector<double> extrapolants;
  std::vector<StepEstimate> cfi_step_sequence;
  std::vector<double> cfi_extrapolants;
  bool converged = false;
  bool cfi_diverging = false;
  Eigen::VectorXd probabilities;
};

// Fisher information of the parameter, from the fidelity limit 8(1 - f)/d^2.
FisherReport qfi(const Scenario& scenario, const Parameter& parameter, const LimitOptions& options = {});
FisherReport qfi(const Scenario& scenario, const GeneralizedCoordinate& a, const LimitOptions& options = {});

// Information below this level (1e-20 k^2 per unit coordinate) is numerical noise;
// no saturation ratio is reported under it.
double information_floor(const Scenario& scenario, const Parameter& parameter);

// Photon-counting Fisher information behind R; also fills the quantum fields.
FisherReport cfi(const Scenario& scenario, const Parameter& parameter, const Interferometer& r,
                 const LimitOptions& options = {});

// Moments of g_x = k u / z0, g_y = k v / z0, g_z = k (u^2 + v^2) / (2 z0^2) over the uniform collector state.
struct GeneratorMoments {
  Eigen::Vector3d mean;
  Eigen::Matrix3d covariance;
  Eigen::Matrix3d second_moment;
};

GeneratorMoments generator_moments(const std::vector<Collector>& collectors, double k, double z0);

enum class QfiTarget { SingleSource, TwoSourceSeparation, TwoSourceCentroid };

std::string to_string(QfiTarget target);
QfiTarget qfi_target_from_string(const std::string& name);

bool inversion_symmetric(const std::vector<Collector>& collectors, double tol = 1e-12);

// Closed-form paraxial QFI matrix over the (x, y, z) components of the target parameter.
// Single source: 4 sigma. Separation (sources at -/+ half the separation): sigma.
// Centroid: transverse block 4 k^2 <u_a u_b> / z0^2, axial entries 4 sigma (coincident limit).
Eigen::Matrix3d paraxial_qfi_matrix(const std::vector<Collector>& collectors, double k, double z0,
                                    QfiTarget target);

// Displacements (per unit parameter) of the x, y, z components of the target.
std::array<Eigen::VectorXd, 3> target_displacements(QfiTarget target, std::size_t num_sources);

// Finite-difference QFI matrix; off-diagonal entries by polarization.
Eigen::Matrix3d qfi_matrix(const Scenario& scenario, const std::array<Eigen::VectorXd, 3>& displacements,
                           const LimitOptions& options = {}, bool* converged = nullptr);

struct ConsistencyReport {
  QfiTarget target;
  Eigen::Matrix3d closed_form;
  Eigen::Matrix3d finite_difference;
  // |fd - cf| / max(|cf_ab|, sqrt(cf_aa cf_bb), 1e-8 max|cf|).
  Eigen::Matrix3d relative_error;
  double max_relative_error = 0.0;
  bool converged = false;
};

ConsistencyReport qfi_matrix_consistency(const Scenario& scenario, QfiTarget target,
                                         const LimitOptions& options = {});
std::vector<ConsistencyReport> qfi_matrix_consistency(const Scenario& scenario,
                                                      const std::vector<QfiTarget>& targets,
                                                      const LimitOptions& options = {});

// Beam-splitter phase maximizing the paraxial axial-separation CFI of the two-collector
// scheme near dz = 0, sources at (+-dx/2, 0, +-dz/2). Includes the k (u1^2 - u2^2) / (2 z0)
// shift from raw path phases to the collector-referenced phases used here.
double optimal_axial_phase(double u1, double u2, double dx, double k, double z0);

}  // namespace qlim
