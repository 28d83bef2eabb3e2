#pragma once

#include <string>
#include <vector>

#include "qlim/fisher.hpp"
#include "qlim/geometry.hpp"
#include "qlim/interferometer.hpp"

namespace qlim {

// V^dag M W = diag(D), D descending.
struct SvdAlignment {
  CMatrix V;
  CMatrix W;
  Eigen::VectorXd D;
};

SvdAlignment svd_alignment(const CMatrix& m);

// A = C V, B = C' W from the SVD of C^dag C', R = Q^dag from A = Q T with the diagonal of
// R A made real nonnegative. Rank-deficient A switches to a column-pivoted QR (pivots kept).
// R A is upper- and R B lower-triangular, but this R does not in general attain the
// quantum fidelity for more than one source.
Interferometer synthesize_triangular_R(const CMatrix& c, const CMatrix& c_prime);

// Fidelity-saturating R for the pair (C, C'): rows are the eigenvectors of B D^+ B^dag,
// which maps A onto B, so each output mode sees parallel rows of R A and R B.
Interferometer synthesize_optimal_R(const CMatrix& c, const CMatrix& c_prime);

// Fisher-saturating R in the limit of vanishing displacement: rows are the eigenvectors
// of the symmetric logarithmic derivative of rho = C C^dag along dC.
Interferometer synthesize_local_R(const CMatrix& c, const CMatrix& dc);

// Local R for the parameter at the scenario's configuration.
Interferometer design_interferometer(const Scenario& scenario, const Parameter& parameter);

struct TriangularDiagnostics {
  double unitarity_defect = 0.0;
  double below_diagonal_RA = 0.0;  // max |(R A)_{qs}|, q > s
  double above_diagonal_RB = 0.0;  // max |(R B)_{qs}|, q < s
  double singular_value_mismatch = 0.0;  // max |D_s - |(R A)_{ss}| |(R B)_{ss}||
  double scalar_product_residual = 0.0;  // |(R A)^dag (R B) - diag(D)|_F
  double fidelity_gap = 0.0;  // classical - quantum fidelity under this R
  std::vector<Eigen::Index> pivots;
};

TriangularDiagnostics triangular_diagnostics(const CMatrix& c, const CMatrix& c_prime, const Interferometer& r);

struct SaturationReport {
  FisherReport fisher;  // CFI under local_R
  double step = 0.0;
  double quantum_fidelity = 1.0;
  double classical_fidelity = 1.0;  // under the pair R
  double fidelity_gap = 0.0;
  double unitarity_defect = 0.0;  // worst over the synthesized matrices
  TriangularDiagnostics triangular;
  Interferometer pair_R;
  Interferometer triangular_R;
  Interferometer local_R;
  double saturation_ratio = 1.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

SaturationReport verify_saturation(const Scenario& scenario, const Parameter& parameter, double step,
                                   const LimitOptions& options = {});

}  // namespace qlim
