#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qlim/core.hpp"

namespace qlim {

enum class Provenance { Identity, BeamSplitterWithPhase, Qft, Synthesized, UserSupplied };

std::string to_string(Provenance p);

// Output amplitudes are R * (collector amplitudes); p_q = sum_s |(R C)_{qs}|^2.
struct Interferometer {
  CMatrix matrix;
  Provenance provenance = Provenance::UserSupplied;
  double alpha = 0.0;  // BeamSplitterWithPhase only
  std::vector<Eigen::Index> pivots;  // column order used by pivoted triangularization

  Eigen::Index size() const { return matrix.rows(); }
};

Interferometer identity_interferometer(Eigen::Index n);
// (1/sqrt 2)[[1, 1], [1, -1]] * diag(exp(i alpha), 1).
Interferometer beam_splitter_with_phase(double alpha);
// Entry (j, q) = exp(2 pi i j q / n) / sqrt(n).
Interferometer qft_interferometer(Eigen::Index n);

// kind: identity | bs_phase | qft.
Interferometer builtin_interferometer(const std::string& kind, Eigen::Index n, double alpha = 0.0);

// User-supplied matrix, validated unitary to 1e-10.
Interferometer user_interferometer(CMatrix matrix);

nlohmann::json to_json(const Interferometer& r);
// Reads the layout written by to_json; the result is UserSupplied.
Interferometer interferometer_from_json(const nlohmann::json& doc);

}  // namespace qlim
