#include "qlim/interferometer.hpp"

#include <cmath>
#include <numbers>

#include "qlim/linalg.hpp"

namespace qlim {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Identity: return "identity";
    case Provenance::BeamSplitterWithPhase: return "bs_phase";
    case Provenance::Qft: return "qft";
    case Provenance::Synthesized: return "synthesized";
    case Provenance::UserSupplied: return "user";
  }
  return "user";
}

Interferometer identity_interferometer(Eigen::Index n) {
  if (n < 1) throw ValidationError("interferometer size must be positive");
  return Interferometer{CMatrix::Identity(n, n), Provenance::Identity, 0.0, {}};
}

Interferometer beam_splitter_with_phase(double alpha) {
  const double h = 1.0 / std::sqrt(2.0);
  CMatrix bs(2, 2);
  bs << h, h, h, -h;
  CMatrix phase = CMatrix::Identity(2, 2);
  phase(0, 0) = std::polar(1.0, alpha);
  return Interferometer{bs * phase, Provenance::BeamSplitterWithPhase, alpha, {}};
}

Interferometer qft_interferometer(Eigen::Index n) {
  if (n < 1) throw ValidationError("interferometer size must be positive");
  CMatrix f(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index q = 0; q < n; ++q) {
      // Reduce j*q mod n first so quarter turns come out exact.
      const auto m = (j * q) % n;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      if (4 * m % n == 0) {
        static const Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        f(j, q) = norm * quarter[(4 * m / n) % 4];
      } else {
        f(j, q) = std::polar(norm, angle);
      }
    }
  return Interferometer{f, Provenance::Qft, 0.0, {}};
}

Interferometer builtin_interferometer(const std::string& kind, Eigen::Index n, double alpha) {
  if (kind == "identity") return identity_interferometer(n);
  if (kind == "qft") return qft_interferometer(n);
  if (kind == "bs_phase") {
    if (n != 2) throw ValidationError("bs_phase needs exactly two collectors");
    return beam_splitter_with_phase(alpha);
  }
  throw ValidationError("unknown interferometer '" + kind + "'");
}

Interferometer user_interferometer(CMatrix matrix) {
  require_unitary(matrix);
  return Interferometer{std::move(matrix), Provenance::UserSupplied, 0.0, {}};
}

nlohmann::json to_json(const Interferometer& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index j = 0; j < r.matrix.rows(); ++j)
    for (Eigen::Index q = 0; q < r.matrix.cols(); ++q)
      entries.push_back({r.matrix(j, q).real(), r.matrix(j, q).imag()});
  nlohmann::json doc{{"provenance", to_string(r.provenance)}, {"dimension", r.matrix.rows()}, {"entries", entries}};
  if (r.provenance == Provenance::BeamSplitterWithPhase) doc["alpha"] = r.alpha;
  if (!r.pivots.empty()) doc["pivots"] = r.pivots;
  return doc;
}

Interferometer interferometer_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("entries"))
    throw ValidationError("interferometer JSON needs 'dimension' and 'entries'");
  for (const auto& [key, value] : doc.items()) {
    if (key != "provenance" && key != "dimension" && key != "entries" && key != "alpha" && key != "pivots")
      throw ValidationError("unknown key '" + key + "' in interferometer JSON");
  }
  const auto n = doc.at("dimension").get<Eigen::Index>();
  const auto& entries = doc.at("entries");
  if (n < 1 || !entries.is_array() || static_cast<Eigen::Index>(entries.size()) != n * n)
    throw ValidationError("interferometer JSON must hold dimension^2 [re, im] entries");
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n * n; ++i) {
    const auto& e = entries.at(static_cast<std::size_t>(i));
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ValidationError("interferometer entry " + std::to_string(i) + " is not an [re, im] pair");
    m(i / n, i % n) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  return user_interferometer(std::move(m));
}

}  // namespace qlim
