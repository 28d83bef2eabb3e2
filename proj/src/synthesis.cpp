#include "qlim/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qlim/linalg.hpp"

namespace qlim {

namespace {

void require_enough_collectors(const CMatrix& c) {
  if (c.rows() < c.cols())
    throw PreconditionError("optimal interferometer needs at least as many collectors as sources");
}

// Rotate each row of R so the largest entry of the matching row of R X is real positive
// (or of R itself when that row of R X vanishes).
void fix_row_phases(CMatrix& r, const CMatrix& x) {
  const CMatrix rx = r * x;
  const double tol = 1e-12 * std::max(rx.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index q = 0; q < r.rows(); ++q) {
    Eigen::Index idx = 0;
    Complex pivot;
    if (rx.row(q).cwiseAbs().maxCoeff(&idx) > tol) {
      pivot = rx(q, idx);
    } else {
      r.row(q).cwiseAbs().maxCoeff(&idx);
      pivot = r(q, idx);
    }
    if (std::abs(pivot) > 0.0) r.row(q) *= std::conj(pivot) / std::abs(pivot);
  }
}

// Rows = conjugated eigenvectors of a Hermitian matrix, largest eigenvalue first.
CMatrix rows_from_eigenvectors(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
  const Eigen::Index n = h.rows();
  CMatrix r(n, n);
  for (Eigen::Index q = 0; q < n; ++q) r.row(q) = es.eigenvectors().col(n - 1 - q).adjoint();
  return r;
}

}  // namespace

SvdAlignment svd_alignment(const CMatrix& m) {
  const auto svd = checked_svd(m);
  return SvdAlignment{svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

Interferometer synthesize_triangular_R(const CMatrix& c, const CMatrix& c_prime) {
  require_enough_collectors(c);
  const auto al = svd_alignment(overlap_matrix(c, c_prime));
  const CMatrix a = c * al.V;
  Interferometer out{CMatrix(), Provenance::Synthesized, 0.0, {}};

  Eigen::HouseholderQR<CMatrix> qr(a);
  const CMatrix t = qr.matrixQR().triangularView<Eigen::Upper>();
  const Eigen::VectorXd diag = t.diagonal().cwiseAbs();
  const bool deficient = diag.size() > 0 && diag.minCoeff() <= 1e-12 * std::max(diag.maxCoeff(), 1e-300);
  CMatrix q;
  if (deficient) {
    Eigen::ColPivHouseholderQR<CMatrix> pqr(a);
    q = pqr.householderQ();
    const auto& perm = pqr.colsPermutation().indices();
    out.pivots.assign(perm.data(), perm.data() + perm.size());
  } else {
    q = qr.householderQ();
  }
  CMatrix r = q.adjoint();
  // Diagonal of R A (pivoted column order) real nonnegative.
  const CMatrix ra = r * a;
  for (Eigen::Index s = 0; s < a.cols(); ++s) {
    const Eigen::Index col = out.pivots.empty() ? s : out.pivots[static_cast<std::size_t>(s)];
    const Complex d = ra(s, col);
    if (std::abs(d) > 0.0) r.row(s) *= std::conj(d) / std::abs(d);
  }
  out.matrix = std::move(r);
  return out;
}

Interferometer synthesize_optimal_R(const CMatrix& c, const CMatrix& c_prime) {
  require_enough_collectors(c);
  const auto al = svd_alignment(overlap_matrix(c, c_prime));
  const CMatrix a = c * al.V;
  const CMatrix b = c_prime * al.W;
  const double tol = 1e-14 * std::max(al.D.size() ? al.D(0) : 0.0, 1e-300);
  Eigen::VectorXd dinv(al.D.size());
  for (Eigen::Index s = 0; s < al.D.size(); ++s) dinv(s) = al.D(s) > tol ? 1.0 / al.D(s) : 0.0;
  CMatrix t = b * dinv.asDiagonal() * b.adjoint();
  t = 0.5 * (t + t.adjoint()).eval();
  CMatrix r = rows_from_eigenvectors(t);
  fix_row_phases(r, a);
  return Interferometer{std::move(r), Provenance::Synthesized, 0.0, {}};
}

Interferometer synthesize_local_R(const CMatrix& c, const CMatrix& dc) {
  require_enough_collectors(c);
  if (dc.rows() != c.rows() || dc.cols() != c.cols()) throw ValidationError("derivative shape mismatch");
  const Eigen::Index n = c.rows();
  const CMatrix rho = c * c.adjoint();
  const CMatrix drho = dc * c.adjoint() + c * dc.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
  const Eigen::VectorXd lambda = es.eigenvalues();
  const CMatrix& e = es.eigenvectors();
  // Support: the largest rank(C) <= N_S eigenvalues.
  const double tol = 1e-14 * std::max(lambda(n - 1), 1e-300);
  std::vector<bool> support(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = n - 1, kept = 0; i >= 0 && kept < c.cols(); --i, ++kept)
    support[static_cast<std::size_t>(i)] = lambda(i) > tol;
  const CMatrix x = e.adjoint() * drho * e;
  CMatrix l = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (support[static_cast<std::size_t>(i)] || support[static_cast<std::size_t>(j)])
        l(i, j) = 2.0 * x(i, j) / (std::max(lambda(i), 0.0) + std::max(lambda(j), 0.0));
  CMatrix sld = e * l * e.adjoint();
  sld = 0.5 * (sld + sld.adjoint()).eval();
  CMatrix r = rows_from_eigenvectors(sld);
  fix_row_phases(r, c);
  return Interferometer{std::move(r), Provenance::Synthesized, 0.0, {}};
}

Interferometer design_interferometer(const Scenario& sc, const Parameter& parameter) {
  return synthesize_local_R(build_amplitude_matrix(sc), amplitude_derivative(sc, parameter.displacement()));
}

TriangularDiagnostics triangular_diagnostics(const CMatrix& c, const CMatrix& c_prime, const Interferometer& r) {
  const auto al = svd_alignment(overlap_matrix(c, c_prime));
  CMatrix a = c * al.V;
  CMatrix b = c_prime * al.W;
  TriangularDiagnostics d;
  d.pivots = r.pivots;
  if (!d.pivots.empty()) {
    const CMatrix a0 = a, b0 = b;
    for (std::size_t s = 0; s < d.pivots.size(); ++s) {
      a.col(static_cast<Eigen::Index>(s)) = a0.col(d.pivots[s]);
      b.col(static_cast<Eigen::Index>(s)) = b0.col(d.pivots[s]);
    }
  }
  const CMatrix ra = r.matrix * a;
  const CMatrix rb = r.matrix * b;
  d.unitarity_defect = unitarity_defect(r.matrix);
  for (Eigen::Index q = 0; q < ra.rows(); ++q)
    for (Eigen::Index s = 0; s < ra.cols(); ++s) {
      if (q > s) d.below_diagonal_RA = std::max(d.below_diagonal_RA, std::abs(ra(q, s)));
      if (q < s) d.above_diagonal_RB = std::max(d.above_diagonal_RB, std::abs(rb(q, s)));
    }
  Eigen::VectorXd dp(al.D.size());
  for (Eigen::Index s = 0; s < al.D.size(); ++s) {
    const Eigen::Index col = d.pivots.empty() ? s : d.pivots[static_cast<std::size_t>(s)];
    dp(s) = al.D(col);
    d.singular_value_mismatch =
        std::max(d.singular_value_mismatch, std::abs(dp(s) - std::abs(ra(s, s)) * std::abs(rb(s, s))));
  }
  d.scalar_product_residual = (ra.adjoint() * rb - CMatrix(dp.cast<Complex>().asDiagonal())).norm();
  d.fidelity_gap = fidelity_deficit(c, c_prime) - classical_fidelity_deficit(c, c_prime, r.matrix);
  return d;
}

SaturationReport verify_saturation(const Scenario& sc, const Parameter& parameter, double step,
                                   const LimitOptions& options) {
  validate(sc);
  const CMatrix c = build_amplitude_matrix(sc);
  const CMatrix cp = build_amplitude_matrix(displace(sc, parameter.coordinate, step));
  require_enough_collectors(c);

  auto local = design_interferometer(sc, parameter);
  SaturationReport rep{.fisher = cfi(sc, parameter, local, options)};
  rep.step = step;
  rep.local_R = std::move(local);
  if (step == 0.0) {
    rep.pair_R = rep.local_R;
    rep.triangular_R = rep.local_R;
    rep.saturation_ratio = 1.0;
    rep.unitarity_defect = unitarity_defect(rep.local_R.matrix);
    return rep;
  }

  rep.pair_R = synthesize_optimal_R(c, cp);
  rep.triangular_R = synthesize_triangular_R(c, cp);
  const double quantum_deficit = fidelity_deficit(c, cp);
  const double classical_deficit = classical_fidelity_deficit(c, cp, rep.pair_R.matrix);
  rep.quantum_fidelity = 1.0 - quantum_deficit;
  rep.classical_fidelity = 1.0 - classical_deficit;
  rep.fidelity_gap = quantum_deficit - classical_deficit;
  rep.triangular = triangular_diagnostics(c, cp, rep.triangular_R);
  rep.unitarity_defect = std::max({unitarity_defect(rep.pair_R.matrix), unitarity_defect(rep.local_R.matrix),
                                   rep.triangular.unitarity_defect});
  if (rep.fisher.saturation_ratio) {
    rep.saturation_ratio = *rep.fisher.saturation_ratio;
  } else {
    // No information to saturate.
    rep.saturation_ratio =
        *rep.fisher.cfi <= information_floor(sc, parameter) ? 1.0 : std::numeric_limits<double>::infinity();
  }

  auto fail = [&](bool bad, const std::string& what, double value) {
    if (bad) rep.failures.push_back(what + " = " + std::to_string(value));
  };
  fail(rep.unitarity_defect > 1e-10, "unitarity defect", rep.unitarity_defect);
  fail(rep.triangular.below_diagonal_RA > 1e-10, "R A below-diagonal magnitude", rep.triangular.below_diagonal_RA);
  fail(rep.triangular.above_diagonal_RB > 1e-9, "R B above-diagonal magnitude", rep.triangular.above_diagonal_RB);
  fail(rep.triangular.singular_value_mismatch > 1e-9, "D_s vs |a'(s,s)||b'(s,s)| mismatch",
       rep.triangular.singular_value_mismatch);
  fail(rep.triangular.scalar_product_residual > 1e-10, "scalar-product residual",
       rep.triangular.scalar_product_residual);
  fail(std::abs(rep.fidelity_gap) > 1e-9, "classical - quantum fidelity", rep.fidelity_gap);
  fail(!(rep.saturation_ratio >= 1.0 - 1e-5 && rep.saturation_ratio <= 1.0 + 1e-6), "saturation ratio",
       rep.saturation_ratio);
  return rep;
}

}  // namespace qlim
