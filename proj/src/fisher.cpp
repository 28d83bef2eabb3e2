#include "qlim/fisher.hpp"

#include <cmath>
#include <limits>

namespace qlim {

namespace {

double default_step(const Scenario& sc, const LimitOptions& opt) {
  return opt.initial_step > 0.0 ? opt.initial_step : 1e-3 / sc.k;
}

}  // namespace

FisherReport qfi(const Scenario& sc, const Parameter& parameter, const LimitOptions& opt) {
  validate(sc);
  if (parameter.coordinate.num_sources() != sc.num_sources())
    throw ValidationError("direction length does not match source count");
  const CMatrix c = build_amplitude_matrix(sc);
  const Eigen::VectorXd& a = parameter.coordinate.direction();
  auto sample = [&](double h) {
    const double plus = fidelity_deficit(c, build_amplitude_matrix(displace(sc, a, h)));
    const double minus = fidelity_deficit(c, build_amplitude_matrix(displace(sc, a, -h)));
    return Eigen::VectorXd::Constant(1, 4.0 * (plus + minus) / (h * h));
  };
  auto reduce = [](const Eigen::VectorXd& v) { return v(0); };
  const auto limit = richardson_limit(sample, reduce, default_step(sc, opt), opt, 1e-20 * sc.k * sc.k);

  const double s2 = parameter.scale * parameter.scale;
  FisherReport rep{.parameter = parameter};
  rep.qfi = std::max(0.0, limit.reduced) / s2;
  for (const auto& st : limit.steps) rep.step_sequence.push_back({st.step, st.estimate / s2});
  for (double e : limit.extrapolants) rep.extrapolants.push_back(e / s2);
  rep.converged = limit.converged;
  return rep;
}

FisherReport qfi(const Scenario& sc, const GeneralizedCoordinate& a, const LimitOptions& opt) {
  return qfi(sc, Parameter::along(a), opt);
}

double information_floor(const Scenario& sc, const Parameter& parameter) {
  return 1e-20 * sc.k * sc.k / (parameter.scale * parameter.scale);
}

FisherReport cfi(const Scenario& sc, const Parameter& parameter, const Interferometer& r,
                 const LimitOptions& opt) {
  FisherReport rep = qfi(sc, parameter, opt);
  if (r.size() != static_cast<Eigen::Index>(sc.num_collectors()))
    throw ValidationError("interferometer size does not match collector count");
  require_unitary(r.matrix);
  const CMatrix c = build_amplitude_matrix(sc);
  const Eigen::VectorXd p0 = detection_probabilities(c, r.matrix);
  const Eigen::VectorXd& a = parameter.coordinate.direction();
  constexpr double dark = 1e-14;

  // dp/dt from R(C+ - C-) and R(C+ + C-), avoiding the difference of two probabilities.
  auto sample = [&](double h) {
    const CMatrix cp = build_amplitude_matrix(displace(sc, a, h));
    const CMatrix cm = build_amplitude_matrix(displace(sc, a, -h));
    const CMatrix diff = r.matrix * (cp - cm);
    const CMatrix sum = r.matrix * (cp + cm);
    return Eigen::VectorXd((diff.conjugate().cwiseProduct(sum)).real().rowwise().sum() / (2.0 * h));
  };
  // At a dark port every amplitude vanishes, p ~ t^2 |R dC|^2 and dp^2 / p -> 4 |R dC|^2.
  const Eigen::VectorXd dark_limit = 4.0 * (r.matrix * amplitude_derivative(sc, a)).rowwise().squaredNorm();
  auto reduce = [&](const Eigen::VectorXd& dp) {
    double total = 0.0;
    for (Eigen::Index q = 0; q < dp.size(); ++q) total += p0(q) >= dark ? dp(q) * dp(q) / p0(q) : dark_limit(q);
    return total;
  };
  const double s2 = parameter.scale * parameter.scale;
  const double floor = 1e-10 * rep.qfi * s2 + 1e-20 * sc.k * sc.k;
  const auto limit = richardson_limit(sample, reduce, default_step(sc, opt), opt, floor);

  for (Eigen::Index q = 0; q < p0.size(); ++q)
    if (p0(q) < dark && std::abs(limit.value(q)) >= 1e-10) rep.cfi_diverging = true;
  rep.cfi = rep.cfi_diverging ? std::numeric_limits<double>::infinity() : limit.reduced / s2;
  if (rep.qfi > information_floor(sc, parameter)) rep.saturation_ratio = *rep.cfi / rep.qfi;
  for (const auto& st : limit.steps) rep.cfi_step_sequence.push_back({st.step, st.estimate / s2});
  for (double e : limit.extrapolants) rep.cfi_extrapolants.push_back(e / s2);
  rep.converged = rep.converged && limit.converged;
  rep.probabilities = p0;
  return rep;
}

GeneratorMoments generator_moments(const std::vector<Collector>& collectors, double k, double z0) {
  const auto n = static_cast<Eigen::Index>(collectors.size());
  if (n < 1) throw ValidationError("no collectors");
  Eigen::Matrix3Xd g(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& c = collectors[static_cast<std::size_t>(j)];
    g.col(j) << k * c.u / z0, k * c.v / z0, k * (c.u * c.u + c.v * c.v) / (2.0 * z0 * z0);
  }
  GeneratorMoments m;
  m.mean = g.rowwise().mean();
  m.second_moment = g * g.transpose() / static_cast<double>(n);
  const Eigen::Matrix3Xd centered = g.colwise() - m.mean;
  m.covariance = centered * centered.transpose() / static_cast<double>(n);
  return m;
}

std::string to_string(QfiTarget t) {
  switch (t) {
    case QfiTarget::SingleSource: return "single";
    case QfiTarget::TwoSourceSeparation: return "separation";
    case QfiTarget::TwoSourceCentroid: return "centroid";
  }
  return "single";
}

QfiTarget qfi_target_from_string(const std::string& name) {
  if (name == "single") return QfiTarget::SingleSource;
  if (name == "separation") return QfiTarget::TwoSourceSeparation;
  if (name == "centroid") return QfiTarget::TwoSourceCentroid;
  throw ValidationError("unknown QFI matrix target '" + name + "'");
}

bool inversion_symmetric(const std::vector<Collector>& collectors, double tol) {
  double scale = 0.0;
  for (const auto& c : collectors) scale = std::max({scale, std::abs(c.u), std::abs(c.v)});
  const double t = tol * std::max(scale, 1.0);
  for (const auto& c : collectors) {
    bool found = false;
    for (const auto& d : collectors)
      if (std::abs(c.u + d.u) <= t && std::abs(c.v + d.v) <= t) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

Eigen::Matrix3d paraxial_qfi_matrix(const std::vector<Collector>& collectors, double k, double z0, QfiTarget target) {
  const auto m = generator_moments(collectors, k, z0);
  switch (target) {
    case QfiTarget::SingleSource: return 4.0 * m.covariance;
    case QfiTarget::TwoSourceSeparation: return m.covariance;
    case QfiTarget::TwoSourceCentroid: {
      if (!inversion_symmetric(collectors))
        throw PreconditionError("centroid closed form assumes an inversion-symmetric collector array");
      Eigen::Matrix3d q = 4.0 * m.covariance;
      q.topLeftCorner<2, 2>() = 4.0 * m.second_moment.topLeftCorner<2, 2>();
      return q;
    }
  }
  return Eigen::Matrix3d::Zero();
}

std::array<Eigen::VectorXd, 3> target_displacements(QfiTarget target, std::size_t num_sources) {
  std::array<Eigen::VectorXd, 3> d;
  const std::size_t expected = target == QfiTarget::SingleSource ? 1 : 2;
  if (num_sources != expected)
    throw PreconditionError("target '" + to_string(target) + "' needs " + std::to_string(expected) + " source(s)");
  for (int axis = 0; axis < 3; ++axis) {
    d[axis] = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(num_sources));
    switch (target) {
      case QfiTarget::SingleSource: d[axis](axis) = 1.0; break;
      case QfiTarget::TwoSourceSeparation:
        d[axis](axis) = 0.5;
        d[axis](3 + axis) = -0.5;
        break;
      case QfiTarget::TwoSourceCentroid:
        d[axis](axis) = 1.0;
        d[axis](3 + axis) = 1.0;
        break;
    }
  }
  return d;
}

Eigen::Matrix3d qfi_matrix(const Scenario& sc, const std::array<Eigen::VectorXd, 3>& d, const LimitOptions& opt,
                           bool* converged) {
  Eigen::Matrix3d q;
  bool ok = true;
  auto eval = [&](const Eigen::VectorXd& disp) {
    const auto rep = qfi(sc, Parameter::from_displacement(disp, "component"), opt);
    ok = ok && rep.converged;
    return rep.qfi;
  };
  for (int a = 0; a < 3; ++a) q(a, a) = eval(d[a]);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) q(a, b) = q(b, a) = 0.5 * (eval(d[a] + d[b]) - q(a, a) - q(b, b));
  if (converged) *converged = ok;
  return q;
}

ConsistencyReport qfi_matrix_consistency(const Scenario& sc, QfiTarget target, const LimitOptions& opt) {
  validate(sc);
  const auto d = target_displacements(target, sc.num_sources());
  if (target != QfiTarget::SingleSource && std::abs(sc.sources[0].weight - sc.sources[1].weight) >
                                               1e-12 * std::max(sc.sources[0].weight, sc.sources[1].weight))
    throw PreconditionError("two-source closed forms assume equal weights");
  ConsistencyReport rep{.target = target};
  rep.closed_form = paraxial_qfi_matrix(sc.collectors, sc.k, sc.z0, target);
  rep.finite_difference = qfi_matrix(sc, d, opt, &rep.converged);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double cf = rep.closed_form(a, b);
      // Entries whose closed form vanishes identically (e.g. y on a collinear array) are
      // measured against the largest entry instead.
      const double scale = std::max({std::abs(cf), std::sqrt(std::abs(rep.closed_form(a, a) * rep.closed_form(b, b))),
                                     1e-8 * rep.closed_form.cwiseAbs().maxCoeff()});
      const double err = std::abs(rep.finite_difference(a, b) - cf);
      rep.relative_error(a, b) = scale > 0.0 ? err / scale : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    }
  rep.max_relative_error = rep.relative_error.maxCoeff();
  return rep;
}

std::vector<ConsistencyReport> qfi_matrix_consistency(const Scenario& sc, const std::vector<QfiTarget>& targets,
                                                      const LimitOptions& opt) {
  std::vector<ConsistencyReport> out;
  for (auto t : targets) out.push_back(qfi_matrix_consistency(sc, t, opt));
  return out;
}

double optimal_axial_phase(double u1, double u2, double dx, double k, double z0) {
  const double b = k * (u1 - u2) / (2.0 * z0), a = b * dx;
  const double sinc = a == 0.0 ? 1.0 : std::sin(a) / a;
  const double theta = std::atan2(-(u1 + u2) * b * sinc, std::cos(a));
  return theta + k * (u1 * u1 - u2 * u2) / (2.0 * z0);
}

}  // namespace qlim
