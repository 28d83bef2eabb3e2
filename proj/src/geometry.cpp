#include "qlim/geometry.hpp"

#include <cmath>
#include <numeric>
#include <regex>

namespace qlim {

namespace {

bool finite(double v) { return std::isfinite(v); }

double weight_sum(const Scenario& s) {
  return std::accumulate(s.sources.begin(), s.sources.end(), 0.0,
                         [](double acc, const SourcePoint& p) { return acc + p.weight; });
}

}  // namespace

void validate(const Scenario& s) {
  if (s.sources.empty()) throw ValidationError("scenario has no sources");
  if (s.collectors.empty()) throw ValidationError("scenario has no collectors");
  if (!(s.k > 0.0) || !finite(s.k)) throw ValidationError("k must be positive and finite");
  if (!(s.z0 > 0.0) || !finite(s.z0)) throw ValidationError("z0 must be positive and finite");
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    const auto& p = s.sources[i];
    if (!finite(p.x) || !finite(p.y) || !finite(p.z))
      throw ValidationError("source " + std::to_string(i + 1) + " has non-finite coordinates");
    if (!(p.weight > 0.0) || !finite(p.weight))
      throw ValidationError("source " + std::to_string(i + 1) + " weight must be positive");
    if (s.z0 + p.z <= 0.0)
      throw DegenerateGeometryError("source " + std::to_string(i + 1) + " lies on or behind the collector plane");
  }
  for (std::size_t j = 0; j < s.collectors.size(); ++j) {
    const auto& c = s.collectors[j];
    if (!finite(c.u) || !finite(c.v))
      throw ValidationError("collector " + std::to_string(j + 1) + " has non-finite coordinates");
  }
}

Scenario normalize_weights(Scenario s) {
  const double total = weight_sum(s);
  for (auto& p : s.sources) p.weight /= total;
  return s;
}

double paraxial_ratio(const Scenario& s) {
  double m = 0.0;
  for (const auto& p : s.sources) m = std::max({m, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
  return m / s.z0;
}

GeneralizedCoordinate::GeneralizedCoordinate(Eigen::VectorXd direction) : a_(std::move(direction)) {
  if (a_.size() == 0 || a_.size() % 3 != 0)
    throw ValidationError("direction length must be a positive multiple of 3");
  if (!a_.allFinite() || std::abs(a_.norm() - 1.0) > 1e-12)
    throw ValidationError("direction must be a unit vector");
}

GeneralizedCoordinate GeneralizedCoordinate::normalized(const Eigen::VectorXd& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("direction must be nonzero and finite");
  return GeneralizedCoordinate(direction / n);
}

Parameter Parameter::along(const GeneralizedCoordinate& coordinate, std::string name) {
  return Parameter{coordinate, 1.0, std::move(name)};
}

Parameter Parameter::from_displacement(const Eigen::VectorXd& displacement, std::string name) {
  const double n = displacement.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("displacement must be nonzero and finite");
  return Parameter{GeneralizedCoordinate(displacement / n), 1.0 / n, std::move(name)};
}

Parameter preset_parameter(const std::string& name, std::size_t num_sources) {
  static const std::regex pattern(R"((centroid|separation|source(\d+))-([xyz]))");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) throw ValidationError("unknown direction preset '" + name + "'");
  const int axis = m[3].str()[0] - 'x';
  Eigen::VectorXd d = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(num_sources));
  const std::string kind = m[1].str();
  if (kind == "centroid") {
    for (std::size_t s = 0; s < num_sources; ++s) d(3 * s + axis) = 1.0;
  } else if (kind == "separation") {
    if (num_sources != 2) throw ValidationError("separation presets need exactly two sources");
    d(axis) = 0.5;
    d(3 + axis) = -0.5;
  } else {
    const std::size_t index = std::stoul(m[2].str());
    if (index < 1 || index > num_sources) throw ValidationError("preset '" + name + "' names a missing source");
    d(3 * (index - 1) + axis) = 1.0;
  }
  return Parameter::from_displacement(d, name);
}

Complex amplitude(const Collector& c, const SourcePoint& s, double k, double z0, Mode mode,
                  std::size_t num_collectors) {
  if (mode == Mode::Paraxial) {
    const double r2 = c.u * c.u + c.v * c.v;
    const double phi = -k * (c.u * s.x + c.v * s.y) / z0 - k * s.z * r2 / (2.0 * z0 * z0);
    return std::polar(1.0 / std::sqrt(static_cast<double>(num_collectors)), phi);
  }
  const double d = std::hypot(s.x - c.u, s.y - c.v, z0 + s.z);
  if (d == 0.0) throw DegenerateGeometryError("source coincides with a collector");
  return std::polar(1.0 / d, k * d);
}

namespace {

// Exact-mode column with the per-source and per-collector reference phases removed:
// phase = k[(d_js - d_j0) - (d_s0 - z0)], where d_j0 is the collector distance to the
// on-axis reference point and d_s0 the source distance to the origin. Both subtractions
// are evaluated without cancellation.
struct ExactColumn {
  Eigen::VectorXd distance;
  Eigen::VectorXd phase;
  double origin_distance;
};

ExactColumn exact_column(const Scenario& sc, const SourcePoint& s) {
  const auto nc = static_cast<Eigen::Index>(sc.collectors.size());
  ExactColumn col{Eigen::VectorXd(nc), Eigen::VectorXd(nc), 0.0};
  const double zz = s.z * (2.0 * sc.z0 + s.z);
  const double zs = sc.z0 + s.z;
  col.origin_distance = std::sqrt(s.x * s.x + s.y * s.y + zs * zs);
  const double source_ref = (s.x * s.x + s.y * s.y + zz) / (col.origin_distance + sc.z0);
  for (Eigen::Index j = 0; j < nc; ++j) {
    const auto& c = sc.collectors[static_cast<std::size_t>(j)];
    const double d = std::hypot(s.x - c.u, s.y - c.v, zs);
    if (d == 0.0) throw DegenerateGeometryError("source coincides with a collector");
    const double d_ref = std::hypot(c.u, c.v, sc.z0);
    const double sq_diff = s.x * s.x - 2.0 * s.x * c.u + s.y * s.y - 2.0 * s.y * c.v + zz;
    col.distance(j) = d;
    col.phase(j) = sc.k * (sq_diff / (d + d_ref) - source_ref);
  }
  return col;
}

}  // namespace

CMatrix build_amplitude_matrix(const Scenario& sc) {
  validate(sc);
  const auto nc = static_cast<Eigen::Index>(sc.num_collectors());
  const auto ns = static_cast<Eigen::Index>(sc.num_sources());
  const double total = weight_sum(sc);
  CMatrix c(nc, ns);
  for (Eigen::Index s = 0; s < ns; ++s) {
    const auto& src = sc.sources[static_cast<std::size_t>(s)];
    if (sc.mode == Mode::Paraxial) {
      for (Eigen::Index j = 0; j < nc; ++j)
        c(j, s) = amplitude(sc.collectors[static_cast<std::size_t>(j)], src, sc.k, sc.z0, sc.mode,
                            sc.num_collectors());
    } else {
      const auto col = exact_column(sc, src);
      for (Eigen::Index j = 0; j < nc; ++j) c(j, s) = std::polar(1.0 / col.distance(j), col.phase(j));
    }
    const double norm = c.col(s).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateGeometryError("amplitude column has zero norm");
    c.col(s) *= std::sqrt(src.weight / total) / norm;
  }
  return c;
}

CMatrix amplitude_derivative(const Scenario& sc, const Eigen::VectorXd& displacement) {
  const auto nc = static_cast<Eigen::Index>(sc.num_collectors());
  const auto ns = static_cast<Eigen::Index>(sc.num_sources());
  if (displacement.size() != 3 * ns) throw ValidationError("displacement length does not match source count");
  const CMatrix c = build_amplitude_matrix(sc);
  CMatrix dc(nc, ns);
  const Complex i(0.0, 1.0);
  for (Eigen::Index s = 0; s < ns; ++s) {
    const auto& src = sc.sources[static_cast<std::size_t>(s)];
    const double dx = displacement(3 * s), dy = displacement(3 * s + 1), dz = displacement(3 * s + 2);
    if (sc.mode == Mode::Paraxial) {
      for (Eigen::Index j = 0; j < nc; ++j) {
        const auto& col = sc.collectors[static_cast<std::size_t>(j)];
        const double dphi = -sc.k * (col.u * dx + col.v * dy) / sc.z0 -
                            sc.k * dz * (col.u * col.u + col.v * col.v) / (2.0 * sc.z0 * sc.z0);
        dc(j, s) = i * dphi * c(j, s);
      }
      continue;
    }
    // c = sqrt(p) g / |g| with g_j = exp(i phase_j) / d_j.
    const auto col = exact_column(sc, src);
    const double zs = sc.z0 + src.z;
    const double d_origin = (src.x * dx + src.y * dy + zs * dz) / col.origin_distance;
    CVector g(nc), dg(nc);
    for (Eigen::Index j = 0; j < nc; ++j) {
      const auto& cj = sc.collectors[static_cast<std::size_t>(j)];
      const double d = col.distance(j);
      const double dd = ((src.x - cj.u) * dx + (src.y - cj.v) * dy + zs * dz) / d;
      g(j) = std::polar(1.0 / d, col.phase(j));
      dg(j) = g(j) * (i * sc.k * (dd - d_origin) - dd / d);
    }
    const double gn = g.norm();
    const double dgn = g.dot(dg).real() / gn;
    const double amp = std::abs(c.col(s).norm());
    dc.col(s) = amp * (dg / gn - g * (dgn / (gn * gn)));
  }
  return dc;
}

Scenario displace(const Scenario& sc, const GeneralizedCoordinate& a, double delta) {
  return displace(sc, a.direction(), delta);
}

Scenario displace(const Scenario& sc, const Eigen::VectorXd& d, double t) {
  if (d.size() != 3 * static_cast<Eigen::Index>(sc.num_sources()))
    throw ValidationError("direction length does not match source count");
  Scenario out = sc;
  for (std::size_t s = 0; s < out.sources.size(); ++s) {
    const auto b = static_cast<Eigen::Index>(3 * s);
    out.sources[s].x += d(b) * t;
    out.sources[s].y += d(b + 1) * t;
    out.sources[s].z += d(b + 2) * t;
  }
  return out;
}

}  // namespace qlim
