#include "covsim/geo/spheroid.hpp"

#include <algorithm>
#include <cmath>

#include "covsim/errors.hpp"

namespace covsim::geo {

namespace {

constexpr int kFootScanSamples = 128;
constexpr int kFootMaxIter = 64;

// Normality condition for the 2-D foot point problem in the meridian plane:
// ellipse point (a cos t, c sin t), query (w, z) with w >= 0.
// F(t) = (a^2-c^2) sin t cos t - a w sin t + c z cos t
double normality(double t, double a, double c, double w, double z) {
  const double st = std::sin(t), ct = std::cos(t);
  return (a * a - c * c) * st * ct - a * w * st + c * z * ct;
}

double normality_deriv(double t, double a, double c, double w, double z) {
  const double st = std::sin(t), ct = std::cos(t);
  return (a * a - c * c) * (ct * ct - st * st) - a * w * ct - c * z * st;
}

double dist2_to_ellipse(double t, double a, double c, double w, double z) {
  const double dx = w - a * std::cos(t);
  const double dz = z - c * std::sin(t);
  return dx * dx + dz * dz;
}

}  // namespace

Spheroid::Spheroid(double equatorial, double polar) : a(equatorial), c(polar) {
  if (!(a > 0.0) || !(c > 0.0)) {
    throw ValidationError("spheroid semi-axes must be positive");
  }
  if (c > a * (1.0 + 1e-12)) {
    throw ValidationError("prolate spheroid (c > a) is not supported");
  }
}

double Spheroid::implicit(const Vec3& p) const {
  return (p.x() * p.x() + p.y() * p.y()) / (a * a) + p.z() * p.z() / (c * c);
}

Vec3 Spheroid::implicit_gradient(const Vec3& p) const {
  return Vec3(2.0 * p.x() / (a * a), 2.0 * p.y() / (a * a),
              2.0 * p.z() / (c * c));
}

Vec3 Spheroid::outward_normal(const Vec3& p) const {
  return implicit_gradient(p).normalized();
}

Vec3 Spheroid::point_from_reduced(double beta, double lambda) const {
  return Vec3(a * std::cos(beta) * std::cos(lambda),
              a * std::cos(beta) * std::sin(lambda), c * std::sin(beta));
}

double Spheroid::reduced_from_geodetic(double phi) const {
  if (std::abs(phi) >= M_PI / 2.0 - 1e-15) {
    return std::copysign(M_PI / 2.0, phi);
  }
  return std::atan((c / a) * std::tan(phi));
}

Vec3 Spheroid::point_from_geodetic(double phi, double lambda) const {
  return point_from_reduced(reduced_from_geodetic(phi), lambda);
}

Spheroid SurfaceFamily::surface(int k) const {
  if (k < 0 || k >= count) {
    throw ValidationError("surface index out of range");
  }
  return Spheroid(base.a + offset(k), base.c + offset(k));
}

SurfaceNormal foot_point_normal(const Spheroid& s, const Vec3& p) {
  const double a = s.a, c = s.c;
  const double w = std::hypot(p.x(), p.y());
  const double zq = p.z();
  const double z = std::abs(zq);

  SurfaceNormal out;
  out.outside = s.implicit(p) >= 1.0 - 1e-12;

  // On-axis query: for an oblate spheroid the nearest point is the pole.
  if (w < 1e-12 * a) {
    const double zf = (zq < 0.0) ? -c : c;
    out.foot_point = Vec3(0, 0, zf);
    const Vec3 d = p - out.foot_point;
    out.length = d.norm();
    out.direction = (out.length > 1e-12 * a)
                        ? Vec3(d / out.length)
                        : Vec3(0, 0, (zf < 0.0) ? -1.0 : 1.0);
    return out;
  }

  // Work in the first quadrant of the meridian plane (w >= 0, z >= 0),
  // mirror z back afterwards. Coarse scan locates the global minimum
  // basin, then safeguarded Newton polishes the normality root.
  double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kFootScanSamples; ++i) {
    const double t = (M_PI / 2.0) * i / kFootScanSamples;
    const double d = dist2_to_ellipse(t, a, c, w, z);
    if (d < best_d) {
      best_d = d;
      best_t = t;
    }
  }
  double lo = std::max(0.0, best_t - (M_PI / 2.0) / kFootScanSamples);
  double hi = std::min(M_PI / 2.0, best_t + (M_PI / 2.0) / kFootScanSamples);

  double t = best_t;
  bool converged = false;
  for (int it = 0; it < kFootMaxIter; ++it) {
    const double f = normality(t, a, c, w, z);
    const double fp = normality_deriv(t, a, c, w, z);
    double step = (fp != 0.0) ? -f / fp : 0.0;
    double tn = t + step;
    if (!(tn > lo) || !(tn < hi) || fp == 0.0) {
      // bisection fallback on the bracketing interval
      const double flo = normality(lo, a, c, w, z);
      const double fmid = normality(0.5 * (lo + hi), a, c, w, z);
      if (flo * fmid <= 0.0) {
        hi = 0.5 * (lo + hi);
      } else {
        lo = 0.5 * (lo + hi);
      }
      tn = 0.5 * (lo + hi);
    } else {
      // keep the bracket tight around the Newton iterate
      if (normality(lo, a, c, w, z) * normality(tn, a, c, w, z) <= 0.0) {
        hi = tn;
      } else {
        lo = tn;
      }
    }
    if (std::abs(tn - t) < 1e-15) {
      t = tn;
      converged = true;
      break;
    }
    t = tn;
  }

  // Verify the normality residual as a tangential miss distance.
  const double st = std::sin(t), ct = std::cos(t);
  const double tnorm = std::hypot(a * st, c * ct);
  const double resid =
      std::abs((w - a * ct) * (-a * st) + (z - c * st) * (c * ct)) / tnorm;
  if (!converged && resid > 1e-10 * a) {
    throw SolverError("foot point iteration did not converge");
  }

  const double lambda = std::atan2(p.y(), p.x());
  const double zsign = (zq < 0.0) ? -1.0 : 1.0;
  out.foot_point = Vec3(a * ct * std::cos(lambda), a * ct * std::sin(lambda),
                        zsign * c * st);
  const Vec3 d = p - out.foot_point;
  out.length = d.norm();
  if (out.length > 1e-12 * a) {
    out.direction = d / out.length;
  } else {
    out.direction = s.outward_normal(out.foot_point);
  }
  return out;
}

Vec3 project_to_surface(const SurfaceFamily& family, int k, const Vec3& p) {
  return foot_point_normal(family.surface(k), p).foot_point;
}

Vec3 north_tangent(const Spheroid& s, const Vec3& p) {
  const Vec3 n = s.outward_normal(p);
  Vec3 north = Vec3::UnitZ() - n.z() * n;
  const double len = north.norm();
  if (len < 1e-9) {
    throw PoleHeadingError("heading undefined at the poles");
  }
  return north / len;
}

Vec3 heading_vector(const Spheroid& s, const Vec3& p, double chi) {
  const Vec3 n = s.outward_normal(p);
  const Vec3 north = north_tangent(s, p);
  const Vec3 east = north.cross(n);  // clockwise from North seen from outside
  return (north * std::cos(chi) + east * std::sin(chi)).normalized();
}

double perimeter_factor(const Spheroid& s, int n_terms) {
  if (n_terms < 1) {
    throw ValidationError("perimeter_factor needs n_terms >= 1");
  }
  const double h = (s.a - s.c) / (s.a + s.c);
  const double h2 = h * h;
  double g = 1.0;
  double coef = 0.5;  // (2n-1)!!/(2^n n!) for n = 1
  double hpow = h2;
  for (int n = 1; n <= n_terms; ++n) {
    g += coef * coef * hpow / ((2.0 * n - 1.0) * (2.0 * n - 1.0));
    coef *= (2.0 * n + 1.0) / (2.0 * n + 2.0);
    hpow *= h2;
  }
  return g;
}

double surface_area(const Spheroid& s) {
  const double e2 = std::max(0.0, s.e2());
  const double e = std::sqrt(e2);
  if (e < 1e-6) {
    // series for artanh(e)/e near the sphere limit
    const double t = 1.0 + e2 / 3.0 + e2 * e2 / 5.0;
    return 2.0 * M_PI * s.a * s.a * (1.0 + (1.0 - e2) * t);
  }
  return 2.0 * M_PI * s.a * s.a * (1.0 + (1.0 - e2) / e * std::atanh(e));
}

double zone_area(const Spheroid& s, double z_lo, double z_hi) {
  const double a = s.a, c = s.c;
  const double lo = std::clamp(std::min(z_lo, z_hi), -c, c);
  const double hi = std::clamp(std::max(z_lo, z_hi), -c, c);
  // Band area = 2 pi (a/c^2) \int sqrt(c^4 + (a^2-c^2) z^2) dz.
  const double k = a * a - c * c;
  auto F = [&](double z) {
    if (k < 1e-12 * a * a) {
      return c * c * z;  // sphere: integrand is c^2
    }
    const double sk = std::sqrt(k);
    const double root = std::sqrt(c * c * c * c + k * z * z);
    return 0.5 * (z * root + (c * c * c * c / sk) * std::asinh(sk * z / (c * c)));
  };
  return 2.0 * M_PI * (a / (c * c)) * (F(hi) - F(lo));
}

std::vector<double> partition_bounds(const Spheroid& s, int n_agents) {
  if (n_agents < 2) {
    throw ValidationError("partition_bounds needs N >= 2");
  }
  const double c = s.c;
  const double band = surface_area(s) / (n_agents - 1);
  std::vector<double> bounds(n_agents);
  bounds[0] = c;
  bounds[n_agents - 1] = -c;
  for (int i = 1; i < n_agents - 1; ++i) {
    // solve zone_area(z, bounds[i-1]) = band for z < bounds[i-1] by bisection
    double lo = -c, hi = bounds[i - 1];
    const double flo = zone_area(s, lo, bounds[i - 1]) - band;
    if (flo < 0.0) {
      throw PartitionError("partition root not bracketed");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double f = zone_area(s, mid, bounds[i - 1]) - band;
      if (f > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-15 * c) break;
    }
    bounds[i] = 0.5 * (lo + hi);
  }
  return bounds;
}

}  // namespace covsim::geo
