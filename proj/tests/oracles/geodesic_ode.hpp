#pragma once

// Geodesic-ODE shooting oracle. Integrates the Cartesian geodesic equations
// on the spheroid (acceleration normal to the surface) with fixed-step RK4
// and refines (heading, arc length) by damped Gauss-Newton until the endpoint
// hits the target. Fully independent of the auxiliary-sphere integrals used
// by the implementation.

#include <Eigen/Dense>
#include <cmath>

#include "covsim/geo/spheroid.hpp"

namespace oracles {

using covsim::geo::Spheroid;
using covsim::geo::Vec3;

struct GeoFlowState {
  Vec3 p;
  Vec3 v;  // unit tangent
};

inline Eigen::Matrix<double, 6, 1> geodesic_rhs(const Spheroid& s,
                                                const Eigen::Matrix<double, 6, 1>& x) {
  const Vec3 p = x.head<3>();
  const Vec3 v = x.tail<3>();
  const Vec3 g = s.implicit_gradient(p);
  // v' = -(v^T H v / |g|^2) g with H = diag(2/a^2, 2/a^2, 2/c^2)
  const double vHv = 2.0 * (v.x() * v.x() + v.y() * v.y()) / (s.a * s.a) +
                     2.0 * v.z() * v.z() / (s.c * s.c);
  const Vec3 acc = -(vHv / g.squaredNorm()) * g;
  Eigen::Matrix<double, 6, 1> dx;
  dx << v, acc;
  return dx;
}

// Walk arc length `dist` from p0 along the tangent dir0.
inline Vec3 geodesic_flow(const Spheroid& s, const Vec3& p0, const Vec3& dir0,
                          double dist, double step_hint = 0.02) {
  if (dist <= 0.0) return p0;
  const int n = std::max(512, static_cast<int>(std::ceil(dist / step_hint)));
  const double h = dist / n;
  Eigen::Matrix<double, 6, 1> x;
  x << p0, dir0.normalized();
  for (int i = 0; i < n; ++i) {
    const auto k1 = geodesic_rhs(s, x);
    const auto k2 = geodesic_rhs(s, x + 0.5 * h * k1);
    const auto k3 = geodesic_rhs(s, x + 0.5 * h * k2);
    const auto k4 = geodesic_rhs(s, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // project drift back to the surface and re-normalize the tangent
    Vec3 p = x.head<3>();
    const double m = s.implicit(p);
    p /= std::sqrt(m);
    Vec3 g = s.implicit_gradient(p);
    Vec3 v = x.tail<3>();
    v -= v.dot(g) / g.squaredNorm() * g;
    v.normalize();
    x << p, v;
  }
  return x.head<3>();
}

struct ShootSolution {
  double distance = 0.0;
  double heading = 0.0;
  double miss = 0.0;
  bool converged = false;
};

// Refine (chi, d) so the flow endpoint matches p2; seeded from the candidate
// being checked, which is legitimate because the shortest geodesic between
// non-conjugate points is locally unique.
inline ShootSolution refine_shooting(const Spheroid& s, const Vec3& p1,
                                     const Vec3& p2, double chi0, double d0) {
  ShootSolution sol;
  double chi = chi0, d = d0;
  const double scale = std::max(1.0, d0);
  for (int it = 0; it < 60; ++it) {
    const Vec3 dir = covsim::geo::heading_vector(s, p1, chi);
    const Vec3 end = geodesic_flow(s, p1, dir, d);
    const Vec3 r = end - p2;
    sol.miss = r.norm();
    if (sol.miss < 1e-9 * scale) {
      sol.converged = true;
      break;
    }
    const double dchi = 1e-7;
    const double dd = 1e-7 * scale;
    const Vec3 end_chi =
        geodesic_flow(s, p1, covsim::geo::heading_vector(s, p1, chi + dchi), d);
    const Vec3 end_d = geodesic_flow(s, p1, dir, d + dd);
    Eigen::Matrix<double, 3, 2> J;
    J.col(0) = (end_chi - end) / dchi;
    J.col(1) = (end_d - end) / dd;
    const Eigen::Vector2d delta =
        J.colPivHouseholderQr().solve(-r);
    double damp = 1.0;
    if (delta.norm() > 0.2 * scale) damp = 0.2 * scale / delta.norm();
    chi += damp * delta[0];
    d += damp * delta[1];
    if (d <= 0.0) d = 0.5 * d0;
  }
  sol.distance = d;
  sol.heading = chi;
  return sol;
}

}  // namespace oracles
