#include "covsim/eng/spawner.hpp"

#include <cmath>

#include "covsim/errors.hpp"

namespace covsim::eng {

namespace {

using est::Vec3;

// z for which the zone [z, c] holds `fraction` of the total area.
double area_quantile(const geo::Spheroid& s, double fraction) {
  double lo = -s.c, hi = s.c;
  const double target = fraction * geo::surface_area(s);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (geo::zone_area(s, mid, s.c) < target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

est::ParticleTruth spawn_intruder(std::mt19937_64& rng, const Scenario& s,
                                  double t, int id) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const geo::Spheroid& surf = s.spheroid;
  const double detect_radius = s.detection_range + surf.a;

  for (int attempt = 0; attempt < 1000; ++attempt) {
    // aim point uniform by area
    const double z = area_quantile(surf, unit(rng));
    const double lam = 2.0 * M_PI * unit(rng);
    const double w =
        surf.a * std::sqrt(std::max(0.0, 1.0 - z * z / (surf.c * surf.c)));
    const Vec3 aim(w * std::cos(lam), w * std::sin(lam), z);

    // approach direction within a cone about the outward normal
    const Vec3 axis = surf.outward_normal(aim);
    const double cone_half = M_PI / 4.0;
    const double cos_min = std::cos(cone_half);
    const double cu = cos_min + (1.0 - cos_min) * unit(rng);
    const double su = std::sqrt(std::max(0.0, 1.0 - cu * cu));
    const double az = 2.0 * M_PI * unit(rng);
    Vec3 ortho1 = axis.cross(Vec3::UnitZ());
    if (ortho1.norm() < 1e-6) ortho1 = axis.cross(Vec3::UnitX());
    ortho1.normalize();
    const Vec3 ortho2 = axis.cross(ortho1);
    const Vec3 dir =
        (cu * axis + su * (std::cos(az) * ortho1 + std::sin(az) * ortho2))
            .normalized();

    // uniform in (0.3 U, U]
    const double speed = s.intruder_max_speed * (1.0 - 0.7 * unit(rng));

    // start on the ray so detection happens ~spawn_lead seconds in:
    // |aim + L dir| = detect_radius + speed * spawn_lead
    const double reach = detect_radius + speed * s.spawn_lead;
    const double b = 2.0 * aim.dot(dir);
    const double c0 = aim.squaredNorm() - reach * reach;
    const double disc = b * b - 4.0 * c0;
    if (disc <= 0.0) continue;
    const double dist = 0.5 * (-b + std::sqrt(disc));
    if (dist <= 0.0) continue;
    const Vec3 start = aim + dist * dir;

    est::ParticleTruth p;
    p.id = id;
    p.spawn_time = t;
    p.state.head<3>() = start;
    p.state.tail<3>() = -speed * dir;
    const auto impact = est::predict_impact(p.state, surf, t);
    if (!impact.exists) continue;
    p.impact_time = impact.time;
    p.impact_point = impact.point;

    // detection-to-impact distance must be at least R_det; detection is the
    // first crossing of the detect_radius sphere
    const Vec3 vel = p.state.tail<3>();
    const double qa = vel.squaredNorm();
    const double qb = 2.0 * start.dot(vel);
    const double qc = start.squaredNorm() - detect_radius * detect_radius;
    const double det_disc = qb * qb - 4.0 * qa * qc;
    if (det_disc <= 0.0) continue;
    const double tau_detect = (-qb - std::sqrt(det_disc)) / (2.0 * qa);
    if (tau_detect < 0.0) continue;
    const Vec3 at_detect = start + tau_detect * vel;
    if ((at_detect - p.impact_point).norm() < s.detection_range) continue;
    return p;
  }
  throw SpawnError("intruder spawn rejected 1000 times; check the config");
}

}  // namespace covsim::eng
