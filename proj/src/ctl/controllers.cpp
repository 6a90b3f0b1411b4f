#include "covsim/ctl/controllers.hpp"

#include <cmath>

#include "covsim/errors.hpp"

namespace covsim::ctl {

namespace {

double sat(double x) { return std::clamp(x, -1.0, 1.0); }

// Attitude error vector toward x_B = -n: zero roll, pitch and yaw errors.
Vec3 attitude_error(const AgentState& agent, const Vec3& n_hat) {
  const double theta_des = std::asin(std::clamp(n_hat.z(), -1.0, 1.0));
  const double psi_des = std::atan2(-n_hat.y(), -n_hat.x());
  double psi_err = psi_des - agent.euler.z();
  psi_err = std::remainder(psi_err, 2.0 * M_PI);
  return Vec3(0.0, theta_des - agent.euler.y(), psi_err);
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::LC: return "LC";
    case Mode::RTB: return "RTB";
    case Mode::PIM: return "PIM";
    case Mode::PTM: return "PTM";
    case Mode::STM: return "STM";
  }
  return "?";
}

double log_altitude(const AgentConfig& cfg, int tier, double normal_length) {
  const double target = (cfg.gamma + tier) * cfg.sensing_range - cfg.body_radius;
  const double height = normal_length - cfg.body_radius;
  if (height <= 0.0) {
    throw SurfaceCollisionFault("agent touched the surface of interest");
  }
  return std::log(height / target);
}

ControlCommand local_coverage_control(const AgentState& agent,
                                      const AgentConfig& cfg,
                                      const std::array<double, 5>& a_terms,
                                      const geo::SurfaceNormal& normal,
                                      double grad_floor) {
  if (normal.length <= cfg.body_radius) {
    throw SurfaceCollisionFault("agent touched the surface of interest");
  }
  ControlCommand cmd;
  cmd.mode = Mode::LC;

  const kin::Mat3 r1 = kin::rotation_body_to_global(agent.euler);
  const kin::Mat3 r2inv = kin::euler_rate_matrix_inv(agent.euler);

  // logarithmic surface-distance term, rotated into the body frame
  cmd.log_altitude = log_altitude(cfg, 0, normal.length);
  const Vec3 rho_l_global = -cmd.log_altitude * normal.direction;
  cmd.rho_l = r1.transpose() * rho_l_global;

  // weak attitude alignment toward -n
  cmd.rho_a = cfg.xi * (r2inv * attitude_error(agent, normal.direction));

  const double grad_norm = std::sqrt(a_terms[0] * a_terms[0] +
                                     a_terms[1] * a_terms[1] +
                                     a_terms[2] * a_terms[2]);
  double gu = 0.0, gv = 0.0, gw = 0.0;
  if (grad_norm > grad_floor) {
    gu = cfg.k_u * a_terms[0] / grad_norm;
    gv = cfg.k_v * a_terms[1] / grad_norm;
    gw = cfg.k_w * a_terms[2] / grad_norm;
  }
  cmd.velocity.linear = Vec3(gu + cmd.rho_l.x(), gv + cmd.rho_l.y(),
                             gw + cmd.rho_l.z());
  cmd.velocity.angular =
      Vec3(0.0,
           cfg.r_max * sat(cfg.k_r * a_terms[3] / cfg.r_max) + cmd.rho_a.y(),
           cfg.s_max * sat(cfg.k_s * a_terms[4] / cfg.s_max) + cmd.rho_a.z());
  return cmd;
}

ControlCommand intercept_control(const AgentState& agent,
                                 const AgentConfig& cfg,
                                 const geo::SurfaceFamily& family, int tier,
                                 const Vec3& destination_on_surface,
                                 const geo::GeodesicSolution& geodesic,
                                 const geo::SurfaceNormal& normal, Mode mode) {
  if (normal.length <= cfg.body_radius) {
    throw SurfaceCollisionFault("agent touched the surface of interest");
  }
  ControlCommand cmd;
  cmd.mode = mode;

  const geo::Spheroid tier_surface = family.surface(tier);
  const Vec3 on_tier =
      geo::foot_point_normal(tier_surface, agent.position).foot_point;
  Vec3 nu_hat;
  try {
    nu_hat = geo::heading_vector(tier_surface, on_tier,
                                 geodesic.initial_heading);
  } catch (const PoleHeadingError&) {
    // departure from a pole: head along the destination's meridian
    const double lam = std::atan2(destination_on_surface.y(),
                                  destination_on_surface.x());
    nu_hat = Vec3(std::cos(lam), std::sin(lam), 0.0);
  }
  cmd.heading_tangent = nu_hat;

  cmd.log_altitude = log_altitude(cfg, tier, normal.length);
  const Vec3 dir_global = nu_hat - cmd.log_altitude * normal.direction;
  const double dir_norm = dir_global.norm();
  const kin::Mat3 r1 = kin::rotation_body_to_global(agent.euler);
  if (dir_norm > 1e-12) {
    cmd.velocity.linear =
        cfg.max_speed * (r1.transpose() * (dir_global / dir_norm));
  }

  const kin::Mat3 r2inv = kin::euler_rate_matrix_inv(agent.euler);
  Vec3 ang = r2inv * attitude_error(agent, normal.direction);
  // the proportional attitude law has no stated limits; saturate for realism
  ang.x() = std::clamp(ang.x(), -cfg.r_max, cfg.r_max);
  ang.y() = std::clamp(ang.y(), -cfg.r_max, cfg.r_max);
  ang.z() = std::clamp(ang.z(), -cfg.s_max, cfg.s_max);
  cmd.velocity.angular = ang;
  cmd.rho_a = ang;
  return cmd;
}

ControlCommand surface_transfer_control(const AgentState& agent,
                                        const AgentConfig& cfg,
                                        const geo::SurfaceFamily& family,
                                        int tier,
                                        const geo::SurfaceNormal& normal) {
  if (normal.length <= cfg.body_radius) {
    throw SurfaceCollisionFault("agent touched the surface of interest");
  }
  (void)family;
  ControlCommand cmd;
  cmd.mode = Mode::STM;
  cmd.log_altitude = log_altitude(cfg, tier, normal.length);
  if (cmd.log_altitude == 0.0) {
    return cmd;  // exactly on the target surface: converged, hold
  }
  // ascend when below the assigned surface, descend when above
  const Vec3 dir_global =
      (cmd.log_altitude < 0.0 ? 1.0 : -1.0) * normal.direction;
  const kin::Mat3 r1 = kin::rotation_body_to_global(agent.euler);
  cmd.velocity.linear = cfg.max_speed * (r1.transpose() * dir_global);
  cmd.velocity.angular = Vec3::Zero();
  return cmd;
}

Vec3 partition_destination(const AgentState& agent,
                           const std::vector<double>& bounds, int power_index,
                           const geo::Spheroid& s) {
  const int n = static_cast<int>(bounds.size());
  if (power_index < 2 || power_index > n) {
    throw ValidationError("partition_destination: power index out of range");
  }
  const double upper = bounds[power_index - 2];
  const double lower = bounds[power_index - 1];
  const double z = (agent.position.z() < lower) ? lower : upper;
  const double lam = std::atan2(agent.position.y(), agent.position.x());
  const double w =
      s.a * std::sqrt(std::max(0.0, 1.0 - (z * z) / (s.c * s.c)));
  return Vec3(w * std::cos(lam), w * std::sin(lam), z);
}

}  // namespace covsim::ctl
