#pragma once

#include <array>

#include "covsim/geo/geodesic.hpp"
#include "covsim/geo/spheroid.hpp"
#include "covsim/kin/kinematics.hpp"

namespace covsim::ctl {

using geo::Vec3;
using kin::AgentConfig;
using kin::AgentState;
using kin::BodyVelocity;

enum class Mode { LC, RTB, PIM, PTM, STM };

const char* mode_name(Mode m);

struct ControlCommand {
  Mode mode = Mode::LC;
  BodyVelocity velocity;
  // diagnostics
  Vec3 rho_l = Vec3::Zero();       // surface avoidance term, body frame
  Vec3 rho_a = Vec3::Zero();       // orientation alignment term, body frame
  double log_altitude = 0.0;       // ln((|n|-r)/((gamma+mu)R-r))
  Vec3 heading_tangent = Vec3::Zero();
};

// Gradient-following local coverage with the logarithmic surface-distance
// term and the weak attitude alignment toward -n.
// grad_floor: threshold on the planar gradient norm below which the
// translational gradient direction is meaningless and zeroed.
ControlCommand local_coverage_control(const AgentState& agent,
                                      const AgentConfig& cfg,
                                      const std::array<double, 5>& a_terms,
                                      const geo::SurfaceNormal& normal,
                                      double grad_floor = 1e-9);

// Geodesic-following position law used by intercept, partition transfer and
// return-to-base: tangential heading plus the log altitude correction, at
// full speed, with the proportional attitude law toward -n.
ControlCommand intercept_control(const AgentState& agent,
                                 const AgentConfig& cfg,
                                 const geo::SurfaceFamily& family, int tier,
                                 const Vec3& destination_on_surface,
                                 const geo::GeodesicSolution& geodesic,
                                 const geo::SurfaceNormal& normal, Mode mode);

// Pure normal-direction transfer between concentric surfaces.
ControlCommand surface_transfer_control(const AgentState& agent,
                                        const AgentConfig& cfg,
                                        const geo::SurfaceFamily& family,
                                        int tier,
                                        const geo::SurfaceNormal& normal);

// Closest point on the base surface at the agent's longitude on the assigned
// partition boundary.
Vec3 partition_destination(const AgentState& agent,
                           const std::vector<double>& bounds, int power_index,
                           const geo::Spheroid& s);

// Convergence functional for surface transfer: ln((|n|-r)/((gamma+mu)R-r)).
double log_altitude(const AgentConfig& cfg, int tier, double normal_length);

}  // namespace covsim::ctl
