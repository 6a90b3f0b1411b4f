#pragma once

#include <Eigen/Dense>

namespace covsim::kin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Pitch is clamped this far inside +-pi/2 to keep the Euler rate map
// invertible; clamp events are reported to the caller.
constexpr double kThetaLimit = M_PI / 2.0 - 1e-3;

// Pose: global position and 3-2-1 Euler angles (roll, pitch, yaw).
struct AgentState {
  Vec3 position = Vec3::Zero();
  Vec3 euler = Vec3::Zero();  // (Phi, Theta, Psi)
};

// Linear (u,v,w) and angular (q,r,s) velocities in the body frame.
struct BodyVelocity {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

struct AgentConfig {
  double body_radius = 1.0;
  double sensing_range = 10.0;
  double half_angle = M_PI / 6.0;
  double eta = 100.0;
  double k_u = 1.0, k_v = 5.0, k_w = 1.0;
  double k_r = 0.1, k_s = 0.1;
  double r_max = 0.4, s_max = 0.4;  // angular rate saturations
  double max_speed = 6.0;           // U_max^agt
  double xi = 0.05;
  double gamma = 0.5;
};

// Body-to-global rotation for 3-2-1 Euler angles (first column is the body
// x axis resolved in the global frame).
Mat3 rotation_body_to_global(const Vec3& euler);

// Maps body angular rates (q,r,s) to Euler angle rates; singular at
// Theta = +-pi/2.
Mat3 euler_rate_matrix(const Vec3& euler);

// Inverse map, Euler angle rates to body rates. Well defined everywhere.
Mat3 euler_rate_matrix_inv(const Vec3& euler);

struct StepResult {
  AgentState state;
  bool theta_clamped = false;
};

// RK4 integration of the rigid-body kinematics with the body velocity held
// constant over the step. Angles are wrapped, pitch clamped.
StepResult step(const AgentState& state, const BodyVelocity& vel, double dt);

}  // namespace covsim::kin
