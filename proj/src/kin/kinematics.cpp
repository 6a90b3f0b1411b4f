#include "covsim/kin/kinematics.hpp"

#include <cmath>

namespace covsim::kin {

namespace {

double wrap_pi(double x) { return std::remainder(x, 2.0 * M_PI); }

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 pack(const AgentState& s) {
  Vec6 x;
  x << s.position, s.euler;
  return x;
}

Vec6 derivative(const Vec6& x, const BodyVelocity& vel) {
  const Vec3 euler = x.tail<3>();
  Vec6 dx;
  dx.head<3>() = rotation_body_to_global(euler) * vel.linear;
  dx.tail<3>() = euler_rate_matrix(euler) * vel.angular;
  return dx;
}

}  // namespace

Mat3 rotation_body_to_global(const Vec3& euler) {
  const double cF = std::cos(euler.x()), sF = std::sin(euler.x());
  const double cT = std::cos(euler.y()), sT = std::sin(euler.y());
  const double cP = std::cos(euler.z()), sP = std::sin(euler.z());
  Mat3 r;
  r << cT * cP, sF * sT * cP - cF * sP, cF * sT * cP + sF * sP,
       cT * sP, sF * sT * sP + cF * cP, cF * sT * sP - sF * cP,
       -sT,     sF * cT,                cF * cT;
  return r;
}

Mat3 euler_rate_matrix(const Vec3& euler) {
  const double cF = std::cos(euler.x()), sF = std::sin(euler.x());
  const double tT = std::tan(euler.y());
  const double secT = 1.0 / std::cos(euler.y());
  Mat3 r;
  r << 1.0, sF * tT,  cF * tT,
       0.0, cF,       -sF,
       0.0, sF * secT, cF * secT;
  return r;
}

Mat3 euler_rate_matrix_inv(const Vec3& euler) {
  const double cF = std::cos(euler.x()), sF = std::sin(euler.x());
  const double cT = std::cos(euler.y()), sT = std::sin(euler.y());
  Mat3 r;
  r << 1.0, 0.0, -sT,
       0.0, cF,  sF * cT,
       0.0, -sF, cF * cT;
  return r;
}

StepResult step(const AgentState& state, const BodyVelocity& vel, double dt) {
  const Vec6 x0 = pack(state);
  const Vec6 k1 = derivative(x0, vel);
  const Vec6 k2 = derivative(x0 + 0.5 * dt * k1, vel);
  const Vec6 k3 = derivative(x0 + 0.5 * dt * k2, vel);
  const Vec6 k4 = derivative(x0 + dt * k3, vel);
  const Vec6 x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  StepResult out;
  out.state.position = x1.head<3>();
  double phi = wrap_pi(x1[3]);
  double theta = x1[4];
  double psi = wrap_pi(x1[5]);
  if (theta > kThetaLimit) {
    theta = kThetaLimit;
    out.theta_clamped = true;
  } else if (theta < -kThetaLimit) {
    theta = -kThetaLimit;
    out.theta_clamped = true;
  }
  out.state.euler = Vec3(phi, theta, psi);
  return out;
}

}  // namespace covsim::kin
