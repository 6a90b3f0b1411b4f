#pragma once

#include <Eigen/Dense>
#include <optional>

#include "covsim/geo/spheroid.hpp"

namespace covsim::est {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Ground-truth particle: position + constant velocity in the global frame.
struct ParticleTruth {
  int id = -1;
  Vec6 state = Vec6::Zero();
  double spawn_time = 0.0;
  double detect_time = -1.0;  // < 0 until detected
  double impact_time = 0.0;   // ground truth, set by the spawner
  Vec3 impact_point = Vec3::Zero();
  bool alive = true;

  Vec3 position() const { return state.head<3>(); }
  Vec3 velocity() const { return state.tail<3>(); }
};

struct MeasurementNoise {
  double sigma_range = 0.25;
  double sigma_azimuth = 0.5 * M_PI / 180.0;  // radians
  double sigma_polar = 0.5 * M_PI / 180.0;

  Mat3 covariance() const;
};

// Spherical measurement (range, azimuth, polar) of a Cartesian position.
Vec3 spherical_of(const Vec3& p);
Vec3 cartesian_of(const Vec3& z);

// Measurement with additive Gaussian noise; `draw` is a standard-normal
// 3-vector supplied by the caller's RNG stream.
Vec3 measure(const Vec3& position, const MeasurementNoise& noise,
             const Vec3& draw);

struct EkfEstimate {
  Vec6 x = Vec6::Zero();
  Mat6 P = Mat6::Identity();
  double last_update = 0.0;
};

// Two-point initialization from consecutive measurements dt apart. The
// position covariance comes from sigma-point propagation of the measurement
// noise through the spherical inversion; the velocity block is the finite
// difference covariance inflated for conservatism.
EkfEstimate ekf_init(const Vec3& z0, const Vec3& z1, double dt,
                     const MeasurementNoise& noise, double t_now);

// Exact constant-velocity predict (no process noise).
void ekf_predict(EkfEstimate& est, double dt);

// Joseph-form measurement update; returns false when the geometry makes the
// Jacobian unusable (range near zero) and the update is skipped.
bool ekf_update(EkfEstimate& est, const Vec3& z, const MeasurementNoise& noise);

struct ImpactPrediction {
  bool exists = false;
  double time = 0.0;   // absolute time of impact
  Vec3 point = Vec3::Zero();
};

// Earliest forward intersection of the estimated trajectory with the
// surface; exists=false when the ray misses.
ImpactPrediction predict_impact(const Vec6& state, const geo::Spheroid& s,
                                double now);

}  // namespace covsim::est
