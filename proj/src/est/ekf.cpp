#include "covsim/est/ekf.hpp"

#include <cmath>

#include "covsim/errors.hpp"

namespace covsim::est {

Mat3 MeasurementNoise::covariance() const {
  Mat3 r = Mat3::Zero();
  r(0, 0) = sigma_range * sigma_range;
  r(1, 1) = sigma_azimuth * sigma_azimuth;
  r(2, 2) = sigma_polar * sigma_polar;
  return r;
}

Vec3 spherical_of(const Vec3& p) {
  const double rho = p.norm();
  const double theta = (p.x() == 0.0 && p.y() == 0.0)
                           ? 0.0
                           : std::atan2(p.y(), p.x());
  const double psi = (rho > 0.0) ? std::acos(std::clamp(p.z() / rho, -1.0, 1.0))
                                 : 0.0;
  return Vec3(rho, theta, psi);
}

Vec3 cartesian_of(const Vec3& z) {
  const double rho = z[0], theta = z[1], psi = z[2];
  return Vec3(rho * std::sin(psi) * std::cos(theta),
              rho * std::sin(psi) * std::sin(theta), rho * std::cos(psi));
}

Vec3 measure(const Vec3& position, const MeasurementNoise& noise,
             const Vec3& draw) {
  Vec3 z = spherical_of(position);
  z[0] += noise.sigma_range * draw[0];
  z[1] += noise.sigma_azimuth * draw[1];
  z[2] += noise.sigma_polar * draw[2];
  return z;
}

namespace {

double wrap_pi(double x) { return std::remainder(x, 2.0 * M_PI); }

// Position covariance of the spherical inversion by unscented propagation of
// the measurement noise through cartesian_of.
Mat3 inversion_covariance(const Vec3& z, const Mat3& r) {
  constexpr int n = 3;
  const double kappa = 0.0;
  const double scale = std::sqrt(static_cast<double>(n) + kappa);
  const Mat3 sqrt_r = r.llt().matrixL();
  Vec3 pts[2 * n + 1];
  double wts[2 * n + 1];
  pts[0] = cartesian_of(z);
  wts[0] = kappa / (n + kappa);
  for (int i = 0; i < n; ++i) {
    const Vec3 d = scale * sqrt_r.col(i);
    pts[1 + 2 * i] = cartesian_of(z + d);
    pts[2 + 2 * i] = cartesian_of(z - d);
    wts[1 + 2 * i] = wts[2 + 2 * i] = 0.5 / (n + kappa);
  }
  Vec3 mean = Vec3::Zero();
  for (int i = 0; i < 2 * n + 1; ++i) mean += wts[i] * pts[i];
  Mat3 cov = Mat3::Zero();
  for (int i = 0; i < 2 * n + 1; ++i) {
    const Vec3 d = pts[i] - mean;
    cov += wts[i] * d * d.transpose();
  }
  return cov;
}

Eigen::Matrix<double, 3, 6> measurement_jacobian(const Vec3& p) {
  const double rho2 = p.squaredNorm();
  const double rho = std::sqrt(rho2);
  const double s2 = p.x() * p.x() + p.y() * p.y();
  const double s = std::sqrt(s2);
  Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
  h(0, 0) = p.x() / rho;
  h(0, 1) = p.y() / rho;
  h(0, 2) = p.z() / rho;
  h(1, 0) = -p.y() / s2;
  h(1, 1) = p.x() / s2;
  h(2, 0) = p.x() * p.z() / (rho2 * s);
  h(2, 1) = p.y() * p.z() / (rho2 * s);
  h(2, 2) = -s / rho2;
  return h;
}

}  // namespace

EkfEstimate ekf_init(const Vec3& z0, const Vec3& z1, double dt,
                     const MeasurementNoise& noise, double t_now) {
  if (!(dt > 0.0)) {
    throw ValidationError("ekf_init needs dt > 0");
  }
  const Vec3 p0 = cartesian_of(z0);
  const Vec3 p1 = cartesian_of(z1);
  const Mat3 r = noise.covariance();
  const Mat3 pp0 = inversion_covariance(z0, r);
  const Mat3 pp1 = inversion_covariance(z1, r);

  EkfEstimate est;
  est.x.head<3>() = p1;
  est.x.tail<3>() = (p1 - p0) / dt;
  est.last_update = t_now;
  constexpr double kVelInflation = 4.0;
  est.P.topLeftCorner<3, 3>() = pp1;
  est.P.topRightCorner<3, 3>() = pp1 / dt;
  est.P.bottomLeftCorner<3, 3>() = pp1 / dt;
  est.P.bottomRightCorner<3, 3>() = kVelInflation * (pp0 + pp1) / (dt * dt);
  est.P = 0.5 * (est.P + est.P.transpose()).eval();
  return est;
}

void ekf_predict(EkfEstimate& est, double dt) {
  Mat6 g = Mat6::Identity();
  g.topRightCorner<3, 3>() = dt * Mat3::Identity();
  est.x = g * est.x;
  est.P = g * est.P * g.transpose();
  est.P = 0.5 * (est.P + est.P.transpose()).eval();
  est.last_update += dt;
}

bool ekf_update(EkfEstimate& est, const Vec3& z,
                const MeasurementNoise& noise) {
  const Vec3 p = est.x.head<3>();
  const double s2 = p.x() * p.x() + p.y() * p.y();
  if (p.norm() < 1e-6 || s2 < 1e-12) {
    return false;  // spherical Jacobian singular at the origin / z-axis
  }
  const Eigen::Matrix<double, 3, 6> h = measurement_jacobian(p);
  const Mat3 r = noise.covariance();
  Vec3 innov = z - spherical_of(p);
  innov[1] = wrap_pi(innov[1]);
  innov[2] = wrap_pi(innov[2]);
  const Mat3 s_mat = h * est.P * h.transpose() + r;
  const Eigen::Matrix<double, 6, 3> k =
      est.P * h.transpose() * s_mat.inverse();
  est.x += k * innov;
  const Mat6 ikh = Mat6::Identity() - k * h;
  est.P = ikh * est.P * ikh.transpose() + k * r * k.transpose();
  est.P = 0.5 * (est.P + est.P.transpose()).eval();
  return true;
}

ImpactPrediction predict_impact(const Vec6& state, const geo::Spheroid& s,
                                double now) {
  ImpactPrediction out;
  const Vec3 p = state.head<3>();
  const Vec3 v = state.tail<3>();
  const Vec3 m(1.0 / (s.a * s.a), 1.0 / (s.a * s.a), 1.0 / (s.c * s.c));
  const double qa = v.cwiseProduct(m.cwiseProduct(v)).sum();
  const double qb = 2.0 * p.cwiseProduct(m.cwiseProduct(v)).sum();
  const double qc = p.cwiseProduct(m.cwiseProduct(p)).sum() - 1.0;
  if (qa <= 0.0) return out;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  // numerically stable smallest non-negative root
  const double t1 = (-qb - sq) / (2.0 * qa);
  const double t2 = (-qb + sq) / (2.0 * qa);
  double t = -1.0;
  if (t1 >= 0.0) {
    t = t1;
  } else if (t2 >= 0.0) {
    t = t2;
  }
  if (t < 0.0) return out;
  out.exists = true;
  out.time = now + t;
  out.point = p + t * v;
  return out;
}

}  // namespace covsim::est
