#include "covsim/est/decay.hpp"

#include <cmath>

namespace covsim::est {

namespace {

constexpr double kChi2Cutoff = 40.0;  // ~6.3 sigma; tail mass is negligible

struct NodeGaussian {
  Vec3 mean;
  Mat3 chol_lower;  // L with L L^T = P'
  double norm_const;
  double trace;
};

bool build_gaussian(const EkfEstimate& est, double tau, double eps_reg,
                    NodeGaussian& out, bool& needed_regularization) {
  Eigen::Matrix<double, 3, 6> g;
  g << Mat3::Identity(), tau * Mat3::Identity();
  out.mean = g * est.x;
  Mat3 p = g * est.P * g.transpose();
  p = 0.5 * (p + p.transpose()).eval();
  Eigen::LLT<Mat3> llt(p);
  if (llt.info() != Eigen::Success) {
    needed_regularization = true;
  }
  p += eps_reg * Mat3::Identity();
  llt.compute(p);
  if (llt.info() != Eigen::Success) {
    return false;  // pathological even after regularization
  }
  out.chol_lower = llt.matrixL();
  const double det_sqrt = out.chol_lower.diagonal().prod();
  out.norm_const = 1.0 / (std::pow(2.0 * M_PI, 1.5) * det_sqrt);
  out.trace = p.trace();
  return true;
}

double gaussian_pdf(const NodeGaussian& g, const Vec3& x) {
  const Vec3 d = x - g.mean;
  const Vec3 y = g.chol_lower.triangularView<Eigen::Lower>().solve(d);
  const double m2 = y.squaredNorm();
  if (m2 > kChi2Cutoff) return 0.0;
  return g.norm_const * std::exp(-0.5 * m2);
}

}  // namespace

int add_decay_field(const EkfEstimate& est, const ImpactPrediction& impact,
                    double now, const DecayParams& params,
                    const cov::SurfaceMesh& mesh, Eigen::VectorXd& rate) {
  const double remaining = impact.exists ? std::max(0.0, impact.time - now)
                                         : 0.0;
  const double horizon = remaining + params.horizon_pad;
  if (horizon <= 0.0) return 0;
  const int n_nodes = std::max(
      params.min_nodes,
      static_cast<int>(std::ceil(horizon / params.node_spacing)) + 1);
  const double dtau = horizon / (n_nodes - 1);
  const double eps_reg =
      1e-6 * mesh.spheroid().a * mesh.spheroid().a;

  int regularized = 0;
  static thread_local std::vector<int> nearby;
  const double surface_reach = mesh.spheroid().a;  // outermost surface radius
  for (int i = 0; i < n_nodes; ++i) {
    const double tau = i * dtau;
    const double weight =
        (i == 0 || i == n_nodes - 1) ? 0.5 * dtau : dtau;
    NodeGaussian g;
    bool reg = false;
    if (!build_gaussian(est, tau, eps_reg, g, reg)) continue;
    if (reg) ++regularized;
    // skip nodes whose peak contribution cannot matter
    if (params.lambda * weight * g.norm_const < 1e-14) continue;
    // conservative reach of the cutoff ellipsoid
    const double r_cut = std::sqrt(kChi2Cutoff * g.trace);
    // skip nodes that cannot reach the surface at all
    const double rho = g.mean.norm();
    if (rho - r_cut > surface_reach) continue;          // too far outside
    if (rho + r_cut < mesh.spheroid().c) continue;      // too deep inside
    mesh.cells_within(g.mean, r_cut, nearby);
    for (int idx : nearby) {
      const double pdf = gaussian_pdf(g, mesh.cells()[idx].center);
      if (pdf > 0.0) {
        rate[idx] += params.lambda * weight * pdf;
      }
    }
  }
  return regularized;
}

}  // namespace covsim::est
