#pragma once

#include <Eigen/Dense>

#include "covsim/cov/mesh.hpp"
#include "covsim/est/ekf.hpp"

namespace covsim::est {

struct DecayParams {
  double lambda = 0.05;      // decay rate tuning parameter, < 1 recommended
  double horizon_pad = 5.0;  // seconds of horizon beyond estimated impact
  int min_nodes = 64;        // trapezoidal nodes over the horizon
  double node_spacing = 2.0; // target node spacing in seconds
};

// Accumulates this particle's decay rate field into `rate` (per cell).
// Lambda_k(cell) integrates lambda * N(cell; p'(tau), P'(tau)) over the
// horizon with the trapezoidal rule; the predicted covariance is
// G P G^T + eps I. Returns the number of nodes whose unregularized
// covariance was not positive definite (reported by the caller).
int add_decay_field(const EkfEstimate& est, const ImpactPrediction& impact,
                    double now, const DecayParams& params,
                    const cov::SurfaceMesh& mesh, Eigen::VectorXd& rate);

}  // namespace covsim::est
