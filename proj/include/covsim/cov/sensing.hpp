#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "covsim/cov/mesh.hpp"
#include "covsim/kin/kinematics.hpp"

namespace covsim::cov {

using kin::AgentConfig;
using kin::AgentState;

// Per-cell accumulated coverage level Q and the target level C*.
struct CoverageField {
  Eigen::VectorXd q;
  double c_star = 20.0;

  CoverageField() = default;
  CoverageField(std::size_t cells, double target, double initial)
      : q(Eigen::VectorXd::Constant(cells, initial)), c_star(target) {}
};

// Sensing quality S at a query point; zero outside the spherical-sector
// footprint and at the vertex.
double sensing_value(const AgentState& agent, const AgentConfig& cfg,
                     const Vec3& point);

// S with numerical partials wrt the agent position and (Theta, Psi).
struct SensingEvaluation {
  double value = 0.0;
  Vec3 d_position = Vec3::Zero();
  double d_theta = 0.0;
  double d_psi = 0.0;
};

SensingEvaluation sensing_partials(const AgentState& agent,
                                   const AgentConfig& cfg, const Vec3& point);

struct AgentPose {
  AgentState state;
  const AgentConfig* config;
};

// One integration step of the coverage dynamics: q += (sum_i S_i - decay) dt,
// clamped at zero. `decay_rate` may be empty (no intruders) or per-cell.
// Touched cell indices are appended to `touched` (for incremental error
// updates); scratch is reused between calls.
void accumulate_coverage(CoverageField& field, const SurfaceMesh& mesh,
                         const std::vector<AgentPose>& agents,
                         const Eigen::VectorXd& decay_rate, double dt,
                         std::vector<int>& touched, std::vector<int>& scratch);

// Global coverage error E = sum h(C* - q) area with h(w) = max(0,w)^3.
double coverage_error(const CoverageField& field, const SurfaceMesh& mesh);
double coverage_error_max(const CoverageField& field, const SurfaceMesh& mesh);

// Local coverage integral terms a_1..a_5 (cell sums over the sensing range)
// and the diagnostic a_0 computed from the previous step's coverage rate.
struct CoverageTerms {
  std::array<double, 5> a{};
  double a0 = 0.0;
};

CoverageTerms local_coverage_terms(const AgentState& agent,
                                   const AgentConfig& cfg,
                                   const CoverageField& field,
                                   const SurfaceMesh& mesh,
                                   const Eigen::VectorXd* q_rate = nullptr);

}  // namespace covsim::cov
