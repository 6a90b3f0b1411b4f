#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covsim/ctl/controllers.hpp"
#include "covsim/est/ekf.hpp"
#include "covsim/geo/spheroid.hpp"

namespace covsim::hsm {

using ctl::Mode;
using geo::Vec3;

// Discrete state of one agent. `has_particle` is the assignment flag proper;
// `critical` is the power-critical flag raised the instant i_p becomes 1.
// The automaton flag f_i of the formal model is their disjunction.
struct AgentDiscrete {
  Mode mode = Mode::PTM;
  bool deployed = false;
  bool has_particle = false;
  bool critical = false;
  int assigned_particle = -1;
  int tier = 0;              // surface assignment index mu_i
  double time_since_deploy = 0.0;  // t_iF
  Vec3 destination = Vec3::Zero();  // p_id on the base surface
  bool destination_valid = false;

  bool flag() const { return has_particle || critical; }
};

// Frozen per-step view of the world used for guard evaluation.
struct WorldView {
  double t = 0.0;
  double t_star = 0.0;
  int n_agents = 0;
  double proximity_radius = 0.0;  // R
  double eps1 = 0.0;
  double eps2 = 0.0;
  double rtb_reserve = 0.0;  // (pi/(2U))(a0+c0) g0
  double body_radius = 1.0;
  const geo::SurfaceFamily* family = nullptr;
  const std::vector<double>* partition_bounds = nullptr;

  std::vector<Vec3> positions;           // deployed agents; undeployed NaN
  std::vector<AgentDiscrete> discrete;
  std::vector<double> normal_length;     // ||n_i|| to the base surface
  // per-agent estimated impact time of the assigned particle (if any)
  std::vector<double> assigned_impact_time;
  std::vector<bool> assigned_impact_valid;

  Vec3 station() const {  // F at the north pole of C_0
    return Vec3(0, 0, family->base.c + family->offset(0));
  }
};

// Power index: 1 + mod(i - 2 - floor(t N / T*), N) with 1-based agent index.
int power_index(int agent_index, double t, int n_agents, double t_star);

// Deadlock groups: connected components of the proximity graph over deployed
// agents. Each group lists its members and the prioritized agent (largest
// time since deployment, ties to the lower index).
struct DeadlockGroup {
  std::vector<int> members;
  int priority_agent = -1;
};
std::vector<DeadlockGroup> detect_deadlock(const WorldView& world);

// Particle assignment: eligible agents are deployed, unassigned, not
// power-critical. Returns the chosen agent or nullopt (deferral).
std::optional<int> assign_particle(const WorldView& world,
                                   double impact_z);

struct TransitionDecision {
  Mode from;
  Mode to;
  std::string guard;          // e.g. "G(z0,z4)"
  // resets applied on this edge
  std::optional<bool> reset_flag;       // f_i
  std::optional<int> reset_tier;        // mu_i
  bool reset_clock = false;             // t_iF := 0
  // context captured for the log validator
  bool arrived = false;       // within eps1 of the tier projection
  bool deadlocked = false;
  double impact_time = 0.0;
  bool impact_valid = false;
};

// Evaluates the guard set for agent `i` on the frozen world snapshot and
// returns the highest-priority enabled edge, if any. Deadlock groups are
// computed once per step and passed in.
std::optional<TransitionDecision> eval_guards(
    const WorldView& world, int i, const std::vector<DeadlockGroup>& groups);

// Applies a decision to the discrete state (mode + resets).
void apply_transition(AgentDiscrete& d, const TransitionDecision& td);

}  // namespace covsim::hsm
