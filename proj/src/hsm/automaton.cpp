#include "covsim/hsm/automaton.hpp"

#include <cmath>

#include "covsim/ctl/controllers.hpp"
#include "covsim/errors.hpp"

namespace covsim::hsm {

int power_index(int agent_index, double t, int n_agents, double t_star) {
  const long shift =
      agent_index - 2 - static_cast<long>(std::floor(t * n_agents / t_star));
  long m = shift % n_agents;
  if (m < 0) m += n_agents;
  return 1 + static_cast<int>(m);
}

std::vector<DeadlockGroup> detect_deadlock(const WorldView& world) {
  const int n = world.n_agents;
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (!world.discrete[i].deployed) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!world.discrete[j].deployed) continue;
      if ((world.positions[i] - world.positions[j]).norm() <=
          world.proximity_radius) {
        parent[find(i)] = find(j);
        any = true;
      }
    }
  }
  std::vector<DeadlockGroup> groups;
  if (!any) return groups;
  for (int root = 0; root < n; ++root) {
    if (!world.discrete[root].deployed || find(root) != root) continue;
    DeadlockGroup g;
    for (int i = 0; i < n; ++i) {
      if (world.discrete[i].deployed && find(i) == root) g.members.push_back(i);
    }
    if (g.members.size() < 2) continue;
    double best = -1.0;
    for (int i : g.members) {
      const double tf = world.discrete[i].time_since_deploy;
      if (tf > best) {
        best = tf;
        g.priority_agent = i;
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::optional<int> assign_particle(const WorldView& world, double impact_z) {
  int best = -1;
  double best_dz = 0.0;
  for (int i = 0; i < world.n_agents; ++i) {
    const AgentDiscrete& d = world.discrete[i];
    if (!d.deployed || d.has_particle || d.critical) continue;
    if (power_index(i + 1, world.t, world.n_agents, world.t_star) == 1)
      continue;
    const double dz = std::abs(impact_z - world.positions[i].z());
    if (best < 0 || dz < best_dz) {
      best = i;
      best_dz = dz;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

namespace {

struct GuardContext {
  int ip = 0;
  bool in_band = false;
  bool rtb_due = false;
  bool deadlocked = false;
  bool is_priority = false;
  bool arrived = false;          // within eps1 of the tier projection
  bool converged = false;        // |log altitude| < eps2
  bool impact_passed = false;
  double impact_time = 0.0;
  bool impact_valid = false;
  bool at_station = false;
  bool clock_full = false;       // t_iF >= T*
};

GuardContext make_context(const WorldView& world, int i,
                          const std::vector<DeadlockGroup>& groups) {
  GuardContext ctx;
  const AgentDiscrete& d = world.discrete[i];
  ctx.ip = power_index(i + 1, world.t, world.n_agents, world.t_star);
  const double z = world.positions[i].z();
  if (ctx.ip >= 2) {
    const auto& b = *world.partition_bounds;
    ctx.in_band = (z >= b[ctx.ip - 1] && z <= b[ctx.ip - 2]);
  }
  ctx.rtb_due =
      d.time_since_deploy >= world.t_star - world.rtb_reserve;
  ctx.clock_full = d.time_since_deploy >= world.t_star - 1e-9;
  for (const auto& g : groups) {
    for (int m : g.members) {
      if (m == i) {
        ctx.deadlocked = true;
        ctx.is_priority = (g.priority_agent == i);
      }
    }
  }
  if (d.destination_valid) {
    const Vec3 proj =
        geo::project_to_surface(*world.family, d.tier, d.destination);
    ctx.arrived = (world.positions[i] - proj).norm() <= world.eps1;
  }
  const double target =
      (world.family->gamma + d.tier) * world.family->sensing_range;
  const double height = world.normal_length[i];
  ctx.converged =
      std::abs(std::log((height - world.body_radius) /
                        (target - world.body_radius))) < world.eps2;
  ctx.impact_valid = world.assigned_impact_valid[i];
  ctx.impact_time = world.assigned_impact_time[i];
  ctx.impact_passed = ctx.impact_valid && world.t >= ctx.impact_time;
  ctx.at_station =
      (world.positions[i] - world.station()).norm() <= world.eps1;
  return ctx;
}

TransitionDecision make_decision(Mode from, Mode to, const char* guard,
                                 const GuardContext& ctx) {
  TransitionDecision td;
  td.from = from;
  td.to = to;
  td.guard = guard;
  td.arrived = ctx.arrived;
  td.deadlocked = ctx.deadlocked;
  td.impact_time = ctx.impact_time;
  td.impact_valid = ctx.impact_valid;
  return td;
}

}  // namespace

std::optional<TransitionDecision> eval_guards(
    const WorldView& world, int i, const std::vector<DeadlockGroup>& groups) {
  const AgentDiscrete& d = world.discrete[i];
  if (!d.deployed) return std::nullopt;
  const GuardContext ctx = make_context(world, i, groups);
  const bool ascend = ctx.deadlocked && !ctx.is_priority;
  // arrival-descend case of the surface-transfer edges
  const bool descend = ctx.arrived && d.tier > 0 &&
                       (!ctx.deadlocked || ctx.is_priority);

  switch (d.mode) {
    case Mode::LC: {
      if (ascend) {
        auto td = make_decision(Mode::LC, Mode::STM, "G(z0,z4)", ctx);
        td.reset_tier = d.tier + 1;
        return td;
      }
      if (ctx.ip == 1 && ctx.rtb_due && !d.has_particle) {
        // an interception assigned before criticality completes first
        return make_decision(Mode::LC, Mode::RTB, "G(z0,z1)", ctx);
      }
      if (d.has_particle && d.destination_valid && !ctx.arrived) {
        auto td = make_decision(Mode::LC, Mode::PIM, "G(z0,z2)", ctx);
        td.reset_flag = true;
        return td;
      }
      if (ctx.ip != 1 && !ctx.in_band) {
        return make_decision(Mode::LC, Mode::PTM, "G(z0,z3)", ctx);
      }
      return std::nullopt;
    }
    case Mode::RTB: {
      if (ctx.at_station && ctx.clock_full) {
        auto td = make_decision(Mode::RTB, Mode::PTM, "G(z1,z3)", ctx);
        td.reset_clock = true;
        return td;
      }
      return std::nullopt;
    }
    case Mode::PIM: {
      if (ascend || descend) {
        auto td = make_decision(Mode::PIM, Mode::STM, "G(z2,z4)", ctx);
        td.reset_tier = descend ? 0 : d.tier + 1;
        return td;
      }
      if (ctx.arrived && d.tier == 0 && ctx.impact_passed && ctx.ip == 1 &&
          ctx.rtb_due) {
        auto td = make_decision(Mode::PIM, Mode::RTB, "G(z2,z1)", ctx);
        td.reset_flag = false;
        return td;
      }
      if (ctx.arrived && d.tier == 0 && ctx.impact_passed && ctx.ip != 1 &&
          !ctx.in_band) {
        auto td = make_decision(Mode::PIM, Mode::PTM, "G(z2,z3)", ctx);
        td.reset_flag = false;
        return td;
      }
      const bool done_and_placed =
          ctx.impact_passed &&
          ((ctx.ip != 1 && ctx.in_band) || (ctx.ip == 1 && !ctx.rtb_due));
      const bool exploring =
          !ctx.impact_passed && ctx.arrived && d.tier == 0;
      if (done_and_placed || exploring) {
        auto td = make_decision(Mode::PIM, Mode::LC, "G(z2,z0)", ctx);
        td.reset_flag = !ctx.impact_passed;  // 0 if t >= t_ck, else 1
        return td;
      }
      return std::nullopt;
    }
    case Mode::PTM: {
      if (ascend || descend) {
        auto td = make_decision(Mode::PTM, Mode::STM, "G(z3,z4)", ctx);
        td.reset_tier = descend ? 0 : d.tier + 1;
        return td;
      }
      if (d.has_particle && d.destination_valid && !ctx.arrived) {
        auto td = make_decision(Mode::PTM, Mode::PIM, "G(z3,z2)", ctx);
        td.reset_flag = true;
        return td;
      }
      if (ctx.ip == 1 || ctx.in_band) {
        return make_decision(Mode::PTM, Mode::LC, "G(z3,z0)", ctx);
      }
      return std::nullopt;
    }
    case Mode::STM: {
      if (d.has_particle && ctx.converged) {
        return make_decision(Mode::STM, Mode::PIM, "G(z4,z2)", ctx);
      }
      if (!d.has_particle && ctx.converged &&
          (ctx.ip == 1 || ctx.in_band)) {
        auto td = make_decision(Mode::STM, Mode::LC, "G(z4,z0)", ctx);
        td.reset_tier = 0;
        return td;
      }
      if (!d.has_particle && ctx.converged && ctx.ip != 1 && !ctx.in_band) {
        return make_decision(Mode::STM, Mode::PTM, "G(z4,z3)", ctx);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void apply_transition(AgentDiscrete& d, const TransitionDecision& td) {
  d.mode = td.to;
  if (td.reset_flag.has_value()) {
    d.has_particle = *td.reset_flag && d.has_particle;
    if (!*td.reset_flag) {
      d.has_particle = false;
      d.assigned_particle = -1;
    }
  }
  if (td.reset_tier.has_value()) {
    d.tier = *td.reset_tier;
  }
  if (td.reset_clock) {
    d.time_since_deploy = 0.0;
    d.critical = false;
  }
}

}  // namespace covsim::hsm
