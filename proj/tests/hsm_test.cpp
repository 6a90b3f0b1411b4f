#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "covsim/hsm/automaton.hpp"

using namespace covsim;
using hsm::AgentDiscrete;
using hsm::Mode;
using hsm::WorldView;
using geo::Vec3;

namespace {

const geo::Spheroid kOblate(80.0, 20.0);
const geo::SurfaceFamily kFamily{kOblate, 0.5, 10.0, 4};

WorldView base_world(int n = 4) {
  static std::vector<double> bounds = geo::partition_bounds(kOblate, 4);
  WorldView w;
  w.t = 1000.0;
  w.t_star = 792.0;
  w.n_agents = n;
  w.proximity_radius = 10.0;
  w.eps1 = 10.0;
  w.eps2 = 0.05;
  const double g0 = geo::perimeter_factor(geo::Spheroid(85, 25));
  w.rtb_reserve = M_PI / (2.0 * 6.0) * (85.0 + 25.0) * g0;
  w.body_radius = 1.0;
  w.family = &kFamily;
  w.partition_bounds = &bounds;
  w.positions.assign(n, Vec3(85, 0, 0));
  w.discrete.assign(n, AgentDiscrete{});
  w.normal_length.assign(n, 5.0);
  w.assigned_impact_time.assign(n, 0.0);
  w.assigned_impact_valid.assign(n, false);
  for (auto& d : w.discrete) {
    d.deployed = true;
    d.mode = Mode::LC;
    d.tier = 0;
  }
  // spread agents out so no deadlock by default
  for (int i = 0; i < n; ++i) {
    const double lam = 2.0 * M_PI * i / n;
    w.positions[i] = Vec3(85 * std::cos(lam), 85 * std::sin(lam), 0.0);
  }
  return w;
}

}  // namespace

TEST_CASE("power index: deployment value and permutation") {
  CHECK(hsm::power_index(1, 0.0, 4, 792.0) == 4);
  CHECK(hsm::power_index(2, 198.0, 4, 792.0) == 4);
  for (double t : {0.0, 123.0, 400.0, 791.0, 792.0, 2500.0}) {
    std::set<int> seen;
    for (int i = 1; i <= 4; ++i) {
      const int ip = hsm::power_index(i, t, 4, 792.0);
      CHECK(ip >= 1);
      CHECK(ip <= 4);
      seen.insert(ip);
    }
    CHECK(seen.size() == 4);
  }
  // exactly one power-critical agent at any time
  for (double t = 0.0; t < 1600.0; t += 37.0) {
    int criticals = 0;
    for (int i = 1; i <= 4; ++i) {
      if (hsm::power_index(i, t, 4, 792.0) == 1) ++criticals;
    }
    CHECK(criticals == 1);
  }
}

TEST_CASE("assignment: closest latitude among eligible agents") {
  WorldView w = base_world();
  // agent z positions 25, 0, -10, -25; power-critical one excluded
  w.t = 594.0;  // i_p for agents 1..4: {1,2,3,4}
  w.positions[0] = Vec3(70, 0, 25);
  w.positions[1] = Vec3(70, 0, 0);
  w.positions[2] = Vec3(70, 0, -10);
  w.positions[3] = Vec3(70, 0, -25);
  w.discrete[0].critical = true;  // i_p = 1
  // impact at z = -20: nearest is agent 4 (dz 5), then agent 3 (dz 10)
  auto pick = hsm::assign_particle(w, -20.0);
  REQUIRE(pick.has_value());
  CHECK(*pick == 3);
  // agent 4 busy: picks agent 3
  w.discrete[3].has_particle = true;
  pick = hsm::assign_particle(w, -20.0);
  REQUIRE(pick.has_value());
  CHECK(*pick == 2);
  // tie |dz|: agents at z=-10 and z=-30 for impact -20: lower index wins
  w.discrete[3].has_particle = false;
  w.positions[3] = Vec3(70, 0, -30);
  pick = hsm::assign_particle(w, -20.0);
  REQUIRE(pick.has_value());
  CHECK(*pick == 2);
  // everyone busy or critical: deferral
  w.discrete[1].has_particle = true;
  w.discrete[2].has_particle = true;
  w.discrete[3].has_particle = true;
  CHECK(!hsm::assign_particle(w, -20.0).has_value());
}

TEST_CASE("deadlock: proximity threshold and priority rule") {
  WorldView w = base_world();
  auto groups = hsm::detect_deadlock(w);
  CHECK(groups.empty());
  // two agents at distance R + 0.1: no deadlock
  w.positions[0] = Vec3(85, 0, 0);
  w.positions[1] = Vec3(85, 10.1, 0);
  groups = hsm::detect_deadlock(w);
  CHECK(groups.empty());
  // at exactly R with t_F = {100, 50}: group of two, first prioritized
  w.positions[1] = Vec3(85, 10.0, 0);
  w.discrete[0].time_since_deploy = 100.0;
  w.discrete[1].time_since_deploy = 50.0;
  groups = hsm::detect_deadlock(w);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members == std::vector<int>{0, 1});
  CHECK(groups[0].priority_agent == 0);
  // three mutually close agents: one group, one priority
  w.positions[2] = Vec3(85, 5.0, 1.0);
  w.discrete[2].time_since_deploy = 260.0;
  groups = hsm::detect_deadlock(w);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members.size() == 3);
  CHECK(groups[0].priority_agent == 2);
}

TEST_CASE("guards: LC to RTB when power critical and timer due") {
  WorldView w = base_world();
  w.t = 594.0;
  w.discrete[0].critical = true;
  w.discrete[0].time_since_deploy = 770.0;  // past T* - reserve ~ 761
  const auto groups = hsm::detect_deadlock(w);
  const auto td = hsm::eval_guards(w, 0, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::RTB);
  CHECK(td->guard == "G(z0,z1)");
  // not due yet: stays
  w.discrete[0].time_since_deploy = 700.0;
  CHECK(!hsm::eval_guards(w, 0, groups).has_value());
}

TEST_CASE("guards: PIM releases the particle after impact in band") {
  WorldView w = base_world();
  w.t = 1000.0;
  // agent 2 (index 1): i_p at t=1000: 1+mod(2-2-5,4) = 4
  const int idx = 1;
  w.discrete[idx].mode = Mode::PIM;
  w.discrete[idx].has_particle = true;
  w.discrete[idx].assigned_particle = 7;
  w.discrete[idx].destination_valid = true;
  w.assigned_impact_valid[idx] = true;
  w.assigned_impact_time[idx] = 990.0;  // impact passed
  // place the agent inside its i_p=4 band, at its destination
  const auto& b = *w.partition_bounds;
  const double z_mid = 0.5 * (b[2] + b[3]);
  const double wrad = 80.0 * std::sqrt(1 - z_mid * z_mid / 400.0);
  w.discrete[idx].destination = Vec3(wrad, 0, z_mid);
  w.positions[idx] = Vec3(wrad + 5, 0, z_mid);
  // keep the others far away
  w.positions[0] = Vec3(0, -85, 1);
  w.positions[2] = Vec3(-85, 0, 0);
  w.positions[3] = Vec3(0, 85, 0);
  const auto groups = hsm::detect_deadlock(w);
  const auto td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::LC);
  CHECK(td->guard == "G(z2,z0)");
  REQUIRE(td->reset_flag.has_value());
  CHECK(*td->reset_flag == false);
}

TEST_CASE("guards: PIM explores within eps1 before impact, flag kept") {
  WorldView w = base_world();
  const int idx = 1;
  w.discrete[idx].mode = Mode::PIM;
  w.discrete[idx].has_particle = true;
  w.discrete[idx].destination_valid = true;
  w.discrete[idx].destination = Vec3(80, 0, 0);
  w.assigned_impact_valid[idx] = true;
  w.assigned_impact_time[idx] = 2000.0;  // future impact
  w.positions[idx] = Vec3(86, 0, 0);     // within eps1 of the projection
  w.positions[0] = Vec3(0, -85, 1);      // keep the ring clear of the subject
  w.positions[2] = Vec3(-85, 0, 0);
  w.positions[3] = Vec3(0, 85, 0);
  const auto groups = hsm::detect_deadlock(w);
  const auto td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::LC);
  REQUIRE(td->reset_flag.has_value());
  CHECK(*td->reset_flag == true);
  // and LC sends it back once outside eps1
  hsm::apply_transition(w.discrete[idx], *td);
  CHECK(w.discrete[idx].has_particle);
  w.positions[idx] = Vec3(60, 45, 0);  // far from the destination
  const auto back = hsm::eval_guards(w, idx, groups);
  REQUIRE(back.has_value());
  CHECK(back->to == Mode::PIM);
  CHECK(back->guard == "G(z0,z2)");
}

TEST_CASE("guards: STM exits by flag and band") {
  WorldView w = base_world();
  const int idx = 1;  // i_p = 1+mod(2-2-5,4) = 1+3 = 4 at t=1000
  w.discrete[idx].mode = Mode::STM;
  w.discrete[idx].tier = 1;
  w.normal_length[idx] = 15.0;  // converged on C_1: log(14/14)=0
  // with a particle: back to PIM
  w.discrete[idx].has_particle = true;
  auto groups = hsm::detect_deadlock(w);
  auto td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::PIM);
  CHECK(td->guard == "G(z4,z2)");
  CHECK(!td->reset_tier.has_value());  // tier kept while transferring
  // without a particle, in band: LC with tier reset
  w.discrete[idx].has_particle = false;
  const auto& b = *w.partition_bounds;
  const double z_mid = 0.5 * (b[2] + b[3]);
  const double wrad = 80.0 * std::sqrt(1 - z_mid * z_mid / 400.0);
  w.positions[idx] = Vec3(wrad + 15, 0, z_mid);
  td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::LC);
  REQUIRE(td->reset_tier.has_value());
  CHECK(*td->reset_tier == 0);
  // without a particle, out of band: PTM
  w.positions[idx].z() = 15.0;
  td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::PTM);
  // not converged: no exit
  w.normal_length[idx] = 12.0;
  CHECK(!hsm::eval_guards(w, idx, groups).has_value());
}

TEST_CASE("guards: deadlock ascends the non-priority agent from any mode") {
  WorldView w = base_world();
  w.positions[0] = Vec3(85, 0, 0);
  w.positions[1] = Vec3(85, 6, 0);
  w.discrete[0].time_since_deploy = 500.0;
  w.discrete[1].time_since_deploy = 300.0;
  w.discrete[1].mode = Mode::PTM;
  const auto groups = hsm::detect_deadlock(w);
  REQUIRE(groups.size() == 1);
  // agent 0 prioritized: no transition for it
  CHECK(!hsm::eval_guards(w, 0, groups).has_value());
  const auto td = hsm::eval_guards(w, 1, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::STM);
  CHECK(td->guard == "G(z3,z4)");
  REQUIRE(td->reset_tier.has_value());
  CHECK(*td->reset_tier == 1);
}

TEST_CASE("guards: arrival on a raised tier descends with tier reset") {
  WorldView w = base_world();
  const int idx = 1;
  w.discrete[idx].mode = Mode::PIM;
  w.discrete[idx].has_particle = true;
  w.discrete[idx].tier = 2;
  w.discrete[idx].destination_valid = true;
  w.discrete[idx].destination = Vec3(80, 0, 0);
  w.assigned_impact_valid[idx] = true;
  w.assigned_impact_time[idx] = 5000.0;
  // at the true projection of the destination onto C_2
  w.positions[idx] =
      geo::project_to_surface(kFamily, 2, w.discrete[idx].destination);
  w.normal_length[idx] =
      geo::foot_point_normal(kOblate, w.positions[idx]).length;
  const auto groups = hsm::detect_deadlock(w);
  const auto td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::STM);
  REQUIRE(td->reset_tier.has_value());
  CHECK(*td->reset_tier == 0);
}

TEST_CASE("guards: RTB redeploys only at the station with a full clock") {
  WorldView w = base_world();
  const int idx = 0;
  w.discrete[idx].mode = Mode::RTB;
  w.discrete[idx].critical = true;
  w.discrete[idx].time_since_deploy = 792.0;
  w.positions[idx] = Vec3(0, 2, 25);  // near F
  const auto groups = hsm::detect_deadlock(w);
  const auto td = hsm::eval_guards(w, idx, groups);
  REQUIRE(td.has_value());
  CHECK(td->to == Mode::PTM);
  CHECK(td->reset_clock);
  hsm::apply_transition(w.discrete[idx], *td);
  CHECK(w.discrete[idx].time_since_deploy == 0.0);
  CHECK(!w.discrete[idx].critical);
  // clock not full: waits
  w.discrete[idx].mode = Mode::RTB;
  w.discrete[idx].time_since_deploy = 780.0;
  CHECK(!hsm::eval_guards(w, idx, groups).has_value());
}
