#include "covsim/eng/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "covsim/eng/checkers.hpp"
#include "covsim/eng/rng.hpp"
#include "covsim/eng/spawner.hpp"
#include "covsim/errors.hpp"
#include "covsim/geo/geodesic.hpp"

namespace covsim::eng {

namespace {

using geo::Vec3;
using nlohmann::ordered_json;

struct AgentRuntime {
  kin::AgentState state;
  hsm::AgentDiscrete disc;
  geo::SurfaceNormal normal;   // wrt the surface of interest, refreshed per step
  bool theta_clamp_latch = false;
};

struct ParticleRuntime {
  est::ParticleTruth truth;
  bool have_z0 = false;
  est::Vec3 z0 = est::Vec3::Zero();
  bool have_est = false;
  est::EkfEstimate est;
  est::ImpactPrediction pred;
  int assigned_agent = -1;
  double dwell = 0.0;
  bool intercepted_logged = false;
  bool deferral_logged = false;
  ParticleOutcome outcome;
};

double cube(double x) { return x * x * x; }

}  // namespace

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> warnings;
  if (s.n_agents < 2) throw ValidationError("need at least two agents");
  if (!(s.dt > 0.0)) throw ValidationError("dt must be positive");
  if (s.duration < 0.0) throw ValidationError("duration must be >= 0");
  if (!(s.t_star > 0.0)) throw ValidationError("T* must be positive");
  if (s.agent.half_angle <= 0.0 || s.agent.half_angle >= M_PI / 2.0) {
    throw ValidationError("half angle must lie in (0, pi/2)");
  }
  if (s.agent.eta < 100.0) throw ValidationError("eta must be >= 100");
  if (s.agent.gamma <= 0.0 || s.agent.gamma > 1.0) {
    throw ValidationError("gamma must lie in (0, 1]");
  }
  const double gain_norm = std::sqrt(s.agent.k_u * s.agent.k_u +
                                     s.agent.k_v * s.agent.k_v +
                                     s.agent.k_w * s.agent.k_w);
  if (gain_norm > s.agent.max_speed * (1.0 + 1e-12)) {
    throw ValidationError("sqrt(ku^2+kv^2+kw^2) must not exceed U_max");
  }
  if (s.agent.body_radius <= 0.0) throw ValidationError("body radius <= 0");
  if (s.agent.gamma * s.agent.sensing_range <= s.agent.body_radius) {
    throw ValidationError("gamma R must exceed the body radius");
  }
  if (s.mesh_cells < 100) throw ValidationError("mesh too coarse");
  if (s.coverage_target <= 0.0) throw ValidationError("C* must be positive");
  if (s.initial_coverage < 0.0) throw ValidationError("initial coverage < 0");
  if (s.spawning_enabled) {
    if (s.spawn_period <= 0.0) throw ValidationError("spawn period <= 0");
    if (s.intruder_max_speed <= 0.0) throw ValidationError("U_int <= 0");
    if (s.detection_range <= 0.0) throw ValidationError("R_det <= 0");
    if (s.decay_lambda <= 0.0) throw ValidationError("lambda <= 0");
    if (s.decay_lambda >= 1.0) {
      warnings.push_back("decay lambda >= 1; rates below 1 are recommended");
    }
    if (s.noise.sigma_range <= 0.0 || s.noise.sigma_azimuth <= 0.0 ||
        s.noise.sigma_polar <= 0.0) {
      throw ValidationError("measurement sigmas must be positive");
    }
  }
  if (s.dt * s.agent.max_speed > s.agent.sensing_range / 10.0) {
    warnings.push_back(
        "dt * U_max exceeds R/10: discrete-time proximity violations become "
        "possible (documented anomaly regime)");
  }
  return warnings;
}

Engine::Engine(const Scenario& scenario)
    : scn_(scenario),
      family_{scenario.spheroid, scenario.agent.gamma,
              scenario.agent.sensing_range, scenario.n_agents} {
  validate(scn_);
  mesh_ = std::make_unique<cov::SurfaceMesh>(scn_.spheroid, scn_.mesh_cells);
  bounds_ = geo::partition_bounds(scn_.spheroid, scn_.n_agents);
  const geo::Spheroid inner = family_.surface(0);
  rtb_reserve_ = M_PI / (2.0 * scn_.agent.max_speed) * (inner.a + inner.c) *
                 geo::perimeter_factor(inner);
  capacity_window_ = p_max_bound(scn_) / scn_.agent.max_speed;
}

RunResult Engine::run(const RunSinks& sinks) {
  RunResult result;
  result.field = cov::CoverageField(mesh_->size(), scn_.coverage_target,
                                    scn_.initial_coverage);
  if (scn_.duration <= 0.0) {
    result.e_norm_final = cov::coverage_error(result.field, *mesh_) /
                          cov::coverage_error_max(result.field, *mesh_);
    return result;
  }

  RngStreams rng(scn_.seed);
  std::normal_distribution<double> gauss;
  const Vec3 station(0, 0, scn_.spheroid.c + family_.offset(0));
  const double grad_floor = 1e-9 * scn_.coverage_target *
                            scn_.coverage_target *
                            cube(scn_.agent.sensing_range);

  auto emit = [&](ordered_json j) {
    if (sinks.event) sinks.event(j);
  };

  std::vector<AgentRuntime> agents(scn_.n_agents);
  std::vector<ParticleRuntime> particles;
  std::deque<double> impact_window;  // impact times for the capacity monitor

  const int n_steps = static_cast<int>(std::round(scn_.duration / scn_.dt));
  double next_spawn = scn_.spawning_enabled
                          ? scn_.first_spawn
                          : std::numeric_limits<double>::infinity();
  double next_snapshot = (scn_.snapshot_period > 0.0)
                             ? 0.0
                             : std::numeric_limits<double>::infinity();
  int spawn_count = 0;

  double e_value = cov::coverage_error(result.field, *mesh_);
  const double e_max = cov::coverage_error_max(result.field, *mesh_);
  Eigen::VectorXd decay_rate = Eigen::VectorXd::Zero(mesh_->size());
  Eigen::VectorXd q_prev = result.field.q;
  std::vector<int> touched, scratch;

  try {
    for (int step = 0; step <= n_steps; ++step) {
      const double t = step * scn_.dt;

      // --- deployments ---------------------------------------------------
      for (int i = 0; i < scn_.n_agents; ++i) {
        const double deploy_at = i * scn_.t_star / scn_.n_agents;
        if (!agents[i].disc.deployed && t >= deploy_at - 1e-9) {
          agents[i].disc = hsm::AgentDiscrete{};
          agents[i].disc.deployed = true;
          agents[i].disc.mode = ctl::Mode::PTM;
          agents[i].state.position = station;
          agents[i].state.euler = Vec3(0.0, kin::kThetaLimit, 0.0);
          emit({{"t", t}, {"type", "deploy"}, {"agent", i + 1}});
        }
      }

      // --- spawning -------------------------------------------------------
      while (t >= next_spawn - 1e-9) {
        ParticleRuntime pr;
        pr.truth = spawn_intruder(rng.spawner, scn_, t, spawn_count);
        pr.outcome.id = pr.truth.id;
        pr.outcome.spawn_time = t;
        particles.push_back(std::move(pr));
        emit({{"t", t},
              {"type", "spawn"},
              {"particle", spawn_count},
              {"impact_time", particles.back().truth.impact_time}});
        ++spawn_count;
        next_spawn += scn_.spawn_period;
      }

      // --- truth propagation, impacts, detection, estimation ---------------
      const double detect_radius = scn_.detection_range + scn_.spheroid.a;
      for (auto& pr : particles) {
        if (!pr.truth.alive) continue;
        if (pr.truth.spawn_time < t - 1e-12) {
          pr.truth.state.head<3>() += scn_.dt * pr.truth.state.tail<3>();
        }
        // ground-truth impact
        if (scn_.spheroid.implicit(pr.truth.position()) <= 1.0) {
          pr.truth.alive = false;
          pr.outcome.impact_time = pr.truth.impact_time;
          pr.outcome.intercepted = pr.dwell >= scn_.dwell_min;
          impact_window.push_back(pr.truth.impact_time);
          emit({{"t", t},
                {"type", "impact"},
                {"particle", pr.truth.id},
                {"intercepted", pr.outcome.intercepted},
                {"dwell", pr.dwell}});
          // capacity monitor (Remark 1 premise)
          while (!impact_window.empty() &&
                 impact_window.front() < t - capacity_window_) {
            impact_window.pop_front();
          }
          if (static_cast<int>(impact_window.size()) > scn_.n_agents - 1) {
            emit({{"t", t},
                  {"type", "capacity_warning"},
                  {"impacts_in_window",
                   static_cast<int>(impact_window.size())}});
          }
          continue;
        }
        // detection and filtering
        if (pr.truth.detect_time < 0.0) {
          if (pr.truth.position().norm() <= detect_radius) {
            pr.truth.detect_time = t;
            pr.outcome.detect_time = t;
            pr.z0 = est::measure(
                pr.truth.position(), scn_.noise,
                est::Vec3(gauss(rng.measurement), gauss(rng.measurement),
                          gauss(rng.measurement)));
            pr.have_z0 = true;
            emit({{"t", t}, {"type", "detection"}, {"particle", pr.truth.id}});
          }
          continue;
        }
        const est::Vec3 z = est::measure(
            pr.truth.position(), scn_.noise,
            est::Vec3(gauss(rng.measurement), gauss(rng.measurement),
                      gauss(rng.measurement)));
        if (!pr.have_est) {
          pr.est = est::ekf_init(pr.z0, z, scn_.dt, scn_.noise, t);
          pr.have_est = true;
        } else {
          est::ekf_predict(pr.est, scn_.dt);
          if (!est::ekf_update(pr.est, z, scn_.noise)) {
            emit({{"t", t},
                  {"type", "ekf_update_skipped"},
                  {"particle", pr.truth.id}});
          }
        }
        pr.pred = est::predict_impact(pr.est.x, scn_.spheroid, t);
      }

      // --- assignment (deferred retries, earliest impact first) -----------
      std::vector<int> pending;
      for (int k = 0; k < static_cast<int>(particles.size()); ++k) {
        auto& pr = particles[k];
        if (pr.truth.alive && pr.have_est && pr.assigned_agent < 0 &&
            pr.pred.exists) {
          pending.push_back(k);
        }
      }
      std::stable_sort(pending.begin(), pending.end(), [&](int a, int b) {
        if (particles[a].pred.time != particles[b].pred.time) {
          return particles[a].pred.time < particles[b].pred.time;
        }
        return a < b;
      });
      for (int k : pending) {
        auto& pr = particles[k];
        // build a minimal view for the assignment rule
        hsm::WorldView view;
        view.t = t;
        view.t_star = scn_.t_star;
        view.n_agents = scn_.n_agents;
        view.positions.resize(scn_.n_agents);
        view.discrete.resize(scn_.n_agents);
        for (int i = 0; i < scn_.n_agents; ++i) {
          view.positions[i] = agents[i].state.position;
          view.discrete[i] = agents[i].disc;
        }
        const auto pick = hsm::assign_particle(view, pr.pred.point.z());
        if (pick.has_value()) {
          pr.assigned_agent = *pick;
          pr.outcome.first_assign_time = t;
          pr.outcome.deferred = pr.deferral_logged;
          agents[*pick].disc.has_particle = true;
          agents[*pick].disc.assigned_particle = pr.truth.id;
          emit({{"t", t},
                {"type", "assignment"},
                {"particle", pr.truth.id},
                {"agent", *pick + 1},
                {"deferred", pr.deferral_logged}});
        } else if (!pr.deferral_logged) {
          pr.deferral_logged = true;
          emit({{"t", t}, {"type", "deferral"}, {"particle", pr.truth.id}});
        }
      }

      // release finished assignments regardless of mode: the estimate's
      // impact time has passed and the particle is gone
      for (int i = 0; i < scn_.n_agents; ++i) {
        auto& a = agents[i];
        if (!a.disc.deployed || !a.disc.has_particle) continue;
        for (auto& pr : particles) {
          if (pr.truth.id != a.disc.assigned_particle) continue;
          const double tck = pr.pred.exists
                                 ? std::min(pr.pred.time,
                                            pr.truth.alive
                                                ? pr.pred.time
                                                : pr.truth.impact_time)
                                 : pr.truth.impact_time;
          if (!pr.truth.alive && t >= tck) {
            a.disc.has_particle = false;
            a.disc.assigned_particle = -1;
            emit({{"t", t},
                  {"type", "release"},
                  {"agent", i + 1},
                  {"particle", pr.truth.id}});
          }
          break;
        }
      }

      // --- per-step agent bookkeeping --------------------------------------
      for (int i = 0; i < scn_.n_agents; ++i) {
        auto& a = agents[i];
        if (!a.disc.deployed) continue;
        a.normal = geo::foot_point_normal(scn_.spheroid, a.state.position);
        // domain invariant f acute >= 1
        const double f_acute =
            (a.state.position.x() * a.state.position.x() +
             a.state.position.y() * a.state.position.y()) /
                ((scn_.spheroid.a + scn_.agent.body_radius) *
                 (scn_.spheroid.a + scn_.agent.body_radius)) +
            a.state.position.z() * a.state.position.z() /
                ((scn_.spheroid.c + scn_.agent.body_radius) *
                 (scn_.spheroid.c + scn_.agent.body_radius));
        if (f_acute < 1.0) {
          throw SurfaceCollisionFault(
              "domain invariant violated: agent " + std::to_string(i + 1) +
              " inside the body-radius shell at t=" + std::to_string(t));
        }
        result.min_normal_length_ever =
            std::min(result.min_normal_length_ever, a.normal.length);
        const int ip =
            hsm::power_index(i + 1, t, scn_.n_agents, scn_.t_star);
        if (ip == 1 && !a.disc.critical) {
          a.disc.critical = true;
          emit({{"t", t}, {"type", "power_critical"}, {"agent", i + 1}});
        }
        // destination refresh
        if (a.disc.has_particle) {
          for (auto& pr : particles) {
            if (pr.truth.id == a.disc.assigned_particle && pr.have_est) {
              if (pr.pred.exists) {
                a.disc.destination = pr.pred.point;
                a.disc.destination_valid = true;
              }
            }
          }
        } else if (a.disc.mode == ctl::Mode::RTB) {
          a.disc.destination = station;
          a.disc.destination_valid = true;
        } else if (ip >= 2) {
          kin::AgentState tmp = a.state;
          a.disc.destination =
              ctl::partition_destination(tmp, bounds_, ip, scn_.spheroid);
          a.disc.destination_valid = true;
        }
      }

      // --- automaton: frozen snapshot, synchronous transitions -------------
      hsm::WorldView world;
      world.t = t;
      world.t_star = scn_.t_star;
      world.n_agents = scn_.n_agents;
      world.proximity_radius = scn_.agent.sensing_range;
      world.eps1 = scn_.eps1;
      world.eps2 = scn_.eps2;
      world.rtb_reserve = rtb_reserve_;
      world.body_radius = scn_.agent.body_radius;
      world.family = &family_;
      world.partition_bounds = &bounds_;
      world.positions.resize(scn_.n_agents);
      world.discrete.resize(scn_.n_agents);
      world.normal_length.assign(scn_.n_agents, 0.0);
      world.assigned_impact_time.assign(scn_.n_agents, 0.0);
      world.assigned_impact_valid.assign(scn_.n_agents, false);
      for (int i = 0; i < scn_.n_agents; ++i) {
        world.positions[i] = agents[i].state.position;
        world.discrete[i] = agents[i].disc;
        world.normal_length[i] = agents[i].normal.length;
        if (agents[i].disc.has_particle) {
          for (auto& pr : particles) {
            if (pr.truth.id == agents[i].disc.assigned_particle &&
                pr.have_est) {
              world.assigned_impact_time[i] = pr.pred.time;
              world.assigned_impact_valid[i] = pr.pred.exists;
              if (!pr.truth.alive) {
                // frozen estimate after impact: release path needs t >= t_ck
                world.assigned_impact_time[i] =
                    std::min(pr.pred.time, pr.truth.impact_time);
                world.assigned_impact_valid[i] = true;
              }
            }
          }
        }
      }
      const auto groups = hsm::detect_deadlock(world);
      for (int i = 0; i < scn_.n_agents; ++i) {
        if (!agents[i].disc.deployed) continue;
        const auto td = hsm::eval_guards(world, i, groups);
        if (!td.has_value()) continue;
        hsm::apply_transition(agents[i].disc, *td);
        if (agents[i].disc.tier > scn_.n_agents - 1) {
          throw DomainFault("surface assignment exceeded N-1 for agent " +
                            std::to_string(i + 1) +
                            " at t=" + std::to_string(t));
        }
        ordered_json resets = ordered_json::object();
        if (td->reset_flag.has_value()) resets["f"] = *td->reset_flag ? 1 : 0;
        if (td->reset_tier.has_value()) resets["mu"] = *td->reset_tier;
        if (td->reset_clock) resets["tF"] = 0;
        emit({{"t", t},
              {"type", "transition"},
              {"agent", i + 1},
              {"from", ctl::mode_name(td->from)},
              {"to", ctl::mode_name(td->to)},
              {"guard", td->guard},
              {"resets", resets},
              {"ctx",
               {{"arrived", td->arrived},
                {"deadlocked", td->deadlocked},
                {"impact_valid", td->impact_valid},
                {"impact_time", td->impact_time},
                {"mu_prev", world.discrete[i].tier},
                {"tier", agents[i].disc.tier}}}});
      }

      // --- controls and kinematics -----------------------------------------
      for (int i = 0; i < scn_.n_agents; ++i) {
        auto& a = agents[i];
        if (!a.disc.deployed) continue;
        ctl::ControlCommand cmd;
        switch (a.disc.mode) {
          case ctl::Mode::LC: {
            const auto terms = cov::local_coverage_terms(
                a.state, scn_.agent, result.field, *mesh_);
            cmd = ctl::local_coverage_control(a.state, scn_.agent, terms.a,
                                              a.normal, grad_floor);
            break;
          }
          case ctl::Mode::PIM:
          case ctl::Mode::PTM:
          case ctl::Mode::RTB: {
            const Vec3 dest = (a.disc.mode == ctl::Mode::RTB)
                                  ? station
                                  : a.disc.destination;
            const Vec3 own_proj = geo::project_to_surface(
                family_, a.disc.tier, a.state.position);
            const Vec3 dest_proj =
                geo::project_to_surface(family_, a.disc.tier, dest);
            if (a.disc.mode == ctl::Mode::RTB &&
                (a.state.position - station).norm() <= scn_.eps1) {
              cmd.mode = ctl::Mode::RTB;  // loiter at the station
              break;
            }
            const auto geodesic = geo::vincenty_inverse(
                family_.surface(a.disc.tier), own_proj, dest_proj);
            cmd = ctl::intercept_control(a.state, scn_.agent, family_,
                                         a.disc.tier, dest, geodesic,
                                         a.normal, a.disc.mode);
            break;
          }
          case ctl::Mode::STM: {
            cmd = ctl::surface_transfer_control(a.state, scn_.agent, family_,
                                                a.disc.tier, a.normal);
            break;
          }
        }
        const auto stepped = kin::step(a.state, cmd.velocity, scn_.dt);
        if (stepped.theta_clamped && !a.theta_clamp_latch) {
          emit({{"t", t}, {"type", "theta_clamp"}, {"agent", i + 1}});
        }
        a.theta_clamp_latch = stepped.theta_clamped;
        a.state = stepped.state;
        a.disc.time_since_deploy += scn_.dt;
      }

      // --- coverage dynamics ------------------------------------------------
      decay_rate.setZero();
      int regularized = 0;
      for (auto& pr : particles) {
        if (pr.truth.alive && pr.have_est &&
            pr.truth.detect_time >= 0.0) {
          est::DecayParams params;
          params.lambda = scn_.decay_lambda;
          params.horizon_pad = scn_.decay_pad;
          regularized +=
              est::add_decay_field(pr.est, pr.pred, t, params, *mesh_,
                                   decay_rate);
        }
      }
      if (regularized > 0) {
        emit({{"t", t},
              {"type", "decay_regularized"},
              {"nodes", regularized}});
      }
      std::vector<cov::AgentPose> poses;
      for (auto& a : agents) {
        if (a.disc.deployed) poses.push_back({a.state, &scn_.agent});
      }
      touched.clear();
      q_prev = result.field.q;
      cov::accumulate_coverage(result.field, *mesh_, poses, decay_rate,
                               scn_.dt, touched, scratch);
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()),
                    touched.end());
      const double c_star = result.field.c_star;
      for (int idx : touched) {
        const double w_old = c_star - q_prev[idx];
        const double w_new = c_star - result.field.q[idx];
        const double area = mesh_->cells()[idx].area;
        e_value += (cube(std::max(0.0, w_new)) - cube(std::max(0.0, w_old))) *
                   area;
      }
      if (step % 2000 == 0) {
        e_value = cov::coverage_error(result.field, *mesh_);  // drift anchor
      }

      // --- interception bookkeeping ------------------------------------------
      // an interception is geometric: any agent sweeping within eps1 of the
      // projected impact point before the estimated impact accumulates dwell
      for (auto& pr : particles) {
        if (!pr.truth.alive || !pr.pred.exists) continue;
        if (t >= pr.pred.time) continue;
        const Vec3 proj =
            geo::project_to_surface(family_, 0, pr.pred.point);
        int sweeper = -1;
        for (int i = 0; i < scn_.n_agents; ++i) {
          if (!agents[i].disc.deployed) continue;
          if ((agents[i].state.position - proj).norm() <= scn_.eps1) {
            sweeper = i;
            break;
          }
        }
        if (sweeper >= 0) {
          pr.dwell += scn_.dt;
          pr.outcome.dwell = pr.dwell;
          if (!pr.intercepted_logged && pr.dwell >= scn_.dwell_min) {
            pr.intercepted_logged = true;
            emit({{"t", t},
                  {"type", "interception"},
                  {"particle", pr.truth.id},
                  {"agent", sweeper + 1},
                  {"dwell", pr.dwell}});
          }
        }
      }

      // --- metrics -----------------------------------------------------------
      double min_dist = std::numeric_limits<double>::infinity();
      for (int i = 0; i < scn_.n_agents; ++i) {
        if (!agents[i].disc.deployed) continue;
        for (int j = i + 1; j < scn_.n_agents; ++j) {
          if (!agents[j].disc.deployed) continue;
          min_dist = std::min(
              min_dist,
              (agents[i].state.position - agents[j].state.position).norm());
        }
      }
      if (min_dist < result.min_pair_dist_ever) {
        result.min_pair_dist_ever = min_dist;
      }
      if (min_dist <= 2.0 * scn_.agent.body_radius &&
          !result.definition1_violated) {
        result.definition1_violated = true;
        emit({{"t", t},
              {"type", "collision_violation"},
              {"min_distance", min_dist}});
      }
      if (sinks.metrics) {
        MetricsRow row;
        row.t = t;
        row.e_norm = e_value / e_max;
        row.min_pair_dist = min_dist;
        for (int i = 0; i < scn_.n_agents; ++i) {
          row.modes.push_back(agents[i].disc.deployed
                                  ? ctl::mode_name(agents[i].disc.mode)
                                  : "-");
          row.normal_length.push_back(
              agents[i].disc.deployed ? agents[i].normal.length : 0.0);
        }
        sinks.metrics(row);
      }
      if (t >= next_snapshot && sinks.snapshot) {
        sinks.snapshot(t, result.field, *mesh_);
        next_snapshot += scn_.snapshot_period;
      }
      result.steps = step;
    }
  } catch (const std::exception& e) {
    result.halted_on_fault = true;
    result.fault_message = e.what();
    emit({{"type", "fault"}, {"message", e.what()}});
  }

  result.e_norm_final =
      cov::coverage_error(result.field, *mesh_) / e_max;
  for (auto& pr : particles) {
    pr.outcome.in_flight_at_end = pr.truth.alive;
    result.particles.push_back(pr.outcome);
  }
  return result;
}

}  // namespace covsim::eng
