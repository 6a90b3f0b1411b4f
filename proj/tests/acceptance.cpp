// Acceptance suite: exercises every headline requirement end to end and
// prints one PASS/FAIL line per criterion. Returns nonzero if any fails.
//
// Usage: acceptance [--only 1,4,9]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "covsim/eng/checkers.hpp"
#include "covsim/eng/engine.hpp"
#include "covsim/geo/geodesic.hpp"
#include "covsim/io/scenario_io.hpp"
#include "oracles/geodesic_ode.hpp"
#include "oracles/quad_oracle.hpp"

using namespace covsim;
using eng::Scenario;
using geo::Spheroid;
using geo::Vec3;

namespace {

// ---------------------------------------------------------------------------
// shared simulation data

struct SimData {
  eng::RunResult result;
  std::vector<nlohmann::ordered_json> events;
  std::string raw_events;
  std::vector<double> t, e_norm, min_dist;
};

SimData run_scenario(const Scenario& scn) {
  eng::Engine engine(scn);
  SimData data;
  eng::RunSinks sinks;
  sinks.event = [&](const nlohmann::ordered_json& e) {
    data.events.push_back(e);
    data.raw_events += e.dump();
    data.raw_events += '\n';
  };
  sinks.metrics = [&](const eng::MetricsRow& r) {
    data.t.push_back(r.t);
    data.e_norm.push_back(r.e_norm);
    data.min_dist.push_back(r.min_pair_dist);
  };
  data.result = engine.run(sinks);
  return data;
}

Scenario reference_scenario(std::uint64_t seed) {
  Scenario s;  // defaults are the reference configuration
  s.seed = seed;
  return s;
}

struct Criterion {
  int id;
  std::string label;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, const std::string& label, bool pass,
            const std::string& detail) {
  g_results.push_back({id, label, pass, detail});
  std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", id,
              label.c_str(), detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// criteria 1-3 and 8 share the reference runs

struct ReferenceRuns {
  std::vector<std::uint64_t> seeds;
  std::vector<SimData> runs;
};

const ReferenceRuns& reference_runs() {
  static const ReferenceRuns runs = [] {
    ReferenceRuns r;
    r.seeds = {1, 2, 3};
    for (auto seed : r.seeds) {
      std::printf("  running reference scenario, seed %llu ...\n",
                  static_cast<unsigned long long>(seed));
      std::fflush(stdout);
      r.runs.push_back(run_scenario(reference_scenario(seed)));
    }
    return r;
  }();
  return runs;
}

void criterion1_interception() {
  const auto& ref = reference_runs();
  int impacted = 0, intercepted = 0, missed = 0, in_flight = 0;
  bool faulted = false;
  for (const auto& run : ref.runs) {
    faulted = faulted || run.result.halted_on_fault;
    for (const auto& p : run.result.particles) {
      if (p.impact_time >= 0.0) {
        ++impacted;
        if (p.intercepted) {
          ++intercepted;
        } else {
          ++missed;
        }
      } else {
        ++in_flight;
      }
    }
  }
  std::ostringstream d;
  d << impacted << " impacted, " << intercepted << " intercepted, " << missed
    << " missed, " << in_flight << " still in flight";
  if (faulted) d << ", FAULTED";
  report(1, "all impacting intruders are intercepted (3 seeds)",
         !faulted && impacted > 100 && missed == 0, d.str());
}

void criterion2_collision_safety() {
  const auto& ref = reference_runs();
  double min_pair = std::numeric_limits<double>::infinity();
  double min_normal = std::numeric_limits<double>::infinity();
  for (const auto& run : ref.runs) {
    min_pair = std::min(min_pair, run.result.min_pair_dist_ever);
    min_normal = std::min(min_normal, run.result.min_normal_length_ever);
  }
  const bool fine_ok = min_pair > 2.0 && min_normal > 1.0;

  // regression: the coarse time step reproduces a Definition-1 violation
  Scenario coarse = reference_scenario(1);
  coarse.dt = 1.0;
  const SimData coarse_run = run_scenario(coarse);
  const bool coarse_violates =
      coarse_run.result.definition1_violated ||
      coarse_run.result.min_normal_length_ever <= 1.0 ||
      coarse_run.result.halted_on_fault;

  std::ostringstream d;
  d << "dt=0.05: min pair " << min_pair << ", min |n| " << min_normal
    << "; dt=1: violation=" << (coarse_violates ? "yes" : "no");
  report(2, "collision safety at dt=0.05; dt=1 reproduces the anomaly",
         fine_ok && coarse_violates, d.str());
}

void criterion3_coverage_dynamics() {
  const auto& ref = reference_runs();
  int usable = 0, good = 0;
  for (const auto& run : ref.runs) {
    const double dt = run.t.size() > 1 ? run.t[1] - run.t[0] : 0.05;
    const double t_end = run.t.back();
    // index events per particle
    std::map<int, double> detect_at, impact_at;
    std::set<int> intercepted;
    for (const auto& e : run.events) {
      const std::string type = e["type"].get<std::string>();
      if (type == "detection") {
        detect_at[e["particle"].get<int>()] = e["t"].get<double>();
      } else if (type == "impact") {
        impact_at[e["particle"].get<int>()] = e["t"].get<double>();
        if (e["intercepted"].get<bool>()) {
          intercepted.insert(e["particle"].get<int>());
        }
      }
    }
    auto e_at = [&](double t) {
      const std::size_t idx = std::min(
          run.e_norm.size() - 1,
          static_cast<std::size_t>(std::llround(t / dt)));
      return run.e_norm[idx];
    };
    for (const auto& [pid, td] : detect_at) {
      if (!impact_at.count(pid) || !intercepted.count(pid)) continue;
      const double ti = impact_at[pid];
      if (td + 5.0 > t_end || ti + 60.0 > t_end) continue;
      ++usable;
      // (a) error rises within 10 s of detection
      const double e0 = e_at(td);
      double peak = e0;
      for (double tau = td; tau <= std::min(td + 10.0, t_end); tau += dt) {
        peak = std::max(peak, e_at(tau));
      }
      const bool rises = peak > e0;
      // (b) net decrease over the 60 s after the interception completes
      const bool settles = e_at(ti + 60.0) < e_at(ti);
      if (rises && settles) ++good;
    }
  }
  // exact property: no intruders, error never increases
  Scenario quiet = reference_scenario(4);
  quiet.spawning_enabled = false;
  quiet.initial_coverage = 0.0;
  quiet.duration = 1500.0;
  const SimData quiet_run = run_scenario(quiet);
  bool non_increasing = !quiet_run.result.halted_on_fault;
  for (std::size_t i = 1; i < quiet_run.e_norm.size(); ++i) {
    if (quiet_run.e_norm[i] > quiet_run.e_norm[i - 1] * (1.0 + 1e-12) + 1e-15) {
      non_increasing = false;
      break;
    }
  }
  std::ostringstream d;
  d << good << "/" << usable
    << " intruders show the spike-then-recover pattern; quiet run "
    << (non_increasing ? "non-increasing" : "INCREASED");
  report(3, "coverage-error dynamics",
         usable > 50 && good >= static_cast<int>(0.9 * usable) &&
             non_increasing,
         d.str());
}

void criterion4_geodesy() {
  const Spheroid oblate(80.0, 20.0);
  const Spheroid sphere(80.0, 80.0);
  bool ok = true;
  std::ostringstream d;

  // sphere closed forms
  {
    const auto eq = geo::vincenty_inverse(sphere, Vec3(80, 0, 0), Vec3(0, 80, 0));
    ok = ok && std::abs(eq.distance - 40 * M_PI) < 1e-9 * 40 * M_PI;
    const auto pole =
        geo::vincenty_inverse(sphere, Vec3(80, 0, 0), Vec3(0, 0, 80));
    ok = ok && std::abs(pole.distance - 40 * M_PI) < 1e-9 * 40 * M_PI;
    std::mt19937_64 rng(100);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const Vec3 p1 = sphere.point_from_reduced(1.5 * u(rng), M_PI * u(rng));
      const Vec3 p2 = sphere.point_from_reduced(1.5 * u(rng), M_PI * u(rng));
      const auto sol = geo::vincenty_inverse(sphere, p1, p2);
      const double truth =
          80.0 * std::acos(std::clamp(
                     p1.normalized().dot(p2.normalized()), -1.0, 1.0));
      if (std::abs(sol.distance - truth) > 1e-9 * std::max(1.0, truth)) {
        ok = false;
      }
    }
  }

  // 200 random oblate pairs against the ODE shooting oracle
  int fallbacks = 0, checked = 0;
  double worst = 0.0;
  {
    std::mt19937_64 rng(200);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (checked + fallbacks < 200) {
      const Vec3 p1 = oblate.point_from_reduced(1.5 * u(rng), M_PI * u(rng));
      const Vec3 p2 = oblate.point_from_reduced(1.5 * u(rng), M_PI * u(rng));
      if ((p1 - p2).norm() < 1.0) continue;
      const auto sol = geo::vincenty_inverse(oblate, p1, p2);
      if (!sol.converged || sol.used_antipodal_fallback) {
        ++fallbacks;
        continue;
      }
      ++checked;
      const auto oracle = oracles::refine_shooting(
          oblate, p1, p2, sol.initial_heading, sol.distance);
      if (!oracle.converged) {
        ok = false;
        continue;
      }
      const double rel =
          std::abs(sol.distance - oracle.distance) / oracle.distance;
      worst = std::max(worst, rel);
      if (rel > 1e-6) ok = false;
    }
  }

  // perimeter factor vs elliptic quadrature
  const double g = geo::perimeter_factor(oblate);
  const double perim = oracles::ellipse_perimeter_quadrature(80.0, 20.0);
  const double g_err = std::abs(M_PI * 100.0 * g - perim) / perim;
  ok = ok && g_err < 1e-9;

  // composite bound over 1e4 random pairs
  {
    std::mt19937_64 rng(300);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double bound = M_PI * 80.0 + (M_PI / 2.0) * 100.0 * g;
    for (int i = 0; i < 10000; ++i) {
      const Vec3 p1 = oblate.point_from_reduced(1.5 * u(rng), M_PI * u(rng));
      const Vec3 p2 = oblate.point_from_reduced(1.5 * u(rng), M_PI * u(rng));
      const auto sol = geo::vincenty_inverse(oblate, p1, p2);
      if (sol.distance > bound * (1.0 + 1e-12)) {
        ok = false;
        break;
      }
    }
  }
  d << checked << " oracle pairs (worst rel " << worst << "), " << fallbacks
    << " fallbacks excluded, perimeter rel err " << g_err;
  report(4, "geodesy suite", ok, d.str());
}

void criterion5_partitioning() {
  bool ok = true;
  double worst = 0.0;
  for (int n = 2; n <= 10; ++n) {
    const Spheroid oblate(80.0, 20.0);
    const auto bounds = geo::partition_bounds(oblate, n);
    const double target = oracles::spheroid_area_quadrature(80.0, 20.0) /
                          (n - 1);
    for (int i = 0; i + 1 < n; ++i) {
      const double area =
          oracles::zone_area_quadrature(80.0, 20.0, bounds[i + 1], bounds[i]);
      const double rel = std::abs(area - target) / target;
      worst = std::max(worst, rel);
      if (rel > 1e-8) ok = false;
    }
  }
  // sphere hat-box closed form
  const auto sb = geo::partition_bounds(Spheroid(80.0, 80.0), 4);
  ok = ok && std::abs(sb[1] - 80.0 / 3.0) < 1e-9 &&
       std::abs(sb[2] + 80.0 / 3.0) < 1e-9;
  std::ostringstream d;
  d << "N in {2..10}, worst band-area rel err " << worst;
  report(5, "equal-area partitioning", ok, d.str());
}

void criterion6_estimator() {
  bool ok = true;
  std::ostringstream d;
  est::MeasurementNoise noise;  // defaults are the reference values

  // 500-run Monte Carlo NEES
  double nees_sum = 0.0;
  long nees_n = 0;
  {
    std::mt19937_64 rng(600);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double dt = 0.05;
    for (int run = 0; run < 500; ++run) {
      est::Vec6 truth;
      const Vec3 aim(40 * u(rng), 40 * u(rng), 10 * u(rng));
      Vec3 start(120 * u(rng), 120 * u(rng), 60 * u(rng));
      if (start.norm() < 60.0) start *= 3.0;
      start *= 170.0 / start.norm();
      const Vec3 vel = (aim - start).normalized() * (0.25 + 0.4 *
                                                     std::abs(u(rng)));
      truth << start, vel;
      const Vec3 z0 = est::measure(
          truth.head<3>() - dt * truth.tail<3>(), noise,
          Vec3(gauss(rng), gauss(rng), gauss(rng)));
      const Vec3 z1 =
          est::measure(truth.head<3>(), noise,
                       Vec3(gauss(rng), gauss(rng), gauss(rng)));
      est::EkfEstimate ekf = est::ekf_init(z0, z1, dt, noise, 0.0);
      est::Vec6 state = truth;
      for (int k = 0; k < 1200; ++k) {
        state.head<3>() += dt * state.tail<3>();
        est::ekf_predict(ekf, dt);
        est::ekf_update(
            ekf,
            est::measure(state.head<3>(), noise,
                         Vec3(gauss(rng), gauss(rng), gauss(rng))),
            noise);
        const est::Vec6 err = ekf.x - state;
        nees_sum += err.dot(ekf.P.ldlt().solve(err));
        ++nees_n;
      }
    }
  }
  const double mean_nees = nees_sum / nees_n;
  const bool nees_ok = mean_nees > 1.237 && mean_nees < 14.449;
  ok = ok && nees_ok;

  // zero-noise exactness
  {
    est::Vec6 truth;
    truth << 150, -30, 25, -0.5, 0.1, -0.06;
    const double dt = 0.05;
    est::EkfEstimate ekf = est::ekf_init(
        est::spherical_of(truth.head<3>() - dt * truth.tail<3>()),
        est::spherical_of(truth.head<3>()), dt, noise, 0.0);
    est::Vec6 state = truth;
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      state.head<3>() += dt * state.tail<3>();
      est::ekf_predict(ekf, dt);
      est::ekf_update(ekf, est::spherical_of(state.head<3>()), noise);
      worst = std::max(worst, (ekf.x - state).norm());
    }
    ok = ok && worst <= 1e-9;
    d << "zero-noise worst err " << worst << ", ";
  }

  // impact solver vs bracketing oracle on 1e3 random trajectories
  {
    const Spheroid oblate(80.0, 20.0);
    std::mt19937_64 rng(601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
      est::Vec6 s;
      Vec3 start(200 * u(rng), 200 * u(rng), 100 * u(rng));
      if (oblate.implicit(start) < 2.0) {
        start *= 2.0;
      }
      const Vec3 aim(70 * u(rng), 70 * u(rng), 18 * u(rng));
      const Vec3 vel = (aim - start).normalized() * (0.2 + 0.6 *
                                                     std::abs(u(rng)));
      s << start, vel;
      const auto pred = est::predict_impact(s, oblate, 0.0);
      auto f = [&](double tt) {
        return oblate.implicit(start + tt * vel) - 1.0;
      };
      const double scan_step = 0.2;
      double lo = -1.0, hi = -1.0, prev = f(0.0);
      double fmin = prev;
      for (double tt = scan_step; tt < 4000.0; tt += scan_step) {
        const double v = f(tt);
        fmin = std::min(fmin, v);
        if (prev > 0.0 && v <= 0.0) {
          lo = tt - scan_step;
          hi = tt;
          break;
        }
        prev = v;
      }
      if (hi < 0.0) {
        // tangential grazing sits below the scan resolution; skip those
        if (pred.exists && fmin > 1e-4) ok = false;
        continue;
      }
      if (!pred.exists) {
        ok = false;
        continue;
      }
      ++hits;
      for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
      }
      worst = std::max(worst, std::abs(pred.time - 0.5 * (lo + hi)));
    }
    ok = ok && hits > 300 && worst <= 1e-9;
    d << "impact solver worst err " << worst << " over " << hits << " hits, ";
  }
  d << "mean NEES " << mean_nees << " (band 1.237..14.449)";
  report(6, "estimator consistency", ok, d.str());
}

void criterion7_quadrature() {
  const Spheroid oblate(80.0, 20.0);
  cov::SurfaceMesh mesh(oblate, 10000);
  cov::SurfaceMesh fine(oblate, 40000);
  kin::AgentConfig cfg;  // reference agent parameters
  bool ok = true;
  std::ostringstream d;

  // a-terms on 50 operating-envelope configurations vs the 4x mesh
  {
    std::mt19937_64 rng(700);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    cov::CoverageField f_coarse(mesh.size(), 20.0, 0.0);
    cov::CoverageField f_fine(fine.size(), 20.0, 0.0);
    int tested = 0;
    double worst = 0.0;
    while (tested < 50) {
      const double beta = 1.35 * u(rng), lam = M_PI * u(rng);
      const double h = 4.0 + 2.5 * std::abs(u(rng));
      const Vec3 q = oblate.point_from_reduced(beta, lam);
      const Vec3 n = oblate.outward_normal(q);
      kin::AgentState a;
      a.position = q + h * n;
      const Vec3 look = -n;
      a.euler = Vec3(0.6 * u(rng),
                     std::asin(std::clamp(-look.z(), -1.0, 1.0)) + 0.2 * u(rng),
                     std::atan2(look.y(), look.x()) + 0.2 * u(rng));
      if (std::abs(a.euler.y()) > 1.45) continue;
      const auto tc = cov::local_coverage_terms(a, cfg, f_coarse, mesh);
      const auto tf = cov::local_coverage_terms(a, cfg, f_fine, fine);
      Eigen::Matrix<double, 5, 1> vc, vf;
      for (int k = 0; k < 5; ++k) {
        vc[k] = tc.a[k];
        vf[k] = tf.a[k];
      }
      if (vf.norm() < 1.0) continue;
      ++tested;
      const double rel = (vc - vf).norm() / vf.norm();
      worst = std::max(worst, rel);
      if (rel > 0.02) ok = false;
    }
    d << "a-terms worst rel " << worst << " over 50 configs, ";
  }

  // Richardson behavior of the numerical partials
  {
    std::mt19937_64 rng(701);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    while (checked < 25) {
      kin::AgentState s;
      s.position = Vec3(u(rng), u(rng), u(rng));
      s.euler = Vec3(0.0, 0.6 * u(rng), M_PI * u(rng));
      const Vec3 xb(std::cos(s.euler.z()) * std::cos(s.euler.y()),
                    std::sin(s.euler.z()) * std::cos(s.euler.y()),
                    -std::sin(s.euler.y()));
      const Vec3 any =
          std::abs(xb.z()) < 0.9 ? Vec3(Vec3::UnitZ()) : Vec3(Vec3::UnitX());
      const Vec3 side = xb.cross(any).normalized();
      const double off = cfg.half_angle * (0.3 + 0.4 * std::abs(u(rng)));
      const Vec3 pt = s.position + (3.0 + 4.0 * std::abs(u(rng))) *
                                       (std::cos(off) * xb +
                                        std::sin(off) * side);
      if (cov::sensing_value(s, cfg, pt) < 1e-2) continue;
      ++checked;
      const double h = 1e-4 * cfg.sensing_range;
      for (int axis = 0; axis < 3; ++axis) {
        auto central = [&](double step) {
          kin::AgentState sp = s, sm = s;
          sp.position[axis] += step;
          sm.position[axis] -= step;
          return (cov::sensing_value(sp, cfg, pt) -
                  cov::sensing_value(sm, cfg, pt)) /
                 (2.0 * step);
        };
        const double e1 = std::abs(central(h) - central(h / 2));
        const double e2 = std::abs(central(h / 2) - central(h / 4));
        if (e1 > 1e-9 && e2 > 0.5 * e1 + 1e-9) ok = false;
      }
    }
  }

  // the control-dependent error-rate term is never positive
  {
    std::mt19937_64 rng(702);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 300; ++i) {
      std::array<double, 5> a{1e4 * u(rng), 1e4 * u(rng), 1e4 * u(rng),
                              1e4 * u(rng), 1e4 * u(rng)};
      const double g = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
      if (g < 1e-9) continue;
      const double contrib =
          -(cfg.k_u * a[0] * a[0] + cfg.k_v * a[1] * a[1] +
            cfg.k_w * a[2] * a[2]) /
              g -
          cfg.r_max * std::clamp(cfg.k_r * a[3] / cfg.r_max, -1.0, 1.0) *
              a[3] -
          cfg.s_max * std::clamp(cfg.k_s * a[4] / cfg.s_max, -1.0, 1.0) * a[4];
      if (contrib > 1e-12) ok = false;
    }
    d << "gradient term non-positive on 300 samples";
  }
  report(7, "local-coverage quadrature", ok, d.str());
}

void criterion8_automaton_conformance() {
  const auto& ref = reference_runs();
  bool ok = true;
  std::ostringstream d;
  const std::set<std::pair<std::string, std::string>> allowed_edges = {
      {"LC", "RTB"}, {"LC", "PIM"}, {"LC", "PTM"}, {"LC", "STM"},
      {"RTB", "PTM"}, {"PIM", "LC"}, {"PIM", "RTB"}, {"PIM", "PTM"},
      {"PIM", "STM"}, {"PTM", "LC"}, {"PTM", "PIM"}, {"PTM", "STM"},
      {"STM", "LC"}, {"STM", "PIM"}, {"STM", "PTM"}};
  long transitions = 0;
  int max_tier = 0;
  for (const auto& run : ref.runs) {
    if (run.result.halted_on_fault) ok = false;
    for (const auto& e : run.events) {
      if (e["type"] != "transition") continue;
      ++transitions;
      const std::string from = e["from"].get<std::string>();
      const std::string to = e["to"].get<std::string>();
      if (!allowed_edges.count({from, to})) {
        ok = false;
        d << "illegal edge " << from << ">" << to << "; ";
      }
      const auto& resets = e["resets"];
      const auto& ctx = e["ctx"];
      const int mu_prev = ctx["mu_prev"].get<int>();
      const int tier = ctx["tier"].get<int>();
      max_tier = std::max(max_tier, tier);
      if (tier > 3) ok = false;  // mu <= N-1
      auto expect_flag = [&](int v) {
        if (!resets.contains("f") || resets["f"].get<int>() != v) {
          ok = false;
          d << "bad f reset on " << from << ">" << to << "; ";
        }
      };
      if ((from == "LC" || from == "PTM") && to == "PIM") expect_flag(1);
      if (from == "PIM" && (to == "RTB" || to == "PTM")) expect_flag(0);
      if (from == "PIM" && to == "LC") {
        const bool passed = ctx["impact_valid"].get<bool>() &&
                            e["t"].get<double>() >=
                                ctx["impact_time"].get<double>();
        expect_flag(passed ? 0 : 1);
      }
      if (from == "RTB" && to == "PTM") {
        if (!resets.contains("tF")) ok = false;
      }
      if (to == "STM") {
        if (!resets.contains("mu")) {
          ok = false;
        } else {
          const int mu = resets["mu"].get<int>();
          if (mu != 0 && mu != mu_prev + 1) ok = false;
          if (mu == 0 && !(ctx["arrived"].get<bool>() && mu_prev > 0)) {
            ok = false;
          }
          if (mu == mu_prev + 1 && !ctx["deadlocked"].get<bool>()) ok = false;
        }
      }
      if (from == "STM" && to == "LC") {
        if (!resets.contains("mu") || resets["mu"].get<int>() != 0) ok = false;
      }
    }
  }
  // determinism: identical seeds give byte-identical event streams
  const SimData replay = run_scenario(reference_scenario(ref.seeds[0]));
  const bool identical = replay.raw_events == ref.runs[0].raw_events;
  ok = ok && identical;
  d << transitions << " transitions validated, max tier " << max_tier
    << ", replay " << (identical ? "byte-identical" : "DIVERGED");
  report(8, "automaton conformance and replay determinism", ok, d.str());
}

void criterion9_theorem_checkers() {
  const Scenario s = reference_scenario(1);
  const auto r = eng::check_theorems(s);
  bool ok = true;
  std::ostringstream d;
  // Theorem 3 passes: 10 > 4
  ok = ok && r.th3 == eng::CheckStatus::PASS && r.th3_lhs == 10.0 &&
       r.th3_rhs == 4.0;
  // Theorem 1 margin via the Lemma-1 bound with the series perimeter factor,
  // cross-checked against the elliptic quadrature
  const double perim_outer =
      oracles::ellipse_perimeter_quadrature(115.0, 55.0);
  const double g_quad = perim_outer / (M_PI * 170.0);
  const double g_err =
      std::abs(r.perimeter_factor_outer - g_quad) / g_quad;
  ok = ok && g_err < 1e-9;
  const double p_max_expected =
      M_PI * 115.0 + (M_PI / 2.0) * 170.0 * g_quad + 60.0;
  ok = ok && std::abs(r.p_max - p_max_expected) < 1e-6;
  ok = ok && std::isfinite(r.th1_margin);
  // the margin sign for this configuration is negative (FAIL reported)
  ok = ok && r.th1 == ((r.th1_margin > 0) ? eng::CheckStatus::PASS
                                          : eng::CheckStatus::FAIL);
  // Theorem 2 labeled per the WARN policy
  ok = ok && r.th2 == eng::CheckStatus::WARN;
  d << "th3 " << eng::status_name(r.th3) << ", th1 margin " << r.th1_margin
    << " (" << eng::status_name(r.th1) << "), th2 "
    << eng::status_name(r.th2) << ", g cross-check rel err " << g_err;
  report(9, "theorem checkers", ok, d.str());
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    }
  }
  auto want = [&](int id) { return only.empty() || only.count(id); };

  if (want(4)) criterion4_geodesy();
  if (want(5)) criterion5_partitioning();
  if (want(6)) criterion6_estimator();
  if (want(7)) criterion7_quadrature();
  if (want(9)) criterion9_theorem_checkers();
  if (want(1)) criterion1_interception();
  if (want(2)) criterion2_collision_safety();
  if (want(3)) criterion3_coverage_dynamics();
  if (want(8)) criterion8_automaton_conformance();

  int failures = 0;
  for (const auto& c : g_results) {
    if (!c.pass) ++failures;
  }
  std::printf("%zu criteria evaluated, %d failed\n", g_results.size(),
              failures);
  return failures == 0 ? 0 : 1;
}
