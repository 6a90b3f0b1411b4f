#include "covsim/eng/checkers.hpp"

#include <algorithm>
#include <cmath>

#include "covsim/geo/geodesic.hpp"

namespace covsim::eng {

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::PASS: return "PASS";
    case CheckStatus::WARN: return "WARN";
    case CheckStatus::FAIL: return "FAIL";
  }
  return "?";
}

CheckStatus CheckerReport::overall() const {
  CheckStatus worst = CheckStatus::PASS;
  for (CheckStatus s : {th1, th2, th3}) {
    if (s == CheckStatus::FAIL) return CheckStatus::FAIL;
    if (s == CheckStatus::WARN) worst = CheckStatus::WARN;
  }
  return worst;
}

double p_max_bound(const Scenario& s) {
  const geo::SurfaceFamily family{s.spheroid, s.agent.gamma,
                                  s.agent.sensing_range, s.n_agents};
  const geo::Spheroid outer = family.surface(s.n_agents - 1);
  const double g = geo::perimeter_factor(outer);
  return M_PI * outer.a + (M_PI / 2.0) * (outer.a + outer.c) * g +
         2.0 * (s.n_agents - 1) * s.agent.sensing_range;
}

CheckerReport check_theorems(const Scenario& s) {
  CheckerReport r;
  const geo::SurfaceFamily family{s.spheroid, s.agent.gamma,
                                  s.agent.sensing_range, s.n_agents};
  const geo::Spheroid outer = family.surface(s.n_agents - 1);
  const geo::Spheroid inner = family.surface(0);
  r.perimeter_factor_outer = geo::perimeter_factor(outer);
  r.perimeter_factor_inner = geo::perimeter_factor(inner);
  r.p_max = p_max_bound(s);

  r.th1_lhs = s.detection_range / s.intruder_max_speed;
  r.th1_rhs = r.p_max / s.agent.max_speed;
  r.th1_margin = r.th1_lhs - r.th1_rhs;
  r.th1 = (r.th1_margin > 0.0) ? CheckStatus::PASS : CheckStatus::FAIL;

  r.th2_window = s.t_star / s.n_agents;
  r.th2_reserve = M_PI / (2.0 * s.agent.max_speed) * (inner.a + inner.c) *
                  r.perimeter_factor_inner;
  // detection-to-impact time: best case is the fastest intruder covering
  // exactly R_det; the geometric worst case is the longest chord from the
  // detection sphere to the surface at the slowest spawn speed
  r.th2_time_min = s.detection_range / s.intruder_max_speed;
  const double worst_path = s.detection_range + 2.0 * s.spheroid.a;
  const double v_min = 0.3 * s.intruder_max_speed;
  r.th2_time_max = worst_path / v_min;
  r.th2_margin_best = r.th2_window - (r.th2_time_min + r.th2_reserve);
  r.th2_margin_worst = r.th2_window - (r.th2_time_max + r.th2_reserve);
  if (r.th2_margin_worst >= 0.0) {
    r.th2 = CheckStatus::PASS;
  } else if (r.th2_margin_best >= 0.0) {
    r.th2 = CheckStatus::WARN;  // config dependent; see the format reference
  } else {
    r.th2 = CheckStatus::FAIL;
  }

  r.th3_lhs = s.agent.sensing_range;
  r.th3_rhs = 4.0 * s.agent.body_radius;
  r.th3 = (r.th3_lhs > r.th3_rhs) ? CheckStatus::PASS : CheckStatus::FAIL;

  r.remark1_window = r.p_max / s.agent.max_speed;
  r.remark1_impacts_per_window =
      s.spawning_enabled ? r.remark1_window / s.spawn_period : 0.0;
  r.remark1_premise_ok =
      r.remark1_impacts_per_window <= static_cast<double>(s.n_agents - 1);
  return r;
}

}  // namespace covsim::eng
