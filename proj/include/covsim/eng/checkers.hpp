#pragma once

#include <string>

#include "covsim/eng/scenario.hpp"

namespace covsim::eng {

// Lemma-1 worst-case path length to an interception:
// pi a_{N-1} + (pi/2)(a_{N-1}+c_{N-1}) g_{N-1} + 2(N-1) R.
double p_max_bound(const Scenario& s);

enum class CheckStatus { PASS, WARN, FAIL };
const char* status_name(CheckStatus s);

struct CheckerReport {
  double p_max = 0.0;
  double perimeter_factor_outer = 0.0;  // g_{C_{N-1}}
  double perimeter_factor_inner = 0.0;  // g_{C_0}

  // interception feasibility: R_det / U_int > P_max / U_agt
  double th1_lhs = 0.0, th1_rhs = 0.0, th1_margin = 0.0;
  CheckStatus th1 = CheckStatus::FAIL;

  // deployment window: T*/N >= (t_ck - t_dk) + return reserve;
  // detection-to-impact time is config dependent, reported as a range
  double th2_window = 0.0;
  double th2_reserve = 0.0;
  double th2_time_min = 0.0, th2_time_max = 0.0;
  double th2_margin_best = 0.0, th2_margin_worst = 0.0;
  CheckStatus th2 = CheckStatus::WARN;

  // avoidance size condition: min(R) > 2r_i + 2r_j
  double th3_lhs = 0.0, th3_rhs = 0.0;
  CheckStatus th3 = CheckStatus::FAIL;

  // interception capacity window (Remark 1)
  double remark1_window = 0.0;
  double remark1_impacts_per_window = 0.0;
  bool remark1_premise_ok = false;

  CheckStatus overall() const;
};

CheckerReport check_theorems(const Scenario& s);

}  // namespace covsim::eng
