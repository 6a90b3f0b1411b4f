#pragma once

#include <random>

#include "covsim/eng/scenario.hpp"
#include "covsim/est/ekf.hpp"

namespace covsim::eng {

// Draws one intruder: aim point uniform by surface area, start placed back
// along a cone about the outward normal so the trajectory is guaranteed to
// impact, speed uniform in (0.3 U, U]. Throws SpawnError after too many
// rejections.
est::ParticleTruth spawn_intruder(std::mt19937_64& rng, const Scenario& s,
                                  double t, int id);

}  // namespace covsim::eng
