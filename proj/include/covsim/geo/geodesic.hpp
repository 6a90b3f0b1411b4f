#pragma once

#include "covsim/geo/spheroid.hpp"

namespace covsim::geo {

struct GeodesicSolution {
  double distance = 0.0;         // along-surface length
  double initial_heading = 0.0;  // radians clockwise from North, [0, 2pi)
  bool converged = false;        // false => composite fallback path
  bool used_antipodal_fallback = false;
};

// Inverse geodesic problem between two points on the spheroid. Points are
// snapped to the surface first (must be within 1e-6 relative). The standard
// iteration runs on the auxiliary sphere with the distance and longitude
// integrals evaluated by quadrature, so it stays accurate at the large
// flattenings used here. Near-antipodal pairs fall back to a heading search
// (used_antipodal_fallback set); if that also fails the constant-latitude +
// constant-longitude composite path is returned with converged = false.
GeodesicSolution vincenty_inverse(const Spheroid& s, const Vec3& p1,
                                  const Vec3& p2);

// Length of the composite constant-latitude-then-constant-longitude path.
double composite_path_length(const Spheroid& s, const Vec3& p1, const Vec3& p2);

// Meridian arc length between reduced latitudes (signed order ignored).
double meridian_arc(const Spheroid& s, double beta1, double beta2);

}  // namespace covsim::geo
