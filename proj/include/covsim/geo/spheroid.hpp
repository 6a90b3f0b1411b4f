#pragma once

#include <Eigen/Dense>
#include <vector>

namespace covsim::geo {

using Vec3 = Eigen::Vector3d;

// Oblate ellipsoid of revolution centered at the origin, equatorial
// semi-axis along x/y and polar semi-axis along z.
struct Spheroid {
  double a = 1.0;  // equatorial semi-axis
  double c = 1.0;  // polar semi-axis

  Spheroid() = default;
  Spheroid(double equatorial, double polar);

  bool is_sphere() const { return a == c; }
  double flattening() const { return (a - c) / a; }
  // Squared eccentricities of the meridian ellipse.
  double e2() const { return 1.0 - (c * c) / (a * a); }
  double ep2() const { return (a * a - c * c) / (c * c); }

  // Implicit function m(p) = x^2/a^2 + y^2/a^2 + z^2/c^2; surface at m = 1.
  double implicit(const Vec3& p) const;
  Vec3 implicit_gradient(const Vec3& p) const;
  // Outward unit normal at a point assumed on the surface.
  Vec3 outward_normal(const Vec3& p) const;

  // Point on the surface from reduced (parametric) latitude and longitude.
  Vec3 point_from_reduced(double beta, double lambda) const;
  // Point on the surface from geodetic latitude and longitude.
  Vec3 point_from_geodetic(double phi, double lambda) const;
  double reduced_from_geodetic(double phi) const;
};

// Concentric avoidance surfaces: surface k has semi-axes
// (a + (gamma+k) R, c + (gamma+k) R) for k in {0,...,count-1}.
struct SurfaceFamily {
  Spheroid base;
  double gamma = 0.5;
  double sensing_range = 1.0;
  int count = 1;

  double offset(int k) const { return (gamma + k) * sensing_range; }
  Spheroid surface(int k) const;
};

// Foot point of a query point: nearest point on the surface, with the
// (outward) unit surface normal there and the query distance.
struct SurfaceNormal {
  Vec3 foot_point = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit, normal to the surface at foot_point
  double length = 0.0;             // ||query - foot_point||
  bool outside = true;             // query on or outside the surface
};

SurfaceNormal foot_point_normal(const Spheroid& s, const Vec3& p);

// Normal-line projection of p onto family surface k (nearest foot point).
Vec3 project_to_surface(const SurfaceFamily& family, int k, const Vec3& p);

// Unit tangent at p pointing chi radians clockwise from North (viewed from
// outside the surface). Throws PoleHeadingError at the poles.
Vec3 heading_vector(const Spheroid& s, const Vec3& p, double chi);
// North-pointing unit tangent at p. Throws PoleHeadingError at the poles.
Vec3 north_tangent(const Spheroid& s, const Vec3& p);

// Ivory's series factor g: pi (a+c) g approximates the meridian ellipse
// perimeter. Exactly 1 for a sphere.
double perimeter_factor(const Spheroid& s, int n_terms = 30);

// Closed-form surface area of the (oblate or spherical) spheroid.
double surface_area(const Spheroid& s);

// Area of the zone z in [z_lo, z_hi], closed form. z clamped to [-c, c].
double zone_area(const Spheroid& s, double z_lo, double z_hi);

// Latitude bounds z̄_0 > ... > z̄_{N-1} splitting the surface into N-1
// equal-area bands; z̄_0 = +c and z̄_{N-1} = -c.
std::vector<double> partition_bounds(const Spheroid& s, int n_agents);

}  // namespace covsim::geo
