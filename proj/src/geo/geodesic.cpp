#include "covsim/geo/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "covsim/errors.hpp"

namespace covsim::geo {

namespace {

constexpr double kLambdaTol = 1e-12;
constexpr int kMaxIter = 200;
constexpr int kGaussNodes = 32;

double wrap_pi(double x) {
  x = std::remainder(x, 2.0 * M_PI);
  return x;
}

double wrap_two_pi(double x) {
  x = std::fmod(x, 2.0 * M_PI);
  if (x < 0.0) x += 2.0 * M_PI;
  return x;
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes/weights on [-1, 1] via Newton on P_n.
const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    GaussRule r;
    const int n = kGaussNodes;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / pp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
  }();
  return rule;
}

template <typename F>
double integrate(F&& f, double lo, double hi) {
  if (lo == hi) return 0.0;
  const double sign = (hi >= lo) ? 1.0 : -1.0;
  const double a = std::min(lo, hi), b = std::max(lo, hi);
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.8)));
  const auto& rule = gauss_rule();
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double pa = a + (b - a) * p / panels;
    const double pb = a + (b - a) * (p + 1) / panels;
    const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
    double acc = 0.0;
    for (int i = 0; i < kGaussNodes; ++i) {
      acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total += acc * half;
  }
  return sign * total;
}

// ds/dsigma = b sqrt(1 + k2 sin^2 sigma) on the auxiliary sphere.
double arc_integral(double k2, double s_lo, double s_hi) {
  return integrate(
      [k2](double s) {
        const double ss = std::sin(s);
        return std::sqrt(1.0 + k2 * ss * ss);
      },
      s_lo, s_hi);
}

// Longitude integral: lambda = omega - f sin(alpha0) * I3.
double lon_integral(double k2, double f, double s_lo, double s_hi) {
  return integrate(
      [k2, f](double s) {
        const double ss = std::sin(s);
        const double t = std::sqrt(1.0 + k2 * ss * ss);
        return (2.0 - f) / (1.0 + (1.0 - f) * t);
      },
      s_lo, s_hi);
}

struct AuxGeometry {
  double sigma = 0.0;      // arc between the points on the auxiliary sphere
  double sigma1 = 0.0;     // arc from the node to point 1
  double sin_alpha0 = 0.0;
  double cos2_alpha0 = 1.0;
  double sin_alpha1 = 0.0;
  double cos_alpha1 = 1.0;
  bool degenerate = false;  // antipodal on the auxiliary sphere
};

AuxGeometry solve_aux(double beta1, double beta2, double omega) {
  AuxGeometry g;
  const double sb1 = std::sin(beta1), cb1 = std::cos(beta1);
  const double sb2 = std::sin(beta2), cb2 = std::cos(beta2);
  const double so = std::sin(omega), co = std::cos(omega);

  const double x = cb1 * sb2 - sb1 * cb2 * co;
  const double y = cb2 * so;
  const double sin_sigma = std::hypot(x, y);
  const double cos_sigma = sb1 * sb2 + cb1 * cb2 * co;
  if (sin_sigma < 1e-15) {
    g.degenerate = true;
    g.sigma = (cos_sigma > 0.0) ? 0.0 : M_PI;
    return g;
  }
  g.sigma = std::atan2(sin_sigma, cos_sigma);
  g.sin_alpha1 = y / sin_sigma;
  g.cos_alpha1 = x / sin_sigma;
  g.sin_alpha0 = g.sin_alpha1 * cb1;
  g.cos2_alpha0 = 1.0 - g.sin_alpha0 * g.sin_alpha0;
  g.sigma1 = std::atan2(sb1, cb1 * g.cos_alpha1);
  return g;
}

struct SurfacePoint {
  double beta;
  double lambda;
};

SurfacePoint to_surface_point(const Spheroid& s, const Vec3& p) {
  const double m = s.implicit(p);
  if (std::abs(m - 1.0) > 1e-5) {
    throw GeodesicError("geodesic endpoint is not on the spheroid");
  }
  const double w = std::hypot(p.x(), p.y());
  SurfacePoint sp;
  sp.beta = std::atan2(p.z() / s.c, w / s.a);
  sp.lambda = (w > 0.0) ? std::atan2(p.y(), p.x()) : 0.0;
  return sp;
}

struct ShootResult {
  bool valid = false;
  double lon_err = std::numeric_limits<double>::quiet_NaN();
  double distance = 0.0;
};

// Forward evaluation for the heading search: from (beta1, omega-origin) with
// azimuth alpha1, find the crossing of latitude beta2 on the given branch and
// report the longitude error against the target L.
ShootResult shoot(const Spheroid& sph, double beta1, double beta2,
                  double target_lon, double alpha1, int branch) {
  ShootResult r;
  const double f = sph.flattening();
  const double cb1 = std::cos(beta1), sb1 = std::sin(beta1);
  const double sin_a1 = std::sin(alpha1), cos_a1 = std::cos(alpha1);
  const double sin_a0 = sin_a1 * cb1;
  const double cos2_a0 = 1.0 - sin_a0 * sin_a0;
  const double cos_a0 = std::sqrt(std::max(0.0, cos2_a0));
  if (cos_a0 < 1e-15) {
    // equatorial circle: crosses beta2 only if beta2 == 0
    return r;
  }
  const double sin_s2 = std::sin(beta2) / cos_a0;
  if (std::abs(sin_s2) > 1.0) return r;

  const double sigma1 = std::atan2(sb1, cb1 * cos_a1);
  const double base = std::asin(std::clamp(sin_s2, -1.0, 1.0));
  double sigma2 = (branch == 0) ? base : M_PI - base;
  while (sigma2 <= sigma1 + 1e-15) sigma2 += 2.0 * M_PI;
  if (sigma2 - sigma1 > M_PI + 0.5) return r;  // beyond the shortest-arc range

  const double k2 = sph.ep2() * cos2_a0;
  const double omega1 = std::atan2(sin_a0 * std::sin(sigma1), std::cos(sigma1));
  const double omega2 = std::atan2(sin_a0 * std::sin(sigma2), std::cos(sigma2));
  double domega = omega2 - omega1;
  if (sin_a0 > 0.0) {
    domega = wrap_two_pi(domega);
  } else if (sin_a0 < 0.0) {
    domega = -wrap_two_pi(-domega);
  }
  const double lon =
      domega - f * sin_a0 * lon_integral(k2, f, sigma1, sigma2);
  r.valid = true;
  r.lon_err = wrap_pi(lon - target_lon);
  r.distance = sph.c * arc_integral(k2, sigma1, sigma2);
  return r;
}

GeodesicSolution composite_solution(const Spheroid& s, const SurfacePoint& a,
                                    const SurfacePoint& b) {
  GeodesicSolution sol;
  sol.converged = false;
  sol.used_antipodal_fallback = true;
  const double dlon = wrap_pi(b.lambda - a.lambda);
  const double lat_leg = std::abs(dlon) * s.a * std::cos(a.beta);
  const double lon_leg = meridian_arc(s, a.beta, b.beta);
  sol.distance = lat_leg + lon_leg;
  if (lat_leg > 1e-12 * s.a) {
    sol.initial_heading = (dlon > 0.0) ? M_PI / 2.0 : 3.0 * M_PI / 2.0;
  } else {
    sol.initial_heading = (b.beta >= a.beta) ? 0.0 : M_PI;
  }
  return sol;
}

}  // namespace

double meridian_arc(const Spheroid& s, double beta1, double beta2) {
  return s.c * arc_integral(s.ep2(), beta1, beta2);
}

double composite_path_length(const Spheroid& s, const Vec3& p1,
                             const Vec3& p2) {
  const SurfacePoint a = to_surface_point(s, p1);
  const SurfacePoint b = to_surface_point(s, p2);
  return composite_solution(s, a, b).distance;
}

GeodesicSolution vincenty_inverse(const Spheroid& s, const Vec3& p1_in,
                                  const Vec3& p2_in) {
  const Vec3 p1 = foot_point_normal(s, p1_in).foot_point;
  const Vec3 p2 = foot_point_normal(s, p2_in).foot_point;
  const SurfacePoint sp1 = to_surface_point(s, p1);
  const SurfacePoint sp2 = to_surface_point(s, p2);
  const double f = s.flattening();

  GeodesicSolution sol;
  double L = wrap_pi(sp2.lambda - sp1.lambda);
  const double lonsign = (L < 0.0) ? -1.0 : 1.0;
  L = std::abs(L);
  const double beta1 = sp1.beta, beta2 = sp2.beta;

  if ((p1 - p2).norm() < 1e-12 * s.a) {
    sol.converged = true;
    return sol;
  }

  // Exactly antipodal equatorial pair: degenerate family of geodesics; take
  // the meridian over the pole.
  const bool equatorial = std::abs(beta1) < 1e-12 && std::abs(beta2) < 1e-12;
  if (equatorial && std::abs(L - M_PI) < 1e-12) {
    sol.converged = true;
    sol.used_antipodal_fallback = true;
    sol.distance = 2.0 * meridian_arc(s, 0.0, M_PI / 2.0);
    sol.initial_heading = 0.0;
    return sol;
  }

  // An equatorial arc is the shortest path only while L <= (1-f) pi; past
  // that the geodesic leaves the equator and the heading search finds it.
  const bool equatorial_long = equatorial && L > (1.0 - f) * M_PI;

  // lambda(omega): true longitude difference produced by the auxiliary-sphere
  // arc at spherical longitude omega.
  auto lambda_of = [&](double omega, AuxGeometry* out) {
    const AuxGeometry g = solve_aux(beta1, beta2, omega);
    if (out) *out = g;
    if (g.degenerate) return std::numeric_limits<double>::quiet_NaN();
    const double kk2 = s.ep2() * g.cos2_alpha0;
    return omega -
           f * g.sin_alpha0 * lon_integral(kk2, f, g.sigma1, g.sigma1 + g.sigma);
  };

  bool primary_ok = false;
  AuxGeometry geom;
  double k2 = 0.0;
  if (!equatorial_long) {
    double omega = L;
    for (int it = 0; it < kMaxIter; ++it) {
      geom = solve_aux(beta1, beta2, omega);
      if (geom.degenerate) break;
      k2 = s.ep2() * geom.cos2_alpha0;
      const double i3 =
          lon_integral(k2, f, geom.sigma1, geom.sigma1 + geom.sigma);
      const double omega_next = L + f * geom.sin_alpha0 * i3;
      const double delta = std::abs(omega_next - omega);
      omega = omega_next;
      if (delta < kLambdaTol) {
        geom = solve_aux(beta1, beta2, omega);
        primary_ok = !geom.degenerate;
        break;
      }
      if (std::abs(omega) > 1.9 * M_PI || it >= 30) {
        break;  // the plain iteration is not contracting at this flattening
      }
    }

    if (!primary_ok) {
      // Bisect lambda(omega) = L on [0, pi]; lambda(0) = 0 and
      // lambda(pi) = pi bracket every eastward target.
      double lo = 0.0, hi = M_PI;
      bool ok = true;
      for (int it = 0; it < 120 && ok; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double lam = lambda_of(mid, nullptr);
        if (std::isnan(lam)) {
          ok = false;
          break;
        }
        if (lam < L) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      if (ok) {
        const double omega_star = 0.5 * (lo + hi);
        const double lam = lambda_of(omega_star, &geom);
        if (!std::isnan(lam) && std::abs(lam - L) < 1e-9 && !geom.degenerate) {
          primary_ok = true;
        }
      }
    }
  }

  if (primary_ok) {
    k2 = s.ep2() * geom.cos2_alpha0;
    sol.distance =
        s.c * arc_integral(k2, geom.sigma1, geom.sigma1 + geom.sigma);
    double chi = std::atan2(geom.sin_alpha1, geom.cos_alpha1);
    if (lonsign < 0.0) chi = -chi;
    sol.initial_heading = wrap_two_pi(chi);
    sol.converged = true;
    return sol;
  }

  // Supplemental method: search the departure azimuth directly.
  constexpr int kScan = 1024;
  double best_err = std::numeric_limits<double>::infinity();
  double best_alpha = 0.0, best_dist = 0.0;
  for (int branch = 0; branch < 2; ++branch) {
    double prev_alpha = 0.0;
    double prev_err = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i < kScan; ++i) {
      const double alpha = M_PI * i / kScan;
      const ShootResult r = shoot(s, beta1, beta2, L, alpha, branch);
      if (r.valid) {
        if (std::abs(r.lon_err) < best_err) {
          best_err = std::abs(r.lon_err);
          best_alpha = alpha;
          best_dist = r.distance;
        }
        if (!std::isnan(prev_err) && prev_err * r.lon_err < 0.0) {
          // bisect the bracket
          double lo = prev_alpha, hi = alpha, flo = prev_err;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const ShootResult rm = shoot(s, beta1, beta2, L, mid, branch);
            if (!rm.valid) break;
            if (std::abs(rm.lon_err) < best_err) {
              best_err = std::abs(rm.lon_err);
              best_alpha = mid;
              best_dist = rm.distance;
            }
            if (flo * rm.lon_err <= 0.0) {
              hi = mid;
            } else {
              lo = mid;
              flo = rm.lon_err;
            }
          }
        }
        prev_err = r.lon_err;
        prev_alpha = alpha;
      } else {
        prev_err = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  if (best_err < 1e-9) {
    sol.converged = true;
    sol.used_antipodal_fallback = true;
    sol.distance = best_dist;
    double chi = best_alpha;
    if (lonsign < 0.0) chi = -chi;
    sol.initial_heading = wrap_two_pi(chi);
    return sol;
  }

  return composite_solution(s, sp1, sp2);
}

}  // namespace covsim::geo
