#include "covsim/cov/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace covsim::cov {

int g_patch_depth = 3;

namespace {

struct ActivationPattern {
  bool c1_pos;
  bool c2_pos;
  bool beta_capped;

  bool operator==(const ActivationPattern&) const = default;
};

double sensing_core(const Vec3& pos, double theta, double psi,
                    const AgentConfig& cfg, const Vec3& point,
                    ActivationPattern* pattern) {
  const Vec3 rel = point - pos;
  const double r2 = rel.squaredNorm();
  const double R2 = cfg.sensing_range * cfg.sensing_range;

  const double beta_arg = cfg.eta * r2;
  const double beta = std::min(1.0, beta_arg);
  const double c1 = beta * R2 - r2;

  double c2 = -1.0;
  if (r2 > 0.0) {
    const Vec3 xb(std::cos(psi) * std::cos(theta),
                  std::sin(psi) * std::cos(theta), -std::sin(theta));
    const double cosphi =
        std::clamp(rel.dot(xb) / std::sqrt(r2), -1.0, 1.0);
    c2 = cfg.half_angle - std::acos(cosphi);
  }

  if (pattern) {
    pattern->c1_pos = c1 > 0.0;
    pattern->c2_pos = c2 > 0.0;
    pattern->beta_capped = beta_arg >= 1.0;
  }

  const double C1 = std::max(0.0, c1);
  const double C2 = std::max(0.0, c2);
  if (r2 <= 0.0 || (C1 <= 0.0 && C2 <= 0.0)) return 0.0;
  if (C1 <= 0.0 || C2 <= 0.0) return 0.0;  // one active zero still kills S
  return (C1 * C2) / (C1 + C2);
}

}  // namespace

double sensing_value(const AgentState& agent, const AgentConfig& cfg,
                     const Vec3& point) {
  return sensing_core(agent.position, agent.euler.y(), agent.euler.z(), cfg,
                      point, nullptr);
}

SensingEvaluation sensing_partials(const AgentState& agent,
                                   const AgentConfig& cfg, const Vec3& point) {
  SensingEvaluation out;
  const double h_pos = 1e-4 * cfg.sensing_range;
  const double h_ang = 1e-5;

  const Vec3 pos = agent.position;
  const double theta = agent.euler.y(), psi = agent.euler.z();

  ActivationPattern base{};
  out.value = sensing_core(pos, theta, psi, cfg, point, &base);

  // Central differences, falling one-sided into the piece containing the
  // base point whenever the perturbation crosses an activation boundary.
  auto diff = [&](auto&& eval, double h) {
    ActivationPattern pp{}, pm{};
    const double fp = eval(+h, &pp);
    const double fm = eval(-h, &pm);
    if (pp == pm) return (fp - fm) / (2.0 * h);
    if (pp == base) return (fp - out.value) / h;
    if (pm == base) return (out.value - fm) / h;
    return (fp - fm) / (2.0 * h);
  };

  for (int axis = 0; axis < 3; ++axis) {
    out.d_position[axis] = diff(
        [&](double h, ActivationPattern* p) {
          Vec3 q = pos;
          q[axis] += h;
          return sensing_core(q, theta, psi, cfg, point, p);
        },
        h_pos);
  }
  out.d_theta = diff(
      [&](double h, ActivationPattern* p) {
        return sensing_core(pos, theta + h, psi, cfg, point, p);
      },
      h_ang);
  out.d_psi = diff(
      [&](double h, ActivationPattern* p) {
        return sensing_core(pos, theta, psi + h, cfg, point, p);
      },
      h_ang);
  return out;
}

void accumulate_coverage(CoverageField& field, const SurfaceMesh& mesh,
                         const std::vector<AgentPose>& agents,
                         const Eigen::VectorXd& decay_rate, double dt,
                         std::vector<int>& touched,
                         std::vector<int>& scratch) {
  for (const AgentPose& ap : agents) {
    mesh.cells_within(ap.state.position, ap.config->sensing_range, scratch);
    for (int idx : scratch) {
      const double s =
          sensing_value(ap.state, *ap.config, mesh.cells()[idx].center);
      if (s > 0.0) {
        field.q[idx] += s * dt;
        touched.push_back(idx);
      }
    }
  }
  if (decay_rate.size() == field.q.size()) {
    for (int idx = 0; idx < decay_rate.size(); ++idx) {
      const double rate = decay_rate[idx];
      if (rate > 0.0) {
        field.q[idx] -= rate * dt;
        if (field.q[idx] < 0.0) field.q[idx] = 0.0;
        touched.push_back(idx);
      }
    }
  }
}

double coverage_error(const CoverageField& field, const SurfaceMesh& mesh) {
  double e = 0.0;
  const auto& cells = mesh.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double w = field.c_star - field.q[static_cast<int>(i)];
    if (w > 0.0) e += w * w * w * cells[i].area;
  }
  return e;
}

double coverage_error_max(const CoverageField& field,
                          const SurfaceMesh& mesh) {
  return field.c_star * field.c_star * field.c_star * mesh.total_area();
}

namespace {

// Closed-form S and partials inside a fixed activation piece. Used only at
// quadrature points whose neighborhood stays in one piece; the public
// sensing_partials op keeps the central-difference form.
struct AnalyticEval {
  double value = 0.0;
  Vec3 d_pos = Vec3::Zero();
  double d_theta = 0.0;
  double d_psi = 0.0;
};

// Activation code: which max{} branches are live at a point.
// Bit 0: c1 > 0, bit 1: c2 > 0, bit 2: beta capped at 1.
int activation_code(const Vec3& pos, const Vec3& xb, const AgentConfig& cfg,
                    const Vec3& point) {
  const Vec3 rel = point - pos;
  const double r2 = rel.squaredNorm();
  const double R2 = cfg.sensing_range * cfg.sensing_range;
  const double beta_arg = cfg.eta * r2;
  const double c1 = std::min(1.0, beta_arg) * R2 - r2;
  int code = (c1 > 0.0) ? 1 : 0;
  if (r2 > 0.0) {
    // phi < alpha is equivalent to cos(phi) > cos(alpha)
    if (rel.dot(xb) > std::cos(cfg.half_angle) * std::sqrt(r2)) code |= 2;
  }
  if (beta_arg >= 1.0) code |= 4;
  return code;
}

AnalyticEval analytic_partials(const Vec3& pos, double theta, double psi,
                               const AgentConfig& cfg, const Vec3& point) {
  AnalyticEval out;
  const Vec3 rel = point - pos;
  const double r2 = rel.squaredNorm();
  if (r2 <= 0.0) return out;
  const double r = std::sqrt(r2);
  const double R2 = cfg.sensing_range * cfg.sensing_range;

  const double beta_arg = cfg.eta * r2;
  const bool capped = beta_arg >= 1.0;
  const double c1 = (capped ? 1.0 : beta_arg) * R2 - r2;

  const double cT = std::cos(theta), sT = std::sin(theta);
  const double cP = std::cos(psi), sP = std::sin(psi);
  const Vec3 xb(cP * cT, sP * cT, -sT);
  const double u = std::clamp(rel.dot(xb) / r, -1.0, 1.0);
  const double phi = std::acos(u);
  const double c2 = cfg.half_angle - phi;
  if (c1 <= 0.0 || c2 <= 0.0) return out;

  const double C1 = c1, C2 = c2, sum = C1 + C2;
  out.value = C1 * C2 / sum;
  const double dS_dC1 = (C2 * C2) / (sum * sum);
  const double dS_dC2 = (C1 * C1) / (sum * sum);

  // dc1/d(agent pos): c1 = beta R^2 - r^2 with beta = min(1, eta r^2)
  const double dc1_dr2 = (capped ? 0.0 : cfg.eta * R2) - 1.0;
  const Vec3 dc1_dpos = dc1_dr2 * (-2.0 * rel);  // d r^2/d pos = -2 rel

  // dc2 = -dphi. The raw acos derivative cancels catastrophically near the
  // sensor axis; use the normalized in-plane vectors instead, whose
  // magnitudes stay O(1). Within a hair of the axis the angular gradient
  // direction is degenerate and the term is dropped (integrable, zero-mean).
  Vec3 dphi_dpos = Vec3::Zero();
  double dphi_dth = 0.0, dphi_dpsi = 0.0;
  const Vec3 rhat = rel / r;
  const Vec3 perp_b = rhat - u * xb;   // component of rhat orthogonal to xb
  const double sin_phi = perp_b.norm();
  if (sin_phi > 1e-7) {
    const Vec3 ep = perp_b / sin_phi;             // in-plane, orthogonal to xb
    const Vec3 e_agent = (xb - u * rhat).normalized();  // orthogonal to rhat
    dphi_dpos = e_agent / r;  // gradient wrt the agent position
    const Vec3 dxb_dth(-cP * sT, -sP * sT, -cT);
    const Vec3 dxb_dpsi(-sP * cT, cP * cT, 0.0);
    dphi_dth = -ep.dot(dxb_dth);
    dphi_dpsi = -ep.dot(dxb_dpsi);
  }

  out.d_pos = dS_dC1 * dc1_dpos - dS_dC2 * dphi_dpos;
  out.d_theta = -dS_dC2 * dphi_dth;
  out.d_psi = -dS_dC2 * dphi_dpsi;
  return out;
}

struct TermAccumulator {
  const AgentConfig* cfg;
  Vec3 pos;
  double theta, psi;
  Vec3 xb;
  double cF, sF, cT, sT, cP, sP, secT;
  double hp, hpp, rate;
  std::array<double, 5> a{};
  double a0 = 0.0;

  void add(const Vec3& point, double area) {
    const AnalyticEval ev = analytic_partials(pos, theta, psi, *cfg, point);
    if (hp > 0.0 && (ev.d_pos.squaredNorm() > 0.0 || ev.d_theta != 0.0 ||
                     ev.d_psi != 0.0)) {
      const double Sx = ev.d_pos.x(), Sy = ev.d_pos.y(), Sz = ev.d_pos.z();
      const double f1 = Sx * cT * cP + Sy * cT * sP - Sz * sT;
      const double f2 = Sx * (sF * sT * cP - cF * sP) +
                        Sy * (sF * sT * sP + cF * cP) + Sz * sF * cT;
      const double f3 = Sx * (cF * sT * cP + sF * sP) +
                        Sy * (cF * sT * sP - sF * cP) + Sz * cF * cT;
      const double f4 = ev.d_psi * sF * secT + ev.d_theta * cF;
      const double f5 = ev.d_psi * cF * secT - ev.d_theta * sF;
      a[0] -= hp * f1 * area;
      a[1] -= hp * f2 * area;
      a[2] -= hp * f3 * area;
      a[3] -= hp * f4 * area;
      a[4] -= hp * f5 * area;
    }
    if (hpp > 0.0 && ev.value > 0.0) {
      a0 -= hpp * ev.value * rate * area;
    }
  }
};

Vec3 on_surface_point(const geo::Spheroid& sph, double z, double lam) {
  const double zz = std::clamp(z, -sph.c, sph.c);
  const double w =
      sph.a * std::sqrt(std::max(0.0, 1.0 - zz * zz / (sph.c * sph.c)));
  return Vec3(w * std::cos(lam), w * std::sin(lam), zz);
}

// Area density: dA = D(z) dz dlam for the surface of revolution.
double area_density(const geo::Spheroid& sph, double z) {
  const double k = sph.a * sph.a - sph.c * sph.c;
  const double c2 = sph.c * sph.c;
  return (sph.a / c2) * std::sqrt(c2 * c2 + k * z * z);
}

// Signed support level: positive inside the footprint, zero on its boundary.
// Scales chosen so both constraints contribute comparable magnitudes.
double support_level(const TermAccumulator& acc, const Vec3& point) {
  const Vec3 rel = point - acc.pos;
  const double r2 = rel.squaredNorm();
  const double R2 = acc.cfg->sensing_range * acc.cfg->sensing_range;
  const double c1 = std::min(1.0, acc.cfg->eta * r2) * R2 - r2;
  double c2n = -1.0;
  if (r2 > 0.0) {
    const double u = std::clamp(rel.dot(acc.xb) / std::sqrt(r2), -1.0, 1.0);
    const double ca = std::cos(acc.cfg->half_angle);
    c2n = (u - ca) / (1.0 - ca);
  }
  return std::min(c1 / R2, c2n);
}

// Finest-level mixed leaf: locate the support boundary by bisection along
// the leaf edges and integrate the interior polygon at its centroid. The
// exterior side of the support boundary contributes exactly zero.
void integrate_mixed_leaf(const geo::Spheroid& sph, TermAccumulator& acc,
                          double z0, double z1, double lam0, double lam1) {
  const double pz[4] = {z0, z0, z1, z1};
  const double pl[4] = {lam0, lam1, lam1, lam0};  // counter-clockwise
  double psi[4];
  int inside_count = 0;
  for (int i = 0; i < 4; ++i) {
    psi[i] = support_level(acc, on_surface_point(sph, pz[i], pl[i]));
    if (psi[i] > 0.0) ++inside_count;
  }
  if (inside_count == 0) return;

  auto edge_crossing = [&](int i, int j, double& cz, double& cl) {
    double ti = 0.0, tj = 1.0;
    double fi = psi[i];
    for (int it = 0; it < 7; ++it) {
      const double tm = 0.5 * (ti + tj);
      const double zq = pz[i] + tm * (pz[j] - pz[i]);
      const double lq = pl[i] + tm * (pl[j] - pl[i]);
      const double fm = support_level(acc, on_surface_point(sph, zq, lq));
      if ((fm > 0.0) == (fi > 0.0)) {
        ti = tm;
        fi = fm;
      } else {
        tj = tm;
      }
    }
    const double t = 0.5 * (ti + tj);
    cz = pz[i] + t * (pz[j] - pz[i]);
    cl = pl[i] + t * (pl[j] - pl[i]);
  };

  // Interior polygon: inside corners plus the two boundary crossings,
  // walking the quad edges in order. Saddle patterns fall back to the
  // quadrant rule.
  double vz[6], vl[6];
  int nv = 0;
  int crossings = 0;
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    if (psi[i] > 0.0) {
      vz[nv] = pz[i];
      vl[nv++] = pl[i];
    }
    if ((psi[i] > 0.0) != (psi[j] > 0.0)) {
      edge_crossing(i, j, vz[nv], vl[nv]);
      ++nv;
      ++crossings;
    }
  }
  if (crossings != 2 || nv < 3) {
    // ambiguous cut: quadrant midpoints
    const double dz = z1 - z0, dlam = lam1 - lam0;
    for (int zi = 0; zi < 2; ++zi) {
      const double zq = z0 + (zi + 0.5) * dz / 2.0;
      const double wq = area_density(sph, zq) * dz * dlam / 4.0;
      for (int li = 0; li < 2; ++li) {
        const double lq = lam0 + (li + 0.5) * dlam / 2.0;
        acc.add(on_surface_point(sph, zq, lq), wq);
      }
    }
    return;
  }
  // polygon area and centroid in (z, lam) coordinates
  double twice_area = 0.0, cz = 0.0, cl = 0.0;
  for (int i = 0; i < nv; ++i) {
    const int j = (i + 1) % nv;
    const double cross = vz[i] * vl[j] - vz[j] * vl[i];
    twice_area += cross;
    cz += (vz[i] + vz[j]) * cross;
    cl += (vl[i] + vl[j]) * cross;
  }
  const double poly_area = 0.5 * std::abs(twice_area);
  if (poly_area <= 0.0 || std::abs(twice_area) < 1e-30) return;
  cz /= 3.0 * twice_area;
  cl /= 3.0 * twice_area;
  acc.add(on_surface_point(sph, cz, cl),
          poly_area * area_density(sph, cz));
}

// Recursive quadrature over a cell patch [z0,z1] x [lam0,lam1] that splits
// along the activation boundaries. A patch is accepted as one smooth piece
// only if its center keeps a clear margin to the range sphere and the cone
// flank, so thin boundary slivers cannot hide between probe points; accepted
// patches use a 2x2 Gauss product rule against the exact area density.
void integrate_patch(const geo::Spheroid& sph, TermAccumulator& acc,
                     double z0, double z1, double lam0, double lam1,
                     int code00, int code01, int code10, int code11,
                     int depth) {
  const double zm = 0.5 * (z0 + z1), lm = 0.5 * (lam0 + lam1);
  const Vec3 center = on_surface_point(sph, zm, lm);
  const int codec = activation_code(acc.pos, acc.xb, *acc.cfg, center);
  const bool codes_equal = (code00 == code01 && code01 == code10 &&
                            code10 == code11 && code11 == codec);
  const double dz = z1 - z0, dlam = lam1 - lam0;

  // margin of the patch center to the two activation boundaries
  const Vec3 rel = center - acc.pos;
  const double r = rel.norm();
  const double u = std::clamp(rel.dot(acc.xb) / std::max(r, 1e-12), -1.0, 1.0);
  const double phi = std::acos(u);
  const double half_diam =
      std::max((on_surface_point(sph, z0, lam0) - center).norm(),
               (on_surface_point(sph, z1, lam1) - center).norm());
  const double margin = 1.2 * half_diam;
  const double dist_sphere = std::abs(r - acc.cfg->sensing_range);
  const double dist_cone =
      r * std::abs(std::sin(
              std::min(M_PI / 2, std::abs(phi - acc.cfg->half_angle))));
  // the angular-gradient direction field swirls around the sensor axis, so
  // patches near it need refinement even though S is smooth there
  const double dist_axis = (rel - rel.dot(acc.xb) * acc.xb).norm();
  const bool clear = dist_sphere > margin && dist_cone > margin &&
                     dist_axis > 2.0 * margin;

  if (codes_equal && (clear || depth <= 0)) {
    if ((codec & 3) != 3) return;  // S vanishes on the whole patch
    constexpr double kGaussOff = 0.28867513459481287;  // 1/(2 sqrt(3))
    const double zg[2] = {zm - kGaussOff * dz, zm + kGaussOff * dz};
    const double lg[2] = {lm - kGaussOff * dlam, lm + kGaussOff * dlam};
    for (double zq : zg) {
      const double wq = area_density(sph, zq) * dz * dlam / 4.0;
      for (double lq : lg) {
        acc.add(on_surface_point(sph, zq, lq), wq);
      }
    }
    return;
  }
  if (depth <= 0) {
    integrate_mixed_leaf(sph, acc, z0, z1, lam0, lam1);
    return;
  }
  auto code_at = [&](double z, double lam) {
    return activation_code(acc.pos, acc.xb, *acc.cfg,
                           on_surface_point(sph, z, lam));
  };
  const int cb = code_at(z0, lm);   // bottom edge midpoint
  const int ct = code_at(z1, lm);   // top edge midpoint
  const int cl = code_at(zm, lam0);
  const int cr = code_at(zm, lam1);
  integrate_patch(sph, acc, z0, zm, lam0, lm, code00, cb, cl, codec,
                  depth - 1);
  integrate_patch(sph, acc, z0, zm, lm, lam1, cb, code01, codec, cr,
                  depth - 1);
  integrate_patch(sph, acc, zm, z1, lam0, lm, cl, codec, code10, ct,
                  depth - 1);
  integrate_patch(sph, acc, zm, z1, lm, lam1, codec, cr, ct, code11,
                  depth - 1);
}

}  // namespace

CoverageTerms local_coverage_terms(const AgentState& agent,
                                   const AgentConfig& cfg,
                                   const CoverageField& field,
                                   const SurfaceMesh& mesh,
                                   const Eigen::VectorXd* q_rate) {
  CoverageTerms out;
  TermAccumulator acc;
  acc.cfg = &cfg;
  acc.pos = agent.position;
  acc.theta = agent.euler.y();
  acc.psi = agent.euler.z();
  acc.cF = std::cos(agent.euler.x());
  acc.sF = std::sin(agent.euler.x());
  acc.cT = std::cos(agent.euler.y());
  acc.sT = std::sin(agent.euler.y());
  acc.cP = std::cos(agent.euler.z());
  acc.sP = std::sin(agent.euler.z());
  acc.secT = 1.0 / acc.cT;
  acc.xb = Vec3(acc.cP * acc.cT, acc.sP * acc.cT, -acc.sT);

  // One cell of margin so partially-in-range cells contribute their inside
  // slice; the patch quadrature vanishes outside the footprint support.
  static thread_local std::vector<int> nearby;
  mesh.cells_within(agent.position,
                    cfg.sensing_range + mesh.typical_cell_diameter(), nearby);
  if (q_rate == nullptr) {
    bool any_uncovered = false;
    for (int idx : nearby) {
      if (field.q[idx] < field.c_star) {
        any_uncovered = true;
        break;
      }
    }
    if (!any_uncovered) return out;  // h' vanishes over the whole footprint
  }
  for (int idx : nearby) {
    const double w = field.c_star - field.q[idx];
    if (w <= 0.0 && q_rate == nullptr) continue;
    acc.hp = (w > 0.0) ? 3.0 * w * w : 0.0;
    acc.hpp = (q_rate != nullptr && w > 0.0) ? 6.0 * w : 0.0;
    acc.rate = (q_rate != nullptr) ? (*q_rate)[idx] : 0.0;
    double z0, z1, lam0, lam1;
    mesh.cell_patch(idx, z0, z1, lam0, lam1);
    const auto& sph = mesh.spheroid();
    auto code_at = [&](double z, double lam) {
      return activation_code(acc.pos, acc.xb, cfg,
                             on_surface_point(sph, z, lam));
    };
    // start from the cell quadrants so smooth cells integrate at 2x2
    const double zm = 0.5 * (z0 + z1), lm = 0.5 * (lam0 + lam1);
    const int k00 = code_at(z0, lam0), k01 = code_at(z0, lam1);
    const int k10 = code_at(z1, lam0), k11 = code_at(z1, lam1);
    const int kb = code_at(z0, lm), kt = code_at(z1, lm);
    const int kl = code_at(zm, lam0), kr = code_at(zm, lam1);
    const int kc = code_at(zm, lm);
    integrate_patch(sph, acc, z0, zm, lam0, lm, k00, kb, kl, kc, g_patch_depth);
    integrate_patch(sph, acc, z0, zm, lm, lam1, kb, k01, kc, kr, g_patch_depth);
    integrate_patch(sph, acc, zm, z1, lam0, lm, kl, kc, k10, kt, g_patch_depth);
    integrate_patch(sph, acc, zm, z1, lm, lam1, kc, kr, kt, k11, g_patch_depth);
  }
  out.a = acc.a;
  out.a0 = acc.a0;
  return out;
}

}  // namespace covsim::cov
