#include "covsim/cov/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "covsim/errors.hpp"

namespace covsim::cov {

namespace {

// z splitting [z_lo, z_hi] into fractions of the zone area, by bisection on
// the closed-form zone area.
double zone_split(const geo::Spheroid& s, double z_lo, double z_hi,
                  double fraction) {
  const double target = fraction * geo::zone_area(s, z_lo, z_hi);
  double lo = z_lo, hi = z_hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (geo::zone_area(s, z_lo, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

int row_count_for(const geo::Spheroid& s, double cell_size) {
  const double meridian_half =
      M_PI / 2.0 * (s.a + s.c) * geo::perimeter_factor(s);
  return std::max(4, static_cast<int>(std::round(meridian_half / cell_size)));
}

long cell_count_for(const geo::Spheroid& s, double cell_size, int n_rows) {
  long total = 0;
  for (int r = 0; r < n_rows; ++r) {
    const double z = zone_split(s, -s.c, s.c, 1.0 - (r + 0.5) / n_rows);
    const double w =
        s.a * std::sqrt(std::max(0.0, 1.0 - z * z / (s.c * s.c)));
    total += std::max(1L, std::lround(2.0 * M_PI * w / cell_size));
  }
  return total;
}

}  // namespace

SurfaceMesh::SurfaceMesh(const geo::Spheroid& s, int target_cells)
    : spheroid_(s) {
  if (target_cells < 16) {
    throw ValidationError("mesh needs at least 16 cells");
  }
  const double area = geo::surface_area(s);
  // Calibrate the nominal cell size so the realized count lands near the
  // target (the equal-area row construction biases the naive estimate).
  double cell_size = std::sqrt(area / target_cells);
  {
    const int rows0 = row_count_for(s, cell_size);
    const long n0 = cell_count_for(s, cell_size, rows0);
    cell_size *= std::sqrt(static_cast<double>(n0) / target_cells);
  }
  const int n_rows = row_count_for(s, cell_size);

  // Equal-area rows from the north pole down.
  std::vector<double> row_bounds(n_rows + 1);
  row_bounds[0] = s.c;
  row_bounds[n_rows] = -s.c;
  for (int r = 1; r < n_rows; ++r) {
    row_bounds[r] =
        zone_split(s, -s.c, s.c, 1.0 - static_cast<double>(r) / n_rows);
  }

  const double row_area = area / n_rows;
  cells_.reserve(target_cells + 4 * n_rows);
  rows_.reserve(n_rows);
  for (int r = 0; r < n_rows; ++r) {
    Row row;
    row.z_top = row_bounds[r];
    row.z_bot = row_bounds[r + 1];
    row.z_center = zone_split(s, row.z_bot, row.z_top, 0.5);
    const double w = s.a * std::sqrt(std::max(
                                0.0, 1.0 - (row.z_center * row.z_center) /
                                               (s.c * s.c)));
    row.ring_radius = w;
    const int n_lon =
        std::max(1, static_cast<int>(std::lround(2.0 * M_PI * w / cell_size)));
    row.first_cell = static_cast<int>(cells_.size());
    row.count = n_lon;
    const double cell_area = row_area / n_lon;
    for (int j = 0; j < n_lon; ++j) {
      const double lam = 2.0 * M_PI * (j + 0.5) / n_lon;
      Cell cell;
      cell.center = Vec3(w * std::cos(lam), w * std::sin(lam), row.z_center);
      cell.normal = s.outward_normal(cell.center);
      cell.area = cell_area;
      cells_.push_back(cell);
      cell_row_.push_back(r);
    }
    rows_.push_back(row);
  }
  total_area_ = area;
  cell_diameter_ = std::sqrt(2.0 * area / static_cast<double>(cells_.size()));
}

void SurfaceMesh::cells_within(const Vec3& p, double radius,
                               std::vector<int>& out) const {
  out.clear();
  const double r2 = radius * radius;
  const double pw = std::hypot(p.x(), p.y());
  const double lam_p = (pw > 0.0) ? std::atan2(p.y(), p.x()) : 0.0;
  for (const Row& row : rows_) {
    if (row.z_center < p.z() - radius || row.z_center > p.z() + radius) {
      continue;
    }
    const double dz = row.z_center - p.z();
    const double w = row.ring_radius;
    // ring-to-point distance: d^2 = w^2 + pw^2 - 2 w pw cos(dlam) + dz^2
    const double base = w * w + pw * pw + dz * dz - r2;
    if (pw < 1e-12 || w < 1e-12) {
      if (base <= 2.0 * w * pw) {
        for (int j = 0; j < row.count; ++j) out.push_back(row.first_cell + j);
      }
      continue;
    }
    const double cos_need = base / (2.0 * w * pw);
    if (cos_need > 1.0) continue;  // entire ring too far
    if (cos_need < -1.0) {
      for (int j = 0; j < row.count; ++j) out.push_back(row.first_cell + j);
      continue;
    }
    const double dlam_max = std::acos(cos_need);
    const double step = 2.0 * M_PI / row.count;
    // cell j center at lam = (j + 0.5) step
    int j_lo = static_cast<int>(std::floor((lam_p - dlam_max) / step - 0.5));
    int j_hi = static_cast<int>(std::ceil((lam_p + dlam_max) / step - 0.5));
    if (j_hi - j_lo + 1 >= row.count) {
      j_lo = 0;
      j_hi = row.count - 1;
    }
    for (int j = j_lo; j <= j_hi; ++j) {
      int idx = j % row.count;
      if (idx < 0) idx += row.count;
      const Vec3& c = cells_[row.first_cell + idx].center;
      const double d2 = (c - p).squaredNorm();
      if (d2 <= r2) out.push_back(row.first_cell + idx);
    }
  }
}

void SurfaceMesh::cell_patch(int cell_index, double& z_lo, double& z_hi,
                             double& lam_lo, double& lam_hi) const {
  const Row& row = rows_[cell_row_[cell_index]];
  const int j = cell_index - row.first_cell;
  const double step = 2.0 * M_PI / row.count;
  z_lo = row.z_bot;
  z_hi = row.z_top;
  lam_lo = j * step;
  lam_hi = (j + 1) * step;
}

}  // namespace covsim::cov
