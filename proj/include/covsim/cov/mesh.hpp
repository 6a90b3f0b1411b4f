#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "covsim/geo/spheroid.hpp"

namespace covsim::cov {

using Vec3 = Eigen::Vector3d;

// Discretization of the surface of interest: latitude rows of equal zone
// area, each split into cells of equal area, so every band-area check is
// exact by construction.
class SurfaceMesh {
 public:
  struct Cell {
    Vec3 center;    // on the spheroid
    Vec3 normal;    // outward unit normal at the center
    double area;
  };

  SurfaceMesh(const geo::Spheroid& s, int target_cells);

  const geo::Spheroid& spheroid() const { return spheroid_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  double total_area() const { return total_area_; }
  double typical_cell_diameter() const { return cell_diameter_; }

  // Indices of cells whose centers lie within `radius` of `p`.
  void cells_within(const Vec3& p, double radius,
                    std::vector<int>& out) const;

  // The z and longitude extents of a cell, for integrands that need to
  // resolve sub-cell structure.
  void cell_patch(int cell_index, double& z_lo, double& z_hi, double& lam_lo,
                  double& lam_hi) const;

 private:
  struct Row {
    double z_top, z_bot;   // zone bounds
    double z_center;       // area-median z of the row
    double ring_radius;    // cylindrical radius of the center ring
    int first_cell;
    int count;
  };

  geo::Spheroid spheroid_;
  std::vector<Cell> cells_;
  std::vector<Row> rows_;
  std::vector<int> cell_row_;
  double total_area_ = 0.0;
  double cell_diameter_ = 0.0;
};

}  // namespace covsim::cov
