#pragma once

#include "momentkit/box_domain.hpp"
#include "momentkit/kernel_basis.hpp"
#include "momentkit/types.hpp"

#include <string>
#include <vector>

namespace momentkit {

// Uniform cell discretization of the domain box. Cells are enumerated with
// axis 0 fastest; centers.row(i) is the center of cell i.
struct CellGrid {
  BoxDomain box;
  std::vector<int> cells;  // per axis
  Matrix centers;
  Vector spacings;  // per axis
  double cell_volume = 0.0;

  long size() const { return centers.rows(); }
};

CellGrid make_cell_grid(const BoxDomain& box, const std::vector<int>& cells);

// 400 cells on an interval, 80 per axis on a rectangle.
CellGrid default_cell_grid(const BoxDomain& box);

// Absolutely continuous measure with piecewise-constant density on the grid.
struct GridMeasure {
  CellGrid grid;
  Vector density;  // nonnegative, one value per cell

  double mass() const { return density.sum() * grid.cell_volume; }
};

/// Moments of the measure: m_k = sum_cells phi_k(center) * density * volume.
Vector measure_moments(const GridMeasure& measure, const KernelBasis& basis);

struct ReconstructionResult {
  GridMeasure measure;
  double epsilon = 0.0;   // achieved sup mismatch of the moments
  double tv_value = 0.0;  // anisotropic total variation of the density
  long iterations = 0;
  double duality_gap = 0.0;
  bool converged = false;
  std::string warning;  // empty when the run is clean
};

/// Density recovery from moments: minimizes TV(density) + lambda * sup_k
// |m_k - moments(density)_k| over nonnegative densities, using a diagonally
// preconditioned primal-dual scheme. TV is the sum of absolute forward
// differences scaled to approximate the integral of |grad|, with zero-flux
// boundary. Stops when a feasible dual certificate puts the duality gap
// below 1e-6 * (1 + |objective|), or after 50000 iterations (then the result
// is flagged, not thrown). The family must contain the constant kernel.
ReconstructionResult reconstruct_tv(const Vector& m, const KernelBasis& basis,
                                    const CellGrid& grid, double lambda = 1e3);

// Extremal mass a moment-matching measure can place on a subregion.
struct MassBoundResult {
  std::vector<char> region;  // cell mask of the queried subregion
  double min_mass = 0.0;
  double max_mass = 0.0;
  /// Width of the moment-matching band that made the programs feasible: zero
  // when exact matching is feasible on the grid, else the minimal relaxation
  // (plus a small safety inflation) at which it becomes feasible.
  double relaxation = 0.0;
  // Cell masses attaining each bound.
  Vector min_masses;
  Vector max_masses;
};

// Minimum and maximum of sum_{cells in region} w over nonnegative cell
// masses w with sum_cells phi_k(center) w = m_k, solved as two linear
// programs. Infeasible exact matching triggers a minimal-relaxation solve
// first; the band used is reported in `relaxation`.
MassBoundResult mass_bounds(const Vector& m, const KernelBasis& basis,
                            const CellGrid& grid,
                            const std::vector<char>& region);
MassBoundResult mass_bounds(const Vector& m, const KernelBasis& basis,
                            const CellGrid& grid, const BoxDomain& region);

}  // namespace momentkit
