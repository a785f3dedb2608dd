#pragma once

#include "momkde/dataset.hpp"
#include "momkde/types.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace momkde {

inline constexpr std::size_t default_grid_node_cap = std::size_t{ 1 } << 22;

/// Regular rectangular grid. Nodes are enumerated in row-major order (the
/// last axis varies fastest); grid-shaped value vectors follow that order.
class EvaluationGrid
{
public:
  EvaluationGrid(Vector lower,
                 Vector upper,
                 std::vector<std::size_t> points_per_axis,
                 std::size_t node_cap = default_grid_node_cap);

  int dimension() const noexcept { return static_cast<int>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  const std::vector<std::size_t>& points_per_axis() const noexcept
  {
    return points_per_axis_;
  }
  double spacing(int axis) const { return spacing_[axis]; }
  double cell_volume() const noexcept { return cell_volume_; }
  std::size_t size() const noexcept { return size_; }

  //! Coordinate of the k-th node along one axis.
  double axis_coordinate(int axis, std::size_t k) const;
  //! All nodes as a size() x d matrix.
  PointMatrix nodes() const;
  //! Trapezoid weight of node `flat` (cell volume times the 1/2 end factors).
  double trapezoid_weight(std::size_t flat) const;

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string message) { warnings_.push_back(std::move(message)); }

private:
  Vector lower_;
  Vector upper_;
  std::vector<std::size_t> points_per_axis_;
  std::vector<double> spacing_;
  double cell_volume_ = 0.0;
  std::size_t size_ = 0;
  std::vector<std::string> warnings_;
};

/// Bounding box of `data` padded by padding_bandwidths * h_ref on each side.
/// A degenerate axis (min == max) is widened to +-1 around the value and a
/// warning is recorded; d > 3 is allowed but flagged as unreliable for
/// quadrature.
EvaluationGrid build_grid(const Dataset& data,
                          double padding_bandwidths,
                          double h_ref,
                          std::size_t points_per_axis,
                          std::size_t node_cap = default_grid_node_cap);

//! Default normalization grid: 5 bandwidths of padding, 2001 nodes for d=1,
//! 301 per axis for d=2 and 61 per axis for d=3.
EvaluationGrid default_grid(const Dataset& data, double h);

//! Trapezoidal approximation of the integral of grid-shaped values.
double integrate_on_grid(const EvaluationGrid& grid, const Vector& values);

struct NormalizedDensity
{
  Vector values;
  double normalizer;
};

NormalizedDensity normalize_density(const EvaluationGrid& grid,
                                    const Vector& values);

//! CSV with columns x_1..x_d,value.
void write_grid_csv(const std::filesystem::path& path,
                    const EvaluationGrid& grid,
                    const Vector& values);

} // namespace momkde
