#include "momkde/grid.hpp"

#include "momkde/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

namespace momkde {

EvaluationGrid::EvaluationGrid(Vector lower,
                               Vector upper,
                               std::vector<std::size_t> points_per_axis,
                               std::size_t node_cap)
  : lower_(std::move(lower))
  , upper_(std::move(upper))
  , points_per_axis_(std::move(points_per_axis))
{
  const auto d = lower_.size();
  if (d == 0 || upper_.size() != d || points_per_axis_.size() != static_cast<std::size_t>(d))
    fail(ErrorCode::shape, "grid bounds and resolution must share one positive dimension");

  cell_volume_ = 1.0;
  size_ = 1;
  spacing_.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(lower_[j] < upper_[j]) || !std::isfinite(lower_[j]) || !std::isfinite(upper_[j]))
      fail(ErrorCode::parameter, "grid requires finite lower < upper on every axis");
    const auto m = points_per_axis_[static_cast<std::size_t>(j)];
    if (m < 2)
      fail(ErrorCode::parameter, "grid needs at least two points per axis");
    if (size_ > node_cap / m)
      fail(ErrorCode::parameter,
           "grid exceeds the node cap of " + std::to_string(node_cap));
    size_ *= m;
    spacing_[static_cast<std::size_t>(j)] = (upper_[j] - lower_[j]) / static_cast<double>(m - 1);
    cell_volume_ *= spacing_[static_cast<std::size_t>(j)];
  }
}

double EvaluationGrid::axis_coordinate(int axis, std::size_t k) const
{
  const auto m = points_per_axis_[static_cast<std::size_t>(axis)];
  if (k + 1 == m)
    return upper_[axis];
  return lower_[axis] + static_cast<double>(k) * spacing_[static_cast<std::size_t>(axis)];
}

PointMatrix EvaluationGrid::nodes() const
{
  const int d = dimension();
  PointMatrix out(static_cast<Eigen::Index>(size_), d);
  std::vector<std::size_t> index(static_cast<std::size_t>(d), 0);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    for (int j = 0; j < d; ++j)
      out(static_cast<Eigen::Index>(flat), j) = axis_coordinate(j, index[static_cast<std::size_t>(j)]);
    for (int j = d - 1; j >= 0; --j) {
      auto& k = index[static_cast<std::size_t>(j)];
      if (++k < points_per_axis_[static_cast<std::size_t>(j)])
        break;
      k = 0;
    }
  }
  return out;
}

double EvaluationGrid::trapezoid_weight(std::size_t flat) const
{
  double w = cell_volume_;
  for (int j = dimension() - 1; j >= 0; --j) {
    const auto m = points_per_axis_[static_cast<std::size_t>(j)];
    const auto k = flat % m;
    flat /= m;
    if (k == 0 || k + 1 == m)
      w *= 0.5;
  }
  return w;
}

EvaluationGrid build_grid(const Dataset& data,
                          double padding_bandwidths,
                          double h_ref,
                          std::size_t points_per_axis,
                          std::size_t node_cap)
{
  if (data.size() == 0)
    fail(ErrorCode::empty_model, "cannot build a grid around an empty dataset");
  if (!(padding_bandwidths >= 0.0) || !(h_ref >= 0.0))
    fail(ErrorCode::parameter, "grid padding must be nonnegative");

  const int d = data.dimension();
  Vector lower = data.points.colwise().minCoeff().transpose();
  Vector upper = data.points.colwise().maxCoeff().transpose();
  std::vector<std::string> warnings;
  for (int j = 0; j < d; ++j) {
    if (lower[j] == upper[j]) {
      warnings.push_back("axis " + std::to_string(j) +
                         " is degenerate; widened to +-1 around the data");
      lower[j] -= 1.0;
      upper[j] += 1.0;
    } else {
      lower[j] -= padding_bandwidths * h_ref;
      upper[j] += padding_bandwidths * h_ref;
    }
  }
  if (d > 3)
    warnings.push_back("quadrature is unreliable for d > 3");

  EvaluationGrid grid(std::move(lower), std::move(upper),
                      std::vector<std::size_t>(static_cast<std::size_t>(d), points_per_axis),
                      node_cap);
  for (auto& w : warnings)
    grid.add_warning(std::move(w));
  return grid;
}

EvaluationGrid default_grid(const Dataset& data, double h)
{
  const int d = data.dimension();
  if (d > 3)
    fail(ErrorCode::parameter, "density normalization is only computed for d <= 3");
  const std::size_t per_axis = d == 1 ? 2001 : d == 2 ? 301 : 61;
  return build_grid(data, 5.0, h, per_axis);
}

double integrate_on_grid(const EvaluationGrid& grid, const Vector& values)
{
  if (static_cast<std::size_t>(values.size()) != grid.size())
    fail(ErrorCode::shape, "value vector does not match the grid size");
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = values[static_cast<Eigen::Index>(i)];
    if (std::isnan(v))
      fail(ErrorCode::numeric, "NaN in grid values at node " + std::to_string(i));
    total += grid.trapezoid_weight(i) * v;
  }
  return total;
}

NormalizedDensity normalize_density(const EvaluationGrid& grid, const Vector& values)
{
  if (grid.dimension() > 3)
    fail(ErrorCode::parameter, "density normalization is only computed for d <= 3");
  const double z = integrate_on_grid(grid, values);
  if (!(z > 0.0) || !std::isfinite(z))
    fail(ErrorCode::normalization,
         "cannot normalize: grid integral is " + std::to_string(z));
  return { values / z, z };
}

void write_grid_csv(const std::filesystem::path& path,
                    const EvaluationGrid& grid,
                    const Vector& values)
{
  if (static_cast<std::size_t>(values.size()) != grid.size())
    fail(ErrorCode::shape, "value vector does not match the grid size");
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::io, "cannot open '" + path.string() + "' for writing");

  const int d = grid.dimension();
  for (int j = 0; j < d; ++j)
    out << "x_" << (j + 1) << ',';
  out << "value\n";

  const PointMatrix nodes = grid.nodes();
  char buf[64];
  auto put = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, end - buf);
  };
  for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
    for (int j = 0; j < d; ++j) {
      put(nodes(i, j));
      out << ',';
    }
    put(values[i]);
    out << '\n';
  }
  if (!out)
    fail(ErrorCode::io, "failed writing '" + path.string() + "'");
}

} // namespace momkde
