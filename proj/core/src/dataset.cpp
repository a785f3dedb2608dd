#include "momkde/dataset.hpp"

#include "momkde/error.hpp"

#include <algorithm>
#include <string>

namespace momkde {

std::size_t Dataset::count(Label label) const
{
  if (!labels)
    return 0;
  return static_cast<std::size_t>(std::count(labels->begin(), labels->end(), label));
}

std::vector<std::size_t> Dataset::indices_of(Label label) const
{
  if (!labels)
    fail(ErrorCode::schema, "dataset '" + name + "' carries no labels");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels->size(); ++i)
    if ((*labels)[i] == label)
      out.push_back(i);
  return out;
}

void Dataset::validate() const
{
  if (labels && labels->size() != size())
    fail(ErrorCode::shape,
         "dataset '" + name + "' has " + std::to_string(size()) + " rows but " +
           std::to_string(labels->size()) + " labels");
}

Dataset concatenate(const Dataset& first, const Dataset& second, std::string name)
{
  if (first.size() > 0 && second.size() > 0 && first.dimension() != second.dimension())
    fail(ErrorCode::shape, "cannot concatenate datasets of different dimension");

  const auto cols = first.size() > 0 ? first.points.cols() : second.points.cols();
  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(first.size() + second.size()), cols);
  if (first.size() > 0)
    out.points.topRows(first.points.rows()) = first.points;
  if (second.size() > 0)
    out.points.bottomRows(second.points.rows()) = second.points;
  if (first.labels && second.labels) {
    out.labels = *first.labels;
    out.labels->insert(out.labels->end(), second.labels->begin(), second.labels->end());
  }
  out.name = name.empty() ? first.name : std::move(name);
  return out;
}

Dataset select_rows(const Dataset& data, const std::vector<std::size_t>& rows)
{
  Dataset out;
  out.name = data.name;
  out.seed = data.seed;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), data.points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= data.size())
      fail(ErrorCode::shape, "row index out of range");
    out.points.row(static_cast<Eigen::Index>(r)) =
      data.points.row(static_cast<Eigen::Index>(rows[r]));
  }
  if (data.labels) {
    out.labels.emplace();
    out.labels->reserve(rows.size());
    for (auto r : rows)
      out.labels->push_back((*data.labels)[r]);
  }
  return out;
}

} // namespace momkde
