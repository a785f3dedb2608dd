#pragma once

#include "momkde/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace momkde {

enum class Label : std::uint8_t
{
  inlier = 0,
  outlier = 1
};

//! Point matrix with optional inlier/outlier labels and provenance.
struct Dataset
{
  PointMatrix points;
  std::optional<std::vector<Label>> labels;
  std::string name;
  std::optional<std::uint64_t> seed;

  std::size_t size() const noexcept
  {
    return static_cast<std::size_t>(points.rows());
  }
  int dimension() const noexcept { return static_cast<int>(points.cols()); }
  bool labeled() const noexcept { return labels.has_value(); }

  std::size_t count(Label label) const;
  //! Indices carrying `label`, ascending. Requires labels.
  std::vector<std::size_t> indices_of(Label label) const;

  //! Throws on a labels/points length mismatch.
  void validate() const;
};

//! Stacks two datasets of equal dimension; labels are kept only when both
//! sides carry them.
Dataset concatenate(const Dataset& first,
                    const Dataset& second,
                    std::string name = {});

//! Subset of rows in the given order.
Dataset select_rows(const Dataset& data, const std::vector<std::size_t>& rows);

} // namespace momkde
