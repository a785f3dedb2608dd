#pragma once

#include "momkde/density.hpp"
#include "momkde/mom.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace momkde {

//! A fitted model as dumped by `fit` and consumed by `eval`.
struct FittedModel
{
  std::string method; // kde | mom | rkde | spkde
  std::variant<WeightedDensityEstimate, MomEstimate> estimate;
  //! Normalizing constant of a weighted estimate (MoM keeps its own).
  std::optional<double> normalization;
  //! When set, points are written as a reference to this CSV instead of
  //! inline.
  std::optional<std::string> points_path;
  nlohmann::json extra = nlohmann::json::object();

  Vector evaluate(const PointMatrix& queries) const;
  int dimension() const;
};

nlohmann::json model_to_json(const FittedModel& model);
//! `base_dir` resolves a relative points_path.
FittedModel model_from_json(const nlohmann::json& j,
                            const std::filesystem::path& base_dir = {});

void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

} // namespace momkde
