#include "momkde/model_io.hpp"

#include "momkde/datagen.hpp"
#include "momkde/error.hpp"

#include <fstream>

namespace momkde {

using nlohmann::json;

namespace {

constexpr const char* format_tag = "momkde-model";
constexpr int format_version = 1;

json points_to_json(const PointMatrix& points)
{
  json rows = json::array();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < points.cols(); ++k)
      row.push_back(points(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

PointMatrix points_from_json(const json& rows, int dimension)
{
  PointMatrix points(static_cast<Eigen::Index>(rows.size()), dimension);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != dimension)
      fail(ErrorCode::schema, "model point " + std::to_string(i) + " does not have "
                                + std::to_string(dimension) + " coordinates");
    for (int k = 0; k < dimension; ++k)
      points(static_cast<Eigen::Index>(i), k) = row[k].get<double>();
  }
  return points;
}

const PointMatrix& points_of(const FittedModel& model)
{
  return std::visit([](const auto& e) -> const PointMatrix& { return e.points(); },
                    model.estimate);
}

} // namespace

Vector FittedModel::evaluate(const PointMatrix& queries) const
{
  if (const auto* mom = std::get_if<MomEstimate>(&estimate))
    return mom_evaluate(*mom, queries);
  Vector values = kde_evaluate(std::get<WeightedDensityEstimate>(estimate), queries);
  if (normalization)
    values /= *normalization;
  return values;
}

int FittedModel::dimension() const
{
  return std::visit([](const auto& e) { return e.dimension(); }, estimate);
}

json model_to_json(const FittedModel& model)
{
  json j;
  j["format"] = format_tag;
  j["version"] = format_version;
  j["method"] = model.method;
  j["dimension"] = model.dimension();
  std::visit(
    [&](const auto& e) {
      j["kernel"] = to_string(e.kernel().family());
      j["bandwidth"] = e.bandwidth();
    },
    model.estimate);
  if (model.points_path)
    j["points_path"] = *model.points_path;
  else
    j["points"] = points_to_json(points_of(model));

  if (const auto* mom = std::get_if<MomEstimate>(&model.estimate)) {
    const auto& p = mom->partition();
    j["partition"] = { { "blocks", p.blocks }, { "seed", p.seed }, { "assignments", p.assignments } };
    j["normalization"] = mom->normalization() ? json(*mom->normalization()) : json();
  } else {
    const auto& w = std::get<WeightedDensityEstimate>(model.estimate).weights();
    j["weights"] = std::vector<double>(w.data(), w.data() + w.size());
    j["normalization"] = model.normalization ? json(*model.normalization) : json();
  }
  j["extra"] = model.extra;
  return j;
}

FittedModel model_from_json(const json& j, const std::filesystem::path& base_dir)
{
  try {
    if (!j.is_object() || j.value("format", std::string()) != format_tag)
      fail(ErrorCode::schema, "not a momkde model file");
    if (j.at("version").get<int>() != format_version)
      fail(ErrorCode::schema, "unsupported model version " + j.at("version").dump());

    const auto method = j.at("method").get<std::string>();
    if (method != "kde" && method != "mom" && method != "rkde" && method != "spkde")
      fail(ErrorCode::schema, "unknown model method '" + method + "'");
    const int d = j.at("dimension").get<int>();
    if (d < 1)
      fail(ErrorCode::schema, "model dimension must be positive");
    const KernelSpec kernel(parse_kernel_family(j.at("kernel").get<std::string>()), d);
    const double h = j.at("bandwidth").get<double>();
    const json extra = j.contains("extra") ? j.at("extra") : json::object();
    std::optional<std::string> points_path;

    PointMatrix points;
    if (j.contains("points_path")) {
      points_path = j.at("points_path").get<std::string>();
      std::filesystem::path path = *points_path;
      if (path.is_relative() && !base_dir.empty())
        path = base_dir / path;
      CsvOptions opts;
      if (extra.contains("label_column") && !extra.at("label_column").is_null())
        opts.label_column = extra.at("label_column").get<std::string>();
      points = load_csv_dataset(path, opts).points;
      if (points.cols() != d)
        fail(ErrorCode::schema, "points file dimension does not match the model");
    } else {
      points = points_from_json(j.at("points"), d);
    }

    std::optional<double> z;
    if (j.contains("normalization") && !j.at("normalization").is_null())
      z = j.at("normalization").get<double>();

    if (method == "mom") {
      const auto& pj = j.at("partition");
      BlockPartition partition;
      partition.blocks = pj.at("blocks").get<std::size_t>();
      partition.seed = pj.at("seed").get<std::uint64_t>();
      partition.assignments = pj.at("assignments").get<std::vector<std::size_t>>();
      if (partition.assignments.size() != static_cast<std::size_t>(points.rows()))
        fail(ErrorCode::schema, "partition length does not match the number of points");
      partition.block_sizes.assign(partition.blocks, 0);
      for (auto a : partition.assignments) {
        if (a >= partition.blocks)
          fail(ErrorCode::schema, "partition assignment out of range");
        ++partition.block_sizes[a];
      }
      partition.validate();
      return FittedModel{ method,
                          MomEstimate(std::move(points), std::move(partition), h, kernel, z),
                          std::nullopt, points_path, extra };
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(points.rows()))
      fail(ErrorCode::schema, "weight count does not match the number of points");
    Vector weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    return FittedModel{ method,
                        WeightedDensityEstimate(std::move(points), std::move(weights), h, kernel),
                        z, points_path, extra };
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("malformed model: ") + e.what());
  }
}

void save_model(const FittedModel& model, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << model_to_json(model).dump(2) << '\n';
  if (!out)
    fail(ErrorCode::io, "failed writing '" + path.string() + "'");
}

FittedModel load_model(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::io, "cannot open model '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, "model '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j, path.parent_path());
}

} // namespace momkde
