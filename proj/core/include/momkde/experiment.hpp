#pragma once

#include "momkde/datagen.hpp"
#include "momkde/grid.hpp"
#include "momkde/kernels.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace momkde {

enum class Method
{
  kde,
  mom,
  rkde,
  spkde
};

enum class Metric
{
  kl_fwd, // KL(f_hat || f)
  kl_rev, // KL(f || f_hat)
  js,
  auc
};

std::string_view to_string(Method method);
std::string_view to_string(Metric metric);
Method parse_method(std::string_view name);
Metric parse_metric(std::string_view name);

struct SyntheticSource
{
  OutlierScheme scheme = OutlierScheme::uniform;
};

struct CsvSource
{
  std::string path;
  std::optional<std::string> label_column;
  double outlier_label = 0.0;
};

struct BandwidthPolicy
{
  bool cross_validate = true;
  double fixed = 0.0;
  std::size_t folds = 5;
};

struct BlockPolicy
{
  bool oracle = true;
  std::size_t fixed = 1;
};

struct ExperimentConfig
{
  std::variant<SyntheticSource, CsvSource> source = SyntheticSource{};
  std::vector<Method> methods = { Method::kde, Method::mom, Method::rkde, Method::spkde };
  std::vector<double> ratios = { 0.05, 0.10, 0.15, 0.20, 0.25,
                                 0.30, 0.35, 0.40, 0.45, 0.50 };
  //! Defaults to 10 for synthetic sources and 50 for CSV sources.
  std::optional<std::size_t> repetitions;
  std::size_t n_inliers = 1000;
  std::vector<Metric> metrics = { Metric::kl_fwd, Metric::kl_rev, Metric::js, Metric::auc };
  std::uint64_t base_seed = 0;
  BandwidthPolicy bandwidth;
  BlockPolicy blocks;
  KernelFamily kernel = KernelFamily::gaussian;

  bool synthetic() const noexcept
  {
    return std::holds_alternative<SyntheticSource>(source);
  }
  std::size_t resolved_repetitions() const noexcept
  {
    return repetitions.value_or(synthetic() ? 10 : 50);
  }
  std::string dataset_name() const;

  //! Throws ErrorCode::parameter on an invalid combination.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ResultRow
{
  std::string dataset;
  Method method = Method::kde;
  double ratio = 0.0;
  std::size_t repetition = 0;
  Metric metric = Metric::js;
  double value = 0.0;
  std::uint64_t seed = 0;
  double bandwidth = 0.0;
  std::optional<std::size_t> blocks;
  double wall_time_ms = 0.0; // learning time; zero for KDE and MoM-KDE
  int iterations = 0;
  std::string error; // empty when value is valid
};

//! Child seed of one (ratio, repetition) cell.
std::uint64_t cell_seed(std::uint64_t base_seed,
                        std::size_t ratio_index,
                        std::size_t repetition);

struct OracleSelection
{
  std::size_t blocks;
  std::vector<std::size_t> candidates;
  std::vector<double> js; // one per candidate
};

//! Up to 20 evenly spaced integers in [1, 2|O| + 1], deduplicated and capped
//! at n.
std::vector<std::size_t> oracle_block_candidates(std::size_t n_outliers,
                                                 std::size_t n);

/// Picks the candidate S whose normalized MoM-KDE is closest in JS
/// divergence to the true density on the grid; ties go to the smaller S.
OracleSelection oracle_select_blocks(const Dataset& data,
                                     const Vector& true_density,
                                     const EvaluationGrid& grid,
                                     double bandwidth,
                                     const KernelSpec& kernel,
                                     std::size_t n_outliers,
                                     std::uint64_t seed);

struct RunOptions
{
  unsigned threads = 1;
};

/// Full sweep. Rows come back sorted by (ratio, repetition, method,
/// metric); failures inside a cell become rows with a non-empty `error`.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const RunOptions& options = {});

struct EmittedFiles
{
  std::filesystem::path results;
  std::filesystem::path aggregates;
  std::filesystem::path timings;
  std::filesystem::path config;
};

/// Writes `path` (results CSV) plus sidecars next to it:
/// <stem>.aggregates.csv, <stem>.timings.csv and <stem>.config.json.
/// Timings live in their own file so the results CSV is reproducible
/// byte-for-byte.
EmittedFiles emit_results(const std::vector<ResultRow>& rows,
                          const ExperimentConfig& config,
                          const std::filesystem::path& path);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string aggregates_csv(const std::vector<ResultRow>& rows);
std::string timings_csv(const std::vector<ResultRow>& rows);

//! Shortest round-trip decimal; infinities print as "inf" / "-inf".
std::string format_number(double value);

} // namespace momkde
