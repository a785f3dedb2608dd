#pragma once

#include "momkde/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace momkde {

//! Outlier schemes of the synthetic benchmark; inliers are the mixture
//! 0.5 N(0, 0.5^2) + 0.5 N(6, 0.5^2).
enum class OutlierScheme
{
  uniform,                  // U[-3, 9]
  regular_gaussian,         // N(3, 0.5^2)
  thin_gaussian,            // N(3, 0.01^2)
  adversarial_thin_gaussian // N(0, 0.01^2)
};

std::string_view to_string(OutlierScheme scheme);
OutlierScheme parse_outlier_scheme(std::string_view name);

struct InlierMixture
{
  double mean1 = 0.0;
  double mean2 = 6.0;
  double sigma = 0.5;
};

inline constexpr InlierMixture inlier_mixture{};

//! Mixture pdf of the inlier distribution.
double inlier_density(double x);

Dataset sample_inliers(std::size_t n, std::uint64_t seed);
Dataset sample_outliers(OutlierScheme scheme, std::size_t n, std::uint64_t seed);

//! Outlier count giving |O| / (n_inliers + |O|) closest to `ratio`.
std::size_t outliers_for_ratio(std::size_t n_inliers, double ratio);

//! Inliers followed by outliers; both seeds derived from `seed`.
Dataset make_contaminated(OutlierScheme scheme,
                          std::size_t n_inliers,
                          std::size_t n_outliers,
                          std::uint64_t seed);

struct CsvOptions
{
  //! Header name, or a zero-based column index when the file has no header.
  std::optional<std::string> label_column;
  double outlier_label_value = 0.0;
};

Dataset load_csv_dataset(const std::filesystem::path& path,
                         const CsvOptions& options = {});
//! Same, reading from an in-memory string (name is used in messages).
Dataset parse_csv_dataset(std::string_view text,
                          const CsvOptions& options = {},
                          std::string name = "<memory>");

//! Writes x_1..x_d plus a `label` column when labeled; outliers get 0 so the
//! file reads back with the default outlier label.
void write_csv_dataset(const std::filesystem::path& path, const Dataset& data);

/// Random downsampling to |O| / n = target_ratio: outliers are dropped
/// first, inliers only when there are too few outliers. Rows keep their
/// original relative order.
Dataset downsample_to_ratio(const Dataset& data,
                            double target_ratio,
                            std::uint64_t seed);

} // namespace momkde
