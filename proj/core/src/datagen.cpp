#include "momkde/datagen.hpp"

#include "momkde/error.hpp"
#include "momkde/seeding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace momkde {

std::string_view to_string(OutlierScheme scheme)
{
  switch (scheme) {
    case OutlierScheme::uniform: return "uniform";
    case OutlierScheme::regular_gaussian: return "regular_gaussian";
    case OutlierScheme::thin_gaussian: return "thin_gaussian";
    case OutlierScheme::adversarial_thin_gaussian: return "adversarial_thin_gaussian";
  }
  return "unknown";
}

OutlierScheme parse_outlier_scheme(std::string_view name)
{
  for (auto s : { OutlierScheme::uniform, OutlierScheme::regular_gaussian,
                  OutlierScheme::thin_gaussian, OutlierScheme::adversarial_thin_gaussian })
    if (to_string(s) == name)
      return s;
  if (name == "a")
    return OutlierScheme::uniform;
  if (name == "b")
    return OutlierScheme::regular_gaussian;
  if (name == "c")
    return OutlierScheme::thin_gaussian;
  if (name == "d")
    return OutlierScheme::adversarial_thin_gaussian;
  fail(ErrorCode::parameter, "unknown outlier scheme '" + std::string(name) + "'");
}

double inlier_density(double x)
{
  constexpr auto m = inlier_mixture;
  const double c = 1.0 / (m.sigma * std::sqrt(2.0 * std::numbers::pi));
  const double z1 = (x - m.mean1) / m.sigma;
  const double z2 = (x - m.mean2) / m.sigma;
  return 0.5 * c * (std::exp(-0.5 * z1 * z1) + std::exp(-0.5 * z2 * z2));
}

namespace {

Dataset one_dimensional(std::vector<double> values, Label label, std::string name, std::uint64_t seed)
{
  Dataset out;
  out.points = Eigen::Map<PointMatrix>(values.data(), static_cast<Eigen::Index>(values.size()), 1);
  out.labels = std::vector<Label>(values.size(), label);
  out.name = std::move(name);
  out.seed = seed;
  return out;
}

} // namespace

Dataset sample_inliers(std::size_t n, std::uint64_t seed)
{
  constexpr auto m = inlier_mixture;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution second(0.5);
  std::normal_distribution<double> noise(0.0, m.sigma);
  std::vector<double> values(n);
  for (auto& v : values) {
    const double mean = second(rng) ? m.mean2 : m.mean1;
    v = mean + noise(rng);
  }
  return one_dimensional(std::move(values), Label::inlier, "inliers", seed);
}

Dataset sample_outliers(OutlierScheme scheme, std::size_t n, std::uint64_t seed)
{
  constexpr auto m = inlier_mixture;
  std::mt19937_64 rng(seed);
  std::vector<double> values(n);
  switch (scheme) {
    case OutlierScheme::uniform: {
      std::uniform_real_distribution<double> dist(m.mean1 - 3.0, m.mean2 + 3.0);
      for (auto& v : values)
        v = dist(rng);
      break;
    }
    case OutlierScheme::regular_gaussian: {
      std::normal_distribution<double> dist(3.0, 0.5);
      for (auto& v : values)
        v = dist(rng);
      break;
    }
    case OutlierScheme::thin_gaussian: {
      std::normal_distribution<double> dist(3.0, 0.01);
      for (auto& v : values)
        v = dist(rng);
      break;
    }
    case OutlierScheme::adversarial_thin_gaussian: {
      std::normal_distribution<double> dist(m.mean1, 0.01);
      for (auto& v : values)
        v = dist(rng);
      break;
    }
  }
  return one_dimensional(std::move(values), Label::outlier, std::string(to_string(scheme)), seed);
}

std::size_t outliers_for_ratio(std::size_t n_inliers, double ratio)
{
  if (!(ratio >= 0.0 && ratio < 1.0))
    fail(ErrorCode::parameter, "outlier ratio must lie in [0, 1)");
  return static_cast<std::size_t>(
    std::floor(ratio * static_cast<double>(n_inliers) / (1.0 - ratio) + 0.5));
}

Dataset make_contaminated(OutlierScheme scheme,
                          std::size_t n_inliers,
                          std::size_t n_outliers,
                          std::uint64_t seed)
{
  Dataset data = concatenate(sample_inliers(n_inliers, derive_seed({ seed, 1 })),
                             sample_outliers(scheme, n_outliers, derive_seed({ seed, 2 })),
                             std::string(to_string(scheme)));
  data.seed = seed;
  return data;
}

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view field, double& value)
{
  if (!field.empty() && field.front() == '+')
    field.remove_prefix(1);
  if (field.empty())
    return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

} // namespace

Dataset parse_csv_dataset(std::string_view text, const CsvOptions& options, std::string name)
{
  std::vector<std::pair<std::size_t, std::string_view>> lines; // (1-based line, content)
  {
    std::size_t start = 0, number = 1;
    while (start <= text.size()) {
      const auto end = text.find('\n', start);
      const auto line = trim(text.substr(start, end == std::string_view::npos ? end : end - start));
      if (!line.empty())
        lines.emplace_back(number, line);
      if (end == std::string_view::npos)
        break;
      start = end + 1;
      ++number;
    }
  }
  if (lines.empty())
    fail(ErrorCode::ingestion, "'" + name + "' contains no rows");

  auto first = split_fields(lines.front().second);
  bool has_header = false;
  for (auto f : first) {
    double v;
    if (!parse_double(f, v))
      has_header = true;
  }
  const std::size_t columns = first.size();

  std::optional<std::size_t> label_index;
  if (options.label_column) {
    const auto& wanted = *options.label_column;
    if (has_header) {
      for (std::size_t j = 0; j < columns; ++j)
        if (first[j] == wanted)
          label_index = j;
    } else {
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(wanted.data(), wanted.data() + wanted.size(), idx);
      if (ec == std::errc() && ptr == wanted.data() + wanted.size() && idx < columns)
        label_index = idx;
    }
    if (!label_index)
      fail(ErrorCode::schema, "label column '" + wanted + "' not found in '" + name + "'");
  }
  const std::size_t features = columns - (label_index ? 1 : 0);
  if (features == 0)
    fail(ErrorCode::schema, "'" + name + "' has no feature columns");

  const std::size_t body = lines.size() - (has_header ? 1 : 0);
  if (body == 0)
    fail(ErrorCode::ingestion, "'" + name + "' has a header but no data rows");

  Dataset out;
  out.name = std::move(name);
  out.points.resize(static_cast<Eigen::Index>(body), static_cast<Eigen::Index>(features));
  if (label_index)
    out.labels.emplace(body);

  for (std::size_t r = 0; r < body; ++r) {
    const auto& [line_number, line] = lines[r + (has_header ? 1 : 0)];
    const auto fields = split_fields(line);
    if (fields.size() != columns)
      fail(ErrorCode::ingestion,
           out.name + ": row at line " + std::to_string(line_number) + " has " +
             std::to_string(fields.size()) + " fields, expected " + std::to_string(columns));
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < columns; ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v))
        fail(ErrorCode::ingestion,
             out.name + ": unparseable value '" + std::string(fields[j]) + "' at line " +
               std::to_string(line_number));
      if (label_index && j == *label_index)
        (*out.labels)[r] = v == options.outlier_label_value ? Label::outlier : Label::inlier;
      else
        out.points(static_cast<Eigen::Index>(r), col++) = v;
    }
  }
  return out;
}

Dataset load_csv_dataset(const std::filesystem::path& path, const CsvOptions& options)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Dataset out = parse_csv_dataset(buffer.str(), options, path.string());
  out.name = path.stem().string();
  return out;
}

void write_csv_dataset(const std::filesystem::path& path, const Dataset& data)
{
  data.validate();
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  const auto d = data.points.cols();
  for (Eigen::Index j = 0; j < d; ++j)
    out << (j ? "," : "") << "x_" << (j + 1);
  if (data.labels)
    out << ",label";
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, data.points(i, j));
      if (j)
        out << ',';
      out.write(buf, end - buf);
    }
    // Ingestion treats label 0 as the outlier class.
    if (data.labels)
      out << ',' << ((*data.labels)[static_cast<std::size_t>(i)] == Label::outlier ? 0 : 1);
    out << '\n';
  }
  if (!out)
    fail(ErrorCode::io, "failed writing '" + path.string() + "'");
}

Dataset downsample_to_ratio(const Dataset& data, double target_ratio, std::uint64_t seed)
{
  if (!(target_ratio > 0.0 && target_ratio < 1.0))
    fail(ErrorCode::parameter, "target ratio must lie in (0, 1)");
  auto inliers = data.indices_of(Label::inlier);
  auto outliers = data.indices_of(Label::outlier);
  if (inliers.empty() || outliers.empty())
    fail(ErrorCode::protocol, "downsampling needs both inliers and outliers");

  const double r = target_ratio;
  const auto round_half_up = [](double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
  };
  std::size_t keep_in = inliers.size();
  std::size_t keep_out = round_half_up(r * static_cast<double>(keep_in) / (1.0 - r));
  if (keep_out > outliers.size()) {
    keep_out = outliers.size();
    keep_in = std::min(inliers.size(),
                       round_half_up(static_cast<double>(keep_out) * (1.0 - r) / r));
  }
  const auto n = keep_in + keep_out;
  if (keep_in == 0 || keep_out == 0 ||
      std::abs(static_cast<double>(keep_out) / static_cast<double>(n) - r) >
        1.0 / static_cast<double>(n))
    fail(ErrorCode::protocol,
         "ratio " + std::to_string(r) + " is unreachable with " +
           std::to_string(inliers.size()) + " inliers and " +
           std::to_string(outliers.size()) + " outliers");

  std::mt19937_64 rng(seed);
  std::shuffle(inliers.begin(), inliers.end(), rng);
  std::shuffle(outliers.begin(), outliers.end(), rng);
  std::vector<std::size_t> rows(inliers.begin(), inliers.begin() + static_cast<std::ptrdiff_t>(keep_in));
  rows.insert(rows.end(), outliers.begin(), outliers.begin() + static_cast<std::ptrdiff_t>(keep_out));
  std::sort(rows.begin(), rows.end());

  Dataset out = select_rows(data, rows);
  out.seed = seed;
  return out;
}

} // namespace momkde
