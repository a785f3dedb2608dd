#include "momkde/experiment.hpp"

#include "momkde/bandwidth.hpp"
#include "momkde/density.hpp"
#include "momkde/error.hpp"
#include "momkde/metrics.hpp"
#include "momkde/mom.hpp"
#include "momkde/rkde.hpp"
#include "momkde/seeding.hpp"
#include "momkde/spkde.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <system_error>
#include <thread>
#include <tuple>

namespace momkde {

using nlohmann::json;

std::string_view to_string(Method method)
{
  switch (method) {
    case Method::kde: return "kde";
    case Method::mom: return "mom";
    case Method::rkde: return "rkde";
    case Method::spkde: return "spkde";
  }
  return "unknown";
}

std::string_view to_string(Metric metric)
{
  switch (metric) {
    case Metric::kl_fwd: return "kl_fwd";
    case Metric::kl_rev: return "kl_rev";
    case Metric::js: return "js";
    case Metric::auc: return "auc";
  }
  return "unknown";
}

Method parse_method(std::string_view name)
{
  for (auto m : { Method::kde, Method::mom, Method::rkde, Method::spkde })
    if (to_string(m) == name)
      return m;
  fail(ErrorCode::parameter, "unknown method '" + std::string(name) + "'");
}

Metric parse_metric(std::string_view name)
{
  for (auto m : { Metric::kl_fwd, Metric::kl_rev, Metric::js, Metric::auc })
    if (to_string(m) == name)
      return m;
  fail(ErrorCode::parameter, "unknown metric '" + std::string(name) + "'");
}

namespace {

bool is_divergence(Metric m)
{
  return m != Metric::auc;
}

template <class T>
bool contains(const std::vector<T>& v, const T& x)
{
  return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace

std::string ExperimentConfig::dataset_name() const
{
  if (const auto* s = std::get_if<SyntheticSource>(&source))
    return std::string(to_string(s->scheme));
  return std::filesystem::path(std::get<CsvSource>(source).path).stem().string();
}

void ExperimentConfig::validate() const
{
  if (methods.empty())
    fail(ErrorCode::parameter, "config needs at least one method");
  if (metrics.empty())
    fail(ErrorCode::parameter, "config needs at least one metric");
  if (ratios.empty())
    fail(ErrorCode::parameter, "config needs at least one outlier ratio");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0))
      fail(ErrorCode::parameter,
           "outlier ratio " + format_number(r) + " is outside the open interval (0, 1)");
  if (resolved_repetitions() < 1)
    fail(ErrorCode::parameter, "repetitions must be positive");
  if (bandwidth.cross_validate) {
    if (bandwidth.folds < 2)
      fail(ErrorCode::parameter, "cross-validation needs at least 2 folds");
  } else if (!(bandwidth.fixed > 0.0) || !std::isfinite(bandwidth.fixed)) {
    fail(ErrorCode::parameter, "fixed bandwidth must be positive");
  }
  if (!blocks.oracle && blocks.fixed < 1)
    fail(ErrorCode::parameter, "fixed number of blocks must be positive");
  if ((contains(methods, Method::rkde) || contains(methods, Method::spkde)) &&
      kernel != KernelFamily::gaussian)
    fail(ErrorCode::parameter, "RKDE and SPKDE require the gaussian kernel");
  if (synthetic()) {
    if (n_inliers < 1)
      fail(ErrorCode::parameter, "n_inliers must be positive");
  } else {
    for (auto m : metrics)
      if (is_divergence(m))
        fail(ErrorCode::parameter,
             "divergence metrics need a known true density; CSV sources support auc only");
    if (blocks.oracle && contains(methods, Method::mom))
      fail(ErrorCode::parameter,
           "oracle block selection needs a known true density; use a fixed S for CSV sources");
  }
}

// ---------------------------------------------------------------- config json

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const char* where)
{
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto k : known)
      ok = ok || it.key() == k;
    if (!ok)
      fail(ErrorCode::schema, std::string("unknown key '") + it.key() + "' in " + where);
  }
}

} // namespace

ExperimentConfig config_from_json(const json& j)
{
  if (!j.is_object())
    fail(ErrorCode::schema, "experiment config must be a JSON object");
  reject_unknown_keys(j,
                      { "dataset_source", "methods", "ratios", "repetitions", "n_inliers",
                        "metrics", "base_seed", "bandwidth_policy", "block_policy", "kernel" },
                      "experiment config");
  ExperimentConfig c;
  try {
    if (j.contains("dataset_source")) {
      const auto& src = j.at("dataset_source");
      if (src.contains("synthetic")) {
        reject_unknown_keys(src, { "synthetic" }, "dataset_source");
        c.source = SyntheticSource{ parse_outlier_scheme(src.at("synthetic").get<std::string>()) };
      } else if (src.contains("csv")) {
        reject_unknown_keys(src, { "csv", "label_column", "outlier_label" }, "dataset_source");
        CsvSource csv;
        csv.path = src.at("csv").get<std::string>();
        if (src.contains("label_column") && !src.at("label_column").is_null())
          csv.label_column = src.at("label_column").get<std::string>();
        csv.outlier_label = src.value("outlier_label", 0.0);
        c.source = std::move(csv);
      } else {
        fail(ErrorCode::schema, "dataset_source needs a 'synthetic' or 'csv' key");
      }
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods"))
        c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("ratios"))
      c.ratios = j.at("ratios").get<std::vector<double>>();
    if (j.contains("repetitions") && !j.at("repetitions").is_null())
      c.repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("n_inliers"))
      c.n_inliers = j.at("n_inliers").get<std::size_t>();
    if (j.contains("metrics")) {
      c.metrics.clear();
      for (const auto& m : j.at("metrics"))
        c.metrics.push_back(parse_metric(m.get<std::string>()));
    }
    if (j.contains("base_seed"))
      c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("bandwidth_policy")) {
      const auto& b = j.at("bandwidth_policy");
      reject_unknown_keys(b, { "policy", "h", "folds" }, "bandwidth_policy");
      const auto policy = b.value("policy", std::string("cv"));
      if (policy == "cv") {
        c.bandwidth.cross_validate = true;
        c.bandwidth.folds = b.value("folds", std::size_t{ 5 });
      } else if (policy == "fixed") {
        c.bandwidth.cross_validate = false;
        c.bandwidth.fixed = b.at("h").get<double>();
      } else {
        fail(ErrorCode::schema, "bandwidth_policy.policy must be 'cv' or 'fixed'");
      }
    }
    if (j.contains("block_policy")) {
      const auto& b = j.at("block_policy");
      reject_unknown_keys(b, { "policy", "S" }, "block_policy");
      const auto policy = b.value("policy", std::string("oracle"));
      if (policy == "oracle") {
        c.blocks.oracle = true;
      } else if (policy == "fixed") {
        c.blocks.oracle = false;
        c.blocks.fixed = b.at("S").get<std::size_t>();
      } else {
        fail(ErrorCode::schema, "block_policy.policy must be 'oracle' or 'fixed'");
      }
    }
    if (j.contains("kernel"))
      c.kernel = parse_kernel_family(j.at("kernel").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::schema, std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c)
{
  json j;
  if (const auto* s = std::get_if<SyntheticSource>(&c.source)) {
    j["dataset_source"] = { { "synthetic", to_string(s->scheme) } };
  } else {
    const auto& csv = std::get<CsvSource>(c.source);
    j["dataset_source"] = { { "csv", csv.path },
                            { "label_column", csv.label_column ? json(*csv.label_column) : json() },
                            { "outlier_label", csv.outlier_label } };
  }
  j["methods"] = json::array();
  for (auto m : c.methods)
    j["methods"].push_back(to_string(m));
  j["ratios"] = c.ratios;
  j["repetitions"] = c.resolved_repetitions();
  j["n_inliers"] = c.n_inliers;
  j["metrics"] = json::array();
  for (auto m : c.metrics)
    j["metrics"].push_back(to_string(m));
  j["base_seed"] = c.base_seed;
  if (c.bandwidth.cross_validate)
    j["bandwidth_policy"] = { { "policy", "cv" }, { "folds", c.bandwidth.folds } };
  else
    j["bandwidth_policy"] = { { "policy", "fixed" }, { "h", c.bandwidth.fixed } };
  if (c.blocks.oracle)
    j["block_policy"] = { { "policy", "oracle" } };
  else
    j["block_policy"] = { { "policy", "fixed" }, { "S", c.blocks.fixed } };
  j["kernel"] = to_string(c.kernel);
  return j;
}

// ------------------------------------------------------------ oracle blocks

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t ratio_index, std::size_t repetition)
{
  return derive_seed({ base_seed, ratio_index, repetition });
}

std::vector<std::size_t> oracle_block_candidates(std::size_t n_outliers, std::size_t n)
{
  constexpr std::size_t grid_size = 20;
  const double hi = 2.0 * static_cast<double>(n_outliers) + 1.0;
  std::set<std::size_t> unique;
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double s = 1.0 + (hi - 1.0) * static_cast<double>(k) / (grid_size - 1);
    const auto rounded = static_cast<std::size_t>(std::floor(s + 0.5));
    if (rounded >= 1 && rounded <= n)
      unique.insert(rounded);
  }
  if (unique.empty())
    fail(ErrorCode::parameter, "no admissible number of blocks for n=" + std::to_string(n));
  return { unique.begin(), unique.end() };
}

OracleSelection oracle_select_blocks(const Dataset& data,
                                     const Vector& true_density,
                                     const EvaluationGrid& grid,
                                     double bandwidth,
                                     const KernelSpec& kernel,
                                     std::size_t n_outliers,
                                     std::uint64_t seed)
{
  OracleSelection out;
  out.candidates = oracle_block_candidates(n_outliers, data.size());
  const PointMatrix nodes = grid.nodes();
  double best = std::numeric_limits<double>::infinity();
  out.blocks = out.candidates.front();
  for (auto s : out.candidates) {
    const MomEstimate raw = mom_fit(data, s, bandwidth, kernel, seed);
    const auto normalized = normalize_density(grid, mom_evaluate(raw, nodes));
    const double js = js_divergence(normalized.values, true_density, grid);
    out.js.push_back(js);
    if (js < best) {
      best = js;
      out.blocks = s;
    }
  }
  return out;
}

// ------------------------------------------------------------------ runner

namespace {

struct CellContext
{
  const ExperimentConfig& config;
  const Dataset* csv_data;
  std::string dataset;
  std::size_t ratio_index;
  double ratio;
  std::size_t repetition;
  std::uint64_t seed;
};

ResultRow base_row(const CellContext& ctx, Method method, Metric metric)
{
  ResultRow r;
  r.dataset = ctx.dataset;
  r.method = method;
  r.ratio = ctx.ratio;
  r.repetition = ctx.repetition;
  r.metric = metric;
  r.seed = ctx.seed;
  return r;
}

void push_errors(std::vector<ResultRow>& rows,
                 const CellContext& ctx,
                 Method method,
                 const std::string& message,
                 double h = 0.0)
{
  for (auto metric : ctx.config.metrics) {
    auto r = base_row(ctx, method, metric);
    r.bandwidth = h;
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.error = message.empty() ? "unknown error" : message;
    rows.push_back(std::move(r));
  }
}

using Evaluator = std::function<Vector(const PointMatrix&)>;

std::vector<ResultRow> run_cell(const CellContext& ctx)
{
  const auto& config = ctx.config;
  std::vector<ResultRow> rows;
  auto fail_all = [&](const std::string& msg, double h = 0.0) {
    for (auto m : config.methods)
      push_errors(rows, ctx, m, msg, h);
    return rows;
  };

  Dataset data;
  try {
    if (const auto* s = std::get_if<SyntheticSource>(&config.source)) {
      const auto n_out = outliers_for_ratio(config.n_inliers, ctx.ratio);
      data = make_contaminated(s->scheme, config.n_inliers, n_out, derive_seed({ ctx.seed, 1 }));
    } else {
      data = downsample_to_ratio(*ctx.csv_data, ctx.ratio, derive_seed({ ctx.seed, 1 }));
    }
  } catch (const std::exception& e) {
    return fail_all(std::string("data: ") + e.what());
  }
  const std::size_t n = data.size();
  const std::size_t n_out = data.count(Label::outlier);

  KernelSpec kernel(config.kernel, data.dimension());
  double h = config.bandwidth.fixed;
  if (config.bandwidth.cross_validate) {
    try {
      h = select_bandwidth_cv(data, config.bandwidth.folds, default_bandwidth_grid(data), kernel,
                              derive_seed({ ctx.seed, 2 }))
            .bandwidth;
    } catch (const std::exception& e) {
      return fail_all(std::string("bandwidth: ") + e.what());
    }
  }

  const bool need_grid = config.synthetic() &&
                         (std::any_of(config.metrics.begin(), config.metrics.end(), is_divergence) ||
                          (config.blocks.oracle && contains(config.methods, Method::mom)));
  std::optional<EvaluationGrid> grid;
  PointMatrix nodes;
  Vector truth;
  if (need_grid) {
    try {
      grid.emplace(default_grid(data, h));
      nodes = grid->nodes();
      Vector raw(nodes.rows());
      for (Eigen::Index i = 0; i < nodes.rows(); ++i)
        raw[i] = inlier_density(nodes(i, 0));
      truth = normalize_density(*grid, raw).values;
    } catch (const std::exception& e) {
      return fail_all(std::string("grid: ") + e.what(), h);
    }
  }

  std::vector<int> labels(n, 0);
  if (data.labels)
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = (*data.labels)[i] == Label::outlier ? 1 : 0;

  const std::uint64_t partition_seed = derive_seed({ ctx.seed, 3 });
  for (auto method : config.methods) {
    Evaluator evaluate;
    std::optional<std::size_t> blocks;
    double learn_ms = 0.0;
    int iterations = 0;
    try {
      using clock = std::chrono::steady_clock;
      switch (method) {
        case Method::kde: {
          auto est = WeightedDensityEstimate::uniform(data.points, h, kernel);
          evaluate = [est](const PointMatrix& q) { return kde_evaluate(est, q); };
          break;
        }
        case Method::mom: {
          std::size_t s = config.blocks.fixed;
          if (config.blocks.oracle)
            s = oracle_select_blocks(data, truth, *grid, h, kernel, n_out, partition_seed).blocks;
          blocks = s;
          auto est = mom_fit(data, s, h, kernel, partition_seed);
          evaluate = [est](const PointMatrix& q) { return mom_evaluate(est, q); };
          break;
        }
        case Method::rkde: {
          const auto t0 = clock::now();
          const auto fit = fit_rkde(data, h, kernel, LossFamily::hampel);
          learn_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
          iterations = fit.iterations;
          auto est = to_estimate(fit, data, h, kernel);
          evaluate = [est](const PointMatrix& q) { return kde_evaluate(est, q); };
          break;
        }
        case Method::spkde: {
          const double eps = static_cast<double>(n_out) / static_cast<double>(n);
          const auto t0 = clock::now();
          const auto fit = fit_spkde(data, h, kernel, eps);
          learn_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
          iterations = fit.iterations;
          auto est = to_estimate(fit, data, h, kernel);
          evaluate = [est](const PointMatrix& q) { return kde_evaluate(est, q); };
          break;
        }
      }
    } catch (const std::exception& e) {
      push_errors(rows, ctx, method, std::string("fit: ") + e.what(), h);
      continue;
    }

    std::optional<Vector> on_grid;
    std::string grid_error;
    for (auto metric : config.metrics) {
      auto r = base_row(ctx, method, metric);
      r.bandwidth = h;
      r.blocks = blocks;
      r.wall_time_ms = learn_ms;
      r.iterations = iterations;
      try {
        if (is_divergence(metric)) {
          if (!on_grid && grid_error.empty()) {
            try {
              on_grid = normalize_density(*grid, evaluate(nodes)).values;
            } catch (const std::exception& e) {
              grid_error = e.what();
            }
          }
          if (!on_grid)
            fail(ErrorCode::normalization, grid_error);
        }
        switch (metric) {
          case Metric::kl_fwd: r.value = kl_divergence(*on_grid, truth, *grid); break;
          case Metric::kl_rev: r.value = kl_divergence(truth, *on_grid, *grid); break;
          case Metric::js: r.value = js_divergence(*on_grid, truth, *grid); break;
          case Metric::auc: {
            const Vector scores = evaluate(data.points);
            r.value = auc(std::vector<double>(scores.data(), scores.data() + scores.size()), labels);
            break;
          }
        }
      } catch (const std::exception& e) {
        r.value = std::numeric_limits<double>::quiet_NaN();
        r.error = std::string(to_string(metric)) + ": " + e.what();
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

} // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options)
{
  config.validate();

  std::optional<Dataset> csv_data;
  if (const auto* csv = std::get_if<CsvSource>(&config.source)) {
    CsvOptions opts;
    opts.label_column = csv->label_column;
    opts.outlier_label_value = csv->outlier_label;
    csv_data = load_csv_dataset(csv->path, opts);
    if (!csv_data->labeled())
      fail(ErrorCode::schema, "CSV source needs a label column to mark outliers");
  }

  const std::size_t reps = config.resolved_repetitions();
  const std::size_t tasks = config.ratios.size() * reps;
  std::vector<std::vector<ResultRow>> cells(tasks);
  const std::string dataset = config.dataset_name();

  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t ri = t / reps;
      const std::size_t rep = t % reps;
      CellContext ctx{ config, csv_data ? &*csv_data : nullptr, dataset, ri,
                       config.ratios[ri], rep, cell_seed(config.base_seed, ri, rep) };
      cells[t] = run_cell(ctx);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads,
                                                            static_cast<unsigned>(tasks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i)
      pool.emplace_back(worker);
  }

  // Cells are already in (ratio, repetition) order; order rows inside each
  // cell by (method, metric) so output never depends on scheduling.
  std::vector<ResultRow> rows;
  for (auto& cell : cells) {
    std::stable_sort(cell.begin(), cell.end(), [](const ResultRow& a, const ResultRow& b) {
      return std::tie(a.method, a.metric) < std::tie(b.method, b.metric);
    });
    std::move(cell.begin(), cell.end(), std::back_inserter(rows));
  }
  return rows;
}

// ------------------------------------------------------------------ output

std::string format_number(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

namespace {

std::string csv_quote(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out)
    fail(ErrorCode::io, "failed writing '" + path.string() + "'");
}

} // namespace

std::string results_csv(const std::vector<ResultRow>& rows)
{
  std::ostringstream out;
  out << "dataset,method,ratio,repetition,metric,value,seed,h,S,status\n";
  for (const auto& r : rows) {
    out << csv_quote(r.dataset) << ',' << to_string(r.method) << ',' << format_number(r.ratio)
        << ',' << r.repetition << ',' << to_string(r.metric) << ','
        << (r.error.empty() ? format_number(r.value) : "") << ',' << r.seed << ','
        << format_number(r.bandwidth) << ',' << (r.blocks ? std::to_string(*r.blocks) : "")
        << ',' << (r.error.empty() ? "ok" : csv_quote(r.error)) << '\n';
  }
  return out.str();
}

std::string aggregates_csv(const std::vector<ResultRow>& rows)
{
  using Key = std::tuple<std::string, Method, Metric, double>;
  struct Acc
  {
    std::vector<double> values;
    std::size_t errors = 0;
  };
  std::map<Key, Acc> groups;
  for (const auto& r : rows) {
    auto& acc = groups[{ r.dataset, r.method, r.metric, r.ratio }];
    if (r.error.empty())
      acc.values.push_back(r.value);
    else
      ++acc.errors;
  }

  std::ostringstream out;
  out << "dataset,method,metric,ratio,count,mean,std,n_inf,n_error\n";
  for (const auto& [key, acc] : groups) {
    const auto& [dataset, method, metric, ratio] = key;
    const auto k = acc.values.size();
    std::size_t n_inf = 0;
    double sum = 0.0;
    for (double v : acc.values) {
      n_inf += std::isinf(v) ? 1 : 0;
      sum += v;
    }
    const double mean = k ? sum / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    if (k >= 2 && n_inf == 0) {
      double ss = 0.0;
      for (double v : acc.values)
        ss += (v - mean) * (v - mean);
      sd = std::sqrt(ss / static_cast<double>(k - 1));
    }
    out << csv_quote(dataset) << ',' << to_string(method) << ',' << to_string(metric) << ','
        << format_number(ratio) << ',' << k << ',' << format_number(mean) << ','
        << format_number(sd) << ',' << n_inf << ',' << acc.errors << '\n';
  }
  return out.str();
}

std::string timings_csv(const std::vector<ResultRow>& rows)
{
  std::ostringstream out;
  out << "dataset,method,ratio,repetition,seed,learn_time_ms,iterations\n";
  std::set<std::tuple<double, std::size_t, Method>> seen;
  for (const auto& r : rows) {
    if (!seen.insert({ r.ratio, r.repetition, r.method }).second)
      continue;
    out << csv_quote(r.dataset) << ',' << to_string(r.method) << ',' << format_number(r.ratio)
        << ',' << r.repetition << ',' << r.seed << ',' << format_number(r.wall_time_ms) << ','
        << r.iterations << '\n';
  }
  return out.str();
}

EmittedFiles emit_results(const std::vector<ResultRow>& rows,
                          const ExperimentConfig& config,
                          const std::filesystem::path& path)
{
  if (rows.empty())
    fail(ErrorCode::parameter, "no result rows to emit");
  EmittedFiles files;
  files.results = path;
  const auto stem = path.parent_path() / path.stem();
  files.aggregates = stem.string() + ".aggregates.csv";
  files.timings = stem.string() + ".timings.csv";
  files.config = stem.string() + ".config.json";
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      fail(ErrorCode::io, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  write_file(files.results, results_csv(rows));
  write_file(files.aggregates, aggregates_csv(rows));
  write_file(files.timings, timings_csv(rows));
  write_file(files.config, config_to_json(config).dump(2) + "\n");
  return files;
}

} // namespace momkde
