// momkde: command-line front end for fitting, scoring and benchmarking
// robust kernel density estimators.

#include "momkde/bandwidth.hpp"
#include "momkde/datagen.hpp"
#include "momkde/error.hpp"
#include "momkde/experiment.hpp"
#include "momkde/grid.hpp"
#include "momkde/model_io.hpp"
#include "momkde/mom.hpp"
#include "momkde/rkde.hpp"
#include "momkde/spkde.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace momkde;

namespace {

struct InputArgs
{
  std::string path;
  std::optional<std::string> label_column;
  double outlier_label = 0.0;

  void add(CLI::App* app, bool required = true)
  {
    auto* opt = app->add_option("--input,-i", path, "CSV file with one point per row");
    if (required)
      opt->required();
    app->add_option("--label-column", label_column,
                    "label column name (or 0-based index without a header)");
    app->add_option("--outlier-label", outlier_label, "label value marking outliers")
      ->capture_default_str();
  }

  Dataset load() const
  {
    CsvOptions opts;
    opts.label_column = label_column;
    opts.outlier_label_value = outlier_label;
    return load_csv_dataset(path, opts);
  }
};

void write_scores(std::ostream& out, const PointMatrix& points, const Vector& values)
{
  for (Eigen::Index k = 0; k < points.cols(); ++k)
    out << "x_" << (k + 1) << ',';
  out << "density\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k)
      out << format_number(points(i, k)) << ',';
    out << format_number(values[i]) << '\n';
  }
}

FittedModel make_model(const std::string& method,
                       std::variant<WeightedDensityEstimate, MomEstimate> estimate)
{
  return FittedModel{ method, std::move(estimate), std::nullopt, std::nullopt, {} };
}

// ------------------------------------------------------------------- synth

struct SynthArgs
{
  std::string scheme = "uniform";
  std::size_t n_inliers = 1000;
  std::optional<std::size_t> n_outliers;
  std::optional<double> ratio;
  std::uint64_t seed = 0;
  std::string output;
};

void run_synth(const SynthArgs& a)
{
  std::size_t n_out = 0;
  if (a.n_outliers && a.ratio)
    fail(ErrorCode::parameter, "give either --outliers or --ratio, not both");
  if (a.n_outliers)
    n_out = *a.n_outliers;
  else if (a.ratio) {
    if (!(*a.ratio > 0.0 && *a.ratio < 1.0))
      fail(ErrorCode::parameter, "--ratio must lie in (0, 1)");
    n_out = outliers_for_ratio(a.n_inliers, *a.ratio);
  }
  const auto data = make_contaminated(parse_outlier_scheme(a.scheme), a.n_inliers, n_out, a.seed);
  write_csv_dataset(a.output, data);
  std::cerr << "wrote " << data.size() << " rows (" << n_out << " outliers) to " << a.output
            << '\n';
}

// --------------------------------------------------------------- bandwidth

struct BandwidthArgs
{
  InputArgs input;
  std::size_t folds = 5;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::size_t grid_size = 20;
  std::string kernel = "gaussian";
  std::uint64_t seed = 0;
  bool show_scores = false;
};

std::vector<double> bandwidth_grid(const Dataset& data,
                                   std::optional<double> lo,
                                   std::optional<double> hi,
                                   std::size_t count)
{
  if (lo && hi)
    return log_spaced(*lo, *hi, count);
  if (lo || hi)
    fail(ErrorCode::parameter, "--grid-min and --grid-max go together");
  return default_bandwidth_grid(data, 0.05, 5.0, count);
}

void run_bandwidth(const BandwidthArgs& a)
{
  const auto data = a.input.load();
  const KernelSpec kernel(parse_kernel_family(a.kernel), data.dimension());
  const auto sel = select_bandwidth_cv(
    data, a.folds, bandwidth_grid(data, a.grid_min, a.grid_max, a.grid_size), kernel, a.seed);
  if (a.show_scores) {
    std::cout << "h,cv_log_likelihood\n";
    for (std::size_t i = 0; i < sel.grid.size(); ++i)
      std::cout << format_number(sel.grid[i]) << ',' << format_number(sel.scores[i]) << '\n';
  } else {
    std::cout << format_number(sel.bandwidth) << '\n';
  }
}

// --------------------------------------------------------------------- fit

struct FitArgs
{
  InputArgs input;
  std::string method = "mom";
  std::optional<double> bandwidth;
  std::size_t folds = 5;
  std::string kernel = "gaussian";
  std::uint64_t seed = 0;
  std::size_t blocks = 1;
  std::string loss = "hampel";
  double tol = -1.0;
  int max_iter = -1;
  std::optional<double> eps;
  bool normalize = false;
  bool points_by_path = false;
  std::string output;
};

void run_fit(const FitArgs& a)
{
  const auto data = a.input.load();
  const KernelSpec kernel(parse_kernel_family(a.kernel), data.dimension());
  double h = 0.0;
  if (a.bandwidth) {
    h = *a.bandwidth;
  } else {
    h = select_bandwidth_cv(data, a.folds, default_bandwidth_grid(data), kernel, a.seed).bandwidth;
    std::cerr << "cross-validated bandwidth " << format_number(h) << '\n';
  }

  nlohmann::json extra = nlohmann::json::object();
  std::optional<FittedModel> model;
  if (a.method == "kde") {
    model = make_model(a.method, WeightedDensityEstimate::uniform(data.points, h, kernel));
  } else if (a.method == "mom") {
    if (a.normalize) {
      const auto grid = default_grid(data, h);
      model = make_model(a.method, mom_fit_normalized(data, a.blocks, h, kernel, a.seed, grid));
    } else {
      model = make_model(a.method, mom_fit(data, a.blocks, h, kernel, a.seed));
    }
  } else if (a.method == "rkde") {
    RkdeOptions opts;
    if (a.tol >= 0.0)
      opts.tol = a.tol;
    if (a.max_iter >= 0)
      opts.max_iter = a.max_iter;
    const auto fit = fit_rkde(data, h, kernel, parse_loss_family(a.loss), opts);
    extra = { { "loss", to_string(fit.loss.family) },
              { "a", fit.loss.a },
              { "b", fit.loss.b },
              { "c", fit.loss.c },
              { "iterations", fit.iterations },
              { "converged", fit.converged } };
    model = make_model(a.method, to_estimate(fit, data, h, kernel));
  } else if (a.method == "spkde") {
    double eps = 0.0;
    if (a.eps)
      eps = *a.eps;
    else if (data.labeled())
      eps = static_cast<double>(data.count(Label::outlier)) / static_cast<double>(data.size());
    else
      fail(ErrorCode::parameter, "spkde needs --eps or a labeled input");
    SpkdeOptions opts;
    if (a.tol >= 0.0)
      opts.tol = a.tol;
    if (a.max_iter >= 0)
      opts.max_iter = a.max_iter;
    const auto fit = fit_spkde(data, h, kernel, eps, opts);
    extra = { { "eps", eps },
              { "beta", fit.beta },
              { "iterations", fit.iterations },
              { "converged", fit.converged } };
    model = make_model(a.method, to_estimate(fit, data, h, kernel));
  } else {
    fail(ErrorCode::parameter, "unknown method '" + a.method + "'");
  }

  if (a.normalize && a.method != "mom") {
    const auto grid = default_grid(data, h);
    model->normalization = normalize_density(grid, model->evaluate(grid.nodes())).normalizer;
  }
  if (a.points_by_path) {
    model->points_path = std::filesystem::absolute(a.input.path).string();
    if (a.input.label_column)
      extra["label_column"] = *a.input.label_column;
  }
  model->extra = std::move(extra);
  save_model(*model, a.output);
  std::cerr << "saved " << a.method << " model to " << a.output << '\n';
}

// -------------------------------------------------------------------- eval

struct EvalArgs
{
  std::string model;
  InputArgs input;
  bool on_grid = false;
  std::string output;
};

void run_eval(const EvalArgs& a)
{
  const auto model = load_model(a.model);
  PointMatrix queries;
  if (a.on_grid) {
    if (!a.input.path.empty())
      fail(ErrorCode::parameter, "give either --input or --grid");
    Dataset support;
    std::visit([&](const auto& e) { support.points = e.points(); }, model.estimate);
    const double h = std::visit([](const auto& e) { return e.bandwidth(); }, model.estimate);
    queries = default_grid(support, h).nodes();
  } else {
    if (a.input.path.empty())
      fail(ErrorCode::parameter, "eval needs --input or --grid");
    queries = a.input.load().points;
  }
  const Vector values = model.evaluate(queries);
  if (a.output.empty() || a.output == "-") {
    write_scores(std::cout, queries, values);
    return;
  }
  std::ofstream out(a.output);
  if (!out)
    fail(ErrorCode::io, "cannot open '" + a.output + "' for writing");
  write_scores(out, queries, values);
}

// ------------------------------------------------------------------- bench

struct BenchArgs
{
  std::string config;
  std::string output = "results.csv";
  unsigned threads = 1;
};

void run_bench(const BenchArgs& a)
{
  std::ifstream in(a.config);
  if (!in)
    fail(ErrorCode::io, "cannot open config '" + a.config + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema, "config is not valid JSON: " + std::string(e.what()));
  }
  auto config = config_from_json(j);
  if (auto* csv = std::get_if<CsvSource>(&config.source)) {
    std::filesystem::path p = csv->path;
    if (p.is_relative())
      csv->path = (std::filesystem::path(a.config).parent_path() / p).string();
  }
  const auto rows = run_experiment(config, RunOptions{ a.threads });
  const auto files = emit_results(rows, config, a.output);
  std::size_t errors = 0;
  for (const auto& r : rows)
    errors += r.error.empty() ? 0 : 1;
  std::cerr << rows.size() << " rows (" << errors << " errors) -> " << files.results.string()
            << ", " << files.aggregates.string() << ", " << files.timings.string() << ", "
            << files.config.string() << '\n';
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Median-of-means and robust kernel density estimation" };
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a contaminated 1-D dataset as CSV");
  s->add_option("--scheme", synth.scheme, "uniform|regular_gaussian|thin_gaussian|"
                                          "adversarial_thin_gaussian (or a|b|c|d)")
    ->capture_default_str();
  s->add_option("--inliers", synth.n_inliers, "number of inliers")->capture_default_str();
  s->add_option("--outliers", synth.n_outliers, "number of outliers");
  s->add_option("--ratio", synth.ratio, "outlier ratio |O|/n");
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--output,-o", synth.output)->required();

  BandwidthArgs bw;
  auto* b = app.add_subcommand("bandwidth", "k-fold likelihood cross-validation of h");
  bw.input.add(b);
  b->add_option("--folds", bw.folds)->capture_default_str();
  b->add_option("--grid-min", bw.grid_min, "smallest candidate h");
  b->add_option("--grid-max", bw.grid_max, "largest candidate h");
  b->add_option("--grid-size", bw.grid_size)->capture_default_str();
  b->add_option("--kernel", bw.kernel)->capture_default_str();
  b->add_option("--seed", bw.seed)->capture_default_str();
  b->add_flag("--scores", bw.show_scores, "print the score of every candidate");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "fit an estimator and save it as JSON");
  fit.input.add(f);
  f->add_option("--method", fit.method)
    ->check(CLI::IsMember({ "kde", "mom", "rkde", "spkde" }))
    ->capture_default_str();
  f->add_option("--bandwidth", fit.bandwidth, "kernel bandwidth (cross-validated if absent)");
  f->add_option("--folds", fit.folds, "folds for the bandwidth search")->capture_default_str();
  f->add_option("--kernel", fit.kernel)->capture_default_str();
  f->add_option("--seed", fit.seed)->capture_default_str();
  f->add_option("--blocks", fit.blocks, "number of MoM blocks S")->capture_default_str();
  f->add_option("--loss", fit.loss, "RKDE loss: hampel|huber")->capture_default_str();
  f->add_option("--tol", fit.tol, "stopping tolerance of RKDE/SPKDE");
  f->add_option("--max-iter", fit.max_iter, "iteration cap of RKDE/SPKDE");
  f->add_option("--eps", fit.eps, "SPKDE contamination ratio (labels used if absent)");
  f->add_flag("--normalize", fit.normalize, "store the grid normalizing constant");
  f->add_flag("--points-by-path", fit.points_by_path,
              "reference the input CSV instead of copying points");
  f->add_option("--output,-o", fit.output)->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "score query points against a saved model");
  e->add_option("--model,-m", ev.model)->required();
  ev.input.add(e, false);
  e->add_flag("--grid", ev.on_grid, "evaluate on the default grid around the model points");
  e->add_option("--output,-o", ev.output, "CSV destination (stdout if absent)");

  BenchArgs bench;
  auto* r = app.add_subcommand("bench", "run an experiment sweep from a JSON config");
  r->add_option("--config,-c", bench.config)->required()->check(CLI::ExistingFile);
  r->add_option("--output,-o", bench.output)->capture_default_str();
  r->add_option("--threads,-j", bench.threads)->check(CLI::PositiveNumber)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s)
      run_synth(synth);
    else if (*b)
      run_bandwidth(bw);
    else if (*f)
      run_fit(fit);
    else if (*e)
      run_eval(ev);
    else if (*r)
      run_bench(bench);
  } catch (const Error& err) {
    std::cerr << "momkde: " << to_string(err.code()) << " error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "momkde: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
