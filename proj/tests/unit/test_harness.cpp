#include "momkde/error.hpp"
#include "momkde/experiment.hpp"
#include "momkde/model_io.hpp"
#include "momkde/spkde.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

using namespace momkde;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::io;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    out.push_back(line);
  return out;
}

fs::path scratch_dir(const std::string& name)
{
  auto dir = fs::temp_directory_path() / ("momkde_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small_config()
{
  ExperimentConfig c;
  c.source = SyntheticSource{ OutlierScheme::adversarial_thin_gaussian };
  c.methods = { Method::kde, Method::mom };
  c.ratios = { 0.2 };
  c.repetitions = 10;
  c.n_inliers = 120;
  c.base_seed = 5;
  return c;
}

ResultRow row(Method m, Metric k, double ratio, std::size_t rep, double value)
{
  ResultRow r;
  r.dataset = "toy";
  r.method = m;
  r.metric = k;
  r.ratio = ratio;
  r.repetition = rep;
  r.value = value;
  r.bandwidth = 0.5;
  return r;
}

int run_cli(const std::string& args)
{
  const std::string cmd = std::string("\"") + MOMKDE_CLI_PATH + "\" " + args;
  return std::system(cmd.c_str());
}

} // namespace

TEST(Names, RoundTrip)
{
  for (auto m : { Method::kde, Method::mom, Method::rkde, Method::spkde })
    EXPECT_EQ(parse_method(to_string(m)), m);
  for (auto k : { Metric::kl_fwd, Metric::kl_rev, Metric::js, Metric::auc })
    EXPECT_EQ(parse_metric(to_string(k)), k);
  EXPECT_THROW(parse_method("nope"), Error);
  EXPECT_THROW(parse_metric("nope"), Error);
}

TEST(Seeds, NoCollisionsAcrossSweep)
{
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t rep = 0; rep < 50; ++rep)
      EXPECT_TRUE(seen.insert(cell_seed(7, r, rep)).second);
  EXPECT_EQ(cell_seed(7, 3, 4), cell_seed(7, 3, 4));
  EXPECT_NE(cell_seed(7, 3, 4), cell_seed(8, 3, 4));
}

TEST(Config, Validation)
{
  auto bad = [](auto mutate) {
    auto c = small_config();
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_NO_THROW(small_config().validate());
  EXPECT_EQ(bad([](ExperimentConfig& c) { c.ratios = { 0.0 }; }), ErrorCode::parameter);
  EXPECT_EQ(bad([](ExperimentConfig& c) { c.ratios = { 1.0 }; }), ErrorCode::parameter);
  EXPECT_EQ(bad([](ExperimentConfig& c) { c.methods.clear(); }), ErrorCode::parameter);
  EXPECT_EQ(bad([](ExperimentConfig& c) { c.metrics.clear(); }), ErrorCode::parameter);
  EXPECT_EQ(bad([](ExperimentConfig& c) { c.repetitions = 0; }), ErrorCode::parameter);
  EXPECT_EQ(bad([](ExperimentConfig& c) {
              c.methods = { Method::rkde };
              c.kernel = KernelFamily::epanechnikov;
            }),
            ErrorCode::parameter);
  EXPECT_EQ(bad([](ExperimentConfig& c) {
              c.source = CsvSource{ "x.csv", "label", 0.0 };
              c.metrics = { Metric::js };
            }),
            ErrorCode::parameter);
}

TEST(Config, DefaultRepetitions)
{
  ExperimentConfig c;
  EXPECT_EQ(c.resolved_repetitions(), 10u);
  c.source = CsvSource{ "data/iris.csv", "label", 0.0 };
  EXPECT_EQ(c.resolved_repetitions(), 50u);
  EXPECT_EQ(c.dataset_name(), "iris");
}

TEST(Config, JsonRoundTrip)
{
  auto c = small_config();
  c.bandwidth.cross_validate = false;
  c.bandwidth.fixed = 0.4;
  c.blocks.oracle = false;
  c.blocks.fixed = 9;
  c.metrics = { Metric::js, Metric::auc };
  const auto j = config_to_json(c);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.blocks.fixed, 9u);
  EXPECT_DOUBLE_EQ(back.bandwidth.fixed, 0.4);
  EXPECT_EQ(back.methods, c.methods);
}

TEST(Config, JsonErrors)
{
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json{ { "colour", 1 } }); }),
            ErrorCode::schema);
  EXPECT_EQ(code_of([] {
              config_from_json(nlohmann::json::parse(R"({"bandwidth_policy":{"policy":"magic"}})"));
            }),
            ErrorCode::schema);
  EXPECT_EQ(code_of([] { config_from_json(nlohmann::json::parse(R"({"ratios":"many"})")); }),
            ErrorCode::schema);
}

TEST(OracleBlocks, Candidates)
{
  EXPECT_EQ(oracle_block_candidates(0, 100), std::vector<std::size_t>{ 1 });
  const auto three = oracle_block_candidates(3, 100);
  EXPECT_EQ(three, (std::vector<std::size_t>{ 1, 2, 3, 4, 5, 6, 7 }));
  const auto big = oracle_block_candidates(200, 1000);
  ASSERT_EQ(big.size(), 20u);
  EXPECT_EQ(big.front(), 1u);
  EXPECT_EQ(big.back(), 401u);
  for (std::size_t i = 1; i < big.size(); ++i)
    EXPECT_GT(big[i], big[i - 1]);
  for (auto s : oracle_block_candidates(200, 150))
    EXPECT_LE(s, 150u);
}

TEST(OracleBlocks, ZeroOutliersPicksOne)
{
  const auto data = make_contaminated(OutlierScheme::uniform, 200, 0, 1);
  const auto grid = default_grid(data, 0.5);
  const auto nodes = grid.nodes();
  Vector truth(nodes.rows());
  for (Eigen::Index i = 0; i < nodes.rows(); ++i)
    truth[i] = inlier_density(nodes(i, 0));
  truth = normalize_density(grid, truth).values;
  const auto sel = oracle_select_blocks(data, truth, grid, 0.5,
                                        KernelSpec(KernelFamily::gaussian, 1), 0, 3);
  EXPECT_EQ(sel.blocks, 1u);
}

TEST(OracleBlocks, ThinSchemeSelectsSeveralBlocks)
{
  const auto data = make_contaminated(OutlierScheme::thin_gaussian, 800, 200, 12);
  const double h = 0.5;
  const auto grid = default_grid(data, h);
  const auto nodes = grid.nodes();
  Vector truth(nodes.rows());
  for (Eigen::Index i = 0; i < nodes.rows(); ++i)
    truth[i] = inlier_density(nodes(i, 0));
  truth = normalize_density(grid, truth).values;
  const KernelSpec k(KernelFamily::gaussian, 1);
  const auto a = oracle_select_blocks(data, truth, grid, h, k, 200, 77);
  const auto b = oracle_select_blocks(data, truth, grid, h, k, 200, 77);
  EXPECT_GT(a.blocks, 1u);
  ASSERT_EQ(a.candidates.front(), 1u);
  const auto at = std::find(a.candidates.begin(), a.candidates.end(), a.blocks) - a.candidates.begin();
  EXPECT_LE(a.js[static_cast<std::size_t>(at)], a.js.front());
  for (double v : a.js)
    EXPECT_GE(v, a.js[static_cast<std::size_t>(at)]);
  EXPECT_EQ(a.blocks, b.blocks);
  EXPECT_EQ(a.js, b.js);
}

TEST(RunExperiment, CountsRows)
{
  const auto rows = run_experiment(small_config());
  std::map<std::pair<Method, Metric>, int> counts;
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    ++counts[{ r.method, r.metric }];
  }
  EXPECT_EQ(rows.size(), 2u * 4u * 10u);
  for (const auto& [key, n] : counts)
    EXPECT_EQ(n, 10);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& p = rows[i - 1];
    const auto& q = rows[i];
    EXPECT_LE(std::tie(p.ratio, p.repetition, p.method, p.metric),
              std::tie(q.ratio, q.repetition, q.method, q.metric));
  }
}

TEST(RunExperiment, SharedBandwidthAndTimings)
{
  auto c = small_config();
  c.methods = { Method::kde, Method::mom, Method::rkde, Method::spkde };
  c.repetitions = 2;
  c.n_inliers = 80;
  c.metrics = { Metric::js, Metric::auc };
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 2u * 4u * 2u);
  std::map<std::size_t, double> h_of_rep;
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    auto [it, fresh] = h_of_rep.emplace(r.repetition, r.bandwidth);
    if (!fresh)
      EXPECT_EQ(it->second, r.bandwidth);
    if (r.method == Method::kde || r.method == Method::mom)
      EXPECT_EQ(r.wall_time_ms, 0.0);
    else {
      EXPECT_GT(r.wall_time_ms, 0.0);
      EXPECT_GE(r.iterations, 1);
    }
    EXPECT_EQ(r.blocks.has_value(), r.method == Method::mom);
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
  }
}

TEST(RunExperiment, ByteIdenticalAcrossRunsAndThreads)
{
  auto c = small_config();
  c.repetitions = 4;
  c.ratios = { 0.1, 0.3 };
  c.methods = { Method::kde, Method::mom, Method::spkde };
  c.n_inliers = 60;
  const auto a = results_csv(run_experiment(c, { 1 }));
  const auto b = results_csv(run_experiment(c, { 1 }));
  const auto t = results_csv(run_experiment(c, { 3 }));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, t);
}

TEST(RunExperiment, CsvSourceAuc)
{
  const auto dir = scratch_dir("csvsource");
  const auto data = make_contaminated(OutlierScheme::uniform, 150, 60, 4);
  write_csv_dataset(dir / "toy.csv", data);
  ExperimentConfig c;
  c.source = CsvSource{ (dir / "toy.csv").string(), "label", 0.0 };
  c.methods = { Method::kde, Method::mom };
  c.metrics = { Metric::auc };
  c.ratios = { 0.1 };
  c.repetitions = 3;
  c.blocks.oracle = false;
  c.blocks.fixed = 5;
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.dataset, "toy");
    EXPECT_GT(r.value, 0.5);
  }
  fs::remove_all(dir);
}

TEST(RunExperiment, FailuresBecomeErrorRows)
{
  auto c = small_config();
  c.repetitions = 1;
  c.blocks.oracle = false;
  c.blocks.fixed = 100000; // more blocks than points
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    if (r.method == Method::mom) {
      EXPECT_FALSE(r.error.empty());
      EXPECT_TRUE(std::isnan(r.value));
    } else {
      EXPECT_TRUE(r.error.empty());
    }
  }
  std::size_t failed = 0;
  for (const auto& line : lines_of(results_csv(rows)))
    failed += line.starts_with("adversarial_thin_gaussian,mom,") &&
              line.find(",fit: ") != std::string::npos && !line.ends_with(",ok");
  EXPECT_EQ(failed, 4u);
}

TEST(Emit, HeaderAndRowCount)
{
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < 10; ++i)
    rows.push_back(row(Method::kde, Metric::js, 0.2, i, 0.1 * static_cast<double>(i)));
  const auto lines = lines_of(results_csv(rows));
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], "dataset,method,ratio,repetition,metric,value,seed,h,S,status");
  EXPECT_EQ(lines[1].substr(0, 15), "toy,kde,0.2,0,j");
}

TEST(Emit, AggregatesMeanAndStd)
{
  std::vector<ResultRow> rows{ row(Method::mom, Metric::js, 0.1, 0, 1.0),
                               row(Method::mom, Metric::js, 0.1, 1, 2.0),
                               row(Method::mom, Metric::js, 0.1, 2, 3.0) };
  const auto lines = lines_of(aggregates_csv(rows));
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "dataset,method,metric,ratio,count,mean,std,n_inf,n_error");
  EXPECT_EQ(lines[1], "toy,mom,js,0.1,3,2,1,0,0");
}

TEST(Emit, InfinitySpelledOut)
{
  std::vector<ResultRow> rows{ row(Method::rkde, Metric::kl_rev, 0.2, 0,
                                   std::numeric_limits<double>::infinity()),
                               row(Method::rkde, Metric::kl_rev, 0.2, 1, 0.5) };
  const auto csv = results_csv(rows);
  EXPECT_NE(csv.find(",inf,"), std::string::npos);
  const auto agg = lines_of(aggregates_csv(rows));
  EXPECT_EQ(agg[1], "toy,rkde,kl_rev,0.2,2,inf,nan,1,0");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Emit, WritesSidecars)
{
  const auto dir = scratch_dir("emit");
  const auto c = small_config();
  std::vector<ResultRow> rows{ row(Method::kde, Metric::js, 0.2, 0, 0.25) };
  const auto files = emit_results(rows, c, dir / "out.csv");
  EXPECT_EQ(files.aggregates, dir / "out.aggregates.csv");
  EXPECT_EQ(slurp(files.results), results_csv(rows));
  EXPECT_EQ(slurp(files.aggregates), aggregates_csv(rows));
  EXPECT_EQ(slurp(files.timings), timings_csv(rows));
  EXPECT_EQ(nlohmann::json::parse(slurp(files.config)), config_to_json(c));
  const auto nested = emit_results(rows, c, dir / "new" / "deeper" / "x.csv");
  EXPECT_TRUE(fs::exists(nested.config));
  std::ofstream(dir / "plain") << "not a directory";
  EXPECT_EQ(code_of([&] { emit_results(rows, c, dir / "plain" / "x.csv"); }), ErrorCode::io);
  fs::remove_all(dir);
}

TEST(ModelIo, RoundTripsEveryKind)
{
  const auto data = make_contaminated(OutlierScheme::uniform, 40, 10, 3);
  const KernelSpec k(KernelFamily::gaussian, 1);
  const auto queries = oracle::random_points(25, 1, 9, 3.0);

  const FittedModel kde{ "kde", WeightedDensityEstimate::uniform(data.points, 0.4, k),
                         std::nullopt, std::nullopt, nlohmann::json::object() };
  const FittedModel mom{ "mom", mom_fit(data, 7, 0.4, k, 11), std::nullopt, std::nullopt,
                         nlohmann::json::object() };
  const auto sp = fit_spkde(data, 0.4, k, 0.2);
  const FittedModel spk{ "spkde", to_estimate(sp, data, 0.4, k), 1.0, std::nullopt,
                         nlohmann::json{ { "iterations", sp.iterations } } };
  for (const auto* m : { &kde, &mom, &spk }) {
    const auto back = model_from_json(model_to_json(*m));
    EXPECT_EQ(back.method, m->method);
    EXPECT_EQ(back.dimension(), 1);
    const Vector a = m->evaluate(queries);
    const Vector b = back.evaluate(queries);
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0) << m->method;
    EXPECT_EQ(model_to_json(back), model_to_json(*m));
  }
}

TEST(ModelIo, PointsByPath)
{
  const auto dir = scratch_dir("model");
  const auto data = make_contaminated(OutlierScheme::uniform, 30, 5, 8);
  write_csv_dataset(dir / "pts.csv", data);
  const FittedModel m{ "kde",
                       WeightedDensityEstimate::uniform(data.points, 0.3,
                                                        KernelSpec(KernelFamily::gaussian, 1)),
                       std::nullopt, std::string("pts.csv"),
                       nlohmann::json{ { "label_column", "label" } } };
  save_model(m, dir / "model.json");
  const auto j = nlohmann::json::parse(slurp(dir / "model.json"));
  EXPECT_FALSE(j.contains("points"));
  const auto back = load_model(dir / "model.json");
  const auto q = oracle::random_points(10, 1, 2);
  EXPECT_EQ((m.evaluate(q) - back.evaluate(q)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(model_from_json(nlohmann::json{ { "format", "other" } }), Error);
  fs::remove_all(dir);
}

TEST(Cli, SynthFitEvalBench)
{
  const auto dir = scratch_dir("cli");
  const auto d = dir.string();
  ASSERT_EQ(run_cli("synth --scheme thin_gaussian --inliers 200 --ratio 0.2 --seed 3 -o \"" + d +
                    "/data.csv\""),
            0);
  const auto data = load_csv_dataset(dir / "data.csv", { "label", 0.0 });
  EXPECT_EQ(data.size(), 250u);
  EXPECT_EQ(data.count(Label::outlier), 50u);

  ASSERT_EQ(run_cli("fit --method mom --blocks 9 --bandwidth 0.3 -i \"" + d +
                    "/data.csv\" --label-column label -o \"" + d + "/mom.json\""),
            0);
  ASSERT_EQ(run_cli("eval -m \"" + d + "/mom.json\" -i \"" + d + "/data.csv\" --label-column label -o \"" +
                    d + "/scores.csv\""),
            0);
  const auto scores = lines_of(slurp(dir / "scores.csv"));
  ASSERT_EQ(scores.size(), 251u);
  EXPECT_EQ(scores[0], "x_1,density");

  // the CLI must agree with the library on the same model
  const auto model = load_model(dir / "mom.json");
  const Vector direct = model.evaluate(data.points);
  std::istringstream second(scores[1]);
  std::string x, v;
  std::getline(second, x, ',');
  std::getline(second, v, ',');
  EXPECT_DOUBLE_EQ(std::stod(v), direct[0]);

  nlohmann::json cfg = config_to_json(small_config());
  cfg["repetitions"] = 2;
  cfg["n_inliers"] = 50;
  std::ofstream(dir / "cfg.json") << cfg.dump(2);
  ASSERT_EQ(run_cli("bench -c \"" + d + "/cfg.json\" -o \"" + d + "/res.csv\" -j 2"), 0);
  EXPECT_EQ(lines_of(slurp(dir / "res.csv")).size(), 1u + 2u * 4u * 2u);
  EXPECT_TRUE(fs::exists(dir / "res.aggregates.csv"));
  EXPECT_TRUE(fs::exists(dir / "res.config.json"));

  EXPECT_NE(run_cli("fit --method nope -i \"" + d + "/data.csv\" -o \"" + d + "/x.json\" 2>/dev/null"), 0);
  EXPECT_NE(run_cli("bench -c \"" + d + "/missing.json\" 2>/dev/null"), 0);
  fs::remove_all(dir);
}
