#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "asyspcd/asyspcd.hpp"
#include "oracles.hpp"

using namespace asyspcd;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("asyspcd_experiment_" + name);
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void expect_bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i]), std::bit_cast<std::uint64_t>(b[i]));
}

// Serial runs with per-epoch distances to x_star recorded.
std::vector<RunRecord> serial_runs(const CompositeProblem& p, double gamma,
                                   std::size_t epochs, std::size_t seeds,
                                   const std::vector<double>& x_star) {
  std::vector<RunRecord> runs;
  const std::vector<double> x0(p.dim(), 0.0);
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    std::vector<double> dist;
    auto rec = solve_serial(p, x0, gamma, epochs, seed, Sampling::WithReplacement,
                            [&](std::size_t, std::span<const double> x) {
                              dist.push_back(squared_distance(x, x_star));
                            });
    rec.dist_sq_by_epoch = std::move(dist);
    runs.push_back(std::move(rec));
  }
  return runs;
}

}  // namespace

TEST(Experiment, SingleThreadBaseline) {
  const auto p = oracle::strongly_convex_quadratic(4, 30);
  ExperimentConfig cfg;
  cfg.epochs = 5;
  const auto r = run_experiment(p, cfg);
  ASSERT_EQ(r.speedup_table.size(), 1u);
  EXPECT_EQ(r.speedup_table[0].threads, 1u);
  EXPECT_EQ(r.speedup_table[0].speedup, 1.0);
  EXPECT_EQ(r.runs.size(), 1u);
  EXPECT_EQ(r.epoch_curves.at(1), r.runs[0].objective_by_epoch);
  EXPECT_FALSE(r.support_recovered.has_value());
  EXPECT_EQ(r.instance_digest, problem_digest(p));
  EXPECT_EQ(r.runs[0].dist_sq_by_epoch.size(), 5u);
}

TEST(Experiment, RejectsZeroThreads) {
  const auto p = oracle::strongly_convex_quadratic(4, 10);
  ExperimentConfig cfg;
  cfg.thread_counts = {1, 0};
  EXPECT_THROW(run_experiment(p, cfg), std::invalid_argument);
}

TEST(Experiment, RunErrorsAreRecordedPerCell) {
  const auto p = oracle::strongly_convex_quadratic(4, 6);
  ExperimentConfig cfg;
  cfg.thread_counts = {1, 8};
  cfg.epochs = 2;
  const auto r = run_experiment(p, cfg);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].threads, 8u);
  EXPECT_EQ(r.runs.size(), 1u);
}

TEST(Experiment, DeskInstanceConvergesAndRecoversSupport) {
  ExperimentConfig cfg;
  cfg.thread_counts = {1, 2, 4};
  cfg.epochs = 200;
  const auto r = run_experiment(InstanceSpec::desk(), cfg);
  ASSERT_TRUE(r.failures.empty());
  ASSERT_EQ(r.runs.size(), 3u);
  for (const auto& run : r.runs)
    EXPECT_LE(run.objective_by_epoch.back() - r.f_star, 1e-5 * std::max(1.0, std::abs(r.f_star)))
        << "threads=" << run.threads;
  ASSERT_TRUE(r.support_recovered.has_value());
  EXPECT_TRUE(*r.support_recovered);
  ASSERT_TRUE(r.spec.has_value());
  EXPECT_EQ(r.spec->n, 1000u);

  // No super-linear artifacts beyond noise.
  ASSERT_EQ(r.speedup_table.size(), 3u);
  EXPECT_EQ(r.speedup_table[0].speedup, 1.0);
  for (const auto& row : r.speedup_table)
    EXPECT_LE(row.speedup, static_cast<double>(row.threads) * 1.05) << row.threads;
}

TEST(Certify, StronglyConvexQuadraticHolds) {
  const auto p = oracle::strongly_convex_quadratic(71, 50);
  const auto lip = compute_lipschitz_info(p);
  const double l = osc_parameter_quadratic(p);
  const auto ref = solve_oracle(p, 1e-12);
  const auto plan = manual_plan(50, 0, lip.lambda_ratio, 1e6, 0.5);
  const auto runs = serial_runs(p, 0.5, 40, 20, ref.x_star);
  const std::vector<double> x0(50, 0.0);
  const auto c = certify_rates(p, l, RateMode::LinearOSC, plan, runs, ref.f_star,
                               ref.x_star, x0);
  EXPECT_TRUE(c.holds) << "worst margin " << c.worst_margin << " at epoch " << c.worst_epoch;
  EXPECT_EQ(c.verdict, plan.feasible ? Verdict::Pass : Verdict::AdvisoryPass);
  EXPECT_EQ(c.observed.size(), 40u);
  EXPECT_LE(c.worst_margin, 1.10);

  const auto convex = certify_rates(p, std::nullopt, RateMode::SublinearConvex, plan, runs,
                                    ref.f_star, ref.x_star, x0);
  EXPECT_TRUE(convex.holds);
}

TEST(Certify, RecordAtOptimumPasses) {
  const CompositeProblem p(1, {1.0}, {2.0}, 2.0, Regularizer::l1(1.0));
  RunRecord r;
  r.gamma = 0.5;
  r.objective_by_epoch = {1.5, 1.5, 1.5};
  r.dist_sq_by_epoch = {0.0, 0.0, 0.0};
  r.final_x = {1.0};
  const auto plan = manual_plan(1, 0, 1.0, 10.0, 0.5);
  const std::vector<RunRecord> runs{r};
  const auto c = certify_rates(p, std::nullopt, RateMode::SublinearConvex, plan, runs, 1.5,
                               std::vector<double>{1.0}, std::vector<double>{1.0});
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.worst_margin, 0.0);
}

TEST(Certify, OversizedStepIsAdvisoryFail) {
  const auto p = oracle::strongly_convex_quadratic(72, 50);
  const auto lip = compute_lipschitz_info(p);
  const auto ref = solve_oracle(p, 1e-12);
  const auto plan = manual_plan(50, 0, lip.lambda_ratio, 1e6, 10.0);
  EXPECT_FALSE(plan.feasible);
  const auto runs = serial_runs(p, 10.0, 2, 3, ref.x_star);
  const std::vector<double> x0(50, 0.0);
  const auto c = certify_rates(p, osc_parameter_quadratic(p), RateMode::LinearOSC, plan,
                               runs, ref.f_star, ref.x_star, x0);
  EXPECT_EQ(c.verdict, Verdict::AdvisoryFail);
  EXPECT_GT(c.worst_margin, 1.10);
}

TEST(Certify, Errors) {
  RunRecord r;
  r.objective_by_epoch = {1.0};
  CertificationInput in;
  in.mode = RateMode::LinearOSC;
  const std::vector<RunRecord> runs{r};
  EXPECT_THROW(certify_rates(in, runs), std::invalid_argument);
  in.l = 1.0;
  EXPECT_THROW(certify_rates(in, runs), std::invalid_argument);  // no distances
  EXPECT_THROW(certify_rates(in, std::span<const RunRecord>{}), std::invalid_argument);

  const auto p = oracle::strongly_convex_quadratic(4, 5);
  r.gamma = 1.0;
  const std::vector<RunRecord> mismatched{r};
  const std::vector<double> z(5, 0.0);
  EXPECT_THROW(certify_rates(p, 1.0, RateMode::SublinearConvex,
                             manual_plan(5, 0, 1.0, 10.0, 0.5), mismatched, 0.0, z, z),
               std::invalid_argument);
}

TEST(Report, CsvLayout) {
  ExperimentReport empty;
  EXPECT_EQ(report_csv(empty), "threads,seed,epoch,objective,wall_seconds,observed_tau\n");

  ExperimentReport r;
  RunRecord run;
  run.threads = 2;
  run.seed = 9;
  run.objective_by_epoch = {0.1, 1.0 / 3.0};
  run.epoch_wall_seconds = {0.5, 1.25};
  run.observed_tau = 3;
  r.runs.push_back(run);
  const auto csv = report_csv(r);
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_EQ(csv,
            "threads,seed,epoch,objective,wall_seconds,observed_tau\n"
            "2,9,1,0.10000000000000001,0.5,3\n"
            "2,9,2,0.33333333333333331,1.25,3\n");
}

TEST(Report, JsonRoundTripIsBitExact) {
  ExperimentConfig cfg;
  cfg.thread_counts = {1, 2};
  cfg.seeds = {1, 2};
  cfg.epochs = 4;
  const auto r = run_experiment(InstanceSpec{30, 40, 3, 0.01, 5}, cfg);
  const auto path = temp_file("roundtrip.json");
  export_report(r, path.string(), ReportFormat::Json);
  const auto back = import_report_json(path.string());

  EXPECT_EQ(back.instance_digest, r.instance_digest);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(back.f_star), std::bit_cast<std::uint64_t>(r.f_star));
  EXPECT_EQ(std::bit_cast<std::uint64_t>(back.f0), std::bit_cast<std::uint64_t>(r.f0));
  EXPECT_EQ(std::bit_cast<std::uint64_t>(back.d0_sq), std::bit_cast<std::uint64_t>(r.d0_sq));
  EXPECT_EQ(back.l_max, r.l_max);
  EXPECT_EQ(back.lambda_ratio, r.lambda_ratio);
  ASSERT_EQ(back.runs.size(), r.runs.size());
  for (std::size_t k = 0; k < r.runs.size(); ++k) {
    const auto& a = r.runs[k];
    const auto& b = back.runs[k];
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.threads, b.threads);
    EXPECT_EQ(a.gamma, b.gamma);
    EXPECT_EQ(a.epochs_run, b.epochs_run);
    EXPECT_EQ(a.observed_tau, b.observed_tau);
    EXPECT_EQ(a.wall_seconds, b.wall_seconds);
    EXPECT_EQ(a.barrier_seconds, b.barrier_seconds);
    expect_bits_equal(a.objective_by_epoch, b.objective_by_epoch);
    expect_bits_equal(a.final_x, b.final_x);
    expect_bits_equal(a.epoch_wall_seconds, b.epoch_wall_seconds);
    expect_bits_equal(a.dist_sq_by_epoch, b.dist_sq_by_epoch);
  }
  ASSERT_EQ(back.speedup_table.size(), r.speedup_table.size());
  for (std::size_t k = 0; k < r.speedup_table.size(); ++k) {
    EXPECT_EQ(back.speedup_table[k].threads, r.speedup_table[k].threads);
    EXPECT_EQ(back.speedup_table[k].wall_seconds, r.speedup_table[k].wall_seconds);
    EXPECT_EQ(back.speedup_table[k].speedup, r.speedup_table[k].speedup);
  }
  EXPECT_EQ(back.epoch_curves, r.epoch_curves);
  EXPECT_EQ(back.support_recovered, r.support_recovered);
  ASSERT_TRUE(back.spec.has_value());
  EXPECT_EQ(back.spec->m, 30u);
  EXPECT_EQ(back.spec->seed, 5u);

  export_report(r, path.string(), ReportFormat::Csv);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(count_lines(ss.str()), 1 + 4 * r.runs.size());
  fs::remove(path);
}

TEST(Report, IoErrorsCarryPath) {
  const std::string bad = "/nonexistent-dir/asyspcd/report.json";
  try {
    export_report(ExperimentReport{}, bad, ReportFormat::Json);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos);
  }
  EXPECT_THROW(import_report_json(bad), std::runtime_error);
}
