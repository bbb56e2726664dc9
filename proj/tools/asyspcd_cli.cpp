// Command-line front end: instance generation, solving, planning,
// benchmarking, and rate certification.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asyspcd/asyspcd.hpp"

namespace {

using asyspcd::json;

std::size_t default_threads() {
  if (const char* env = std::getenv("ASYSPCD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid ASYSPCD_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::size_t> default_thread_list(std::size_t top) {
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t < top; t *= 2) out.push_back(t);
  out.push_back(top);
  return out;
}

void write_truth(const std::string& path, const asyspcd::GeneratedInstance& inst,
                 const asyspcd::InstanceSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << json{{"spec", spec}, {"lambda", inst.lambda}, {"x_true", inst.x_true}}
             .dump(2)
      << '\n';
}

std::vector<double> read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return json::parse(in).at("x_true").get<std::vector<double>>();
}

asyspcd::ReportFormat format_for(const std::string& path) {
  const bool is_json =
      path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? asyspcd::ReportFormat::Json : asyspcd::ReportFormat::Csv;
}

void print_summary(const asyspcd::ExperimentReport& r) {
  std::cerr << "instance " << r.instance_digest << "  n=" << r.n
            << "  L_max=" << r.l_max << "  Lambda=" << r.lambda_ratio
            << "  F*=" << r.f_star << '\n';
  for (const auto& s : r.speedup_table)
    std::cerr << "  threads=" << s.threads << "  wall=" << s.wall_seconds
              << "s  speedup=" << s.speedup << '\n';
  for (const auto& run : r.runs)
    if (run.staleness_flagged)
      std::cerr << "  flagged: threads=" << run.threads << " seed=" << run.seed
                << " observed_tau=" << run.observed_tau << " > cap "
                << run.tau_cap << '\n';
  for (const auto& f : r.failures)
    std::cerr << "  failed: threads=" << f.threads << " seed=" << f.seed << ": "
              << f.message << '\n';
  if (r.support_recovered)
    std::cerr << "  support recovered: " << (*r.support_recovered ? "yes" : "no")
              << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous proximal stochastic coordinate descent"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic l2-l1 instance");
  asyspcd::InstanceSpec spec;
  std::string gen_out, gen_truth;
  std::optional<double> gen_lambda;
  gen->add_option("--m", spec.m, "Rows of A")->capture_default_str();
  gen->add_option("--n", spec.n, "Dimension")->capture_default_str();
  gen->add_option("--s", spec.s, "Support size")->capture_default_str();
  gen->add_option("--sigma", spec.sigma, "Noise std")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  gen->add_option("--lambda", gen_lambda, "Explicit L1 weight");
  gen->add_option("--max-bytes", spec.max_bytes, "Memory limit")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Instance file")->required();
  gen->add_option("--truth", gen_truth, "Write x_true and lambda as JSON");

  // solve
  auto* solve = app.add_subcommand("solve", "Run the asynchronous solver");
  std::string solve_instance, solve_out, solve_truth;
  std::size_t solve_threads = default_threads();
  double solve_gamma = 1.0;
  std::size_t solve_epochs = 50;
  std::uint64_t solve_seed = 1;
  double oracle_tol = 1e-10;
  bool no_oracle = false;
  solve->add_option("--instance", solve_instance)->required();
  solve->add_option("--threads", solve_threads)->capture_default_str();
  solve->add_option("--gamma", solve_gamma)->capture_default_str();
  solve->add_option("--epochs", solve_epochs)->capture_default_str();
  solve->add_option("--seed", solve_seed)->capture_default_str();
  solve->add_option("--out", solve_out, "Report JSON")->required();
  solve->add_option("--truth", solve_truth);
  solve->add_option("--oracle-tol", oracle_tol)->capture_default_str();
  solve->add_flag("--no-oracle", no_oracle, "Skip computing F*");

  // plan
  auto* plan = app.add_subcommand("plan", "Print a step plan as JSON");
  std::size_t plan_n = 0;
  std::uint64_t plan_tau = 0;
  double plan_lambda = 1.0;
  std::optional<double> plan_rho, plan_gamma;
  plan->add_option("--n", plan_n)->required();
  plan->add_option("--tau", plan_tau)->required();
  plan->add_option("--lambda-ratio", plan_lambda)->required();
  plan->add_option("--rho", plan_rho);
  plan->add_option("--gamma", plan_gamma);

  // bench
  auto* bench = app.add_subcommand("bench", "Thread-count sweep over seeds");
  std::string bench_instance, bench_out, bench_truth;
  std::vector<std::size_t> bench_threads;
  std::size_t bench_seeds = 5;
  std::size_t bench_epochs = 50;
  double bench_gamma = 1.0;
  bench->add_option("--instance", bench_instance)->required();
  bench->add_option("--threads", bench_threads)->delimiter(',');
  bench->add_option("--seeds", bench_seeds)->capture_default_str();
  bench->add_option("--epochs", bench_epochs)->capture_default_str();
  bench->add_option("--gamma", bench_gamma)->capture_default_str();
  bench->add_option("--out", bench_out, "report.csv or report.json")->required();
  bench->add_option("--truth", bench_truth);
  bench->add_flag("--no-oracle", no_oracle);

  // certify
  auto* certify = app.add_subcommand("certify", "Check a report against rates");
  std::string cert_report, cert_mode;
  std::optional<double> cert_l;
  double cert_slack = 1.10;
  certify->add_option("--report", cert_report)->required();
  certify->add_option("--mode", cert_mode)
      ->required()
      ->check(CLI::IsMember({"osc", "convex"}));
  certify->add_option("--l", cert_l, "Optimal strong convexity modulus");
  certify->add_option("--slack", cert_slack)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (gen_lambda) {
        spec.lambda_rule = asyspcd::InstanceSpec::LambdaRule::Explicit;
        spec.lambda_value = *gen_lambda;
      }
      const auto inst = asyspcd::generate_instance(spec);
      asyspcd::write_instance(gen_out, inst.problem);
      if (!gen_truth.empty()) write_truth(gen_truth, inst, spec);
      std::cerr << "wrote " << gen_out << "  n=" << spec.n
                << "  lambda=" << inst.lambda << '\n';
      return 0;
    }

    if (solve->parsed() || bench->parsed()) {
      const bool is_solve = solve->parsed();
      const auto problem =
          asyspcd::read_instance(is_solve ? solve_instance : bench_instance);
      asyspcd::ExperimentConfig cfg;
      cfg.run_oracle = !no_oracle;
      cfg.oracle_tol = oracle_tol;
      if (is_solve) {
        cfg.thread_counts = {solve_threads};
        cfg.gamma = solve_gamma;
        cfg.epochs = solve_epochs;
        cfg.seeds = {solve_seed};
      } else {
        cfg.thread_counts = bench_threads.empty()
                                ? default_thread_list(default_threads())
                                : bench_threads;
        cfg.gamma = bench_gamma;
        cfg.epochs = bench_epochs;
        cfg.seeds.clear();
        for (std::uint64_t s = 1; s <= bench_seeds; ++s) cfg.seeds.push_back(s);
      }
      const std::string& truth_path = is_solve ? solve_truth : bench_truth;
      std::vector<double> truth;
      if (!truth_path.empty()) truth = read_truth(truth_path);
      const auto report =
          truth.empty()
              ? asyspcd::run_experiment(problem, cfg)
              : asyspcd::run_experiment(problem, cfg,
                                        std::span<const double>(truth));
      const std::string& out = is_solve ? solve_out : bench_out;
      asyspcd::export_report(report, out,
                             is_solve ? asyspcd::ReportFormat::Json
                                      : format_for(out));
      print_summary(report);
      return report.failures.empty() ? 0 : 3;
    }

    if (plan->parsed()) {
      asyspcd::StepPlan p;
      if (plan_rho || plan_gamma) {
        const double rho =
            plan_rho.value_or(std::pow(1.0 + 4.0 * std::numbers::e * plan_lambda *
                                                 (static_cast<double>(plan_tau) + 1.0) /
                                                 std::sqrt(static_cast<double>(plan_n)),
                                       2.0));
        p = asyspcd::manual_plan(plan_n, plan_tau, plan_lambda, rho,
                                 plan_gamma.value_or(0.5));
      } else if (asyspcd::check_delay_bound(plan_n, plan_tau, plan_lambda)) {
        p = asyspcd::corollary_plan(plan_n, plan_tau, plan_lambda);
      } else {
        std::cerr << "delay bound fails: 4*e*Lambda*(tau+1)^2 = "
                  << asyspcd::delay_bound_lhs(plan_tau, plan_lambda)
                  << " > sqrt(n) = " << std::sqrt(static_cast<double>(plan_n))
                  << "; reporting the gamma = 1/2 plan as Manual\n";
        const double a = 1.0 + 4.0 * std::numbers::e * plan_lambda *
                                   (static_cast<double>(plan_tau) + 1.0) /
                                   std::sqrt(static_cast<double>(plan_n));
        p = asyspcd::manual_plan(plan_n, plan_tau, plan_lambda, a * a, 0.5);
      }
      std::cout << json(p).dump(2) << '\n';
      return 0;
    }

    if (certify->parsed()) {
      const auto report = asyspcd::import_report_json(cert_report);
      if (report.runs.empty()) throw std::runtime_error("report has no runs");
      asyspcd::CertificationInput in;
      in.mode = cert_mode == "osc" ? asyspcd::RateMode::LinearOSC
                                   : asyspcd::RateMode::SublinearConvex;
      in.n = report.n;
      in.l = cert_l;
      in.l_max = report.l_max;
      in.gamma = report.runs.front().gamma;
      in.f_star = report.f_star;
      in.f0_gap = report.f0 - report.f_star;
      in.d0_sq = report.d0_sq;
      in.slack = cert_slack;
      std::uint64_t tau = 0;
      for (const auto& r : report.runs) {
        if (r.gamma != in.gamma)
          throw std::runtime_error("runs in the report use different gammas");
        tau = std::max(tau, r.observed_tau);
      }
      // Strict only inside the guaranteed regime: delay bound at the observed
      // staleness and gamma no larger than 1/2.
      in.strict = in.gamma <= 0.5 &&
                  asyspcd::check_delay_bound(report.n, tau, report.lambda_ratio);
      const auto cert = asyspcd::certify_rates(in, report.runs);
      std::cout << json(cert).dump(2) << '\n';
      return cert.holds ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
