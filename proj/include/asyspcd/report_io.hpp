#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "asyspcd/certify.hpp"
#include "asyspcd/experiment.hpp"
#include "asyspcd/serial.hpp"
#include "asyspcd/theory.hpp"

namespace asyspcd {

using json = nlohmann::json;

inline void to_json(json& j, const StepPlan& p) {
  j = json{{"n", p.n},
           {"lambda_ratio", p.lambda_ratio},
           {"rho", p.rho},
           {"tau", p.tau},
           {"theta", p.theta},
           {"theta_prime", p.theta_prime},
           {"psi", p.psi},
           {"gamma", p.gamma},
           {"gamma_psi", p.gamma_psi},
           {"gamma_rho", p.gamma_rho},
           {"feasible", p.feasible},
           {"source", to_string(p.source)}};
}

inline void to_json(json& j, const RunRecord& r) {
  j = json{{"seed", r.seed},
           {"threads", r.threads},
           {"gamma", r.gamma},
           {"epochs", r.epochs_run},
           {"objective_by_epoch", r.objective_by_epoch},
           {"wall_seconds", r.wall_seconds},
           {"observed_tau", r.observed_tau},
           {"sampling", to_string(r.sampling)},
           {"epoch_wall_seconds", r.epoch_wall_seconds},
           {"barrier_seconds", r.barrier_seconds},
           {"tau_cap", r.tau_cap},
           {"staleness_flagged", r.staleness_flagged},
           {"dist_sq_by_epoch", r.dist_sq_by_epoch},
           {"final_x", r.final_x}};
}

inline void from_json(const json& j, RunRecord& r) {
  j.at("seed").get_to(r.seed);
  j.at("threads").get_to(r.threads);
  j.at("gamma").get_to(r.gamma);
  j.at("epochs").get_to(r.epochs_run);
  j.at("objective_by_epoch").get_to(r.objective_by_epoch);
  j.at("wall_seconds").get_to(r.wall_seconds);
  j.at("observed_tau").get_to(r.observed_tau);
  r.sampling = parse_sampling(j.at("sampling").get<std::string>());
  r.epoch_wall_seconds = j.value("epoch_wall_seconds", std::vector<double>{});
  r.barrier_seconds = j.value("barrier_seconds", 0.0);
  r.tau_cap = j.value("tau_cap", std::uint64_t{0});
  r.staleness_flagged = j.value("staleness_flagged", false);
  r.dist_sq_by_epoch = j.value("dist_sq_by_epoch", std::vector<double>{});
  r.final_x = j.value("final_x", std::vector<double>{});
}

inline void to_json(json& j, const InstanceSpec& s) {
  j = json{{"m", s.m},
           {"n", s.n},
           {"s", s.s},
           {"sigma", s.sigma},
           {"seed", s.seed},
           {"lambda_rule", s.lambda_rule == InstanceSpec::LambdaRule::Scaled
                               ? "scaled"
                               : "explicit"},
           {"lambda_value", s.lambda_value}};
}

inline void from_json(const json& j, InstanceSpec& s) {
  j.at("m").get_to(s.m);
  j.at("n").get_to(s.n);
  j.at("s").get_to(s.s);
  j.at("sigma").get_to(s.sigma);
  j.at("seed").get_to(s.seed);
  s.lambda_rule = j.at("lambda_rule").get<std::string>() == "explicit"
                      ? InstanceSpec::LambdaRule::Explicit
                      : InstanceSpec::LambdaRule::Scaled;
  j.at("lambda_value").get_to(s.lambda_value);
}

inline void to_json(json& j, const ExperimentReport& r) {
  j = json{{"instance_digest", r.instance_digest},
           {"n", r.n},
           {"l_max", r.l_max},
           {"lambda_ratio", r.lambda_ratio},
           {"f_star", r.f_star},
           {"f0", r.f0},
           {"d0_sq", r.d0_sq},
           {"runs", r.runs}};
  j["spec"] = r.spec ? json(*r.spec) : json(nullptr);
  j["failures"] = json::array();
  for (const auto& f : r.failures)
    j["failures"].push_back(
        {{"threads", f.threads}, {"seed", f.seed}, {"message", f.message}});
  j["speedup_table"] = json::array();
  for (const auto& s : r.speedup_table)
    j["speedup_table"].push_back({{"threads", s.threads},
                                  {"wall_seconds", s.wall_seconds},
                                  {"speedup", s.speedup}});
  j["epoch_curves"] = json::object();
  for (const auto& [t, curve] : r.epoch_curves)
    j["epoch_curves"][std::to_string(t)] = curve;
  j["support_recovered"] =
      r.support_recovered ? json(*r.support_recovered) : json(nullptr);
}

inline void from_json(const json& j, ExperimentReport& r) {
  j.at("instance_digest").get_to(r.instance_digest);
  j.at("n").get_to(r.n);
  j.at("l_max").get_to(r.l_max);
  j.at("lambda_ratio").get_to(r.lambda_ratio);
  j.at("f_star").get_to(r.f_star);
  j.at("f0").get_to(r.f0);
  j.at("d0_sq").get_to(r.d0_sq);
  j.at("runs").get_to(r.runs);
  r.spec.reset();
  if (j.contains("spec") && !j["spec"].is_null())
    r.spec = j["spec"].get<InstanceSpec>();
  r.failures.clear();
  for (const auto& f : j.value("failures", json::array()))
    r.failures.push_back({f.at("threads").get<std::size_t>(),
                          f.at("seed").get<std::uint64_t>(),
                          f.at("message").get<std::string>()});
  r.speedup_table.clear();
  for (const auto& s : j.value("speedup_table", json::array()))
    r.speedup_table.push_back({s.at("threads").get<std::size_t>(),
                               s.at("wall_seconds").get<double>(),
                               s.at("speedup").get<double>()});
  r.epoch_curves.clear();
  const json curves = j.value("epoch_curves", json::object());
  for (const auto& [k, v] : curves.items())
    r.epoch_curves[std::stoull(k)] = v.get<std::vector<double>>();
  r.support_recovered.reset();
  if (j.contains("support_recovered") && !j["support_recovered"].is_null())
    r.support_recovered = j["support_recovered"].get<bool>();
}

inline void to_json(json& j, const Certification& c) {
  j = json{{"verdict", to_string(c.verdict)},
           {"holds", c.holds},
           {"worst_margin", c.worst_margin},
           {"worst_epoch", c.worst_epoch},
           {"observed", c.observed},
           {"bound", c.bound}};
}

enum class ReportFormat { Csv, Json };

inline std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "threads,seed,epoch,objective,wall_seconds,observed_tau\n";
  char buf[64];
  for (const auto& r : report.runs) {
    for (std::size_t e = 0; e < r.objective_by_epoch.size(); ++e) {
      const double wall =
          e < r.epoch_wall_seconds.size() ? r.epoch_wall_seconds[e] : 0.0;
      out << r.threads << ',' << r.seed << ',' << (e + 1) << ',';
      std::snprintf(buf, sizeof buf, "%.17g", r.objective_by_epoch[e]);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", wall);
      out << buf << ',' << r.observed_tau << '\n';
    }
  }
  return out.str();
}

inline void export_report(const ExperimentReport& report, const std::string& path,
                          ReportFormat format) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  if (format == ReportFormat::Csv)
    out << report_csv(report);
  else
    out << json(report).dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline ExperimentReport import_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  try {
    return json::parse(in).get<ExperimentReport>();
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace asyspcd
