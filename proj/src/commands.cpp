// Copyright 2026 The tlqg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tlqg/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tlqg/svg.hpp"

namespace tlqg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kPlanHeader = "t,x,y,theta,v,omega,trace_P,barrier";
constexpr int kEllipseEvery = 5;

std::ostream& log_to(const CommandOptions& o) {
  static std::ostream null_stream(nullptr);
  return o.log != nullptr ? *o.log : null_stream;
}

std::uint64_t seed_of(const ScenarioConfig& c, const CommandOptions& o) {
  return o.seed.value_or(c.experiment.seed);
}

PlanProblem execution_problem(const ScenarioConfig& c, const CommandOptions& o) {
  PlanProblem p = c.problem;
  if (o.epsilon) p.world.noise.epsilon = *o.epsilon;
  return p;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  bool first = true;
  for (double v : values) {
    if (!first) row += ',';
    row += format_double(v);
    first = false;
  }
  return row + '\n';
}

void bounds_of(const std::vector<Eigen::Vector2d>& pts, const PlanProblem& p, Eigen::Vector2d& lo,
               Eigen::Vector2d& hi) {
  lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  auto grow = [&](const Eigen::Vector2d& q, double r) {
    lo = lo.cwiseMin(q - Eigen::Vector2d::Constant(r));
    hi = hi.cwiseMax(q + Eigen::Vector2d::Constant(r));
  };
  for (const auto& q : pts) grow(q, 0.0);
  for (const auto& l : p.world.landmarks) grow({l.px, l.py}, 0.15);
  for (const auto& o : p.world.obstacles) grow({o.cx, o.cy}, o.radius + o.safety_margin);
  grow(p.goal, p.goal_radius);
  lo -= Eigen::Vector2d::Constant(0.2);
  hi += Eigen::Vector2d::Constant(0.2);
}

void draw_world(svg::Canvas& canvas, const PlanProblem& p) {
  for (const auto& l : p.world.landmarks) {
    canvas.circle({l.px, l.py}, 0.15, "fill:#fff3b0;stroke:#e0c040;stroke-width:1");
    canvas.text({l.px + 0.08, l.py + 0.08}, l.id, "fill:#806000");
  }
  for (const auto& o : p.world.obstacles) {
    canvas.circle({o.cx, o.cy}, o.radius, "fill:#777777;stroke:none");
    if (o.safety_margin > 0.0) {
      canvas.circle({o.cx, o.cy}, o.radius + o.safety_margin,
                    "fill:none;stroke:#444444;stroke-width:1;stroke-dasharray:4,3");
    }
  }
  canvas.circle(p.goal, p.goal_radius, "fill:#d8f5d8;stroke:#2a8a2a;stroke-width:1");
  canvas.circle(p.start.head<2>(), 0.04, "fill:#2050c0");
}

std::vector<Eigen::Vector2d> positions(const std::vector<State>& states) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& x : states) out.emplace_back(x.head<2>());
  return out;
}

std::vector<Eigen::Vector2d> positions(const std::vector<Eigen::VectorXd>& states) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& x : states) out.emplace_back(x.head<2>());
  return out;
}

std::string plan_csv(const NominalPlan& plan, const PlanProblem& p) {
  std::string out = std::string(kPlanHeader) + '\n';
  const int K = plan.horizon();
  for (int t = 0; t <= K; ++t) {
    const State& x = plan.states[t];
    const Control u = t < K ? plan.controls[t] : Control::Zero();
    out += std::to_string(t) + ',' +
           csv_row({x(0), x(1), x(2), u(0), u(1), plan.covariances[t].trace(),
                    barrier_cost<double>(x, p.world.obstacles, p.barrier)});
  }
  return out;
}

std::string plan_svg(const NominalPlan& plan, const PlanProblem& p) {
  const auto path = positions(plan.states);
  Eigen::Vector2d lo;
  Eigen::Vector2d hi;
  bounds_of(path, p, lo, hi);
  svg::Canvas canvas(lo, hi);
  draw_world(canvas, p);
  for (int t = 0; t <= plan.horizon(); t += kEllipseEvery) {
    canvas.covariance_ellipse(path[t], plan.covariances[t].topLeftCorner<2, 2>(),
                              "fill:none;stroke:#c03030;stroke-width:1");
  }
  canvas.polyline(path, "stroke:#2050c0;stroke-width:2");
  canvas.label(24, 14, "nominal plan, K = " + std::to_string(plan.horizon()));
  return canvas.str();
}

json cost_json(const CostBreakdown& c) {
  return {{"trace_term", c.trace_term},           {"effort_term", c.effort_term},
          {"barrier_term", c.barrier_term},       {"terminal_residual", c.terminal_residual},
          {"control_residual", c.control_residual}, {"penalty_weight", c.penalty_weight},
          {"total", c.total}};
}

void write_plan_artifacts(const NominalPlan& plan, const PlanProblem& p, const fs::path& dir) {
  double max_u = 0.0;
  for (const auto& u : plan.controls) max_u = std::max(max_u, u.norm());
  const double terminal = (plan.states.back().head<2>() - p.goal).norm();
  const json report = {
      {"converged", plan.converged},
      {"iterations", plan.iterations},
      {"horizon", plan.horizon()},
      {"cost", cost_json(plan.cost)},
      {"initial_guess_cost", plan.initial_guess_cost},
      {"terminal_distance", terminal},
      {"goal_radius", p.goal_radius},
      {"terminal_constraint_met", terminal < p.goal_radius},
      {"max_control_norm", max_u},
      {"control_radius", p.control_radius},
      {"control_constraint_met", max_u <= p.control_radius + 1e-6},
      {"barrier_violations", barrier_violations(plan, p)},
      {"planning_epsilon", p.world.noise.epsilon},
  };
  write_file_atomic(dir / "plan.csv", plan_csv(plan, p));
  write_file_atomic(dir / "plan.svg", plan_svg(plan, p));
  write_file_atomic(dir / "report.json", report.dump(2) + '\n');
}

// Uses <out>/plan.csv when present, otherwise solves and writes the plan artifacts.
NominalPlan obtain_plan(const ScenarioConfig& c, const CommandOptions& o) {
  const fs::path csv = o.out_dir / "plan.csv";
  if (fs::exists(csv)) {
    log_to(o) << "using existing plan " << csv.string() << '\n';
    return load_plan_csv(csv, c.problem);
  }
  log_to(o) << "no plan found in " << o.out_dir.string() << ", solving\n";
  NominalPlan plan = solve_plan(c.problem, o.threads);
  write_plan_artifacts(plan, c.problem, o.out_dir);
  return plan;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

NominalPlan load_plan_csv(const fs::path& path, const PlanProblem& problem) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kPlanHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<State> states;
  std::vector<Control> controls;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 8) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    states.emplace_back(std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]));
    controls.emplace_back(std::stod(cells[4]), std::stod(cells[5]));
  }
  if (states.size() < 2) throw std::runtime_error(path.string() + ": plan has no steps");
  controls.pop_back();
  if (static_cast<int>(controls.size()) != problem.horizon) {
    throw std::runtime_error(path.string() + ": plan horizon " + std::to_string(controls.size()) +
                             " does not match config horizon " + std::to_string(problem.horizon));
  }
  NominalPlan plan = make_plan(controls, problem, problem.optimizer.penalty_weight_initial);
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (state_difference<double>(states[t], plan.states[t]).norm() > 1e-9) {
      throw std::runtime_error(path.string() + ": states do not match the config start and controls");
    }
  }
  plan.converged = plan_is_feasible(plan, problem);
  return plan;
}

int cmd_plan(const ScenarioConfig& config, const CommandOptions& options) {
  const PlanProblem problem = execution_problem(config, options);
  NominalPlan plan = solve_plan(problem, options.threads);
  write_plan_artifacts(plan, problem, options.out_dir);
  log_to(options) << "plan: converged=" << (plan.converged ? "true" : "false")
                  << " iterations=" << plan.iterations << " total=" << plan.cost.total
                  << " trace=" << plan.cost.trace_term
                  << " terminal_distance=" << (plan.states.back().head<2>() - problem.goal).norm()
                  << '\n';
  return plan.converged ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(const ScenarioConfig& config, const CommandOptions& options) {
  const fs::path csv = options.out_dir / "plan.csv";
  if (!fs::exists(csv)) {
    log_to(options) << "simulate: " << csv.string() << " not found; run `tlqg plan` first\n";
    return kExitUsage;
  }
  const NominalPlan plan = load_plan_csv(csv, config.problem);
  const PlanProblem problem = execution_problem(config, options);
  const GainSchedule gains = synthesize_gains(plan, problem.world.dt, config.feedback);
  const RolloutResult r = simulate_rollout(plan, gains, problem, seed_of(config, options));
  if (r.aborted) {
    log_to(options) << "simulate: rollout aborted at step " << r.controls.size() << ": "
                    << r.abort_reason << '\n';
    return kExitAborted;
  }

  const int K = plan.horizon();
  std::string exec = std::string("t,x,y,theta,v,omega\n");
  std::string est = std::string("t,x_hat,y_hat,theta_hat,trace_P,innovation_norm\n");
  std::vector<Eigen::VectorXd> truth;
  std::vector<Eigen::VectorXd> estimate;
  for (int t = 0; t <= K; ++t) {
    const auto& s = r.trajectory[t];
    const Eigen::Vector2d u = t < K ? Eigen::Vector2d(r.controls[t]) : Eigen::Vector2d::Zero();
    exec += std::to_string(t) + ',' +
            csv_row({s.true_state(0), s.true_state(1), s.true_state(2), u(0), u(1)});
    const double innov = t > 0 ? r.innovations[t - 1].norm() : 0.0;
    est += std::to_string(t) + ',' +
           csv_row({s.belief.mean(0), s.belief.mean(1), s.belief.mean(2), s.belief.cov.trace(), innov});
    truth.push_back(s.true_state);
    estimate.push_back(s.belief.mean);
  }

  const auto nominal_path = positions(plan.states);
  const auto truth_path = positions(truth);
  const auto est_path = positions(estimate);
  std::vector<Eigen::Vector2d> all = nominal_path;
  all.insert(all.end(), truth_path.begin(), truth_path.end());
  all.insert(all.end(), est_path.begin(), est_path.end());
  Eigen::Vector2d lo;
  Eigen::Vector2d hi;
  bounds_of(all, problem, lo, hi);
  svg::Canvas canvas(lo, hi);
  draw_world(canvas, problem);
  canvas.polyline(nominal_path, "stroke:#2050c0;stroke-width:1.5;stroke-dasharray:6,4");
  canvas.polyline(truth_path, "stroke:#202020;stroke-width:2");
  canvas.polyline(est_path, "stroke:#c03030;stroke-width:1.5");
  canvas.label(24, 14, "dashed: nominal, black: executed, red: estimate");

  write_file_atomic(options.out_dir / "exec.csv", exec);
  write_file_atomic(options.out_dir / "estimate.csv", est);
  write_file_atomic(options.out_dir / "exec.svg", canvas.str());
  log_to(options) << "simulate: cost=" << r.cost << " nominal_cost=" << nominal_cost(plan, problem)
                  << " first_order_error=" << r.first_order_error
                  << " max_deviation=" << r.max_deviation
                  << " collided=" << (r.collided ? "true" : "false") << '\n';
  return kExitOk;
}

int cmd_validate(const ScenarioConfig& config, const CommandOptions& options) {
  const ValidateParams& v = config.experiment.validate;
  const int n = options.samples.value_or(v.n_samples);
  if (n < 100) {
    log_to(options) << "validate: refusing to run with " << n
                    << " samples; at least 100 are required\n";
    return kExitUsage;
  }
  const std::vector<double> epsilons =
      options.epsilon ? std::vector<double>{*options.epsilon} : v.epsilons;
  const NominalPlan plan = obtain_plan(config, options);
  const GainSchedule gains = synthesize_gains(plan, config.problem.world.dt, config.feedback);
  const std::uint64_t seed = seed_of(config, options);

  std::string csv =
      "epsilon,n_samples,n_aborted,mean,std,std_error,skewness,excess_kurtosis,zero_mean_pass,"
      "gaussianity\n";
  json records = json::array();
  bool all_pass = true;
  int code = kExitOk;
  for (double eps : epsilons) {
    PlanProblem problem = config.problem;
    problem.world.noise.epsilon = eps;
    ErrorStats s;
    try {
      s = estimate_error_stats(plan, gains, problem, n, seed, options.threads);
    } catch (const StatisticalValidityError& e) {
      log_to(options) << "validate: epsilon=" << eps << ": " << e.what() << '\n';
      records.push_back({{"epsilon", eps}, {"error", e.what()}});
      all_pass = false;
      code = kExitAborted;
      continue;
    }
    const bool zero_mean = std::abs(s.mean) <= v.zero_mean_sigmas * s.std_error;
    std::string gauss = "skipped";
    if (n >= v.gaussianity_min_samples) {
      gauss = (std::abs(s.skewness) <= v.max_abs_skewness &&
               std::abs(s.excess_kurtosis) <= v.max_abs_excess_kurtosis)
                  ? "pass"
                  : "fail";
    }
    all_pass = all_pass && zero_mean && gauss != "fail";
    csv += format_double(eps) + ',' + std::to_string(s.n_samples) + ',' +
           std::to_string(s.n_aborted) + ',' +
           csv_row({s.mean, s.std, s.std_error, s.skewness, s.excess_kurtosis});
    csv.back() = ',';
    csv += std::string(zero_mean ? "pass" : "fail") + ',' + gauss + '\n';
    records.push_back({{"epsilon", eps},
                       {"n_samples", s.n_samples},
                       {"n_aborted", s.n_aborted},
                       {"mean", s.mean},
                       {"std", s.std},
                       {"std_error", s.std_error},
                       {"skewness", s.skewness},
                       {"excess_kurtosis", s.excess_kurtosis},
                       {"zero_mean_pass", zero_mean},
                       {"gaussianity", gauss}});
    log_to(options) << "validate: epsilon=" << eps << " mean=" << s.mean
                    << " std_error=" << s.std_error << " skewness=" << s.skewness
                    << " excess_kurtosis=" << s.excess_kurtosis
                    << " zero_mean=" << (zero_mean ? "pass" : "fail") << " gaussianity=" << gauss
                    << '\n';
  }
  const json report = {
      {"seed", seed},
      {"thresholds",
       {{"zero_mean_sigmas", v.zero_mean_sigmas},
        {"max_abs_skewness", v.max_abs_skewness},
        {"max_abs_excess_kurtosis", v.max_abs_excess_kurtosis},
        {"gaussianity_min_samples", v.gaussianity_min_samples}}},
      {"records", records},
      {"pass", all_pass},
  };
  write_file_atomic(options.out_dir / "theorem3.csv", csv);
  write_file_atomic(options.out_dir / "theorem3.json", report.dump(2) + '\n');
  if (code != kExitOk) return code;
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const ScenarioConfig& config, const CommandOptions& options) {
  const SweepParams& sp = config.experiment.sweep;
  const int n = options.samples.value_or(sp.n_samples);
  if (n < 100) {
    log_to(options) << "sweep: refusing to run with " << n << " samples; at least 100 are required\n";
    return kExitUsage;
  }
  const std::vector<double> epsilons =
      options.epsilon ? std::vector<double>{*options.epsilon} : sp.epsilons;
  const NominalPlan plan = obtain_plan(config, options);
  const GainSchedule gains = synthesize_gains(plan, config.problem.world.dt, config.feedback);
  SweepResult result;
  try {
    result = epsilon_sweep(plan, gains, config.problem, epsilons, sp.delta, n,
                           seed_of(config, options), options.threads);
  } catch (const StatisticalValidityError& e) {
    log_to(options) << "sweep: " << e.what() << '\n';
    return kExitAborted;
  }

  std::string csv = "epsilon,n_samples,n_aborted,exit_probability,mean_cost_gap,cost_gap_std_error\n";
  for (const auto& r : result.records) {
    csv += format_double(r.epsilon) + ',' + std::to_string(r.n_samples) + ',' +
           std::to_string(r.n_aborted) + ',' +
           csv_row({r.exit_probability, r.mean_cost_gap, r.cost_gap_std_error});
  }
  const bool slope_pass =
      !result.slope || (*result.slope >= sp.slope_min && *result.slope <= sp.slope_max);
  const bool pass = slope_pass && result.exit_monotone;

  // log |gap| against log eps.
  std::vector<Eigen::Vector2d> pts;
  for (const auto& r : result.records) {
    if (r.mean_cost_gap != 0.0) pts.emplace_back(std::log(r.epsilon), std::log(std::abs(r.mean_cost_gap)));
  }
  Eigen::Vector2d lo = Eigen::Vector2d(-1.0, -1.0);
  Eigen::Vector2d hi = Eigen::Vector2d(1.0, 1.0);
  if (!pts.empty()) {
    lo = pts.front();
    hi = pts.front();
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    lo -= Eigen::Vector2d(0.3, 0.5);
    hi += Eigen::Vector2d(0.3, 0.5);
  }
  svg::Canvas canvas(lo, hi, 480.0);
  for (const auto& p : pts) canvas.circle(p, 0.04 * (hi.x() - lo.x()) / 2.0, "fill:#2050c0");
  if (result.slope && pts.size() >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : pts) {
      mx += p.x();
      my += p.y();
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    const double x0 = pts.back().x();
    const double x1 = pts.front().x();
    canvas.polyline({{x0, my + *result.slope * (x0 - mx)}, {x1, my + *result.slope * (x1 - mx)}},
                    "stroke:#c03030;stroke-width:1.5");
    char buf[64];
    std::snprintf(buf, sizeof buf, "fitted slope = %.3f", *result.slope);
    canvas.label(24, 14, buf);
  }
  canvas.label(24, 28, "x: log epsilon, y: log |mean(J - J^p)|");

  json records = json::array();
  for (const auto& r : result.records) {
    records.push_back({{"epsilon", r.epsilon},
                       {"n_samples", r.n_samples},
                       {"n_aborted", r.n_aborted},
                       {"exit_probability", r.exit_probability},
                       {"mean_cost_gap", r.mean_cost_gap},
                       {"cost_gap_std_error", r.cost_gap_std_error}});
  }
  const json report = {
      {"delta", sp.delta},
      {"records", records},
      {"slope", result.slope ? json(*result.slope) : json(nullptr)},
      {"slope_range", {sp.slope_min, sp.slope_max}},
      {"slope_pass", slope_pass},
      {"exit_monotone", result.exit_monotone},
      {"pass", pass},
  };
  write_file_atomic(options.out_dir / "sweep.csv", csv);
  write_file_atomic(options.out_dir / "sweep.svg", canvas.str());
  write_file_atomic(options.out_dir / "sweep.json", report.dump(2) + '\n');
  log_to(options) << "sweep: slope=" << (result.slope ? format_double(*result.slope) : "n/a")
                  << " exit_monotone=" << (result.exit_monotone ? "true" : "false") << '\n';
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace tlqg
