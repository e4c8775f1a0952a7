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

#include "tlqg/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace tlqg {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += "\n  " + s;
  return out;
}

// Reads typed fields out of a JSON document, recording every violation instead of
// stopping at the first one.
class SchemaReader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  const json* object(const json& parent, const std::string& key, const std::string& path,
                     bool required) {
    const std::string p = join_path(path, key);
    if (!parent.contains(key)) {
      if (required) fail(p, "missing required object");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(p, "must be an object");
      return nullptr;
    }
    return &v;
  }

  void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : obj.items()) {
      if (allowed.count(item.key()) == 0) fail(join_path(path, item.key()), "unknown field");
    }
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
      if (required) fail(p, "missing required number");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(p, "must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long long> integer(const json& obj, const std::string& key, const std::string& path,
                                   bool required) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
      if (required) fail(p, "missing required integer");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(p, "must be an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& key,
                                             const std::string& path, bool required) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
      if (required) fail(p, "missing required number list");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      fail(p, "must be a list of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) {
        fail(p, "must be a list of numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  // n entries: diagonal; n*n entries: row-major full matrix.
  std::optional<Eigen::MatrixXd> matrix(const json& obj, const std::string& key,
                                        const std::string& path, int n, bool required) {
    const auto list = numbers(obj, key, path, required);
    if (!list) return std::nullopt;
    const auto size = static_cast<int>(list->size());
    if (size == n) {
      return Eigen::VectorXd::Map(list->data(), n).asDiagonal().toDenseMatrix();
    }
    if (size == n * n) {
      return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                 list->data(), n, n)
          .eval();
    }
    fail(join_path(path, key), "expected " + std::to_string(n) + " (diagonal) or " +
                                   std::to_string(n * n) + " (row-major) entries, got " +
                                   std::to_string(size));
    return std::nullopt;
  }

  void positive(const std::optional<double>& v, const std::string& path) {
    if (v && !(*v > 0.0)) fail(path, "must be > 0");
  }
  void non_negative(const std::optional<double>& v, const std::string& path) {
    if (v && !(*v >= 0.0)) fail(path, "must be >= 0");
  }

  static std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

void check_psd(SchemaReader& r, const Eigen::MatrixXd& M, const std::string& path, bool strict) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    r.fail(path, "must be symmetric");
    return;
  }
  const double lmin =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (strict && !(lmin > 0.0)) r.fail(path, "must be positive definite");
  if (!strict && lmin < -1e-12) r.fail(path, "must be positive semidefinite");
}

std::vector<double> flatten(const Eigen::MatrixXd& M) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  }
  return out;
}

void read_world(SchemaReader& r, const json& w, WorldModel& world) {
  const std::string p = "world";
  r.allow_keys(w, p, {"dt", "epsilon", "landmarks", "obstacles", "sigma_omega", "sigma_nu",
                      "sigma_x0", "G"});
  if (auto v = r.number(w, "dt", p, false)) {
    r.positive(v, "world.dt");
    world.dt = *v;
  }
  if (auto v = r.number(w, "epsilon", p, false)) {
    r.non_negative(v, "world.epsilon");
    world.noise.epsilon = *v;
  }

  if (!w.contains("landmarks") || !w.at("landmarks").is_array() || w.at("landmarks").empty()) {
    r.fail("world.landmarks", "must be a non-empty list");
  } else {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < w.at("landmarks").size(); ++i) {
      const json& l = w.at("landmarks")[i];
      const std::string lp = "world.landmarks[" + std::to_string(i) + "]";
      if (!l.is_object()) {
        r.fail(lp, "must be an object");
        continue;
      }
      r.allow_keys(l, lp, {"id", "x", "y"});
      Landmark lm;
      if (!l.contains("id") || !l.at("id").is_string()) {
        r.fail(lp + ".id", "missing required string");
      } else {
        lm.id = l.at("id").get<std::string>();
        if (!ids.insert(lm.id).second) r.fail(lp + ".id", "duplicate landmark id '" + lm.id + "'");
      }
      lm.px = r.number(l, "x", lp, true).value_or(0.0);
      lm.py = r.number(l, "y", lp, true).value_or(0.0);
      world.landmarks.push_back(lm);
    }
  }

  if (w.contains("obstacles")) {
    if (!w.at("obstacles").is_array()) {
      r.fail("world.obstacles", "must be a list");
    } else {
      for (std::size_t i = 0; i < w.at("obstacles").size(); ++i) {
        const json& o = w.at("obstacles")[i];
        const std::string op = "world.obstacles[" + std::to_string(i) + "]";
        if (!o.is_object()) {
          r.fail(op, "must be an object");
          continue;
        }
        r.allow_keys(o, op, {"x", "y", "radius", "safety_margin"});
        Obstacle ob;
        ob.cx = r.number(o, "x", op, true).value_or(0.0);
        ob.cy = r.number(o, "y", op, true).value_or(0.0);
        const auto radius = r.number(o, "radius", op, true);
        r.positive(radius, op + ".radius");
        ob.radius = radius.value_or(0.0);
        const auto margin = r.number(o, "safety_margin", op, false);
        r.non_negative(margin, op + ".safety_margin");
        ob.safety_margin = margin.value_or(0.0);
        world.obstacles.push_back(ob);
      }
    }
  }

  const int nz = world.measurement_dim();
  if (auto m = r.matrix(w, "sigma_omega", p, kStateDim, true)) {
    check_psd(r, *m, "world.sigma_omega", false);
    world.noise.sigma_omega = *m;
  }
  if (auto m = r.matrix(w, "sigma_x0", p, kStateDim, true)) {
    check_psd(r, *m, "world.sigma_x0", false);
    world.noise.sigma_x0 = *m;
  }
  if (nz > 0) {
    if (auto m = r.matrix(w, "sigma_nu", p, nz, true)) {
      check_psd(r, *m, "world.sigma_nu", true);
      world.noise.sigma_nu = *m;
    }
  }
  world.noise.G = Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  if (auto m = r.matrix(w, "G", p, kStateDim, false)) world.noise.G = *m;
}

void read_problem(SchemaReader& r, const json& pj, PlanProblem& problem) {
  const std::string p = "problem";
  r.allow_keys(pj, p, {"start", "goal", "goal_radius", "control_radius", "horizon",
                       "effort_weight", "barrier"});
  if (auto v = r.numbers(pj, "start", p, true)) {
    if (v->size() != 3) {
      r.fail("problem.start", "must be [x, y, theta]");
    } else {
      problem.start = State((*v)[0], (*v)[1], wrap_angle((*v)[2]));
    }
  }
  if (auto v = r.numbers(pj, "goal", p, true)) {
    if (v->size() != 2 && v->size() != 3) {
      r.fail("problem.goal", "must be [x, y] or [x, y, theta]");
    } else {
      problem.goal = Eigen::Vector2d((*v)[0], (*v)[1]);
    }
  }
  if (auto v = r.number(pj, "goal_radius", p, false)) {
    r.positive(v, "problem.goal_radius");
    problem.goal_radius = *v;
  }
  if (auto v = r.number(pj, "control_radius", p, false)) {
    r.positive(v, "problem.control_radius");
    problem.control_radius = *v;
  }
  if (auto v = r.integer(pj, "horizon", p, true)) {
    if (*v < 1) r.fail("problem.horizon", "must be >= 1");
    problem.horizon = static_cast<int>(*v);
  }
  if (auto m = r.matrix(pj, "effort_weight", p, kControlDim, false)) {
    check_psd(r, *m, "problem.effort_weight", false);
    problem.effort_weight = *m;
  }
  if (const json* b = r.object(pj, "barrier", p, false)) {
    r.allow_keys(*b, "problem.barrier", {"weight", "sharpness"});
    if (auto v = r.number(*b, "weight", "problem.barrier", false)) {
      r.non_negative(v, "problem.barrier.weight");
      problem.barrier.weight = *v;
    }
    if (auto v = r.number(*b, "sharpness", "problem.barrier", false)) {
      r.positive(v, "problem.barrier.sharpness");
      problem.barrier.sharpness = *v;
    }
  }
}

void read_optimizer(SchemaReader& r, const json& o, OptimizerParams& opt) {
  const std::string p = "optimizer";
  r.allow_keys(o, p, {"max_outer_iters", "max_inner_iters", "gradient_tolerance",
                      "penalty_weight_initial", "penalty_growth", "fd_step", "init_strategy",
                      "terminal_margin"});
  if (auto v = r.integer(o, "max_outer_iters", p, false)) {
    if (*v < 1) r.fail("optimizer.max_outer_iters", "must be >= 1");
    opt.max_outer_iters = static_cast<int>(*v);
  }
  if (auto v = r.integer(o, "max_inner_iters", p, false)) {
    if (*v < 1) r.fail("optimizer.max_inner_iters", "must be >= 1");
    opt.max_inner_iters = static_cast<int>(*v);
  }
  if (auto v = r.number(o, "gradient_tolerance", p, false)) {
    r.positive(v, "optimizer.gradient_tolerance");
    opt.gradient_tolerance = *v;
  }
  if (auto v = r.number(o, "penalty_weight_initial", p, false)) {
    r.positive(v, "optimizer.penalty_weight_initial");
    opt.penalty_weight_initial = *v;
  }
  if (auto v = r.number(o, "penalty_growth", p, false)) {
    if (!(*v > 1.0)) r.fail("optimizer.penalty_growth", "must be > 1");
    opt.penalty_growth = *v;
  }
  if (auto v = r.number(o, "fd_step", p, false)) {
    r.positive(v, "optimizer.fd_step");
    opt.fd_step = *v;
  }
  if (auto v = r.number(o, "terminal_margin", p, false)) {
    r.non_negative(v, "optimizer.terminal_margin");
    opt.terminal_margin = *v;
  }
  if (o.contains("init_strategy")) {
    const json& s = o.at("init_strategy");
    if (!s.is_string() || (s != "zero" && s != "steer")) {
      r.fail("optimizer.init_strategy", "must be \"zero\" or \"steer\"");
    } else {
      opt.init_strategy = init_strategy_from_string(s.get<std::string>());
    }
  }
}

void read_feedback(SchemaReader& r, const json& f, CostWeights& w) {
  r.allow_keys(f, "feedback", {"Wx", "Wu"});
  if (auto m = r.matrix(f, "Wx", "feedback", kStateDim, false)) {
    check_psd(r, *m, "feedback.Wx", false);
    w.Wx = *m;
  }
  if (auto m = r.matrix(f, "Wu", "feedback", kControlDim, false)) {
    check_psd(r, *m, "feedback.Wu", true);
    w.Wu = *m;
  }
}

void read_experiment(SchemaReader& r, const json& e, ExperimentParams& ex) {
  r.allow_keys(e, "experiment", {"seed", "validate", "sweep"});
  if (auto v = r.integer(e, "seed", "experiment", false)) {
    if (*v < 0) r.fail("experiment.seed", "must be >= 0");
    ex.seed = static_cast<std::uint64_t>(*v);
  }
  if (const json* v = r.object(e, "validate", "experiment", false)) {
    const std::string p = "experiment.validate";
    r.allow_keys(*v, p, {"epsilons", "n_samples", "gaussianity_min_samples", "max_abs_skewness",
                         "max_abs_excess_kurtosis", "zero_mean_sigmas"});
    if (auto l = r.numbers(*v, "epsilons", p, false)) {
      if (l->empty()) r.fail(p + ".epsilons", "must not be empty");
      for (double x : *l) {
        if (!(x >= 0.0)) r.fail(p + ".epsilons", "values must be >= 0");
      }
      ex.validate.epsilons = *l;
    }
    if (auto n = r.integer(*v, "n_samples", p, false)) ex.validate.n_samples = static_cast<int>(*n);
    if (auto n = r.integer(*v, "gaussianity_min_samples", p, false)) {
      ex.validate.gaussianity_min_samples = static_cast<int>(*n);
    }
    if (auto x = r.number(*v, "max_abs_skewness", p, false)) ex.validate.max_abs_skewness = *x;
    if (auto x = r.number(*v, "max_abs_excess_kurtosis", p, false)) {
      ex.validate.max_abs_excess_kurtosis = *x;
    }
    if (auto x = r.number(*v, "zero_mean_sigmas", p, false)) ex.validate.zero_mean_sigmas = *x;
  }
  if (const json* s = r.object(e, "sweep", "experiment", false)) {
    const std::string p = "experiment.sweep";
    r.allow_keys(*s, p, {"epsilons", "n_samples", "delta", "slope_min", "slope_max"});
    if (auto l = r.numbers(*s, "epsilons", p, false)) {
      if (l->empty()) r.fail(p + ".epsilons", "must not be empty");
      for (std::size_t i = 0; i < l->size(); ++i) {
        if (!((*l)[i] > 0.0)) r.fail(p + ".epsilons", "values must be > 0");
        if (i > 0 && !((*l)[i] < (*l)[i - 1])) r.fail(p + ".epsilons", "must be strictly decreasing");
      }
      ex.sweep.epsilons = *l;
    }
    if (auto n = r.integer(*s, "n_samples", p, false)) ex.sweep.n_samples = static_cast<int>(*n);
    if (auto x = r.number(*s, "delta", p, false)) {
      r.positive(x, p + ".delta");
      ex.sweep.delta = *x;
    }
    if (auto x = r.number(*s, "slope_min", p, false)) ex.sweep.slope_min = *x;
    if (auto x = r.number(*s, "slope_max", p, false)) ex.sweep.slope_max = *x;
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid config:" + join(violations)), violations_(std::move(violations)) {}

ScenarioConfig parse_config_json(const json& doc) {
  SchemaReader r;
  ScenarioConfig cfg;
  if (!doc.is_object()) throw ConfigError({"<root>: must be a JSON object"});
  r.allow_keys(doc, "", {"schema_version", "world", "problem", "optimizer", "feedback", "experiment"});
  if (auto v = r.integer(doc, "schema_version", "", true); v && *v != kSchemaVersion) {
    r.fail("schema_version", "unsupported version " + std::to_string(*v) + " (expected " +
                                 std::to_string(kSchemaVersion) + ")");
  }
  if (const json* w = r.object(doc, "world", "", true)) read_world(r, *w, cfg.problem.world);
  if (const json* p = r.object(doc, "problem", "", true)) read_problem(r, *p, cfg.problem);
  if (const json* o = r.object(doc, "optimizer", "", false)) read_optimizer(r, *o, cfg.problem.optimizer);
  if (const json* f = r.object(doc, "feedback", "", false)) read_feedback(r, *f, cfg.feedback);
  if (const json* e = r.object(doc, "experiment", "", false)) read_experiment(r, *e, cfg.experiment);

  if (r.errors.empty()) {
    try {
      cfg.problem.validate();
    } catch (const std::invalid_argument& e) {
      r.fail("problem", e.what());
    }
  }
  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open config file"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config_json(doc);
}

json to_json(const ScenarioConfig& cfg) {
  const PlanProblem& p = cfg.problem;
  const WorldModel& w = p.world;
  json landmarks = json::array();
  for (const auto& l : w.landmarks) landmarks.push_back({{"id", l.id}, {"x", l.px}, {"y", l.py}});
  json obstacles = json::array();
  for (const auto& o : w.obstacles) {
    obstacles.push_back({{"x", o.cx}, {"y", o.cy}, {"radius", o.radius}, {"safety_margin", o.safety_margin}});
  }
  const auto& o = p.optimizer;
  const auto& v = cfg.experiment.validate;
  const auto& s = cfg.experiment.sweep;
  return {
      {"schema_version", kSchemaVersion},
      {"world",
       {{"dt", w.dt},
        {"epsilon", w.noise.epsilon},
        {"landmarks", landmarks},
        {"obstacles", obstacles},
        {"sigma_omega", flatten(w.noise.sigma_omega)},
        {"sigma_nu", flatten(w.noise.sigma_nu)},
        {"sigma_x0", flatten(w.noise.sigma_x0)},
        {"G", flatten(w.noise.G)}}},
      {"problem",
       {{"start", {p.start(0), p.start(1), p.start(2)}},
        {"goal", {p.goal(0), p.goal(1)}},
        {"goal_radius", p.goal_radius},
        {"control_radius", p.control_radius},
        {"horizon", p.horizon},
        {"effort_weight", flatten(p.effort_weight)},
        {"barrier", {{"weight", p.barrier.weight}, {"sharpness", p.barrier.sharpness}}}}},
      {"optimizer",
       {{"max_outer_iters", o.max_outer_iters},
        {"max_inner_iters", o.max_inner_iters},
        {"gradient_tolerance", o.gradient_tolerance},
        {"penalty_weight_initial", o.penalty_weight_initial},
        {"penalty_growth", o.penalty_growth},
        {"fd_step", o.fd_step},
        {"init_strategy", to_string(o.init_strategy)},
        {"terminal_margin", o.terminal_margin}}},
      {"feedback", {{"Wx", flatten(cfg.feedback.Wx)}, {"Wu", flatten(cfg.feedback.Wu)}}},
      {"experiment",
       {{"seed", cfg.experiment.seed},
        {"validate",
         {{"epsilons", v.epsilons},
          {"n_samples", v.n_samples},
          {"gaussianity_min_samples", v.gaussianity_min_samples},
          {"max_abs_skewness", v.max_abs_skewness},
          {"max_abs_excess_kurtosis", v.max_abs_excess_kurtosis},
          {"zero_mean_sigmas", v.zero_mean_sigmas}}},
        {"sweep",
         {{"epsilons", s.epsilons},
          {"n_samples", s.n_samples},
          {"delta", s.delta},
          {"slope_min", s.slope_min},
          {"slope_max", s.slope_max}}}}},
  };
}

}  // namespace tlqg
