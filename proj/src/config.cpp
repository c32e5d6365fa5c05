#include "ssimpc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "ssimpc/cartpole.hpp"
#include "ssimpc/quadrotor.hpp"

namespace ssimpc {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

void require_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    fail("'" + path + "' must be an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail("unknown key '" + (path.empty() ? "" : path + ".") + item.key() +
           "'");
    }
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

void read_double(const json& obj, const std::string& path, const char* key,
                 double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    fail("key '" + join(path, key) + "' must be a number");
  }
  out = v.get<double>();
}

void read_positive(const json& obj, const std::string& path, const char* key,
                   double& out) {
  read_double(obj, path, key, out);
  if (!(out > 0.0)) {
    fail("key '" + join(path, key) + "' must be positive");
  }
}

void read_int(const json& obj, const std::string& path, const char* key,
              int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail("key '" + join(path, key) + "' must be an integer");
  }
  out = v.get<int>();
}

void read_bool(const json& obj, const std::string& path, const char* key,
               bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    fail("key '" + join(path, key) + "' must be a boolean");
  }
  out = v.get<bool>();
}

void read_string(const json& obj, const std::string& path, const char* key,
                 std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) {
    fail("key '" + join(path, key) + "' must be a string");
  }
  out = v.get<std::string>();
}

void read_vector(const json& obj, const std::string& path, const char* key,
                 Eigen::VectorXd& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) {
    fail("key '" + join(path, key) + "' must be a non-empty array of numbers");
  }
  out.resize(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto& e : v) {
    if (!e.is_number()) {
      fail("key '" + join(path, key) + "' must contain only numbers");
    }
    out(i++) = e.get<double>();
  }
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

void check_sized(const Eigen::VectorXd& v, Eigen::Index n,
                 const std::string& what) {
  if (v.size() != n) {
    fail("'" + what + "' must have " + std::to_string(n) + " entries, got " +
         std::to_string(v.size()));
  }
}

int lifted_dim(PlantConfig::Type type) {
  return type == PlantConfig::Type::cartpole ? 5 : 11;
}

int state_dim(PlantConfig::Type type) {
  return type == PlantConfig::Type::cartpole ? 4 : 10;
}

int input_dim(PlantConfig::Type type) {
  return type == PlantConfig::Type::cartpole ? 1 : 4;
}

ScenarioConfig defaults_for(PlantConfig::Type type) {
  ScenarioConfig cfg;
  cfg.plant.type = type;
  if (type == PlantConfig::Type::cartpole) {
    cfg.controller.q_diag.resize(4);
    cfg.controller.q_diag << 5.0, 0.1, 5.0, 0.1;
    cfg.controller.r_diag = Eigen::VectorXd::Constant(1, 0.1);
    cfg.reference.kind = ReferenceSpec::Kind::setpoint;
    cfg.reference.setpoint_state = Eigen::VectorXd::Zero(4);
    cfg.reference.setpoint_input = Eigen::VectorXd::Zero(1);
    cfg.init.lower.resize(4);
    cfg.init.lower << -1.0, -0.1, -0.2, -0.1;
    cfg.init.upper = -cfg.init.lower;
    cfg.run.steps = 90;
  } else {
    cfg.plant.rate_hz = 50.0;
    cfg.controller.feature_count = 50;
    cfg.controller.horizon = 10;
    cfg.controller.bandwidth_sigma = 1.0;
    cfg.controller.learning_rate.value = 2.5;
    // The short 0.2 s lookahead (N=10 at 50 Hz) needs cheap inputs and a
    // heavy terminal weight, or the planner lets altitude drift rather than
    // spend thrust inside the horizon.
    cfg.controller.q_diag.resize(10);
    cfg.controller.q_diag << 5.0, 5.0, 5.0, 0.5, 0.5, 0.5, 0.1, 0.1, 0.1, 0.1;
    cfg.controller.q_terminal_diag = 10.0 * cfg.controller.q_diag;
    cfg.controller.r_diag.resize(4);
    cfg.controller.r_diag << 0.05, 0.02, 0.02, 0.02;
    cfg.reference.kind = ReferenceSpec::Kind::circle;
    cfg.reference.setpoint_state = Eigen::VectorXd::Zero(10);
    cfg.reference.setpoint_state(6) = 1.0;
    cfg.reference.setpoint_input = Eigen::VectorXd::Zero(4);
    cfg.run.steps = 1000;
  }
  return cfg;
}

NoiseSpec::Kind parse_noise_kind(const std::string& s) {
  if (s == "none") return NoiseSpec::Kind::none;
  if (s == "gaussian") return NoiseSpec::Kind::gaussian;
  if (s == "bounded_uniform") return NoiseSpec::Kind::bounded_uniform;
  fail("noise.kind must be one of none|gaussian|bounded_uniform, got '" + s +
       "'");
}

const char* noise_kind_name(NoiseSpec::Kind k) {
  switch (k) {
    case NoiseSpec::Kind::none:
      return "none";
    case NoiseSpec::Kind::gaussian:
      return "gaussian";
    default:
      return "bounded_uniform";
  }
}

ControllerKind parse_controller_kind(const std::string& s) {
  if (s == "ssi_mpc") return ControllerKind::ssi_mpc;
  if (s == "nominal_mpc") return ControllerKind::nominal_mpc;
  if (s == "clairvoyant_mpc") return ControllerKind::clairvoyant_mpc;
  fail("controller.kind must be one of ssi_mpc|nominal_mpc|clairvoyant_mpc, "
       "got '" +
       s + "'");
}

const char* controller_kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::ssi_mpc:
      return "ssi_mpc";
    case ControllerKind::nominal_mpc:
      return "nominal_mpc";
    default:
      return "clairvoyant_mpc";
  }
}

ReferenceSpec::Kind parse_reference_kind(const std::string& s) {
  if (s == "setpoint") return ReferenceSpec::Kind::setpoint;
  if (s == "circle") return ReferenceSpec::Kind::circle;
  if (s == "lemniscate") return ReferenceSpec::Kind::lemniscate;
  fail("reference.kind must be one of setpoint|circle|lemniscate, got '" + s +
       "'");
}

const char* reference_kind_name(ReferenceSpec::Kind k) {
  switch (k) {
    case ReferenceSpec::Kind::setpoint:
      return "setpoint";
    case ReferenceSpec::Kind::circle:
      return "circle";
    default:
      return "lemniscate";
  }
}

void parse_plant(const json& j, ScenarioConfig& cfg) {
  PlantConfig& p = cfg.plant;
  if (p.type == PlantConfig::Type::cartpole) {
    require_keys(j, "plant",
                 {"type", "rate_hz", "cart_mass", "pole_mass", "half_length",
                  "gravity", "nominal_scale", "force_limit"});
    read_positive(j, "plant", "rate_hz", p.rate_hz);
    read_positive(j, "plant", "cart_mass", p.cart_mass);
    read_positive(j, "plant", "pole_mass", p.pole_mass);
    read_positive(j, "plant", "half_length", p.half_length);
    read_positive(j, "plant", "gravity", p.gravity);
    read_positive(j, "plant", "nominal_scale", p.nominal_scale);
    if (p.nominal_scale > 1.0) {
      fail("plant.nominal_scale must lie in (0, 1]");
    }
    read_positive(j, "plant", "force_limit", p.force_limit);
  } else {
    require_keys(j, "plant",
                 {"type", "rate_hz", "mass", "gravity", "drag_coefficient",
                  "drag", "thrust_max", "omega_max"});
    read_positive(j, "plant", "rate_hz", p.rate_hz);
    read_positive(j, "plant", "mass", p.mass);
    read_positive(j, "plant", "gravity", p.gravity);
    read_double(j, "plant", "drag_coefficient", p.drag_coefficient);
    if (p.drag_coefficient < 0.0) {
      fail("plant.drag_coefficient must be non-negative");
    }
    read_bool(j, "plant", "drag", p.drag);
    if (j.contains("thrust_max")) {
      read_positive(j, "plant", "thrust_max", p.thrust_max);
    } else {
      p.thrust_max = 2.0 * p.mass * p.gravity;
    }
    read_positive(j, "plant", "omega_max", p.omega_max);
  }
}

void parse_noise(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "noise", {"kind", "scale"});
  std::string kind = noise_kind_name(cfg.noise.kind);
  read_string(j, "noise", "kind", kind);
  cfg.noise.kind = parse_noise_kind(kind);
  const int d_x = state_dim(cfg.plant.type);
  if (cfg.noise.kind == NoiseSpec::Kind::none) {
    cfg.noise.scale = Eigen::VectorXd::Zero(d_x);
    return;
  }
  if (!j.contains("scale")) {
    fail("noise.scale is required for random noise kinds");
  }
  const json& v = j.at("scale");
  if (v.is_number()) {
    cfg.noise.scale = Eigen::VectorXd::Constant(d_x, v.get<double>());
  } else {
    read_vector(j, "noise", "scale", cfg.noise.scale);
    check_sized(cfg.noise.scale, d_x, "noise.scale");
  }
  if ((cfg.noise.scale.array() < 0.0).any()) {
    fail("noise.scale must be non-negative");
  }
}

void parse_learning_rate(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "controller.learning_rate", {"mode", "value"});
  std::string mode = cfg.controller.learning_rate.mode ==
                             LearningRateSpec::Mode::fixed
                         ? "fixed"
                         : "horizon_scaled";
  read_string(j, "controller.learning_rate", "mode", mode);
  if (mode == "fixed") {
    cfg.controller.learning_rate.mode = LearningRateSpec::Mode::fixed;
  } else if (mode == "horizon_scaled") {
    cfg.controller.learning_rate.mode = LearningRateSpec::Mode::horizon_scaled;
  } else {
    fail("controller.learning_rate.mode must be fixed|horizon_scaled, got '" +
         mode + "'");
  }
  read_positive(j, "controller.learning_rate", "value",
                cfg.controller.learning_rate.value);
}

void parse_solver(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "controller.solver",
               {"max_iterations", "rel_tolerance", "reg_init", "armijo",
                "line_search_steps", "fd_step"});
  SolverOptions& s = cfg.controller.solver;
  read_int(j, "controller.solver", "max_iterations", s.max_iterations);
  if (s.max_iterations < 1) {
    fail("controller.solver.max_iterations must be at least 1");
  }
  read_positive(j, "controller.solver", "rel_tolerance", s.rel_tolerance);
  read_positive(j, "controller.solver", "reg_init", s.reg_init);
  read_positive(j, "controller.solver", "armijo", s.armijo);
  if (s.armijo >= 1.0) {
    fail("controller.solver.armijo must lie in (0, 1)");
  }
  read_int(j, "controller.solver", "line_search_steps", s.line_search_steps);
  if (s.line_search_steps < 1) {
    fail("controller.solver.line_search_steps must be at least 1");
  }
  read_positive(j, "controller.solver", "fd_step", s.fd_step);
}

void parse_controller(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "controller",
               {"kind", "feature_count", "learning_rate", "radius_bh",
                "horizon", "q_diag", "r_diag", "q_terminal_diag",
                "bandwidth_sigma", "feature_scales", "solver"});
  ControllerConfig& c = cfg.controller;
  std::string kind = controller_kind_name(c.kind);
  read_string(j, "controller", "kind", kind);
  c.kind = parse_controller_kind(kind);
  read_int(j, "controller", "feature_count", c.feature_count);
  if (c.feature_count < 1) {
    fail("controller.feature_count must be at least 1");
  }
  if (j.contains("learning_rate")) {
    parse_learning_rate(j.at("learning_rate"), cfg);
  }
  read_positive(j, "controller", "radius_bh", c.radius_bh);
  read_int(j, "controller", "horizon", c.horizon);
  if (c.horizon < 2) {
    fail("controller.horizon must be at least 2");
  }
  read_vector(j, "controller", "q_diag", c.q_diag);
  read_vector(j, "controller", "r_diag", c.r_diag);
  read_vector(j, "controller", "q_terminal_diag", c.q_terminal_diag);
  read_positive(j, "controller", "bandwidth_sigma", c.bandwidth_sigma);
  read_vector(j, "controller", "feature_scales", c.feature_scales);
  if (j.contains("solver")) {
    parse_solver(j.at("solver"), cfg);
  }

  const int d_x = state_dim(cfg.plant.type);
  const int d_u = input_dim(cfg.plant.type);
  const int d_z = lifted_dim(cfg.plant.type);
  check_sized(c.q_diag, d_x, "controller.q_diag");
  check_sized(c.r_diag, d_u, "controller.r_diag");
  if ((c.q_diag.array() < 0.0).any()) {
    fail("controller.q_diag must be non-negative");
  }
  if ((c.r_diag.array() <= 0.0).any()) {
    fail("controller.r_diag must be positive");
  }
  if (c.q_terminal_diag.size() != 0) {
    check_sized(c.q_terminal_diag, d_x, "controller.q_terminal_diag");
    if ((c.q_terminal_diag.array() < 0.0).any()) {
      fail("controller.q_terminal_diag must be non-negative");
    }
  }
  if (c.feature_scales.size() != 0) {
    check_sized(c.feature_scales, d_z, "controller.feature_scales");
    if ((c.feature_scales.array() <= 0.0).any()) {
      fail("controller.feature_scales must be positive");
    }
  }
}

void parse_reference(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "reference",
               {"kind", "setpoint_state", "setpoint_input", "center", "radius",
                "speed", "ramp_seconds"});
  ReferenceSpec& r = cfg.reference;
  std::string kind = reference_kind_name(r.kind);
  read_string(j, "reference", "kind", kind);
  r.kind = parse_reference_kind(kind);
  read_vector(j, "reference", "setpoint_state", r.setpoint_state);
  read_vector(j, "reference", "setpoint_input", r.setpoint_input);
  Eigen::VectorXd center = r.center;
  read_vector(j, "reference", "center", center);
  check_sized(center, 3, "reference.center");
  r.center = center;
  read_positive(j, "reference", "radius", r.radius);
  read_positive(j, "reference", "speed", r.max_speed);
  read_double(j, "reference", "ramp_seconds", r.ramp_seconds);
  if (r.ramp_seconds < 0.0) {
    fail("reference.ramp_seconds must be non-negative");
  }

  check_sized(r.setpoint_state, state_dim(cfg.plant.type),
              "reference.setpoint_state");
  check_sized(r.setpoint_input, input_dim(cfg.plant.type),
              "reference.setpoint_input");
  if (r.kind != ReferenceSpec::Kind::setpoint &&
      cfg.plant.type != PlantConfig::Type::quadrotor) {
    fail("reference kinds circle|lemniscate require the quadrotor plant");
  }
}

void parse_init(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "init", {"lower", "upper"});
  read_vector(j, "init", "lower", cfg.init.lower);
  read_vector(j, "init", "upper", cfg.init.upper);
  const int d_x = state_dim(cfg.plant.type);
  check_sized(cfg.init.lower, d_x, "init.lower");
  check_sized(cfg.init.upper, d_x, "init.upper");
  if ((cfg.init.lower.array() > cfg.init.upper.array()).any()) {
    fail("init.lower must not exceed init.upper");
  }
}

void parse_run(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "run",
               {"steps", "duration_seconds", "repeats", "master_seed",
                "output_dir"});
  RunConfig& r = cfg.run;
  if (j.contains("steps") && j.contains("duration_seconds")) {
    fail("run accepts either 'steps' or 'duration_seconds', not both");
  }
  if (j.contains("steps")) {
    read_int(j, "run", "steps", r.steps);
  } else if (j.contains("duration_seconds")) {
    double duration = 0.0;
    read_positive(j, "run", "duration_seconds", duration);
    r.steps = static_cast<int>(std::lround(duration * cfg.plant.rate_hz));
  }
  if (r.steps < 1) {
    fail("run.steps must be at least 1");
  }
  read_int(j, "run", "repeats", r.repeats);
  if (r.repeats < 1) {
    fail("run.repeats must be at least 1");
  }
  if (j.contains("master_seed")) {
    const json& v = j.at("master_seed");
    if (!v.is_number_integer() ||
        (v.is_number_integer() && !v.is_number_unsigned() &&
         v.get<long long>() < 0)) {
      fail("run.master_seed must be a non-negative integer");
    }
    r.master_seed = v.get<std::uint64_t>();
  }
  read_string(j, "run", "output_dir", r.output_dir);
}

void parse_sweep(const json& j, ScenarioConfig& cfg) {
  require_keys(j, "sweep", {"feature_counts", "learning_rates"});
  if (!j.contains("feature_counts") || !j.contains("learning_rates")) {
    fail("sweep requires both 'feature_counts' and 'learning_rates'");
  }
  const json& fc = j.at("feature_counts");
  const json& lr = j.at("learning_rates");
  if (!fc.is_array() || fc.empty() || !lr.is_array() || lr.empty()) {
    fail("sweep lists must be non-empty arrays");
  }
  cfg.sweep.feature_counts.clear();
  for (const auto& e : fc) {
    if (!e.is_number_integer() || e.get<int>() < 1) {
      fail("sweep.feature_counts must contain positive integers");
    }
    cfg.sweep.feature_counts.push_back(e.get<int>());
  }
  cfg.sweep.learning_rates.clear();
  for (const auto& e : lr) {
    if (!e.is_number() || !(e.get<double>() > 0.0)) {
      fail("sweep.learning_rates must contain positive numbers");
    }
    cfg.sweep.learning_rates.push_back(e.get<double>());
  }
  cfg.has_sweep = true;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  require_keys(j, "",
               {"name", "plant", "noise", "controller", "reference", "init",
                "run", "sweep"});

  PlantConfig::Type type = PlantConfig::Type::cartpole;
  if (j.contains("plant")) {
    const json& p = j.at("plant");
    if (!p.is_object()) {
      fail("'plant' must be an object");
    }
    if (p.contains("type")) {
      std::string t;
      read_string(p, "plant", "type", t);
      if (t == "cartpole") {
        type = PlantConfig::Type::cartpole;
      } else if (t == "quadrotor") {
        type = PlantConfig::Type::quadrotor;
      } else {
        fail("plant.type must be cartpole|quadrotor, got '" + t + "'");
      }
    }
  }

  ScenarioConfig cfg = defaults_for(type);
  read_string(j, "", "name", cfg.name);
  if (j.contains("plant")) parse_plant(j.at("plant"), cfg);
  if (j.contains("noise")) parse_noise(j.at("noise"), cfg);
  if (j.contains("controller")) parse_controller(j.at("controller"), cfg);
  // These fallbacks must run whether or not a controller block was given,
  // so that serialize_config always emits a re-parsable document.
  if (cfg.controller.q_terminal_diag.size() == 0) {
    cfg.controller.q_terminal_diag = cfg.controller.q_diag;
  }
  if (cfg.controller.feature_scales.size() == 0) {
    cfg.controller.feature_scales = Eigen::VectorXd::Ones(lifted_dim(type));
  }
  if (j.contains("reference")) parse_reference(j.at("reference"), cfg);
  if (type == PlantConfig::Type::quadrotor && !j.contains("init")) {
    // Default start: exactly on the reference at t = 0, at rest, level.
    ReferenceSpec r = cfg.reference;
    Eigen::VectorXd x0(10), u0(4);
    reference_trajectory(r, 0.0, x0, u0);
    cfg.init.lower = x0;
    cfg.init.upper = x0;
  }
  if (j.contains("init")) parse_init(j.at("init"), cfg);
  if (j.contains("run")) parse_run(j.at("run"), cfg);
  if (j.contains("sweep")) parse_sweep(j.at("sweep"), cfg);
  if (cfg.noise.scale.size() == 0) {
    cfg.noise.scale = Eigen::VectorXd::Zero(state_dim(type));
  }
  return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;

  json plant;
  const PlantConfig& p = cfg.plant;
  if (p.type == PlantConfig::Type::cartpole) {
    plant["type"] = "cartpole";
    plant["rate_hz"] = p.rate_hz;
    plant["cart_mass"] = p.cart_mass;
    plant["pole_mass"] = p.pole_mass;
    plant["half_length"] = p.half_length;
    plant["gravity"] = p.gravity;
    plant["nominal_scale"] = p.nominal_scale;
    plant["force_limit"] = p.force_limit;
  } else {
    plant["type"] = "quadrotor";
    plant["rate_hz"] = p.rate_hz;
    plant["mass"] = p.mass;
    plant["gravity"] = p.gravity;
    plant["drag_coefficient"] = p.drag_coefficient;
    plant["drag"] = p.drag;
    plant["thrust_max"] = p.thrust_max;
    plant["omega_max"] = p.omega_max;
  }
  j["plant"] = plant;

  json noise;
  noise["kind"] = noise_kind_name(cfg.noise.kind);
  noise["scale"] = to_array(cfg.noise.scale);
  j["noise"] = noise;

  json ctrl;
  const ControllerConfig& c = cfg.controller;
  ctrl["kind"] = controller_kind_name(c.kind);
  ctrl["feature_count"] = c.feature_count;
  ctrl["learning_rate"] = {
      {"mode", c.learning_rate.mode == LearningRateSpec::Mode::fixed
                   ? "fixed"
                   : "horizon_scaled"},
      {"value", c.learning_rate.value}};
  ctrl["radius_bh"] = c.radius_bh;
  ctrl["horizon"] = c.horizon;
  ctrl["q_diag"] = to_array(c.q_diag);
  ctrl["r_diag"] = to_array(c.r_diag);
  ctrl["q_terminal_diag"] = to_array(c.q_terminal_diag);
  ctrl["bandwidth_sigma"] = c.bandwidth_sigma;
  ctrl["feature_scales"] = to_array(c.feature_scales);
  ctrl["solver"] = {{"max_iterations", c.solver.max_iterations},
                    {"rel_tolerance", c.solver.rel_tolerance},
                    {"reg_init", c.solver.reg_init},
                    {"armijo", c.solver.armijo},
                    {"line_search_steps", c.solver.line_search_steps},
                    {"fd_step", c.solver.fd_step}};
  j["controller"] = ctrl;

  json ref;
  ref["kind"] = reference_kind_name(cfg.reference.kind);
  ref["setpoint_state"] = to_array(cfg.reference.setpoint_state);
  ref["setpoint_input"] = to_array(cfg.reference.setpoint_input);
  ref["center"] = to_array(cfg.reference.center);
  ref["radius"] = cfg.reference.radius;
  ref["speed"] = cfg.reference.max_speed;
  ref["ramp_seconds"] = cfg.reference.ramp_seconds;
  j["reference"] = ref;

  json init;
  init["lower"] = to_array(cfg.init.lower);
  init["upper"] = to_array(cfg.init.upper);
  j["init"] = init;

  json run;
  run["steps"] = cfg.run.steps;
  run["repeats"] = cfg.run.repeats;
  run["master_seed"] = cfg.run.master_seed;
  run["output_dir"] = cfg.run.output_dir;
  j["run"] = run;

  if (cfg.has_sweep) {
    json sweep;
    sweep["feature_counts"] = cfg.sweep.feature_counts;
    sweep["learning_rates"] = cfg.sweep.learning_rates;
    j["sweep"] = sweep;
  }

  return j.dump(2) + "\n";
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail("cannot open scenario file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

EpisodeConfig assemble_episode(const ScenarioConfig& cfg,
                               std::uint64_t master_seed, ControllerKind kind,
                               int feature_count, const LearningRateSpec& lr) {
  EpisodeConfig e;
  const double dt = cfg.plant.dt();
  ReferenceSpec rspec = cfg.reference;

  if (cfg.plant.type == PlantConfig::Type::cartpole) {
    CartPoleParams params;
    params.cart_mass = cfg.plant.cart_mass;
    params.pole_mass = cfg.plant.pole_mass;
    params.half_length = cfg.plant.half_length;
    params.gravity = cfg.plant.gravity;
    auto pair =
        make_cartpole(params, cfg.plant.nominal_scale, dt, cfg.plant.force_limit);
    e.truth = std::move(pair.first);
    e.nominal = std::move(pair.second);
  } else {
    QuadrotorParams params;
    params.mass = cfg.plant.mass;
    params.gravity = Eigen::Vector3d(0.0, 0.0, -cfg.plant.gravity);
    params.drag_matrix =
        cfg.plant.drag_coefficient * Eigen::Matrix3d::Identity();
    params.thrust_max = cfg.plant.thrust_max;
    params.omega_max = cfg.plant.omega_max;
    auto pair = make_quadrotor(params, cfg.plant.drag, dt);
    e.truth = std::move(pair.first);
    e.nominal = std::move(pair.second);
    rspec.hover_thrust_value = hover_thrust(params);
    e.rmse_components = {0, 1, 2};
  }

  e.noise.kind = cfg.noise.kind;
  e.noise.scale = cfg.noise.scale;
  e.controller = kind;
  e.feature_count = feature_count;
  e.learning_rate = lr;
  e.radius_bh = cfg.controller.radius_bh;
  e.bandwidth_sigma = cfg.controller.bandwidth_sigma;
  e.feature_scales = cfg.controller.feature_scales;
  e.horizon = cfg.controller.horizon;
  e.Q = cfg.controller.q_diag.asDiagonal();
  e.R = cfg.controller.r_diag.asDiagonal();
  e.Q_terminal = cfg.controller.q_terminal_diag.asDiagonal();
  e.reference = [rspec, dt](int t, Eigen::VectorXd& xr, Eigen::VectorXd& ur) {
    reference_trajectory(rspec, t * dt, xr, ur);
  };
  e.t_steps = cfg.run.steps;
  e.init = cfg.init;
  e.solver = cfg.controller.solver;
  e.master_seed = master_seed;
  return e;
}

EpisodeConfig assemble_episode(const ScenarioConfig& cfg,
                               std::uint64_t master_seed) {
  return assemble_episode(cfg, master_seed, cfg.controller.kind,
                          cfg.controller.feature_count,
                          cfg.controller.learning_rate);
}

}  // namespace ssimpc
