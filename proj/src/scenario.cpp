// Copyright 2026 The RMPC Evasive Steering Authors
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

#include "rmpc/scenario.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace rmpc::sim
{
namespace
{

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> numbers(const std::string & key, const std::string & value)
{
  std::vector<double> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, tok));
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> exactly(const std::string & key, const std::string & value, std::size_t n)
{
  auto v = numbers(key, value);
  if (v.size() != n) {
    throw ConfigError(fmt::format("{}: expected {} values, got {}", key, n, v.size()));
  }
  return v;
}

double scalar(const std::string & key, const std::string & value)
{
  return exactly(key, value, 1)[0];
}

bool flag(const std::string & key, const std::string & value)
{
  if (value == "on" || value == "true" || value == "1") {
    return true;
  }
  if (value == "off" || value == "false" || value == "0") {
    return false;
  }
  throw ConfigError(fmt::format("{}: expected on/off, got '{}'", key, value));
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const std::string & key, const std::string & value)
{
  const auto v = exactly(key, value, N);
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    out(i) = v[i];
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig &, const std::string &, const std::string &)>;

void add_weight_keys(std::map<std::string, Setter> & keys, const std::string & set)
{
  auto pick = [set](ScenarioConfig & c) -> control::QpWeights & {
    return set == "avoidance" ? c.controller.avoidance : c.controller.tracking;
  };
  const std::string p = "weights." + set + ".";
  keys[p + "Q"] = [pick](auto & c, auto & k, auto & v) { pick(c).Q = vec<5>(k, v); };
  keys[p + "R"] = [pick](auto & c, auto & k, auto & v) { pick(c).R = scalar(k, v); };
  keys[p + "S"] = [pick](auto & c, auto & k, auto & v) { pick(c).S = scalar(k, v); };
  keys[p + "lambda_coll"] = [pick](auto & c, auto & k, auto & v) {
    pick(c).lambda_coll = scalar(k, v);
  };
  keys[p + "lambda_stab"] = [pick](auto & c, auto & k, auto & v) {
    pick(c).lambda_stab = vec<4>(k, v);
  };
  keys[p + "e_y_scale"] = [pick](auto & c, auto & k, auto & v) {
    pick(c).e_y_scale = scalar(k, v);
  };
}

const std::map<std::string, Setter> & setters()
{
  static const std::map<std::string, Setter> keys = [] {
    std::map<std::string, Setter> k;
    k["name"] = [](auto & c, auto &, auto & v) { c.name = v; };
    k["duration"] = [](auto & c, auto & key, auto & v) { c.duration = scalar(key, v); };
    k["speed"] = [](auto & c, auto & key, auto & v) { c.speed = scalar(key, v); };
    k["mu_controller"] = [](auto & c, auto & key, auto & v) {
      c.controller.params.friction = scalar(key, v);
    };
    k["mu_plant"] = [](auto & c, auto & key, auto & v) { c.mu_plant = scalar(key, v); };
    k["mode"] = [](auto & c, auto & key, auto & v) {
      if (v == "rmpc") {
        c.controller.mode = control::Mode::kRmpc;
      } else if (v == "dmpc") {
        c.controller.mode = control::Mode::kDmpc;
      } else {
        throw ConfigError(fmt::format("{}: expected rmpc or dmpc, got '{}'", key, v));
      }
    };
    k["controller_dt"] = [](auto & c, auto & key, auto & v) { c.controller_dt = scalar(key, v); };
    k["substep"] = [](auto & c, auto & key, auto & v) { c.substep = scalar(key, v); };
    k["seed"] = [](auto & c, auto & key, auto & v) {
      const double s = scalar(key, v);
      if (s < 0.0 || s != std::floor(s)) {
        throw ConfigError("seed must be a nonnegative integer");
      }
      c.seed = static_cast<std::uint64_t>(s);
    };
    k["noise"] = [](auto & c, auto & key, auto & v) { c.noise = flag(key, v); };
    k["noise_bounds"] = [](auto & c, auto & key, auto & v) { c.noise_bounds = vec<5>(key, v); };
    k["timing"] = [](auto & c, auto & key, auto & v) { c.timing = flag(key, v); };
    k["path.segment"] = [](auto & c, auto & key, auto & v) {
      const auto n = exactly(key, v, 2);
      c.segments.push_back({n[0], n[1]});
    };
    k["road"] = [](auto & c, auto & key, auto & v) {
      const auto n = exactly(key, v, 3);
      c.road.push_back({n[0], n[1], n[2]});
    };
    k["obstacle"] = [](auto & c, auto & key, auto & v) {
      const auto n = numbers(key, v);
      if (n.size() != 4 && n.size() != 5) {
        throw ConfigError("obstacle: expected s_start s_end e_y_min e_y_max [appear_time]");
      }
      tube::Obstacle o{n[0], n[1], n[2], n[3], n.size() == 5 ? n[4] : 0.0, false};
      if (!(o.s_start < o.s_end) || !(o.e_y_min < o.e_y_max)) {
        throw ConfigError("obstacle: extents must be increasing");
      }
      c.obstacles.push_back(o);
    };
    k["initial.e_y"] = [](auto & c, auto & key, auto & v) { c.initial.e_y = scalar(key, v); };
    k["initial.e_phi"] = [](auto & c, auto & key, auto & v) { c.initial.e_phi = scalar(key, v); };
    k["initial.s_d"] = [](auto & c, auto & key, auto & v) { c.initial.s_d = scalar(key, v); };
    k["initial.y_dot"] = [](auto & c, auto & key, auto & v) { c.initial.y_dot = scalar(key, v); };
    k["initial.phi_dot"] = [](auto & c, auto & key, auto & v) {
      c.initial.phi_dot = scalar(key, v);
    };
    k["initial.steady_state"] = [](auto & c, auto & key, auto & v) {
      c.initial.steady_state = flag(key, v);
    };
    k["w"] = [](auto & c, auto & key, auto & v) { c.controller.w = vec<5>(key, v); };
    k["grid.n_short"] = [](auto & c, auto & key, auto & v) {
      c.controller.grid.n_short = static_cast<int>(scalar(key, v));
    };
    k["grid.n_long"] = [](auto & c, auto & key, auto & v) {
      c.controller.grid.n_long = static_cast<int>(scalar(key, v));
    };
    k["grid.n_control"] = [](auto & c, auto & key, auto & v) {
      c.controller.grid.n_control = static_cast<int>(scalar(key, v));
    };
    k["grid.dt_short"] = [](auto & c, auto & key, auto & v) {
      c.controller.grid.dt_short = scalar(key, v);
    };
    k["grid.dt_long"] = [](auto & c, auto & key, auto & v) {
      c.controller.grid.dt_long = scalar(key, v);
    };
    auto vp = [](double vehicle::VehicleParams::*field) {
      return Setter([field](auto & c, auto & key, auto & v) {
        c.controller.params.*field = scalar(key, v);
      });
    };
    k["vehicle.mass"] = vp(&vehicle::VehicleParams::mass);
    k["vehicle.yaw_inertia"] = vp(&vehicle::VehicleParams::yaw_inertia);
    k["vehicle.cg_to_front"] = vp(&vehicle::VehicleParams::cg_to_front);
    k["vehicle.cg_to_rear"] = vp(&vehicle::VehicleParams::cg_to_rear);
    k["vehicle.width"] = vp(&vehicle::VehicleParams::width);
    k["vehicle.stiffness_front"] = vp(&vehicle::VehicleParams::stiffness_front);
    k["vehicle.stiffness_rear"] = vp(&vehicle::VehicleParams::stiffness_rear);
    k["vehicle.normal_load_front"] = vp(&vehicle::VehicleParams::normal_load_front);
    k["vehicle.normal_load_rear"] = vp(&vehicle::VehicleParams::normal_load_rear);
    add_weight_keys(k, "avoidance");
    add_weight_keys(k, "tracking");
    k["controller.steering_limit_deg"] = [](auto & c, auto & key, auto & v) {
      c.controller.steering_limit = scalar(key, v) * std::numbers::pi / 180.0;
    };
    k["controller.yaw_bound"] = [](auto & c, auto & key, auto & v) {
      if (v == "neutral") {
        c.controller.yaw_bound = stability::YawBound::kNeutralSteer;
      } else if (v == "axle") {
        c.controller.yaw_bound = stability::YawBound::kAxleLimited;
      } else {
        throw ConfigError(fmt::format("{}: expected neutral or axle, got '{}'", key, v));
      }
    };
    k["controller.policy"] = [](auto & c, auto & key, auto & v) {
      if (v == "serial") {
        c.controller.policy = ExecutionPolicy::kSerial;
      } else if (v == "parallel") {
        c.controller.policy = ExecutionPolicy::kParallel;
      } else {
        throw ConfigError(fmt::format("{}: expected serial or parallel, got '{}'", key, v));
      }
    };
    k["tightening.backend"] = [](auto & c, auto & key, auto & v) {
      if (v == "closed_form") {
        c.controller.tightening.backend = tube::TighteningBackend::kClosedForm;
      } else if (v == "lp") {
        c.controller.tightening.backend = tube::TighteningBackend::kLinearProgram;
      } else {
        throw ConfigError(fmt::format("{}: expected closed_form or lp, got '{}'", key, v));
      }
    };
    k["tightening.tail"] = [](auto & c, auto & key, auto & v) {
      if (v == "frozen") {
        c.controller.tightening.tail = tube::TailMode::kFrozen;
      } else if (v == "full") {
        c.controller.tightening.tail = tube::TailMode::kFull;
      } else {
        throw ConfigError(fmt::format("{}: expected frozen or full, got '{}'", key, v));
      }
    };
    k["tightening.initial_error"] = [](auto & c, auto & key, auto & v) {
      c.controller.tightening.initial_error = vec<5>(key, v);
    };
    return k;
  }();
  return keys;
}

}  // namespace

void ScenarioConfig::validate() const
{
  if (!(duration > 0.0) || !(speed > 0.0) || !(mu_plant > 0.0)) {
    throw ConfigError("duration, speed and mu_plant must be positive");
  }
  if (!(controller_dt > 0.0) || !(substep > 0.0)) {
    throw ConfigError("controller_dt and substep must be positive");
  }
  const double ratio = controller_dt / substep;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ConfigError("substep must divide controller_dt");
  }
  if (segments.empty()) {
    throw ConfigError("scenario needs at least one path.segment");
  }
  for (const auto & seg : segments) {
    if (!(seg.length > 0.0)) {
      throw ConfigError("path segments need positive length");
    }
    if (seg.curvature != 0.0 && seg.length * std::abs(seg.curvature) > 0.9 * std::numbers::pi) {
      throw ConfigError("arc segments must turn less than 0.9 pi");
    }
  }
  if ((noise_bounds.array() < 0.0).any()) {
    throw ConfigError("noise_bounds must be nonnegative");
  }
  try {
    controller.validate();
    make_road();
  } catch (const ConfigError &) {
    throw;
  } catch (const InvalidArgument & e) {
    throw ConfigError(e.what());
  }
}

path::ReferencePath ScenarioConfig::make_path() const { return path::ReferencePath(segments); }

path::RoadBounds ScenarioConfig::make_road() const { return path::RoadBounds(road); }

ScenarioConfig parse_scenario(const std::string & text)
{
  ScenarioConfig c;
  c.segments.clear();
  c.road.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto & keys = setters();
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
    try {
      it->second(c, key, value);
    } catch (const ConfigError & e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (c.segments.empty()) {
    c.segments.push_back({1000.0, 0.0});
  }
  if (c.road.empty()) {
    c.road.push_back({0.0, -1.85, 5.55});
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path & file)
{
  std::ifstream in(file);
  if (!in) {
    throw ConfigError(fmt::format("cannot open scenario file '{}'", file.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace rmpc::sim
