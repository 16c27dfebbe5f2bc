#include "exnls/config.h"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace exnls {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  require(end && *end == '\0' && !v.empty(), "config: bad number for " + key);
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  long long x = std::strtoll(v.c_str(), &end, 10);
  require(end && *end == '\0' && !v.empty(), "config: bad integer for " + key);
  return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  require(!out.empty(), "config: empty list for " + key);
  return out;
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
  auto xs = to_list(key, v);
  require(xs.size() <= 3, "config: at most 3 components for " + key);
  Vec3 out{};
  for (size_t i = 0; i < xs.size(); ++i) out[i] = xs[i];
  return out;
}

void apply_key(ExperimentConfig& c, const std::string& key,
               const std::string& val) {
  if (key == "d") c.d = static_cast<int>(to_int(key, val));
  else if (key == "p") c.p = to_double(key, val);
  else if (key == "obstacle.kind") c.obstacle.kind = val;
  else if (key == "obstacle.params") c.obstacle.params = to_list(key, val);
  else if (key == "obstacle.center") c.obstacle.center = to_vec3(key, val);
  else if (key == "grid.R_out") c.grid.R_out = to_double(key, val);
  else if (key == "grid.h") c.grid.h = to_double(key, val);
  else if (key == "time.dt") c.time.dt = to_double(key, val);
  else if (key == "time.t_end") c.time.t_end = to_double(key, val);
  else if (key == "time.record_every") c.time.record_every = to_double(key, val);
  else if (key == "time.dt_min") c.time.dt_min = to_double(key, val);
  else if (key == "time.grad_factor") c.time.grad_factor = to_double(key, val);
  else if (key == "initial.kind") c.initial.kind = val;
  else if (key == "initial.amplitude") c.initial.amplitude = to_double(key, val);
  else if (key == "initial.center") c.initial.center = to_vec3(key, val);
  else if (key == "initial.width") c.initial.width = to_double(key, val);
  else if (key == "initial.ring_radius") c.initial.ring_radius = to_double(key, val);
  else if (key == "initial.winding") c.initial.winding = static_cast<int>(to_int(key, val));
  else if (key == "initial.wavevector") c.initial.wavevector = to_vec3(key, val);
  else if (key == "initial.antisym") {
    auto xs = to_list(key, val);
    require(xs.size() <= 3, "config: at most 3 flags for " + key);
    c.initial.antisym = {};
    for (size_t i = 0; i < xs.size(); ++i)
      c.initial.antisym[i] = xs[i] != 0 ? 1 : 0;
  }
  else if (key == "initial.cutoff_margin") c.initial.cutoff_margin = to_double(key, val);
  else if (key == "initial.T") c.initial.T = to_double(key, val);
  else if (key == "initial.psi_r0") c.initial.psi_r0 = to_double(key, val);
  else if (key == "initial.psi_r1") c.initial.psi_r1 = to_double(key, val);
  else if (key == "ground_state.tol") c.ground_state_tol = to_double(key, val);
  else if (key == "variance.C") c.variance_C = val == "AUTO" ? 0 : to_double(key, val);
  else if (key == "output.dir") c.output_dir = val;
  else if (key == "seed") c.seed = static_cast<unsigned long long>(to_int(key, val));
  else throw InputError("config: unknown key " + key);
}

ExperimentConfig parse_flat(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    require(eq != std::string::npos,
            "config: line " + std::to_string(lineno) + " has no '='");
    apply_key(c, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return c;
}

std::string join_list(const double* xs, size_t n) {
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    if (i) out += ",";
    out += format_g17(xs[i]);
  }
  return out;
}

// Flatten nested JSON into the same dotted keys the flat parser accepts.
void apply_json(ExperimentConfig& c, const json& j, const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const json& v = it.value();
    if (v.is_object()) {
      apply_json(c, v, key);
    } else if (v.is_array()) {
      std::string list;
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) list += ",";
        list += format_g17(v[i].get<double>());
      }
      apply_key(c, key, list);
    } else if (v.is_string()) {
      apply_key(c, key, v.get<std::string>());
    } else if (v.is_boolean()) {
      apply_key(c, key, v.get<bool>() ? "1" : "0");
    } else {
      apply_key(c, key, format_g17(v.get<double>()));
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::string s = trim(text);
  if (!s.empty() && s[0] == '{') {
    json j = json::parse(s);
    ExperimentConfig c;
    apply_json(c, j, "");
    return c;
  }
  return parse_flat(text);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "d = " << c.d << "\n";
  o << "p = " << format_g17(c.p) << "\n";
  o << "obstacle.kind = " << c.obstacle.kind << "\n";
  o << "obstacle.params = "
    << join_list(c.obstacle.params.data(), c.obstacle.params.size()) << "\n";
  o << "obstacle.center = " << join_list(c.obstacle.center.data(), 3) << "\n";
  o << "grid.R_out = " << format_g17(c.grid.R_out) << "\n";
  o << "grid.h = " << format_g17(c.grid.h) << "\n";
  o << "time.dt = " << format_g17(c.time.dt) << "\n";
  o << "time.t_end = " << format_g17(c.time.t_end) << "\n";
  o << "time.record_every = " << format_g17(c.time.record_every) << "\n";
  o << "time.dt_min = " << format_g17(c.time.dt_min) << "\n";
  o << "time.grad_factor = " << format_g17(c.time.grad_factor) << "\n";
  o << "initial.kind = " << c.initial.kind << "\n";
  o << "initial.amplitude = " << format_g17(c.initial.amplitude) << "\n";
  o << "initial.center = " << join_list(c.initial.center.data(), 3) << "\n";
  o << "initial.width = " << format_g17(c.initial.width) << "\n";
  o << "initial.ring_radius = " << format_g17(c.initial.ring_radius) << "\n";
  o << "initial.winding = " << c.initial.winding << "\n";
  o << "initial.wavevector = " << join_list(c.initial.wavevector.data(), 3)
    << "\n";
  o << "initial.antisym = " << c.initial.antisym[0] << ","
    << c.initial.antisym[1] << "," << c.initial.antisym[2] << "\n";
  o << "initial.cutoff_margin = " << format_g17(c.initial.cutoff_margin) << "\n";
  o << "initial.T = " << format_g17(c.initial.T) << "\n";
  o << "initial.psi_r0 = " << format_g17(c.initial.psi_r0) << "\n";
  o << "initial.psi_r1 = " << format_g17(c.initial.psi_r1) << "\n";
  o << "ground_state.tol = " << format_g17(c.ground_state_tol) << "\n";
  o << "variance.C = "
    << (c.variance_C == 0 ? std::string("AUTO") : format_g17(c.variance_C))
    << "\n";
  o << "output.dir = " << c.output_dir << "\n";
  o << "seed = " << c.seed << "\n";
  return o.str();
}

void validate_config(const ExperimentConfig& c) {
  require(c.d == 2 || c.d == 3, "config: d must be 2 or 3");
  require(c.p > 1, "config: p must exceed 1");
  require(c.obstacle.kind == "ball" || c.obstacle.kind == "ellipsoid",
          "config: obstacle.kind must be ball or ellipsoid");
  require(!c.obstacle.params.empty(), "config: obstacle.params empty");
  for (double x : c.obstacle.params)
    require(x > 0, "config: obstacle.params must be positive");
  if (c.obstacle.kind == "ellipsoid")
    require(norm3(c.obstacle.center, c.d) == 0,
            "config: ellipsoid obstacles are origin-centered");
  require(c.grid.R_out > 0, "config: grid.R_out must be positive");
  require(c.grid.h > 0, "config: grid.h must be positive");
  require(c.time.dt > 0, "config: time.dt must be positive");
  require(c.time.t_end > 0, "config: time.t_end must be positive");
  require(c.time.record_every > 0, "config: time.record_every must be positive");
  require(c.time.dt_min > 0, "config: time.dt_min must be positive");
  require(c.time.grad_factor > 1, "config: time.grad_factor must exceed 1");
  require(c.initial.kind == "gaussian-bump" || c.initial.kind == "ring-bump" ||
              c.initial.kind == "pseudoconformal",
          "config: unknown initial.kind " + c.initial.kind);
  require(std::isfinite(c.initial.amplitude), "config: initial.amplitude");
  require(c.initial.width > 0, "config: initial.width must be positive");
  require(c.initial.cutoff_margin > 0,
          "config: initial.cutoff_margin must be positive");
  if (c.initial.kind == "ring-bump")
    require(c.initial.ring_radius > 0,
            "config: initial.ring_radius must be positive");
  if (c.initial.kind == "pseudoconformal") {
    require(c.initial.T > 0, "config: initial.T must be positive");
    require(c.initial.psi_r0 >= 0 && (c.initial.psi_r1 == 0 ||
                                      c.initial.psi_r1 > c.initial.psi_r0),
            "config: pseudoconformal cutoff radii must be ordered");
  }
  require(c.ground_state_tol >= 0, "config: ground_state.tol must be >= 0");
  require(c.variance_C >= 0, "config: variance.C must be AUTO or positive");
  require(!c.output_dir.empty(), "config: output.dir empty");
}

std::string resolved_output_dir(const ExperimentConfig& c) {
  const char* env = std::getenv("EXNLS_OUTPUT_DIR");
  return env && *env ? std::string(env) : c.output_dir;
}

}  // namespace exnls
