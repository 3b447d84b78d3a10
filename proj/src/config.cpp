#include "ubkde/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ubkde/error.hpp"

namespace ubkde {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void type_error(const std::string& key, const std::string& value,
                             const char* expected) {
  throw Error(ErrorKind::config,
              "key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto t = trim(v);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    type_error(key, v, "a number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto t = trim(v);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    type_error(key, v, "a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  type_error(key, v, "a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ';' || c == ' ') {
      if (!trim(cur).empty()) parts.push_back(trim(cur));
      cur.clear();
    } else if (c != '[' && c != ']' && c != '{' && c != '}') {
      cur += c;
    }
  }
  if (!trim(cur).empty()) parts.push_back(trim(cur));
  return parts;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += num(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "model", "dim", "bump_power", "weight", "weight_scale", "beta", "kernel",
      "alpha", "mu", "L1_scale", "L1_power", "L2_scale", "L2_power", "single_bandwidth",
      "n_list", "replications", "paths", "subgrid_k", "grid_cap", "include_sample_points",
      "quad_points", "seed", "selector", "knn_rank", "override_tail_check",
      "tail_t_max", "tail_mc_samples", "delta_list", "h_sweep", "audit_points",
      "n", "h", "functional", "validation_points",
      "workers", "out", "format"};
  return keys;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "model") model = v;
  else if (key == "dim") dim = to_uint(key, v);
  else if (key == "bump_power") bump_power = static_cast<int>(to_uint(key, v));
  else if (key == "weight") weight = v;
  else if (key == "weight_scale") weight_scale = to_double(key, v);
  else if (key == "beta") beta = to_double(key, v);
  else if (key == "kernel") kernel = v;
  else if (key == "alpha") alpha = to_double(key, v);
  else if (key == "mu") mu = to_double(key, v);
  else if (key == "L1_scale") L1_scale = to_double(key, v);
  else if (key == "L1_power") L1_power = to_double(key, v);
  else if (key == "L2_scale") L2_scale = to_double(key, v);
  else if (key == "L2_power") L2_power = to_double(key, v);
  else if (key == "single_bandwidth") single_bandwidth = to_bool(key, v);
  else if (key == "n_list") {
    n_list.clear();
    for (const auto& p : split_list(v)) n_list.push_back(to_uint(key, p));
  } else if (key == "replications") replications = to_uint(key, v);
  else if (key == "paths") paths = to_uint(key, v);
  else if (key == "subgrid_k") subgrid_k = static_cast<int>(to_uint(key, v));
  else if (key == "grid_cap") grid_cap = to_uint(key, v);
  else if (key == "include_sample_points") include_sample_points = to_bool(key, v);
  else if (key == "quad_points") quad_points = to_uint(key, v);
  else if (key == "seed") seed = to_uint(key, v);
  else if (key == "selector") selector = v;
  else if (key == "knn_rank") knn_rank = to_uint(key, v);
  else if (key == "override_tail_check") override_tail_check = to_bool(key, v);
  else if (key == "tail_t_max") tail_t_max = to_double(key, v);
  else if (key == "tail_mc_samples") tail_mc_samples = to_uint(key, v);
  else if (key == "delta_list") {
    delta_list.clear();
    for (const auto& p : split_list(v)) delta_list.push_back(to_double(key, p));
  } else if (key == "h_sweep") {
    h_sweep.clear();
    for (const auto& p : split_list(v)) h_sweep.push_back(to_double(key, p));
  } else if (key == "audit_points") audit_points = to_uint(key, v);
  else if (key == "n") n = to_uint(key, v);
  else if (key == "h") {
    if (v.empty() || v == "auto") h.reset();
    else h = to_double(key, v);
  } else if (key == "functional") functional = v;
  else if (key == "validation_points") validation_points = to_uint(key, v);
  else if (key == "workers") {
    const auto w = to_uint(key, v);
    if (w == 0) throw Error(ErrorKind::config, "workers must be >= 1");
    workers = static_cast<int>(w);
  } else if (key == "out") out = v;
  else if (key == "format") {
    if (v != "csv" && v != "json" && v != "both") type_error(key, v, "csv, json or both");
    format = v;
  } else {
    throw Error(ErrorKind::config, "unknown configuration key '" + key + "'");
  }
}

std::string ExperimentConfig::echo() const {
  std::ostringstream o;
  o << "model=" << model << '\n'
    << "dim=" << dim << '\n'
    << "bump_power=" << bump_power << '\n'
    << "weight=" << weight << '\n'
    << "weight_scale=" << num(weight_scale) << '\n'
    << "beta=" << num(beta) << '\n'
    << "kernel=" << kernel << '\n'
    << "alpha=" << num(alpha) << '\n'
    << "mu=" << num(mu) << '\n'
    << "L1_scale=" << num(L1_scale) << '\n'
    << "L1_power=" << num(L1_power) << '\n'
    << "L2_scale=" << num(L2_scale) << '\n'
    << "L2_power=" << num(L2_power) << '\n'
    << "single_bandwidth=" << (single_bandwidth ? "true" : "false") << '\n'
    << "n_list=" << join(n_list) << '\n'
    << "replications=" << replications << '\n'
    << "paths=" << paths << '\n'
    << "subgrid_k=" << subgrid_k << '\n'
    << "grid_cap=" << grid_cap << '\n'
    << "include_sample_points=" << (include_sample_points ? "true" : "false") << '\n'
    << "quad_points=" << quad_points << '\n'
    << "seed=" << seed << '\n'
    << "selector=" << selector << '\n'
    << "knn_rank=" << knn_rank << '\n'
    << "override_tail_check=" << (override_tail_check ? "true" : "false") << '\n'
    << "tail_t_max=" << num(tail_t_max) << '\n'
    << "tail_mc_samples=" << tail_mc_samples << '\n'
    << "delta_list=" << join(delta_list) << '\n'
    << "h_sweep=" << join(h_sweep) << '\n'
    << "audit_points=" << audit_points << '\n'
    << "n=" << n << '\n'
    << "h=" << (h ? num(*h) : std::string("auto")) << '\n'
    << "functional=" << functional << '\n'
    << "validation_points=" << validation_points << '\n'
    << "format=" << format << '\n';
  return o.str();
}

nlohmann::json ExperimentConfig::echo_json() const {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(echo());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    j[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return j;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::config, "JSON config must be an object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_string()) {
        kv[key] = value.get<std::string>();
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& x : value) {
          if (!joined.empty()) joined += ',';
          joined += x.is_string() ? x.get<std::string>() : x.dump();
        }
        kv[key] = joined;
      } else if (value.is_null()) {
        kv[key] = "";
      } else {
        kv[key] = value.dump();
      }
    }
    return kv;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config,
                  "config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> entries;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config, "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    for (auto& kv : parse_config_text(ss.str())) entries.push_back(kv);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::usage, "override '" + o + "' is not key=value");
    }
    entries.emplace_back(trim(o.substr(0, eq)), o.substr(eq + 1));
  }
  std::vector<std::string> unknown;
  const auto& keys = config_keys();
  for (const auto& [k, v] : entries) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end() &&
        std::find(unknown.begin(), unknown.end(), k) == unknown.end()) {
      unknown.push_back(k);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown configuration key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw Error(ErrorKind::config, msg);
  }
  ExperimentConfig cfg;
  for (const auto& [k, v] : entries) cfg.set(k, v);
  return cfg;
}

}  // namespace ubkde
