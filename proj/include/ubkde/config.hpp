#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ubkde {

/// Every knob of the command-line front end and the experiment harness.
/// Unknown keys are rejected; see parse_config for precedence.
struct ExperimentConfig {
  // model and weight
  std::string model = "gaussian";
  std::size_t dim = 1;
  int bump_power = 2;
  std::string weight = "inverse-power";
  double weight_scale = 1.0;
  double beta = 0.25;
  std::string kernel = "uniform";

  // bandwidth window
  double alpha = 0.7;
  double mu = 0.3;
  double L1_scale = 1.0;
  double L1_power = 0.0;
  double L2_scale = 1.0;
  double L2_power = 0.0;
  bool single_bandwidth = false;

  // experiment sizes
  std::vector<std::size_t> n_list = {512, 1024, 2048, 4096, 8192, 16384};
  std::size_t replications = 200;
  std::size_t paths = 5;
  int subgrid_k = 8;
  std::size_t grid_cap = 4096;
  bool include_sample_points = true;
  std::size_t quad_points = 8;
  std::uint64_t seed = 20240901;
  std::string selector = "geometric-midpoint";
  std::size_t knn_rank = 0;
  bool override_tail_check = false;

  // tail and regularity audits
  double tail_t_max = 1099511627776.0;  // 2^40
  std::size_t tail_mc_samples = 100000;
  std::vector<double> delta_list = {0.05, 0.1, 0.2};
  std::vector<double> h_sweep = {0.25, 0.125, 0.0625, 0.03125, 0.015625,
                                 0.0078125, 0.00390625, 0.001953125};
  std::size_t audit_points = 201;

  // single-run commands
  std::size_t n = 1024;
  std::optional<double> h;
  std::string functional = "clamp:0.2";
  std::size_t validation_points = 64;

  // run control, not part of the experiment identity
  int workers = 1;
  std::string out = "results";
  std::string format = "both";

  /// Sets one key from its textual value. Throws config errors on unknown
  /// keys or values of the wrong type.
  void set(const std::string& key, const std::string& value);

  /// key=value lines for every key except the run-control ones (workers,
  /// out), in a fixed order with round-trip number formatting.
  std::string echo() const;
  nlohmann::json echo_json() const;
};

/// All accepted keys, in echo order.
const std::vector<std::string>& config_keys();

/// Reads `path` (key=value lines or a JSON object; empty path means
/// defaults only) and then applies `overrides` ("key=value" strings).
/// Unknown keys in either place raise one error naming all of them.
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides);

/// key=value text or JSON text, detected by the first non-blank character.
std::map<std::string, std::string> parse_config_text(const std::string& text);

}  // namespace ubkde
