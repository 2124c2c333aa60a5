#pragma once

#include <cstdint>
#include <string>

#include "rgbt/bench.hpp"
#include "rgbt/mfnet.hpp"
#include "rgbt/pipeline.hpp"

namespace rgbt {

/// Everything a command can tune. Keys are hierarchical ("cf.padding").
struct Config {
  TrackerConfig tracker;
  fusion::MfNetConfig mfnet;
  fusion::TrainSchedule train;
  bench::OpeOptions ope;
  std::string checkpoint;  // MFNet weights; empty = freshly initialised net
  double pr_threshold = 20.0;
  int workers = 0;         // 0 = available cores

  friend bool operator==(const Config&, const Config&) = default;
};

/// Parses TOML-style text: [section] headers, key = value lines, # comments.
/// Values: numbers, true/false, "strings", [int, ...]. Unknown keys and
/// values violating module preconditions raise ConfigError.
Config parse_config(const std::string& text, const Config& base = {});
Config load_config(const std::string& path, const Config& base = {});

/// Every key with its current value, in a form parse_config reads back.
std::string print_config(const Config& cfg);

/// Module precondition checks; throws ConfigError.
void validate(const Config& cfg);

}  // namespace rgbt
