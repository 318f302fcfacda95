#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "spec_file.hpp"

namespace nilcube::cli {

struct Inputs {
  std::string spec_path, spec_text;
  std::string cocycle_path, cocycle_text;  // solve only
};

struct Options {
  std::uint64_t seed = 1;
  std::string method = "both";  // solve: averaging, linear or both
  std::string k_range;          // translations: "1-3", "1,2" or "2"
  std::string map;              // lift: factor images, or "identity"
  int k = 1;                    // lift level
  bool timings = false;
};

struct Outcome {
  nlohmann::json report;
  int exit_code = 0;
};

Outcome run_check(const SpaceSpec& spec, const Inputs& in, const Options& opt);
Outcome run_translations(const SpaceSpec& spec, const Inputs& in, const Options& opt);
Outcome run_solve(const SpaceSpec& spec, const Inputs& in, const Options& opt);
Outcome run_lift(const SpaceSpec& spec, const Inputs& in, const Options& opt);

}  // namespace nilcube::cli
