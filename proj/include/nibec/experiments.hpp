#pragma once
// Config-driven experiments.  Each experiment reads and validates its keys
// (strict: leftovers are config errors), runs a scenario end to end, writes
// CSV artifacts plus a verdict.csv of named checks into output_dir, and
// reports whether every check passed.

#include <string>

#include "nibec/config.hpp"

namespace nibec {

struct RunOutcome {
  bool passed = true;
  std::string output_dir;
};

// Dispatches on the `experiment` key.  Config errors surface before any
// artifact is written; failures during the run still produce a (partial)
// verdict.csv before the exception propagates.
RunOutcome run_experiment(Config& cfg);

// Stable-order catalog listing for the `catalog` subcommand.
std::string catalog_listing();

}  // namespace nibec
