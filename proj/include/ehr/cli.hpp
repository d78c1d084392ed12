#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ehr {

// Stage tags for derive_seed(global_seed, tag); every stage can also pin
// its own seed in the config.
inline constexpr uint64_t kSeedSynth = 1;
inline constexpr uint64_t kSeedEmbed = 2;
inline constexpr uint64_t kSeedCohort = 3;
inline constexpr uint64_t kSeedTrain = 4;
inline constexpr uint64_t kSeedEval = 5;
inline constexpr uint64_t kSeedRandRep = 6;

// Batch entry point used by both the binary and the tests. args excludes
// the program name. Exit codes: 0 success, 2 configuration/input error,
// 3 data error, 4 numeric failure.
int run_cli(std::vector<std::string> args);

// FNV-1a 64-bit, used to fingerprint configurations inside reports.
uint64_t fnv1a64(const std::string& text);

}  // namespace ehr
