#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsreduce/config.hpp"

namespace nsreduce {

struct StageResult {
    std::string name;
    bool ok = true;
    std::vector<std::string> artifacts;
    std::vector<std::string> failures;  // assertable-check messages
};

StageResult stage_symbol_check(const RunConfig& cfg, const std::string& outdir);
StageResult stage_kernel_check(const RunConfig& cfg, const std::string& outdir);
StageResult stage_bounds(const RunConfig& cfg, const std::string& outdir);
StageResult stage_run(const RunConfig& cfg, const std::string& outdir);
StageResult stage_verify(const RunConfig& cfg, const std::string& outdir);

struct PipelineOptions {
    std::vector<std::string> stages;  // empty = all five, canonical order
    std::string out_override;         // overrides config + NSREDUCE_OUT
    int threads = 1;
    std::optional<std::uint64_t> seed_override;
};

/// Exit status: 0 all assertable checks pass, 1 config error,
/// 2 assertable-check failure, 3 I/O failure. Writes a manifest of all
/// artifacts with content hashes.
int run_pipeline(const std::string& config_path, const PipelineOptions& opt);

/// Deterministic helper generators shared by stages and tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi);
    double normal();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t fnv1a64(const std::string& path);  // content hash of a file

}  // namespace nsreduce
