#pragma once

#include <cstdint>
#include <string>

#include "nsreduce/fixed_point.hpp"
#include "nsreduce/grid.hpp"

namespace nsreduce {

/// User-facing knobs, parsed from a sectioned key-value text file
/// (UTF-8, "#" comments, "key = value" lines under "[section]"
/// headers). See README for the documented key set.
struct RunConfig {
    GridSpec grid;
    double mu = 1.0;
    double tau = 1.0;
    double theta = 0.5;  // in (0, 1)
    double alpha = 0.5;  // in (0, 1)

    double damping = 0.5;
    int max_iters = 50;
    double tol = 1e-10;
    double holder_C = 1e3;  // bounded-class Hoelder constant
    double M_override = 0.0;  // 0 = derive from the closed formula

    ForcingSpec forcing;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::string xi_csv;  // optional frequency list for symbol-check

    void validate() const;  // throws std::invalid_argument
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace nsreduce
