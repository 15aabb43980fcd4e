#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace singspec {

struct CliInvocation {
    std::string subcommand; // spectrum | simulate | hermite | measure |
                            // limit-cov | diagrams | contraction | verify
    std::string config_path;
    std::string output_dir; // empty: $SINGSPEC_OUT or "."
    std::vector<std::string> overrides; // dotted.path=value
    std::string format = "json";        // json | csv (applies to primary artifacts)
    std::string order;                  // diagrams shortcut, e.g. "2,2,2,2"
    bool has_seed_override = false;
    std::uint64_t seed_override = 0;
};

/// Runs the named pipeline and writes its artifacts. Returns the process exit
/// code: 0 success, 1 usage/config error, 2 assumption violation, 3 numerical
/// failure. Never throws.
int dispatch(const CliInvocation& invocation);

} // namespace singspec
